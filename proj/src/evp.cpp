#include "mfs/evp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mfs/gdfp.hpp"
#include "mfs/random.hpp"

namespace mfs {

AtomicMetaMeasure::AtomicMetaMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("AtomicMetaMeasure: need at least one atom");
  const auto& space = atoms_.front().measure.space();
  for (const auto& a : atoms_) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw std::invalid_argument("AtomicMetaMeasure: atom weights must be positive and finite");
    }
    const auto& other = a.measure.space();
    const bool same = other == space || (std::ranges::equal(other->alpha(), space->alpha()) &&
                                         other->points() == space->points());
    if (!same) {
      throw std::invalid_argument("AtomicMetaMeasure: atoms live on different state spaces");
    }
  }
}

AtomicMetaMeasure AtomicMetaMeasure::dirac(const DiscreteMeasure& nu) {
  return AtomicMetaMeasure({{1.0, nu}});
}

double AtomicMetaMeasure::total_mass() const {
  double t = 0.0;
  for (const auto& a : atoms_) t += a.weight;
  return t;
}

AtomicMetaMeasure AtomicMetaMeasure::scaled(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("AtomicMetaMeasure::scaled: t must be positive");
  auto atoms = atoms_;
  for (auto& a : atoms) a.weight *= t;
  return AtomicMetaMeasure(std::move(atoms));
}

double log_cavity_factor(const DiscreteMeasure& nu, const Interaction& phi) {
  auto field = one_body_field(nu, phi);
  for (auto& f : field) f = -f;
  const double v = log_mean_exp(field, phi.space()->alpha());
  if (v == -kInf) throw std::domain_error("g_tilde: every site has infinite field");
  return v;
}

double g_tilde(const DiscreteMeasure& nu, const Interaction& phi) {
  const double energy = Phi(nu, phi);
  if (std::isinf(energy)) return kInf;
  const double n = static_cast<double>(phi.bodies());
  return (n - 1.0) * energy + log_cavity_factor(nu, phi);
}

std::vector<double> grad_g_tilde(const DiscreteMeasure& nu, const Interaction& phi) {
  if (!phi.finite()) throw std::domain_error("grad_g_tilde: table has +inf entries");
  if (!nu.interior()) throw std::domain_error("grad_g_tilde: nu must lie in the simplex interior");
  const std::size_t m = phi.sites();
  const double n = static_cast<double>(phi.bodies());
  const auto kernel = pair_kernel(phi, nu.weights());
  const auto field = one_body_field(nu, phi);

  // One-body Gibbs weights proportional to alpha_x exp(-field_x).
  std::vector<double> gibbs(m);
  const double shift = *std::min_element(field.begin(), field.end());
  double z = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    gibbs[x] = phi.space()->alpha(x) * std::exp(-(field[x] - shift));
    z += gibbs[x];
  }
  for (auto& w : gibbs) w /= z;

  std::vector<double> grad(m);
  for (std::size_t j = 0; j < m; ++j) {
    double cross = 0.0;
    for (std::size_t x = 0; x < m; ++x) cross += gibbs[x] * kernel[j * m + x];
    grad[j] = (n - 1.0) * field[j] - n * (n - 1.0) * cross;
  }
  return grad;
}

std::vector<double> project_zero_sum(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x -= mean;
  return out;
}

namespace {

double log_sum_exp(std::span<const double> terms) {
  double shift = -kInf;
  for (double t : terms) shift = std::max(shift, t);
  if (shift == -kInf) return -kInf;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - shift);
  return shift + std::log(sum);
}

}  // namespace

CavityValues cavity_G(const AtomicMetaMeasure& rho, std::size_t n_bodies, const Interaction& phi) {
  if (!phi.finite()) throw std::domain_error("cavity_G: table has +inf entries");
  if (n_bodies == 0) throw std::invalid_argument("cavity_G: N must be positive");
  const double nn = static_cast<double>(n_bodies);
  const double n = static_cast<double>(phi.bodies());
  std::vector<double> t1, t2;
  for (const auto& atom : rho.atoms()) {
    const double lw = std::log(atom.weight);
    t1.push_back(lw + nn * log_cavity_factor(atom.measure, phi));
    t2.push_back(lw - nn * (n - 1.0) * Phi(atom.measure, phi));
  }
  CavityValues out;
  out.g1 = log_sum_exp(t1) / nn;
  out.g2 = log_sum_exp(t2) / nn;
  out.g = out.g1 - out.g2;
  return out;
}

CavityValues pushforward_cavity(std::size_t m_bodies, std::size_t n_bodies, const Interaction& phi,
                                std::uint64_t occupancy_cap) {
  if (!phi.finite()) throw std::domain_error("pushforward_cavity: table has +inf entries");
  if (m_bodies == 0 || n_bodies == 0) throw std::invalid_argument("pushforward_cavity: M, N must be positive");
  const std::size_t sites = phi.sites();
  const auto count = occupancy_count(sites, m_bodies);
  if (count > occupancy_cap) throw CapExceeded("pushforward_cavity: occupancy cap exceeded");

  const double mm = static_cast<double>(m_bodies);
  const double nn = static_cast<double>(n_bodies);
  const double n = static_cast<double>(phi.bodies());
  const double tilt = mm * mm / (mm + nn);
  std::vector<double> t1, t2;
  t1.reserve(count);
  t2.reserve(count);
  for_each_occupancy(sites, static_cast<std::uint32_t>(m_bodies), [&](std::span<const std::uint32_t> k) {
    const OccupancyVector occ(std::vector<std::uint32_t>(k.begin(), k.end()));
    const auto mu = empirical_measure(phi.space(), occ);
    const double energy = Phi(mu, phi);
    double base = log_multinomial(k) - tilt * energy;
    for (std::size_t i = 0; i < sites; ++i) {
      if (k[i] > 0) base += k[i] * std::log(phi.space()->alpha(i));
    }
    t1.push_back(base + nn * log_cavity_factor(mu, phi));
    t2.push_back(base - nn * (n - 1.0) * energy);
  });
  CavityValues out;
  out.g1 = log_sum_exp(t1) / nn;
  out.g2 = log_sum_exp(t2) / nn;
  out.g = out.g1 - out.g2;
  return out;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<double> project_capped(std::span<const double> y, std::span<const double> caps) {
  std::vector<double> x(y.begin(), y.end());
  if (caps.empty()) return x;
  double cap_total = 0.0;
  for (double c : caps) cap_total += c;
  if (cap_total < 1.0 - 1e-12) throw std::invalid_argument("project_capped: caps admit no probability measure");

  std::vector<bool> capped(x.size(), false);
  while (true) {
    double fixed = 0.0, free = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (capped[i]) fixed += caps[i];
      else free += y[i];
    }
    if (free <= 0.0) {
      double room = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) if (!capped[i]) room += caps[i];
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = capped[i] ? caps[i] : caps[i] * (1.0 - fixed) / room;
      return x;
    }
    const double scale = (1.0 - fixed) / free;
    bool changed = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!capped[i] && y[i] * scale > caps[i]) {
        capped[i] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = capped[i] ? caps[i] : y[i] * scale;
      return x;
    }
  }
}

double simplex_stationarity(std::span<const double> x, std::span<const double> grad,
                            std::span<const double> caps) {
  auto at_cap = [&](std::size_t i) { return !caps.empty() && x[i] >= caps[i] * (1.0 - 1e-9); };
  double mass = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (at_cap(i)) continue;
    mass += x[i];
    mean += x[i] * grad[i];
  }
  if (mass <= 0.0) return 0.0;
  mean /= mass;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = grad[i] - mean;
    // A capped coordinate is stationary when it would rather grow.
    if (at_cap(i) && d <= 0.0) continue;
    s += x[i] * d * d;
  }
  return std::sqrt(s);
}

namespace {

bool feasible(std::span<const double> x, std::span<const double> caps) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) return false;
    if (!caps.empty() && x[i] > caps[i]) return false;
  }
  return true;
}

// Looks for negative curvature along pair directions e_i - e_j and, when
// found, moves to the lower side so descent can leave the saddle.
bool escape_saddle(const Objective& f, std::vector<double>& x, double fx,
                   std::span<const double> caps) {
  const std::size_t m = x.size();
  double best = fx;
  std::vector<double> best_point;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double h = std::min(1e-3, 0.5 * std::min(x[i], x[j]));
      if (h < 1e-12) continue;
      auto xp = x, xm = x;
      xp[i] += h;
      xp[j] -= h;
      xm[i] -= h;
      xm[j] += h;
      if (!feasible(xp, caps) || !feasible(xm, caps)) continue;
      const double fp = f(xp), fm = f(xm);
      if (fp + fm - 2.0 * fx >= -1e-9 * (1.0 + std::abs(fx))) continue;
      if (fp < best) {
        best = fp;
        best_point = xp;
      }
      if (fm < best) {
        best = fm;
        best_point = xm;
      }
    }
  }
  if (best_point.empty()) return false;
  x = std::move(best_point);
  return true;
}

}  // namespace

MirrorResult mirror_descent(const Objective& f, const Gradient& grad, std::vector<double> start,
                            std::span<const double> caps, const MirrorOptions& options) {
  if (!caps.empty() && caps.size() != start.size()) throw std::invalid_argument("mirror_descent: caps size");
  MirrorResult out;
  std::vector<double> x = project_capped(start, caps);
  if (!feasible(x, caps)) throw std::invalid_argument("mirror_descent: start must be interior");
  double fx = f(x);
  if (!std::isfinite(fx)) throw std::domain_error("mirror_descent: objective not finite at start");
  auto gx = grad(x);
  double step = options.initial_step;
  std::size_t escapes = 0;
  const std::size_t m = x.size();
  std::vector<double> y(m);

  for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
    out.stationarity = simplex_stationarity(x, gx, caps);
    out.trace.push_back(out.stationarity);
    if (out.stationarity <= options.tol) {
      if (escapes < options.max_escapes && escape_saddle(f, x, fx, caps)) {
        ++escapes;
        fx = f(x);
        gx = grad(x);
        step = options.initial_step;
        continue;
      }
      out.converged = true;
      break;
    }

    // Centered products below: y - x sums to zero only up to rounding.
    double gbar = 0.0;
    for (std::size_t i = 0; i < m; ++i) gbar += x[i] * gx[i];
    const double noise = 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fx));
    bool accepted = false;
    double fy = fx;
    std::vector<double> gy;
    while (step > 1e-30) {
      double top = -kInf;
      for (std::size_t i = 0; i < m; ++i) {
        y[i] = x[i] > 0.0 ? std::log(x[i]) - step * (gx[i] - gbar) : -kInf;
        top = std::max(top, y[i]);
      }
      double z = 0.0;
      for (auto& v : y) {
        v = std::exp(v - top);
        z += v;
      }
      for (auto& v : y) v /= z;
      if (!caps.empty()) y = project_capped(y, caps);
      fy = f(y);
      double decrease = 0.0;
      for (std::size_t i = 0; i < m; ++i) decrease += (gx[i] - gbar) * (y[i] - x[i]);
      const bool resolved = std::abs(fy - fx) > noise;
      if (std::isfinite(fy) && resolved && fy <= fx + 1e-4 * decrease) {
        accepted = true;
        gy.clear();
        break;
      }
      // Below the resolution of f, judge the step by the trapezoidal
      // estimate of f(y) - f(x) (approximate Armijo condition).
      if (std::isfinite(fy) && !resolved && decrease < 0.0) {
        gy = grad(y);
        double trapezoid = 0.0;
        for (std::size_t i = 0; i < m; ++i) trapezoid += (0.5 * (gx[i] + gy[i]) - gbar) * (y[i] - x[i]);
        if (trapezoid <= 1e-4 * decrease) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    x = y;
    fx = fy;
    gx = gy.empty() ? grad(x) : std::move(gy);
    step = std::min(step * 2.0, 1e8);
  }
  if (!out.converged) out.stationarity = simplex_stationarity(x, gx, caps);
  out.point = std::move(x);
  out.value = fx;
  return out;
}

namespace {

bool better(double a, double b, bool maximize) {
  const double tie = 1e-12 * (1.0 + std::abs(a) + std::abs(b));
  return maximize ? a > b + tie : a < b - tie;
}

bool ties(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

void sort_optima(std::vector<OptimumPoint>& optima, bool maximize) {
  std::stable_sort(optima.begin(), optima.end(), [&](const OptimumPoint& a, const OptimumPoint& b) {
    if (!ties(a.value, b.value)) return maximize ? a.value > b.value : a.value < b.value;
    const auto wa = a.point.weights(), wb = b.point.weights();
    return std::lexicographical_compare(wa.begin(), wa.end(), wb.begin(), wb.end());
  });
}

// Stationary points of g~ are the fixed points of the self-consistency map.
// Optima can fill a whole face of the simplex (g~ sees nu only through
// Phi1(nu, .)); the fixed point nu = T(nu) is the representative reported.
// Near a maximizer the damped map also contracts where mirror steps crawl.
void polish(std::vector<double>& x, double& stationarity, const Interaction& phi, const Gradient& grad,
            bool maximize, double tol) {
  const auto space = phi.space();
  auto y = x;
  const double before = g_tilde(DiscreteMeasure::normalized(space, x), phi);
  for (std::size_t it = 0; it < 20000; ++it) {
    const auto t = sc_map(DiscreteMeasure::normalized(space, y), phi);
    if (sup_distance(t.weights(), y) <= 1e-15) break;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.5 * y[i] + 0.5 * t[i];
  }
  if (!feasible(y, {})) return;
  const double after = g_tilde(DiscreteMeasure::normalized(space, y), phi);
  const double slack = 1e-12 * (1.0 + std::abs(before));
  if (maximize ? after < before - slack : after > before + slack) return;
  const double s = simplex_stationarity(y, grad(y), {});
  if (s <= std::max(stationarity, tol)) {
    x = std::move(y);
    stationarity = s;
  }
}

std::vector<DiscreteMeasure> start_points(const SpacePtr& space, bool multi, const EvpOptions& options) {
  const auto alpha = DiscreteMeasure::reference(space);
  std::vector<DiscreteMeasure> starts{alpha};
  if (!multi) return starts;
  for (std::size_t i = 0; i < space->size(); ++i) {
    starts.push_back(mix(DiscreteMeasure::dirac(space, i), alpha, 0.9));
  }
  Rng rng(options.seed);
  for (std::size_t r = 0; r < options.restarts; ++r) starts.push_back(random_interior_measure(space, rng));
  return starts;
}

EvpSolution optimize(const Interaction& phi, const EvpOptions& options, std::vector<double> caps,
                     bool multi, bool maximize, Shape shape) {
  const auto space = phi.space();
  const double sign = maximize ? -1.0 : 1.0;
  Objective f = [&](std::span<const double> w) {
    return sign * g_tilde(DiscreteMeasure(space, std::vector<double>(w.begin(), w.end())), phi);
  };
  Gradient grad = [&](std::span<const double> w) {
    auto g = grad_g_tilde(DiscreteMeasure(space, std::vector<double>(w.begin(), w.end())), phi);
    for (auto& v : g) v *= sign;
    return g;
  };
  MirrorOptions mo;
  mo.tol = options.tol;
  mo.max_iter = options.max_iter;

  const auto starts = start_points(space, multi, options);
  std::vector<OptimumPoint> optima;
  std::optional<OptimumPoint> fallback;
  std::size_t iterations = 0;
  std::vector<double> trace;
  bool any_converged = false;
  for (const auto& s : starts) {
    auto run = mirror_descent(f, grad, std::vector<double>(s.weights().begin(), s.weights().end()), caps, mo);
    iterations += run.iterations;
    if (caps.empty()) {
      polish(run.point, run.stationarity, phi, grad, maximize, mo.tol);
      run.converged = run.converged || run.stationarity <= mo.tol;
    }
    trace.insert(trace.end(), run.trace.begin(), run.trace.end());
    auto point = DiscreteMeasure::normalized(space, run.point);
    OptimumPoint candidate{point, g_tilde(point, phi), run.stationarity};
    if (!run.converged) {
      if (!fallback || better(candidate.value, fallback->value, maximize)) fallback = candidate;
      continue;
    }
    any_converged = true;
    auto same = std::find_if(optima.begin(), optima.end(), [&](const OptimumPoint& o) {
      return sup_distance(o.point.weights(), candidate.point.weights()) <= kClusterRadius;
    });
    if (same == optima.end()) optima.push_back(candidate);
    else if (better(candidate.value, same->value, maximize)) *same = candidate;
  }
  sort_optima(optima, maximize);

  const OptimumPoint& best = any_converged ? optima.front() : *fallback;
  EvpSolution sol(best.point);
  sol.value = g_tilde(best.point, phi);
  sol.iterations = iterations;
  sol.trace = std::move(trace);
  sol.restarts = starts.size();
  sol.shape = shape;
  sol.maximize = maximize;
  sol.stationarity = best.stationarity;
  sol.converged = any_converged;
  sol.optima = std::move(optima);
  return sol;
}

}  // namespace

EvpSolution minimize_g_tilde(const Interaction& phi, const EvpOptions& options) {
  if (!phi.finite()) throw std::domain_error("minimize_g_tilde: table has +inf entries");
  const auto shape = classify_shape(phi);
  if (shape.shape == Shape::Neither) {
    throw std::invalid_argument("minimize_g_tilde: Phi is neither convex nor concave");
  }
  const bool maximize = shape.shape == Shape::Concave;
  return optimize(phi, options, {}, maximize, maximize, shape.shape);
}

EvpSolution constrained_inf_g_tilde(const Interaction& phi, double cap_exponent,
                                    const EvpOptions& options) {
  if (phi.bodies() != 2) throw std::invalid_argument("constrained_inf_g_tilde: requires n = 2");
  if (!(cap_exponent >= 0.0)) throw std::invalid_argument("constrained_inf_g_tilde: cap exponent C must be >= 0");
  if (!phi.finite()) {
    throw std::domain_error(
        "constrained_inf_g_tilde: +inf entries make g~ infinite at every interior measure of a finite grid");
  }
  const auto shape = classify_shape(phi);
  if (!shape.convex()) throw std::invalid_argument("constrained_inf_g_tilde: Phi must be convex");
  std::vector<double> caps(phi.sites());
  for (std::size_t i = 0; i < caps.size(); ++i) caps[i] = std::exp(cap_exponent) * phi.space()->alpha(i);
  auto sol = optimize(phi, options, std::move(caps), false, false, shape.shape);
  sol.cap = cap_exponent;
  return sol;
}

}  // namespace mfs
