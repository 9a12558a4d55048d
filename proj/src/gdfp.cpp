#include "mfs/gdfp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfs/evp.hpp"
#include "mfs/random.hpp"

namespace mfs {

double g(const DiscreteMeasure& mu, const Interaction& phi) {
  const double energy = Phi(mu, phi);
  if (std::isinf(energy)) return -kInf;
  return entropy1(mu) - energy;
}

std::vector<double> grad_g(const DiscreteMeasure& mu, const Interaction& phi) {
  if (!mu.interior()) throw std::domain_error("grad_g: mu must lie in the simplex interior");
  auto field = one_body_field(mu, phi);
  for (std::size_t i = 0; i < field.size(); ++i) {
    field[i] = -std::log(mu[i] / phi.space()->alpha(i)) - 1.0 - field[i];
  }
  return field;
}

DiscreteMeasure sc_map(const DiscreteMeasure& mu, const Interaction& phi) {
  const auto field = one_body_field(mu, phi);
  double shift = kInf;
  for (double f : field) shift = std::min(shift, f);
  if (shift == kInf) throw std::domain_error("sc_map: every site has infinite field");
  std::vector<double> w(field.size());
  for (std::size_t x = 0; x < w.size(); ++x) {
    w[x] = std::isinf(field[x]) ? 0.0 : phi.space()->alpha(x) * std::exp(-(field[x] - shift));
  }
  return DiscreteMeasure::normalized(phi.space(), std::move(w));
}

double sc_residual(const DiscreteMeasure& mu, const Interaction& phi) {
  return sup_distance(sc_map(mu, phi).weights(), mu.weights());
}

namespace {

struct Run {
  std::vector<double> mu;
  bool converged = false;
  double damping = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

std::vector<double> image(std::span<const double> w, const Interaction& phi, std::span<const double> caps) {
  const DiscreteMeasure mu(phi.space(), std::vector<double>(w.begin(), w.end()));
  const auto t = sc_map(mu, phi);
  return project_capped(t.weights(), caps);
}

double objective(std::span<const double> w, const Interaction& phi) {
  return g(DiscreteMeasure(phi.space(), std::vector<double>(w.begin(), w.end())), phi);
}

Run iterate(std::vector<double> mu, const Interaction& phi, std::span<const double> caps,
            const GdfpOptions& options, bool ascent_guard) {
  Run run;
  double theta = options.damping;
  const double theta_floor = options.damping / 1024.0;
  double last_residual = kInf;
  std::vector<double> last_step;
  std::size_t stalls = 0;
  double value = objective(mu, phi);
  for (run.iterations = 0; run.iterations < options.max_iter; ++run.iterations) {
    const auto target = image(mu, phi, caps);
    run.residual = sup_distance(target, mu);
    if (run.residual <= options.tol) {
      run.converged = true;
      break;
    }
    // Halve the damping when the residual fails to shrink while the step
    // flips direction, twice in a row (the undamped map 2-cycles for strong
    // couplings).
    std::vector<double> step(mu.size());
    double turn = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      step[i] = target[i] - mu[i];
      if (!last_step.empty()) turn += step[i] * last_step[i];
    }
    const bool stalled = run.residual >= last_residual && turn < 0.0;
    stalls = stalled ? stalls + 1 : 0;
    last_residual = run.residual;
    last_step = std::move(step);
    if (stalls >= 2 && theta > theta_floor) {
      theta = std::max(0.5 * theta, theta_floor);
      stalls = 0;
      last_residual = kInf;
    }
    std::vector<double> next(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) next[i] = (1.0 - theta) * mu[i] + theta * target[i];
    double total = 0.0;
    for (double v : next) total += v;
    for (auto& v : next) v /= total;
    if (ascent_guard) {
      const double next_value = objective(next, phi);
      if (next_value < value - 1e-12 && theta > 1e-6) {
        theta *= 0.5;
        continue;
      }
      value = next_value;
    }
    mu = std::move(next);
  }
  run.mu = std::move(mu);
  run.damping = theta;
  return run;
}

bool ties(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

GdfpSolution solve_self_consistent(const Interaction& phi, const GdfpOptions& options) {
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw std::invalid_argument("solve_self_consistent: damping must lie in (0, 1]");
  }
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_self_consistent: tol must be positive");
  const auto space = phi.space();
  const std::size_t m = space->size();

  std::vector<double> caps;
  if (options.cap) {
    if (!(*options.cap >= 0.0)) throw std::invalid_argument("solve_self_consistent: cap exponent must be >= 0");
    caps.resize(m);
    for (std::size_t i = 0; i < m; ++i) caps[i] = std::exp(*options.cap) * space->alpha(i);
  }

  // Ascent is guaranteed only for convex Phi; for other shapes the guard
  // would stall on legitimate non-monotone paths.
  bool ascent_guard = false;
  if (phi.finite()) ascent_guard = classify_shape(phi).convex();

  std::vector<std::vector<double>> starts;
  const auto alpha = DiscreteMeasure::reference(space);
  starts.emplace_back(alpha.weights().begin(), alpha.weights().end());
  for (std::size_t i = 0; i < m; ++i) {
    const auto v = DiscreteMeasure::dirac(space, i);
    starts.push_back(project_capped(v.weights(), caps));
  }
  Rng rng(options.seed);
  for (std::size_t r = 0; r < options.restarts; ++r) {
    const auto v = random_interior_measure(space, rng);
    starts.push_back(project_capped(v.weights(), caps));
  }

  GdfpSolution sol(alpha);
  sol.cap = options.cap;
  sol.restarts = starts.size();
  sol.damping = options.damping;
  std::vector<FixedPoint> points;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto run = iterate(starts[s], phi, caps, options, ascent_guard);
    sol.iterations += run.iterations;
    sol.damping = std::min(sol.damping, run.damping);
    if (!run.converged) {
      sol.failures.push_back("start " + std::to_string(s) + ": no convergence after " +
                             std::to_string(run.iterations) + " iterations, residual " +
                             std::to_string(run.residual));
      continue;
    }
    auto mu = DiscreteMeasure::normalized(space, run.mu);
    FixedPoint fp{mu, g(mu, phi), run.residual};
    auto same = std::find_if(points.begin(), points.end(), [&](const FixedPoint& p) {
      return sup_distance(p.mu.weights(), fp.mu.weights()) <= kClusterRadius;
    });
    if (same == points.end()) points.push_back(fp);
    else if (fp.residual < same->residual) *same = fp;
  }
  if (points.empty()) {
    std::string msg = "solve_self_consistent: no restart converged";
    for (const auto& f : sol.failures) msg += "; " + f;
    throw std::runtime_error(msg);
  }
  std::stable_sort(points.begin(), points.end(), [](const FixedPoint& a, const FixedPoint& b) {
    if (!ties(a.value, b.value)) return a.value > b.value;
    const auto wa = a.mu.weights(), wb = b.mu.weights();
    return std::lexicographical_compare(wa.begin(), wa.end(), wb.begin(), wb.end());
  });

  const auto& best = points.front();
  sol.maximizer = best.mu;
  sol.value = g(best.mu, phi);
  sol.c_star = Phi(best.mu, phi) - sol.value;
  sol.residual = best.residual;
  sol.fixed_points = std::move(points);
  return sol;
}

RegularityReport regularity_report(const GdfpSolution& solution, const Interaction& phi, double tol) {
  if (phi.bodies() != 2) throw std::invalid_argument("regularity_report: requires n = 2");
  if (!phi.finite() || !classify_shape(phi).convex()) {
    throw std::invalid_argument("regularity_report: requires a finite table with convex Phi");
  }
  RegularityReport r;
  const auto& mu = solution.maximizer;
  const auto alpha = phi.space()->alpha();
  const double c_alpha = phi.compat();
  const double c_phi = phi.lower_bound();

  r.c_star = Phi(mu, phi) - solution.value;
  r.lower = c_alpha + c_phi;
  r.upper = 2.0 * c_alpha;
  r.density_bound = std::exp(2.0 * (c_alpha - c_phi));
  r.full_support = mu.interior();
  r.identity_gap = std::abs(r.c_star - (entropy1(mu) - 2.0 * solution.value));

  const auto field = one_body_field(mu, phi);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    const double ratio = mu[x] / alpha[x];
    r.density_ratio = std::max(r.density_ratio, ratio);
    if (ratio > 0.0) {
      r.el1_residual = std::max(r.el1_residual, std::abs(std::log(ratio) - (r.c_star - field[x])));
    } else {
      r.el1_residual = kInf;
    }
  }

  if (!r.full_support) r.violations.push_back("maximizer does not charge every site");
  if (r.c_star < r.lower - tol) r.violations.push_back("C_* below C_alpha + C_phi");
  if (r.c_star > r.upper + tol) r.violations.push_back("C_* above 2 C_alpha");
  if (r.density_ratio > r.density_bound * (1.0 + tol)) r.violations.push_back("density exceeds exp(2[C_alpha - C_phi])");
  if (!(r.el1_residual <= tol)) r.violations.push_back("Euler-Lagrange residual above tolerance");
  if (!(r.identity_gap <= 1e-8)) r.violations.push_back("C_* identities disagree");
  r.ok = r.violations.empty();
  return r;
}

}  // namespace mfs
