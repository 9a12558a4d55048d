#include "mfs/exact.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace mfs {

namespace {

double binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::uint64_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

void check_occupancy(const OccupancyVector& occupancy, const Interaction& phi) {
  if (occupancy.size() != phi.sites()) {
    throw std::invalid_argument("hamiltonian: occupancy dimension differs from state space");
  }
}

std::vector<std::uint32_t> occupancy_of(const DenseProductMeasure& rho, std::size_t config) {
  std::vector<std::uint32_t> k(rho.space()->size(), 0);
  for (auto s : rho.decode(config)) ++k[s];
  return k;
}

double tolerance(double a, double b) { return 1e-10 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

double hamiltonian(const OccupancyVector& occupancy, const Interaction& phi) {
  check_occupancy(occupancy, phi);
  const std::size_t n = phi.bodies();
  const std::uint64_t total = occupancy.total();
  if (total < n) throw std::invalid_argument("hamiltonian: N must be at least the body count");

  // Sum over multisets of n distinct particles, grouped by how many of them
  // sit on each site.
  double sum = 0.0;
  bool infinite = false;
  std::vector<std::size_t> tuple(n);
  for_each_occupancy(phi.sites(), static_cast<std::uint32_t>(n),
                     [&](std::span<const std::uint32_t> t) {
                       double coeff = 1.0;
                       std::size_t pos = 0;
                       for (std::size_t i = 0; i < t.size(); ++i) {
                         if (t[i] > occupancy[i]) return;
                         coeff *= binomial(occupancy[i], t[i]);
                         for (std::uint32_t r = 0; r < t[i]; ++r) tuple[pos++] = i;
                       }
                       const double v = phi.at(tuple);
                       if (std::isinf(v)) infinite = true;
                       else sum += coeff * v;
                     });
  if (infinite) return kInf;
  return static_cast<double>(total) * sum / binomial(total, n);
}

double evp_hamiltonian(const OccupancyVector& occupancy, const Interaction& phi) {
  check_occupancy(occupancy, phi);
  const double v = Phi(empirical_measure(phi.space(), occupancy), phi);
  return std::isinf(v) ? v : static_cast<double>(occupancy.total()) * v;
}

double log_partition(std::size_t n_bodies, const Interaction& phi, HamiltonianKind which,
                     std::uint64_t occupancy_cap) {
  if (n_bodies == 0) throw std::invalid_argument("pressure: N must be positive");
  if (which == HamiltonianKind::Standard && n_bodies < phi.bodies()) {
    throw std::invalid_argument("pressure: N must be at least the body count");
  }
  const std::size_t m = phi.sites();
  const auto count = occupancy_count(m, n_bodies);
  if (count > occupancy_cap) {
    throw CapExceeded("pressure: " + std::to_string(count) + " occupancy classes exceed cap " +
                      std::to_string(occupancy_cap));
  }
  std::vector<double> log_alpha(m);
  for (std::size_t i = 0; i < m; ++i) log_alpha[i] = std::log(phi.space()->alpha(i));

  std::vector<double> terms;
  terms.reserve(count);
  for_each_occupancy(m, static_cast<std::uint32_t>(n_bodies), [&](std::span<const std::uint32_t> k) {
    OccupancyVector occ(std::vector<std::uint32_t>(k.begin(), k.end()));
    const double h = which == HamiltonianKind::Standard ? hamiltonian(occ, phi)
                                                        : evp_hamiltonian(occ, phi);
    if (std::isinf(h)) return;
    double t = log_multinomial(k) - h;
    for (std::size_t i = 0; i < m; ++i) {
      if (k[i] > 0) t += k[i] * log_alpha[i];
    }
    terms.push_back(t);
  });
  if (terms.empty()) throw std::domain_error("pressure: Hamiltonian is +inf everywhere (Z = 0)");
  const double shift = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - shift);
  return shift + std::log(sum);
}

double pressure(std::size_t n_bodies, const Interaction& phi, HamiltonianKind which,
                std::uint64_t occupancy_cap) {
  return log_partition(n_bodies, phi, which, occupancy_cap) / static_cast<double>(n_bodies);
}

DenseProductMeasure gibbs_measure(std::size_t n_bodies, const Interaction& phi,
                                  std::size_t dense_cap) {
  if (n_bodies < phi.bodies()) throw std::invalid_argument("gibbs_measure: N below body count");
  const std::size_t m = phi.sites();
  const std::size_t total = dense_size(m, n_bodies, dense_cap);
  const auto space = phi.space();

  std::map<std::vector<std::uint32_t>, double> energy;
  std::vector<double> logw(total);
  for (std::size_t c = 0; c < total; ++c) {
    std::vector<std::uint32_t> k(m, 0);
    double la = 0.0;
    std::size_t rest = c;
    for (std::size_t b = 0; b < n_bodies; ++b) {
      ++k[rest % m];
      la += std::log(space->alpha(rest % m));
      rest /= m;
    }
    auto it = energy.find(k);
    if (it == energy.end()) it = energy.emplace(k, hamiltonian(OccupancyVector(k), phi)).first;
    logw[c] = la - it->second;
  }
  const double shift = *std::max_element(logw.begin(), logw.end());
  if (shift == -kInf) throw std::domain_error("gibbs_measure: Z = 0");
  std::vector<double> w(total);
  double sum = 0.0;
  for (std::size_t c = 0; c < total; ++c) {
    w[c] = std::exp(logw[c] - shift);
    sum += w[c];
  }
  for (auto& x : w) x /= sum;
  return DenseProductMeasure(space, n_bodies, std::move(w), dense_cap);
}

double gibbs_function(const DenseProductMeasure& rho, const Interaction& phi) {
  const std::size_t n_bodies = rho.bodies();
  if (n_bodies < phi.bodies()) throw std::invalid_argument("gibbs_function: N below body count");
  if (rho.space()->size() != phi.sites()) throw std::invalid_argument("gibbs_function: dimension mismatch");
  std::map<std::vector<std::uint32_t>, double> energy;
  double mean_energy = 0.0;
  for (std::size_t c = 0; c < rho.configurations(); ++c) {
    if (rho[c] == 0.0) continue;
    auto k = occupancy_of(rho, c);
    auto it = energy.find(k);
    if (it == energy.end()) it = energy.emplace(k, hamiltonian(OccupancyVector(k), phi)).first;
    if (std::isinf(it->second)) return -kInf;
    mean_energy += rho[c] * it->second;
  }
  return (entropyN(rho) - mean_energy) / static_cast<double>(n_bodies);
}

double pressure_gap_bound(std::size_t n_bodies, const Interaction& phi) {
  const double n = static_cast<double>(phi.bodies());
  return n * (n - 1.0) * phi.sup_norm() / static_cast<double>(n_bodies);
}

PressureTable pressure_table(const Interaction& phi, std::size_t n_min, std::size_t n_max,
                             std::string model, std::uint64_t occupancy_cap) {
  if (n_min == 0 || n_min > n_max) throw std::invalid_argument("pressure_table: empty N range");
  PressureTable table;
  table.model = std::move(model);
  for (std::size_t n = n_min; n <= n_max; ++n) {
    PressureRow row;
    row.n = n;
    row.p_tilde = pressure(n, phi, HamiltonianKind::Evp, occupancy_cap);
    row.bound = pressure_gap_bound(n, phi);
    if (n >= phi.bodies()) {
      row.p = pressure(n, phi, HamiltonianKind::Standard, occupancy_cap);
      const double gap = std::abs(*row.p - row.p_tilde);
      row.bound_ok = gap <= row.bound + 1e-12 * (1.0 + std::abs(*row.p));
    }
    table.rows.push_back(row);
  }
  return table;
}

std::size_t FiniteNReport::violations() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const FiniteNCheck& c) { return !c.ok; }));
}

FiniteNReport verify_finite_n(std::size_t n_max, const Interaction& phi,
                              std::uint64_t occupancy_cap) {
  FiniteNReport report;
  const std::size_t n = phi.bodies();
  std::vector<double> p(n_max + 1, 0.0), pt(n_max + 1, 0.0);
  for (std::size_t k = 1; k <= n_max; ++k) {
    if (phi.finite()) pt[k] = pressure(k, phi, HamiltonianKind::Evp, occupancy_cap);
    if (k >= n) p[k] = pressure(k, phi, HamiltonianKind::Standard, occupancy_cap);
  }

  bool super = false, sub = false;
  if (!phi.finite()) {
    report.notes.push_back("table has +inf entries: EVP pressures and the gap bound skipped");
  } else {
    const auto shape = classify_shape(phi);
    super = shape.convex();
    sub = shape.concave();
    if (!super && !sub) report.notes.push_back("Phi is neither convex nor concave: EVP additivity skipped");
  }

  for (std::size_t a = 1; a < n_max; ++a) {
    for (std::size_t b = a; a + b <= n_max; ++b) {
      const double lhs = static_cast<double>(a + b) * pt[a + b];
      const double rhs = static_cast<double>(a) * pt[a] + static_cast<double>(b) * pt[b];
      if (super) report.checks.push_back({"evp_superadditivity", a, b, lhs, rhs, lhs >= rhs - tolerance(lhs, rhs)});
      if (sub) report.checks.push_back({"evp_subadditivity", a, b, lhs, rhs, lhs <= rhs + tolerance(lhs, rhs)});
      if (a >= n && b >= n) {
        const double l = static_cast<double>(a + b) * p[a + b];
        const double r = static_cast<double>(a) * p[a] + static_cast<double>(b) * p[b];
        report.checks.push_back({"subadditivity", a, b, l, r, l <= r + tolerance(l, r)});
      }
    }
  }
  for (std::size_t k = n; k <= n_max; ++k) {
    const double floor = -phi.compat();
    report.checks.push_back({"lower_bound", k, 0, p[k], floor, p[k] >= floor - tolerance(p[k], floor)});
    if (phi.finite()) {
      const double gap = std::abs(p[k] - pt[k]);
      const double bound = pressure_gap_bound(k, phi);
      report.checks.push_back({"gap_bound", k, 0, gap, bound, gap <= bound + tolerance(gap, 0.0)});
    }
  }
  return report;
}

Extrapolation extrapolate_pressure(std::span<const std::size_t> ns, std::span<const double> ps) {
  if (ns.size() != ps.size()) throw std::invalid_argument("extrapolate_pressure: size mismatch");
  std::set<std::size_t> distinct(ns.begin(), ns.end());
  if (distinct.size() < 4) {
    throw std::invalid_argument("extrapolate_pressure: need at least 4 distinct N");
  }
  const auto rows = static_cast<Eigen::Index>(ns.size());
  Eigen::MatrixXd a(rows, 3);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double n = static_cast<double>(ns[static_cast<std::size_t>(r)]);
    a(r, 0) = 1.0;
    a(r, 1) = 1.0 / n;
    a(r, 2) = std::log(n) / n;
    y(r) = ps[static_cast<std::size_t>(r)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = a * coef - y;
  Extrapolation out;
  out.limit = coef(0);
  out.coefficients = {coef(0), coef(1), coef(2)};
  out.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(rows));
  return out;
}

Extrapolation extrapolate_pressure(const PressureTable& table) {
  std::vector<std::size_t> ns;
  std::vector<double> ps;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (i > 0 && table.rows[i].n <= table.rows[i - 1].n) {
      throw std::invalid_argument("extrapolate_pressure: rows must have increasing N");
    }
    if (!table.rows[i].p) continue;
    ns.push_back(table.rows[i].n);
    ps.push_back(*table.rows[i].p);
  }
  return extrapolate_pressure(ns, ps);
}

}  // namespace mfs
