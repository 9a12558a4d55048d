#include "mfs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mfs/duality.hpp"
#include "mfs/evp.hpp"
#include "mfs/exact.hpp"
#include "mfs/gdfp.hpp"
#include "mfs/random.hpp"

namespace mfs {

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

namespace {

// Accumulates the worst violation of `value <= tolerance` style checks.
class Tally {
 public:
  Tally(std::string suite, std::string name, double tolerance)
      : check_{std::move(suite), std::move(name), true, -kInf, tolerance, 0, {}} {}

  // Records an excess (positive means violated beyond tolerance).
  void add(double excess, const std::string& where) {
    ++check_.probes;
    if (excess > check_.worst || check_.probes == 1) {
      check_.worst = excess;
      if (excess > check_.tolerance) check_.detail = where;
    }
    if (!(excess <= check_.tolerance)) check_.ok = false;
  }

  Check done() && {
    if (check_.probes == 0) check_.worst = 0.0;
    return std::move(check_);
  }

 private:
  Check check_;
};

std::string describe(std::size_t a, std::size_t b) {
  std::ostringstream s;
  s << "N1=" << a << " N2=" << b;
  return s.str();
}

std::size_t dense_bodies_limit(std::size_t m, std::size_t want, std::size_t cap = 1'000'000) {
  std::size_t n = 0, size = 1;
  while (n < want && size * m <= cap) {
    size *= m;
    ++n;
  }
  return n;
}

}  // namespace

DenseProductMeasure random_dense_measure(const SpacePtr& space, std::size_t bodies, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t size = dense_size(space->size(), bodies, kDefaultDenseCap);
  std::vector<double> w(size);
  double total = 0.0;
  for (auto& x : w) total += (x = -std::log1p(-rng.uniform()) + 1e-3);
  for (auto& x : w) x /= total;
  return DenseProductMeasure(space, bodies, std::move(w));
}

DenseProductMeasure symmetrize(const DenseProductMeasure& rho) {
  const std::size_t m = rho.space()->size();
  const std::size_t bodies = rho.bodies();
  std::vector<double> out(rho.configurations(), 0.0);
  std::vector<std::size_t> order(bodies);
  double count = 0.0;
  std::iota(order.begin(), order.end(), std::size_t{0});
  do {
    count += 1.0;
    for (std::size_t c = 0; c < rho.configurations(); ++c) {
      const auto sites = rho.decode(c);
      std::size_t target = 0;
      for (std::size_t b = 0; b < bodies; ++b) target = target * m + sites[order[b]];
      out[target] += rho[c];
    }
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& x : out) x /= count;
  return DenseProductMeasure(rho.space(), bodies, std::move(out));
}

void verify_additivity(const Model& model, const VerifyOptions& options, VerifyReport& report) {
  const auto finite = verify_finite_n(options.n_max, model.phi, options.occupancy_cap);
  Tally super("additivity", "evp_superadditivity", 0.0);
  Tally sub_evp("additivity", "evp_subadditivity", 0.0);
  Tally sub("additivity", "subadditivity", 0.0);
  bool has_super = false, has_sub_evp = false;
  for (const auto& c : finite.checks) {
    const double tol = 1e-10 * (1.0 + std::abs(c.lhs) + std::abs(c.rhs));
    if (c.name == "evp_superadditivity") {
      has_super = true;
      super.add(c.rhs - c.lhs - tol, describe(c.n1, c.n2));
    } else if (c.name == "evp_subadditivity") {
      has_sub_evp = true;
      sub_evp.add(c.lhs - c.rhs - tol, describe(c.n1, c.n2));
    } else if (c.name == "subadditivity") {
      sub.add(c.lhs - c.rhs - tol, describe(c.n1, c.n2));
    }
  }
  if (has_super) report.checks.push_back(std::move(super).done());
  if (has_sub_evp) report.checks.push_back(std::move(sub_evp).done());
  report.checks.push_back(std::move(sub).done());
  for (const auto& note : finite.notes) report.skipped.push_back("additivity: " + note);
}

void verify_bounds(const Model& model, const VerifyOptions& options, VerifyReport& report) {
  const auto& phi = model.phi;
  const auto finite = verify_finite_n(options.n_max, phi, options.occupancy_cap);
  Tally lower("bounds", "pressure_lower_bound", 0.0);
  Tally gap("bounds", "pressure_gap_bound", 0.0);
  for (const auto& c : finite.checks) {
    const double tol = 1e-10 * (1.0 + std::abs(c.lhs) + std::abs(c.rhs));
    if (c.name == "lower_bound") lower.add(c.rhs - c.lhs - tol, "N=" + std::to_string(c.n1));
    if (c.name == "gap_bound") gap.add(c.lhs - c.rhs - tol, "N=" + std::to_string(c.n1));
  }
  report.checks.push_back(std::move(lower).done());
  if (phi.finite()) report.checks.push_back(std::move(gap).done());

  // Product trials bound every finite-N pressure from below.
  Tally product("bounds", "product_trial_lower_bound", 0.0);
  Rng rng(options.seed);
  const std::size_t top = std::min<std::size_t>(options.n_max, 8);
  std::vector<double> p;
  for (std::size_t n = phi.bodies(); n <= top; ++n) p.push_back(pressure(n, phi, HamiltonianKind::Standard, options.occupancy_cap));
  for (std::size_t k = 0; k < options.probes; ++k) {
    const auto mu = k == 0 ? DiscreteMeasure::reference(model.space) : random_interior_measure(model.space, rng);
    const double value = g(mu, phi);
    for (std::size_t i = 0; i < p.size(); ++i) {
      product.add(value - p[i] - 1e-10 * (1.0 + std::abs(p[i])), "probe " + std::to_string(k) + " N=" + std::to_string(i + phi.bodies()));
    }
  }
  report.checks.push_back(std::move(product).done());
}

void verify_entropy(const Model& model, const VerifyOptions& options, VerifyReport& report) {
  const auto& space = model.space;
  const std::size_t m = space->size();
  Rng rng(options.seed);
  const double tol = 1e-12;

  Tally nonpos("entropy", "non_positivity", tol);
  Tally reference("entropy", "zero_at_reference", tol);
  Tally concave("entropy", "strict_concavity", 0.0);
  reference.add(std::abs(entropy1(DiscreteMeasure::reference(space))), "alpha");
  for (std::size_t k = 0; k < options.probes; ++k) {
    const auto a = random_interior_measure(space, rng);
    const auto b = random_interior_measure(space, rng);
    nonpos.add(entropy1(a), "probe " + std::to_string(k));
    if (m > 1) {
      const double mid = entropy1(mix(a, b, 0.5));
      const double chord = 0.5 * entropy1(a) + 0.5 * entropy1(b);
      // Strictness: the gap must be positive, not merely nonnegative.
      concave.add(-(mid - chord), "probe " + std::to_string(k));
    }
  }
  report.checks.push_back(std::move(nonpos).done());
  report.checks.push_back(std::move(reference).done());
  if (m > 1) {
    auto c = std::move(concave).done();
    if (c.worst >= 0.0) c.ok = false;
    report.checks.push_back(std::move(c));
  }

  const std::size_t reach = dense_bodies_limit(m, 3);
  Tally almost("entropy", "almost_convexity", 1e-12);
  for (std::size_t n = 1; n <= std::min<std::size_t>(2, reach); ++n) {
    for (std::size_t k = 0; k < 20; ++k) {
      const auto r1 = random_dense_measure(space, n, options.seed + 1000 + 2 * k);
      const auto r2 = random_dense_measure(space, n, options.seed + 1001 + 2 * k);
      const double theta = rng.uniform(0.05, 0.95);
      std::vector<double> w(r1.configurations());
      for (std::size_t c = 0; c < w.size(); ++c) w[c] = theta * r1[c] + (1.0 - theta) * r2[c];
      const DenseProductMeasure mixed(space, n, std::move(w));
      const double lhs = entropyN(mixed);
      const double rhs = theta * entropyN(r1) + (1.0 - theta) * entropyN(r2) + psi(theta) + psi(1.0 - theta);
      almost.add(lhs - rhs, "N=" + std::to_string(n));
    }
  }
  report.checks.push_back(std::move(almost).done());

  if (reach >= 3) {
    Tally ssa("entropy", "strong_subadditivity", 1e-12);
    Tally density("entropy", "monotone_entropy_density", 1e-12);
    for (std::size_t k = 0; k < 20; ++k) {
      const auto rho = random_dense_measure(space, 3, options.seed + 5000 + k);
      const std::size_t i12[] = {0, 1}, i23[] = {1, 2}, i2[] = {1};
      const double lhs = entropyN(rho) + entropyN(marginal(rho, i2));
      const double rhs = entropyN(marginal(rho, i12)) + entropyN(marginal(rho, i23));
      ssa.add(lhs - rhs, "sample " + std::to_string(k));

      const auto sym = symmetrize(rho);
      const std::size_t i1[] = {0};
      const double s1 = entropyN(marginal(sym, i1));
      const double s2 = entropyN(marginal(sym, i12)) / 2.0;
      const double s3 = entropyN(sym) / 3.0;
      density.add(std::max(s2 - s1, s3 - s2), "sample " + std::to_string(k));
    }
    report.checks.push_back(std::move(ssa).done());
    report.checks.push_back(std::move(density).done());
  } else {
    report.skipped.push_back("entropy: state space too large for dense N = 3 measures");
  }

  Tally gibbs("entropy", "gibbs_identity", 1e-10);
  Tally optimal("entropy", "gibbs_optimality", 0.0);
  const auto& phi = model.phi;
  const std::size_t gibbs_reach = dense_bodies_limit(m, std::max<std::size_t>(3, phi.bodies()));
  for (std::size_t n = phi.bodies(); n <= gibbs_reach; ++n) {
    const auto rho = gibbs_measure(n, phi);
    const double p = pressure(n, phi, HamiltonianKind::Standard);
    const double value = gibbs_function(rho, phi);
    gibbs.add(std::abs(value - p) / (1.0 + std::abs(p)), "N=" + std::to_string(n));
    for (std::size_t k = 0; k < 10; ++k) {
      const auto other = random_dense_measure(space, n, options.seed + 9000 + k);
      std::vector<double> w(rho.configurations());
      for (std::size_t c = 0; c < w.size(); ++c) w[c] = 0.9 * rho[c] + 0.1 * other[c];
      const DenseProductMeasure perturbed(space, n, std::move(w));
      // Must be strictly below p(N).
      optimal.add(gibbs_function(perturbed, phi) - p, "N=" + std::to_string(n));
    }
  }
  if (gibbs_reach >= phi.bodies()) {
    report.checks.push_back(std::move(gibbs).done());
    auto c = std::move(optimal).done();
    if (c.worst >= 0.0) c.ok = false;
    report.checks.push_back(std::move(c));
  }
}

void verify_cavity(const Model& model, const VerifyOptions& options, VerifyReport& report) {
  const auto& phi = model.phi;
  if (!phi.finite()) {
    report.skipped.push_back("cavity: table has +inf entries");
    return;
  }
  const auto& space = model.space;
  Rng rng(options.seed);

  Tally dirac("cavity", "dirac_collapse", 1e-10);
  Tally homog("cavity", "degree_zero_homogeneity", 1e-12);
  for (std::size_t k = 0; k < 20; ++k) {
    const auto nu = k == 0 ? DiscreteMeasure::reference(space) : random_interior_measure(space, rng);
    const double target = g_tilde(nu, phi);
    for (std::size_t n = 1; n <= 16; ++n) {
      const double value = cavity_G(AtomicMetaMeasure::dirac(nu), n, phi).g;
      dirac.add(std::abs(value - target) / (1.0 + std::abs(target)), "N=" + std::to_string(n));
    }
  }
  report.checks.push_back(std::move(dirac).done());

  auto random_rho = [&]() {
    const std::size_t atoms = 1 + rng.next() % 4;
    std::vector<AtomicMetaMeasure::Atom> list;
    for (std::size_t a = 0; a < atoms; ++a) list.push_back({rng.uniform(0.1, 2.0), random_interior_measure(space, rng)});
    return AtomicMetaMeasure(std::move(list));
  };

  const auto shape = model.shape;
  const bool lower = shape.convex();
  const bool upper = shape.concave();
  Tally ineq("cavity", lower && !upper ? "evp_inequality" : "evp_inequality_sup", 1e-10);
  std::vector<double> pt(7);
  for (std::size_t n = 1; n <= 6; ++n) pt[n] = pressure(n, phi, HamiltonianKind::Evp, options.occupancy_cap);
  for (std::size_t k = 0; k < options.probes; ++k) {
    const auto rho = random_rho();
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto vals = cavity_G(rho, n, phi);
      for (double t : {0.1, 3.0, 100.0}) {
        const double scaled = cavity_G(rho.scaled(t), n, phi).g;
        homog.add(std::abs(scaled - vals.g), "t=" + std::to_string(t));
      }
      const double scale = 1e-10 * (1.0 + std::abs(pt[n]));
      if (lower) ineq.add((pt[n] - vals.g) / (1.0 + std::abs(pt[n])) - scale, "rho " + std::to_string(k) + " N=" + std::to_string(n));
      if (upper) ineq.add((vals.g - pt[n]) / (1.0 + std::abs(pt[n])) - scale, "rho " + std::to_string(k) + " N=" + std::to_string(n));
    }
  }
  report.checks.push_back(std::move(homog).done());
  if (lower || upper) report.checks.push_back(std::move(ineq).done());
  else report.skipped.push_back("cavity: Phi neither convex nor concave, EVP inequality skipped");

  if (upper && !lower) {
    const auto sol = minimize_g_tilde(phi);
    if (sol.optima.size() >= 2) {
      Tally mixture("cavity", "mixture_of_optimizers", 1e-8);
      const auto& a = sol.optima[0];
      const auto& b = sol.optima[1];
      for (double w : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const AtomicMetaMeasure rho({{w, a.point}, {1.0 - w, b.point}});
        for (std::size_t n = 1; n <= 16; ++n) {
          mixture.add(std::abs(cavity_G(rho, n, phi).g - sol.value), "w=" + std::to_string(w) + " N=" + std::to_string(n));
        }
      }
      report.checks.push_back(std::move(mixture).done());
    }
  }
}

void verify_duality(const Model& model, const VerifyOptions& options, VerifyReport& report) {
  const auto& phi = model.phi;
  if (!phi.finite() || model.shape.shape == Shape::Neither) {
    report.skipped.push_back("duality: needs a finite table with convex or concave Phi");
    return;
  }
  const auto& space = model.space;
  Rng rng(options.seed);
  Tally diagonal("duality", "diagonal_identity", 1e-12);
  Tally gvp("duality", "partial_max_closed_form", 1e-10);
  Tally weak("duality", model.shape.convex() ? "partial_min_nu" : "partial_max_nu", 1e-10);
  for (std::size_t k = 0; k < options.probes; ++k) {
    const auto mu = k == 0 ? DiscreteMeasure::reference(space) : random_interior_measure(space, rng);
    const auto nu = random_interior_measure(space, rng);
    const double gm = g(mu, phi);
    diagonal.add(std::abs(lagrangian(mu, mu, phi) - gm), "probe " + std::to_string(k));
    const auto best = partial_max_mu(nu, phi);
    gvp.add(std::abs(lagrangian(best.point, nu, phi) - best.value) / (1.0 + std::abs(best.value)), "probe " + std::to_string(k));
    // No trial mu beats the closed-form maximizer.
    gvp.add(lagrangian(mu, nu, phi) - best.value - 1e-10, "probe " + std::to_string(k));
    const double l = lagrangian(mu, nu, phi);
    if (model.shape.convex()) weak.add(gm - l, "probe " + std::to_string(k));
    else weak.add(l - gm, "probe " + std::to_string(k));
  }
  report.checks.push_back(std::move(diagonal).done());
  report.checks.push_back(std::move(gvp).done());
  report.checks.push_back(std::move(weak).done());

  if (phi.bodies() == 2 && model.shape.convex()) {
    const auto audit = saddle_audit(phi, options.cap);
    Check c{"duality", "saddle_gap", audit.ok, std::abs(audit.gap), 1e-6 * (1.0 + std::abs(audit.maxmin)), 1, {}};
    std::ostringstream s;
    s.precision(17);
    s << "C=" << audit.cap << " maxmin=" << audit.maxmin << " minmax=" << audit.minmax
      << " evp_capped=" << audit.evp_capped_value;
    c.detail = s.str();
    report.checks.push_back(std::move(c));
  } else {
    report.skipped.push_back("duality: saddle audit needs n = 2 and convex Phi");
  }
}

VerifyReport run_verify(const Model& model, const std::string& suite, const VerifyOptions& options) {
  VerifyReport report;
  if (suite != "all" && std::find(kSuites.begin(), kSuites.end(), suite) == kSuites.end()) {
    throw std::invalid_argument("unknown suite '" + suite + "'");
  }
  auto want = [&](const char* name) { return suite == "all" || suite == name; };
  if (want("additivity")) verify_additivity(model, options, report);
  if (want("bounds")) verify_bounds(model, options, report);
  if (want("entropy")) verify_entropy(model, options, report);
  if (want("cavity")) verify_cavity(model, options, report);
  if (want("duality")) verify_duality(model, options, report);
  return report;
}

}  // namespace mfs
