// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mfs/duality.hpp"
#include "mfs/evp.hpp"
#include "mfs/exact.hpp"
#include "mfs/gdfp.hpp"
#include "mfs/models.hpp"
#include "mfs/random.hpp"
#include "mfs/verify.hpp"
#include "oracles.hpp"

using namespace mfs;

namespace {

constexpr double kValueTol = 1e-8;
constexpr double kExtrapolationTol = 2e-2;
constexpr double kAgreementTol = 1e-6;
constexpr double kBruteForceTol = 1e-10;
constexpr double kRegularityTol = 1e-10;
constexpr double kSaddleTol = 1e-6;
constexpr double kCauchyTol = 1e-4;
constexpr double kGradientTol = 1e-6;

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Interaction ising(double s) {
  static const SpacePtr space = StateSpace::make({{1.0}, {-1.0}}, {0.5, 0.5});
  return Interaction(space, 2, oracle::ising_table(s));
}

double mean_spin(const DiscreteMeasure& mu) { return mu[0] - mu[1]; }

double extrapolated(const Interaction& phi) {
  std::vector<std::size_t> ns;
  std::vector<double> ps;
  for (std::size_t n = 64; n <= 4096; n *= 2) {
    ns.push_back(n);
    ps.push_back(pressure(n, phi, HamiltonianKind::Standard));
  }
  return extrapolate_pressure(ns, ps).limit;
}

bool suite_clean(const VerifyReport& report, Outcome& out) {
  for (const auto& c : report.checks) out.require(c.ok, c.suite + "/" + c.name + " worst " + fmt("%.3g", c.worst));
  return report.ok();
}

bool has_check(const VerifyReport& report, const std::string& name) {
  for (const auto& c : report.checks) {
    if (c.name == name) return true;
  }
  return false;
}

// 1
Outcome antiferro() {
  Outcome out;
  const auto phi = ising(-4);
  const double oracle_value = oracle::golden_min(oracle::ising_g_tilde_af, -1.0, 1.0);
  const auto evp = minimize_g_tilde(phi);
  const auto gdfp = solve_self_consistent(phi);
  const double p = extrapolated(phi);
  out.require(std::abs(oracle_value - 2.0) <= kValueTol, "1-D oracle " + fmt("%.12g", oracle_value));
  out.require(std::abs(evp.value - oracle_value) <= kValueTol, "EVP " + fmt("%.12g", evp.value));
  out.require(std::abs(gdfp.value - 2.0) <= kValueTol, "GdFP " + fmt("%.12g", gdfp.value));
  out.require(std::abs(p - 2.0) <= kExtrapolationTol, "extrapolated p " + fmt("%.6g", p));
  if (out.ok) out.detail = "EVP " + fmt("%.12f", evp.value) + ", GdFP " + fmt("%.12f", gdfp.value) + ", p " + fmt("%.5f", p);
  return out;
}

// 2
Outcome ferro() {
  Outcome out;
  const auto phi = ising(4);
  const auto gdfp = solve_self_consistent(phi);
  const auto evp = minimize_g_tilde(phi);
  auto tie = [](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); };

  std::vector<double> gdfp_means, evp_means;
  for (const auto& fp : gdfp.fixed_points) {
    if (tie(fp.value, gdfp.value)) gdfp_means.push_back(mean_spin(fp.mu));
  }
  for (const auto& o : evp.optima) {
    if (tie(o.value, evp.value)) evp_means.push_back(barycenter(o.point)[0]);
  }
  out.require(gdfp_means.size() == 2, "GdFP maximizers " + std::to_string(gdfp_means.size()));
  out.require(evp_means.size() == 2, "EVP maximizers " + std::to_string(evp_means.size()));
  for (const auto* means : {&gdfp_means, &evp_means}) {
    if (means->size() != 2) continue;
    out.require((*means)[0] * (*means)[1] < 0.0, "maximizer means not of opposite sign");
    for (double m : *means) {
      out.require(std::abs(m - std::tanh(4.0 * m)) <= kValueTol, "|m - tanh 4m| at m=" + fmt("%.12g", m));
      out.require(std::abs(std::abs(m) - oracle::ising_m_star()) <= kValueTol, "m* off " + fmt("%.12g", m));
    }
  }
  const double ms = oracle::ising_m_star();
  const double oracle_value = oracle::entropy({(1 + ms) / 2, (1 - ms) / 2}, {0.5, 0.5}) - (2.0 - 2.0 * ms * ms);
  out.require(std::abs(gdfp.value - oracle_value) <= kValueTol, "GdFP value " + fmt("%.12g", gdfp.value));
  out.require(std::abs(gdfp.value - evp.value) <= kAgreementTol, "EVP/GdFP disagree " + fmt("%.3g", gdfp.value - evp.value));
  const double p = extrapolated(phi);
  out.require(std::abs(p - gdfp.value) <= kExtrapolationTol, "extrapolated p " + fmt("%.6g", p));
  if (out.ok) {
    out.detail = "m* " + fmt("%.12f", std::abs(gdfp_means[0])) + ", value " + fmt("%.12f", gdfp.value) +
                 ", p " + fmt("%.5f", p);
  }
  return out;
}

// 3
Outcome finite_n() {
  Outcome out;
  std::size_t checks = 0;
  for (double s : {-4.0, 4.0}) {
    const auto rep = verify_finite_n(12, ising(s));
    checks += rep.checks.size();
    for (const auto& c : rep.checks) {
      out.require(c.ok, c.name + " N1=" + std::to_string(c.n1) + " N2=" + std::to_string(c.n2));
    }
  }
  out.require(checks > 0, "no checks ran");
  if (out.ok) out.detail = std::to_string(checks) + " checks, 0 violations";
  return out;
}

// 4
Outcome brute_force() {
  Outcome out;
  double worst = 0.0;
  auto compare = [&](std::size_t m, std::size_t n, std::size_t N, std::uint64_t seed) {
    const auto table = oracle::random_symmetric_table(m, n, seed);
    Rng rng(seed + 7);
    std::vector<double> alpha(m);
    double total = 0.0;
    for (auto& a : alpha) total += (a = rng.uniform(0.2, 1.0));
    for (auto& a : alpha) a /= total;
    const Interaction phi(StateSpace::make(alpha), n, table);
    for (bool evp : {false, true}) {
      if (!evp && N < n) continue;
      const double fast = pressure(N, phi, evp ? HamiltonianKind::Evp : HamiltonianKind::Standard);
      const double slow = oracle::pressure(table, m, n, alpha, N, evp);
      const double err = std::abs(fast - slow) / (1.0 + std::abs(slow));
      worst = std::max(worst, err);
      out.require(err <= kBruteForceTol, "m=" + std::to_string(m) + " n=" + std::to_string(n) + " N=" +
                                             std::to_string(N) + (evp ? " evp" : " std"));
    }
  };
  for (std::size_t N = 1; N <= 12; ++N) compare(2, 2, N, 100 + N);
  for (std::size_t N = 1; N <= 12; ++N) compare(2, 3, N, 200 + N);
  for (std::size_t N = 1; N <= 7; ++N) compare(3, 2, N, 300 + N);
  for (std::size_t N = 1; N <= 7; ++N) compare(3, 3, N, 400 + N);
  if (out.ok) out.detail = "worst relative error " + fmt("%.2e", worst);
  return out;
}

// 5
Outcome cavity() {
  Outcome out;
  VerifyOptions options;
  options.probes = 100;
  for (const char* id : {"ising-af", "ising-f"}) {
    const auto model = build(builtin_spec(id));
    VerifyReport rep;
    verify_cavity(model, options, rep);
    suite_clean(rep, out);
    for (const char* name : {"dirac_collapse", "degree_zero_homogeneity"}) {
      out.require(has_check(rep, name), std::string(id) + " missing " + name);
    }
    out.require(has_check(rep, model.shape.convex() ? "evp_inequality" : "evp_inequality_sup"),
                std::string(id) + " missing EVP inequality");
    if (std::string(id) == "ising-f") out.require(has_check(rep, "mixture_of_optimizers"), "ferro pair missing");
  }
  // Independent Dirac check against the 1-D closed form.
  const auto af = ising(-4);
  for (double m : {-0.7, 0.0, 0.4}) {
    const DiscreteMeasure nu(af.space(), {(1 + m) / 2, (1 - m) / 2});
    for (std::size_t n = 1; n <= 16; ++n) {
      const double v = cavity_G(AtomicMetaMeasure::dirac(nu), n, af).g;
      out.require(std::abs(v - oracle::ising_g_tilde_af(m)) <= 1e-10, "Dirac collapse vs closed form");
    }
  }
  if (out.ok) out.detail = "dirac, homogeneity, EVP inequality, mixture all clean";
  return out;
}

// 6
Outcome pushforward() {
  Outcome out;
  const auto phi = ising(-4);
  const std::size_t N = 2, n = 2;
  const double bound_coef = (1.0 + n * (n - 1) / 2.0) * phi.sup_norm();
  double last1 = kInf, last2 = kInf;
  std::string trail;
  for (std::size_t M : {8u, 16u, 32u, 64u}) {
    const auto vals = pushforward_cavity(M, N, phi);
    const double d1 = std::abs(vals.g1 - double(M + N) / N * pressure(M + N, phi, HamiltonianKind::Evp));
    const double d2 = std::abs(vals.g2 - double(M) / N * pressure(M, phi, HamiltonianKind::Evp));
    const double bound = double(N) / double(M + N) * bound_coef;
    out.require(d1 < last1, "d1 not decreasing at M=" + std::to_string(M));
    out.require(d2 < last2, "d2 not decreasing at M=" + std::to_string(M));
    out.require(d1 <= bound, "d1 above bound at M=" + std::to_string(M));
    out.require(d2 <= bound, "d2 above bound at M=" + std::to_string(M));
    last1 = d1;
    last2 = d2;
    trail += (trail.empty() ? "" : ", ") + std::string("M=") + std::to_string(M) + " " + fmt("%.3g", d1) + "/" +
             fmt("%.3g", d2) + "<=" + fmt("%.3g", bound);
  }
  if (out.ok) out.detail = trail;
  return out;
}

// 7
Outcome entropy_suite() {
  Outcome out;
  for (const char* id : {"ising-af", "ising-f"}) {
    const auto model = build(builtin_spec(id));
    VerifyReport rep;
    verify_entropy(model, VerifyOptions{}, rep);
    suite_clean(rep, out);
    out.require(rep.skipped.empty(), std::string(id) + " skipped entropy checks");
    for (const char* name : {"non_positivity", "strict_concavity", "almost_convexity", "strong_subadditivity",
                             "monotone_entropy_density", "gibbs_identity"}) {
      out.require(has_check(rep, name), std::string(id) + " missing " + name);
    }
  }
  // Gibbs identity against the brute-force pressure.
  const auto af = ising(-4);
  for (std::size_t n = 2; n <= 3; ++n) {
    const double slow = oracle::pressure(oracle::ising_table(-4), 2, 2, {0.5, 0.5}, n, false);
    out.require(std::abs(gibbs_function(gibbs_measure(n, af), af) - slow) <= 1e-10, "Gibbs identity vs oracle");
  }
  if (out.ok) out.detail = "zero violations";
  return out;
}

// 8
Outcome regularity() {
  Outcome out;
  const auto phi = ising(-4);
  const auto r = regularity_report(solve_self_consistent(phi), phi, kRegularityTol);
  out.require(r.ok, "report not ok");
  out.require(std::abs(r.c_star + 4.0) <= kRegularityTol, "C_* " + fmt("%.12g", r.c_star));
  out.require(r.lower == -6.0 && r.upper == -4.0, "bounds [" + fmt("%g", r.lower) + ", " + fmt("%g", r.upper) + "]");
  out.require(r.lower <= r.c_star + kRegularityTol && r.c_star <= r.upper + kRegularityTol, "C_* outside bounds");
  out.require(std::abs(r.c_star - r.upper) <= kRegularityTol, "upper bound not tight");
  out.require(r.density_ratio <= std::exp(4.0), "density ratio " + fmt("%g", r.density_ratio));
  out.require(r.el1_residual <= kRegularityTol, "EL1 residual " + fmt("%.3g", r.el1_residual));
  if (out.ok) out.detail = "C_* " + fmt("%.12f", r.c_star) + ", EL1 " + fmt("%.2e", r.el1_residual);
  return out;
}

// max g for the hard-core table by golden section on the one free weight
double hardcore_max_g() {
  auto neg_g = [](double p) {
    const std::vector<double> mu{p, 1 - p};
    const double energy = 100 * (p * p + (1 - p) * (1 - p)) - 8 * p * (1 - p);
    return -(oracle::entropy(mu, {0.5, 0.5}) - energy);
  };
  return -oracle::golden_min(neg_g, 1e-9, 1 - 1e-9);
}

// 9
Outcome duality() {
  Outcome out;
  const auto af = ising(-4);
  const auto a = saddle_audit(af, 10.0);
  out.require(a.ok && std::abs(a.gap) <= kSaddleTol, "antiferro gap " + fmt("%.3g", a.gap));
  const Interaction hardcore(af.space(), 2, {100, -4, -4, 100});
  double worst_gap = std::abs(a.gap);
  for (double C : {1.0, 2.0, 4.0, 8.0}) {
    const auto h = saddle_audit(hardcore, C);
    worst_gap = std::max(worst_gap, std::abs(h.gap));
    out.require(h.ok && std::abs(h.gap) <= kSaddleTol, "hard-core gap at C=" + fmt("%g", C) + " " + fmt("%.3g", h.gap));
  }
  struct Sweep {
    const Interaction* phi;
    double target;
    const char* name;
  };
  const double oracle_af = oracle::ising_g_tilde_af(0.0);
  for (const Sweep& s : {Sweep{&af, oracle_af, "antiferro"}, Sweep{&hardcore, hardcore_max_g(), "hard-core"}}) {
    double previous = kInf;
    for (double C : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double v = constrained_inf_g_tilde(*s.phi, C).value;
      out.require(v <= previous + 1e-12 * (1.0 + std::abs(v)), std::string(s.name) + " sweep not monotone at C=" + fmt("%g", C));
      if (C >= 4.0) out.require(std::abs(v - previous) <= kCauchyTol, std::string(s.name) + " sweep not Cauchy at C=" + fmt("%g", C));
      previous = v;
    }
    out.require(std::abs(previous - s.target) <= kCauchyTol, std::string(s.name) + " sweep limit " + fmt("%.10g", previous));
  }
  if (out.ok) out.detail = "worst gap " + fmt("%.2e", worst_gap) + ", sweeps reach max g";
  return out;
}

// 10
Outcome gradients() {
  Outcome out;
  std::vector<Model> models;
  for (const char* id : {"ising-af", "ising-f", "hardcore", "circle-af", "circle-f"}) models.push_back(build(builtin_spec(id)));
  {
    const auto s = StateSpace::make({0.1, 0.2, 0.3, 0.4});
    models.push_back(Model{"random-3body", s, Interaction(s, 3, oracle::random_symmetric_table(4, 3, 9)), {}});
  }
  double worst = 0.0;
  Rng rng(2024);
  for (const auto& model : models) {
    const std::size_t m = model.space->size();
    for (int k = 0; k < 50; ++k) {
      const auto mu = random_interior_measure(model.space, rng);
      const auto d = random_zero_sum(m, rng);
      double h = 1e-4;
      for (std::size_t i = 0; i < m; ++i) {
        if (d[i] != 0.0) h = std::min(h, 0.01 * mu[i] / std::abs(d[i]));
      }
      // Richardson-extrapolated centered difference along d.
      auto centered = [&](auto&& f, double step) {
        std::vector<double> p(m), q(m);
        for (std::size_t i = 0; i < m; ++i) {
          p[i] = mu[i] + step * d[i];
          q[i] = mu[i] - step * d[i];
        }
        return (f(DiscreteMeasure(model.space, p)) - f(DiscreteMeasure(model.space, q))) / (2 * step);
      };
      auto derivative = [&](auto&& f) { return (4.0 * centered(f, h / 2) - centered(f, h)) / 3.0; };
      const auto gt = grad_g_tilde(mu, model.phi);
      const auto gg = grad_g(mu, model.phi);
      double at = 0.0, ag = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        at += gt[i] * d[i];
        ag += gg[i] * d[i];
      }
      const double ft = derivative([&](const DiscreteMeasure& x) { return g_tilde(x, model.phi); });
      const double fg = derivative([&](const DiscreteMeasure& x) { return g(x, model.phi); });
      const double et = std::abs(ft - at) / std::max(1.0, std::abs(at));
      const double eg = std::abs(fg - ag) / std::max(1.0, std::abs(ag));
      worst = std::max({worst, et, eg});
      out.require(et <= kGradientTol, model.name + " grad_g_tilde " + fmt("%.3g", et));
      out.require(eg <= kGradientTol, model.name + " grad_g " + fmt("%.3g", eg));
    }
  }
  if (out.ok) out.detail = "worst relative error " + fmt("%.2e", worst) + " over " + std::to_string(models.size()) + " models";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"antiferro Ising: EVP, GdFP and exact pressure agree", 10, antiferro},
      {"ferro Ising: two maximizers, m* = tanh(4 m*), principles agree", 10, ferro},
      {"finite-N theorem suite on both Ising models, N <= 12", 5, finite_n},
      {"occupancy sums match brute-force enumeration", 30, brute_force},
      {"cavity functional suite", 10, cavity},
      {"push-forward convergence", 5, pushforward},
      {"entropy property suite", 5, entropy_suite},
      {"regularity lemma on the antiferro solution", 60, regularity},
      {"saddle gap and capped C-sweep", 60, duality},
      {"gradients match centered differences", 60, gradients},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.seconds) out.require(false, "took " + fmt("%.2f", elapsed) + " s, limit " + fmt("%g", c.seconds));
    std::printf("%s [%zu] %s (%.2f s): %s\n", out.ok ? "PASS" : "FAIL", i + 1, c.name, elapsed, out.detail.c_str());
    if (!out.ok) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
