#include "mfs/duality.hpp"

#include <cmath>
#include <stdexcept>

#include "mfs/random.hpp"

namespace mfs {

double lagrangian(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Interaction& phi) {
  const double entropy = entropy1(mu);
  const double energy = Phi(nu, phi);
  const double cross = Phi1(nu, mu, phi);
  if (std::isinf(energy)) {
    throw std::domain_error("lagrangian: Phi(nu) is +inf, so -Phi(nu) + Phi1(nu, nu) is inf - inf");
  }
  if (std::isinf(cross)) return -kInf;
  const double n = static_cast<double>(phi.bodies());
  return entropy - energy - (cross - n * energy);
}

PartialOptimum partial_max_mu(const DiscreteMeasure& nu, const Interaction& phi) {
  return {g_tilde(nu, phi), sc_map(nu, phi), true};
}

PartialOptimum partial_min_nu(const DiscreteMeasure& mu, const Interaction& phi) {
  const auto shape = classify_shape(phi);
  if (shape.shape == Shape::Neither) {
    throw std::invalid_argument("partial_min_nu: Phi is neither convex nor concave");
  }
  return {g(mu, phi), mu, !shape.convex()};
}

namespace {

std::vector<double> cap_vector(const Interaction& phi, double cap_exponent) {
  if (!(cap_exponent >= 0.0)) throw std::invalid_argument("cap exponent C must be >= 0");
  std::vector<double> caps(phi.sites());
  for (std::size_t i = 0; i < caps.size(); ++i) caps[i] = std::exp(cap_exponent) * phi.space()->alpha(i);
  return caps;
}

}  // namespace

PartialOptimum capped_max_mu(const DiscreteMeasure& nu, const Interaction& phi, double cap_exponent) {
  const auto caps = cap_vector(phi, cap_exponent);
  const auto free_max = sc_map(nu, phi);
  DiscreteMeasure mu = DiscreteMeasure::normalized(phi.space(), project_capped(free_max.weights(), caps));
  return {lagrangian(mu, nu, phi), mu, true};
}

SaddleAudit saddle_audit(const Interaction& phi, double cap_exponent, const EvpOptions& evp_options,
                         const GdfpOptions& gdfp_options) {
  if (phi.bodies() != 2) throw std::invalid_argument("saddle_audit: requires n = 2");
  if (!phi.finite()) throw std::domain_error("saddle_audit: table has +inf entries");
  if (!classify_shape(phi).convex()) throw std::invalid_argument("saddle_audit: Phi must be convex");
  const auto caps = cap_vector(phi, cap_exponent);
  const auto space = phi.space();

  // max-min side: the capped GdFP maximizer.
  GdfpOptions go = gdfp_options;
  go.cap = cap_exponent;
  const auto primal = solve_self_consistent(phi, go);

  // min-max side: minimize nu -> max_{capped mu} L(mu, nu) by mirror descent.
  const double n = static_cast<double>(phi.bodies());
  Objective f = [&](std::span<const double> w) {
    const DiscreteMeasure nu(space, std::vector<double>(w.begin(), w.end()));
    return capped_max_mu(nu, phi, cap_exponent).value;
  };
  Gradient grad = [&](std::span<const double> w) {
    const DiscreteMeasure nu(space, std::vector<double>(w.begin(), w.end()));
    const auto best = capped_max_mu(nu, phi, cap_exponent).point;
    const auto field = one_body_field(nu, phi);
    const auto kernel = pair_kernel(phi, nu.weights());
    const std::size_t m = phi.sites();
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) {
      double cross = 0.0;
      for (std::size_t x = 0; x < m; ++x) cross += kernel[j * m + x] * best[x];
      out[j] = (n - 1.0) * field[j] - n * (n - 1.0) * cross;
    }
    return out;
  };
  MirrorOptions mo;
  mo.tol = evp_options.tol;
  mo.max_iter = evp_options.max_iter;
  const auto alpha = DiscreteMeasure::reference(space);
  const auto dual = mirror_descent(f, grad, std::vector<double>(alpha.weights().begin(), alpha.weights().end()),
                                   caps, mo);
  const auto evp = constrained_inf_g_tilde(phi, cap_exponent, evp_options);

  SaddleAudit audit(primal.maximizer);
  audit.cap = cap_exponent;
  audit.maxmin = primal.value;
  audit.minmax = dual.value;
  audit.gap = audit.minmax - audit.maxmin;
  audit.evp_capped_value = evp.value;
  audit.maxmin_iterations = primal.iterations;
  audit.minmax_iterations = dual.iterations;
  audit.minmax_stationarity = dual.stationarity;
  audit.converged = dual.converged && evp.converged;

  const auto& star = primal.maximizer;
  const double diagonal = lagrangian(star, star, phi);
  audit.mu_partial_gap = capped_max_mu(star, phi, cap_exponent).value - diagonal;
  double lowest = diagonal;
  Rng rng(evp_options.seed);
  std::vector<DiscreteMeasure> probes{alpha};
  for (std::size_t i = 0; i < phi.sites(); ++i) {
    probes.push_back(DiscreteMeasure::normalized(space, project_capped(DiscreteMeasure::dirac(space, i).weights(), caps)));
  }
  for (int r = 0; r < 16; ++r) {
    const auto v = random_interior_measure(space, rng);
    probes.push_back(DiscreteMeasure::normalized(space, project_capped(v.weights(), caps)));
  }
  for (const auto& nu : probes) lowest = std::min(lowest, lagrangian(star, nu, phi));
  audit.nu_partial_gap = diagonal - lowest;

  const double tol = 1e-6 * (1.0 + std::abs(audit.maxmin));
  audit.ok = audit.converged && audit.gap >= -1e-9 * (1.0 + std::abs(audit.maxmin)) &&
             std::abs(audit.gap) <= tol && audit.mu_partial_gap <= tol && audit.nu_partial_gap <= 1e-10;
  return audit;
}

}  // namespace mfs
