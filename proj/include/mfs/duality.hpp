// The joint Lagrangian L(mu, nu) linking the two variational principles,
// its partial optimizations, and a numerical minimax audit.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfs/evp.hpp"
#include "mfs/gdfp.hpp"
#include "mfs/interaction.hpp"

namespace mfs {

// S_1(mu) - Phi(nu) - [Phi1(nu, mu) - Phi1(nu, nu)]
double lagrangian(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Interaction& phi);

struct PartialOptimum {
  double value = 0.0;
  DiscreteMeasure point;
  bool is_max = true;
};

// max over mu of L(mu, nu): attained at mu proportional to
// alpha exp(-Phi1(nu, delta_x)) with value g~(nu).
PartialOptimum partial_max_mu(const DiscreteMeasure& nu, const Interaction& phi);

// Convex Phi: min over nu of L(mu, nu) = g(mu) at nu = mu. Concave Phi: the
// same pair is the max over nu (is_max set).
PartialOptimum partial_min_nu(const DiscreteMeasure& mu, const Interaction& phi);

// max of L(., nu) over measures with density <= e^C; the maximizer is the
// KL projection of the unconstrained one.
PartialOptimum capped_max_mu(const DiscreteMeasure& nu, const Interaction& phi, double cap_exponent);

struct SaddleAudit {
  explicit SaddleAudit(DiscreteMeasure candidate) : mu(std::move(candidate)) {}

  double maxmin = 0.0;           // max over capped mu of g
  double minmax = 0.0;           // min over capped nu of max over capped mu of L
  double gap = 0.0;              // minmax - maxmin
  double evp_capped_value = 0.0; // inf of g~ over the capped class
  double cap = 0.0;
  DiscreteMeasure mu;            // saddle candidate, nu = mu
  double mu_partial_gap = 0.0;   // max_mu L(mu, nu*) - L(mu*, nu*)
  double nu_partial_gap = 0.0;   // L(mu*, nu*) - min over probes L(mu*, nu)
  std::size_t maxmin_iterations = 0;
  std::size_t minmax_iterations = 0;
  double minmax_stationarity = 0.0;
  bool converged = false;
  bool ok = false;
};

SaddleAudit saddle_audit(const Interaction& phi, double cap_exponent, const EvpOptions& evp_options = {},
                         const GdfpOptions& gdfp_options = {});

}  // namespace mfs
