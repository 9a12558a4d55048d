// The product-measure objective g(mu) = S_1(mu) - Phi(mu), its
// self-consistency map, the damped fixed-point solver, and the regularity
// constants of the maximizer.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfs/interaction.hpp"
#include "mfs/state_space.hpp"

namespace mfs {

double g(const DiscreteMeasure& mu, const Interaction& phi);

// Ambient gradient of g: -log(mu_i / alpha_i) - 1 - Phi1(mu, delta_i).
std::vector<double> grad_g(const DiscreteMeasure& mu, const Interaction& phi);

// T(mu)_x proportional to alpha_x exp(-Phi1(mu, delta_x)).
DiscreteMeasure sc_map(const DiscreteMeasure& mu, const Interaction& phi);

// sup_x |T(mu)_x - mu_x|
double sc_residual(const DiscreteMeasure& mu, const Interaction& phi);

struct GdfpOptions {
  double damping = 0.5;
  double tol = 1e-13;
  std::size_t max_iter = 100000;
  std::size_t restarts = 8;  // seeded interior starts besides alpha and the vertices
  std::uint64_t seed = 0;
  // Density cap exponent C: iterate mu <- (1-theta) mu + theta P_C(T(mu))
  // with P_C the KL projection onto densities <= e^C.
  std::optional<double> cap;
};

struct FixedPoint {
  DiscreteMeasure mu;
  double value;
  double residual;
};

struct GdfpSolution {
  explicit GdfpSolution(DiscreteMeasure mu) : maximizer(std::move(mu)) {}

  DiscreteMeasure maximizer;
  double value = 0.0;
  double c_star = 0.0;    // Phi(mu*) - value
  double residual = 0.0;  // sup-norm residual of the fixed-point equation
  double damping = 0.0;   // smallest damping any restart needed
  std::size_t restarts = 0;
  std::size_t iterations = 0;
  std::vector<FixedPoint> fixed_points;  // distinct, best value first
  std::vector<std::string> failures;     // restarts that did not converge
  std::optional<double> cap;
};

GdfpSolution solve_self_consistent(const Interaction& phi, const GdfpOptions& options = {});

struct RegularityReport {
  double c_star = 0.0;
  double lower = 0.0;        // C_alpha + C_phi
  double upper = 0.0;        // 2 C_alpha
  double density_ratio = 0.0;
  double density_bound = 0.0;
  double el1_residual = 0.0;  // sup_x |log(mu_x/alpha_x) - (C_* - Phi1(mu, delta_x))|
  double identity_gap = 0.0;  // |C_* - (S_1(mu) - 2 value)|
  bool full_support = false;
  bool ok = false;
  std::vector<std::string> violations;
};

// Requires n = 2 and convex Phi.
RegularityReport regularity_report(const GdfpSolution& solution, const Interaction& phi,
                                   double tol = 1e-10);

}  // namespace mfs
