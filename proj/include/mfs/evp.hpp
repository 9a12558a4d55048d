// The EVP objective g~, cavity functionals on atomic measures over measures,
// push-forward trial sequences, and the (free and density-capped) optimizers.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mfs/interaction.hpp"
#include "mfs/state_space.hpp"

namespace mfs {

// Finitely many weighted atoms, each a measure on the same state space.
class AtomicMetaMeasure {
 public:
  struct Atom {
    double weight;
    DiscreteMeasure measure;
  };

  explicit AtomicMetaMeasure(std::vector<Atom> atoms);
  static AtomicMetaMeasure dirac(const DiscreteMeasure& nu);

  std::span<const Atom> atoms() const { return atoms_; }
  double total_mass() const;
  AtomicMetaMeasure scaled(double t) const;

 private:
  std::vector<Atom> atoms_;
};

// (n-1) Phi(nu) + log sum_x alpha_x exp(-Phi1(nu, delta_x))
double g_tilde(const DiscreteMeasure& nu, const Interaction& phi);

// Ambient gradient of g~ in the weights; only its zero-sum projection is
// meaningful on the simplex. Requires interior nu and a finite table.
std::vector<double> grad_g_tilde(const DiscreteMeasure& nu, const Interaction& phi);

// Removes the mean so the vector is tangent to the simplex.
std::vector<double> project_zero_sum(std::span<const double> v);

// log sum_x alpha_x exp(-Phi1(nu, delta_x)), i.e. log A(nu).
double log_cavity_factor(const DiscreteMeasure& nu, const Interaction& phi);

struct CavityValues {
  double g1 = 0.0;
  double g2 = 0.0;
  double g = 0.0;  // g1 - g2
};

CavityValues cavity_G(const AtomicMetaMeasure& rho, std::size_t n_bodies, const Interaction& phi);

// Cavity functionals of the push-forward of the M-body trial density
// exp(-M^2/(M+N) Phi(mu_y)), evaluated exactly over M-occupancies.
CavityValues pushforward_cavity(std::size_t m_bodies, std::size_t n_bodies, const Interaction& phi,
                                std::uint64_t occupancy_cap = 10'000'000);

// ---------------------------------------------------------------------------
// Exponentiated-gradient descent on the simplex, optionally capped above.

struct MirrorOptions {
  double tol = 1e-11;
  std::size_t max_iter = 20000;
  double initial_step = 1.0;
  std::size_t max_escapes = 8;
};

struct MirrorResult {
  std::vector<double> point;
  double value = 0.0;
  double stationarity = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;  // stationarity per iteration
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<std::vector<double>(std::span<const double>)>;

// Minimizes `f` over {x in simplex : x_i <= caps_i}. With empty `caps` the
// set is the whole simplex. `start` must be interior and feasible.
MirrorResult mirror_descent(const Objective& f, const Gradient& grad, std::vector<double> start,
                            std::span<const double> caps, const MirrorOptions& options);

// Bregman (KL) projection onto the capped simplex: cap, rescale the uncapped
// coordinates, repeat until nothing new exceeds its cap.
std::vector<double> project_capped(std::span<const double> y, std::span<const double> caps);

// Stationarity measure at x for minimization over the capped simplex:
// the x-weighted spread of the gradient over coordinates free to move.
double simplex_stationarity(std::span<const double> x, std::span<const double> grad,
                            std::span<const double> caps);

// ---------------------------------------------------------------------------

struct EvpOptions {
  std::size_t restarts = 8;  // seeded interior starts (concave case)
  double tol = 1e-11;
  std::size_t max_iter = 20000;
  std::uint64_t seed = 0;
};

struct OptimumPoint {
  DiscreteMeasure point;
  double value;
  double stationarity;
};

struct EvpSolution {
  explicit EvpSolution(DiscreteMeasure optimizer) : minimizer(std::move(optimizer)) {}

  DiscreteMeasure minimizer;  // the optimizer, whichever the sense
  double value = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
  std::size_t restarts = 0;
  Shape shape = Shape::Affine;
  bool maximize = false;
  double stationarity = 0.0;
  bool converged = false;
  std::vector<OptimumPoint> optima;  // distinct local optima, best first
  std::optional<double> cap;         // density-cap exponent C when constrained
};

inline constexpr double kClusterRadius = 1e-6;

// Convex Phi: minimum of g~. Concave Phi: multi-start maximization with all
// distinct local maximizers reported.
EvpSolution minimize_g_tilde(const Interaction& phi, const EvpOptions& options = {});

// Infimum of g~ over measures with density at most e^C against alpha
// (n = 2, convex Phi).
EvpSolution constrained_inf_g_tilde(const Interaction& phi, double cap_exponent,
                                    const EvpOptions& options = {});

// Sup-norm distance between weight vectors.
double sup_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mfs
