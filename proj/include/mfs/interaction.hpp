// Symmetric n-body interactions and the multilinear functional
// Phi(nu) = nu^{(x)n}(phi) with its first and second directional derivatives.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mfs/state_space.hpp"

namespace mfs {

inline constexpr std::size_t kMaxBodies = 4;
inline constexpr std::size_t kMaxTableSize = 100'000'000;

// Dense symmetric rank-n table over m^n site tuples. Entries may be +inf;
// every contraction treats a zero weight times +inf as zero.
class Interaction {
 public:
  // `table` is in lexicographic tuple order (first index most significant).
  // Throws unless the table is exactly permutation symmetric.
  Interaction(SpacePtr space, std::size_t bodies, std::vector<double> table);

  // Averages `table` over all permutations of its indices first.
  static Interaction symmetrized(SpacePtr space, std::size_t bodies, std::vector<double> table);

  const SpacePtr& space() const { return space_; }
  std::size_t bodies() const { return bodies_; }
  std::size_t sites() const { return space_->size(); }
  std::span<const double> table() const { return table_; }
  double at(std::span<const std::size_t> tuple) const;

  double lower_bound() const { return lower_bound_; }  // C_phi = inf phi
  double sup_norm() const { return sup_norm_; }        // may be +inf
  double compat() const { return compat_; }           // C_alpha = alpha^{(x)n}(phi)
  bool finite() const { return finite_; }

 private:
  SpacePtr space_;
  std::size_t bodies_;
  std::vector<double> table_;
  double lower_bound_ = 0.0;
  double sup_norm_ = 0.0;
  double compat_ = 0.0;
  bool finite_ = true;
};

// Symmetrization of a raw table over all index permutations.
std::vector<double> symmetrize_table(std::span<const double> table, std::size_t m,
                                     std::size_t bodies);

// Contracts the table against one weight vector per index. Vectors may be
// signed; a +inf entry met with a nonzero weight yields +inf when all weights
// are nonnegative and throws std::domain_error otherwise.
double contract(const Interaction& phi, std::span<const std::span<const double>> vectors);

// Contraction against nu on all but the last two indices: the m x m matrix K
// with Phi(nu) = nu^T K nu. Row-major. Requires a finite table when it would
// otherwise hold +inf.
std::vector<double> pair_kernel(const Interaction& phi, std::span<const double> nu);

double Phi(const DiscreteMeasure& nu, const Interaction& phi);

// n [nu^{(x)n-1} (x) mu](phi)
double Phi1(const DiscreteMeasure& nu, std::span<const double> mu, const Interaction& phi);
double Phi1(const DiscreteMeasure& nu, const DiscreteMeasure& mu, const Interaction& phi);

// Phi1(nu, delta_x) for every site x.
std::vector<double> one_body_field(const DiscreteMeasure& nu, const Interaction& phi);

// n(n-1) [nu^{(x)n-2} (x) mu (x) mu](phi), the second t-derivative of
// Phi(nu + t mu).
double Phi2(const DiscreteMeasure& nu, std::span<const double> mu, const Interaction& phi);

enum class Shape { Convex, Concave, Neither, Affine };

std::string to_string(Shape s);
Shape shape_from_string(const std::string& s);

struct ShapeClass {
  Shape shape = Shape::Affine;
  // n = 2: eigenvalues of the table restricted to the zero-sum subspace.
  // n > 2: {min, max} of sampled second derivatives.
  std::vector<double> certificate;

  bool convex() const { return shape == Shape::Convex || shape == Shape::Affine; }
  bool concave() const { return shape == Shape::Concave || shape == Shape::Affine; }
};

inline constexpr double kShapeTol = 1e-10;

ShapeClass classify_shape(const Interaction& phi);

}  // namespace mfs
