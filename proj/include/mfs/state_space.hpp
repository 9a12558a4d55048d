// Finite state spaces, probability measures on them and on small product
// spaces, and relative entropy functionals.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace mfs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerances on total mass.
inline constexpr double kInputMassTol = 1e-12;
inline constexpr double kProductMassTol = 1e-10;

inline constexpr std::size_t kDefaultDenseCap = 10'000'000;

// Raised when an enumeration or dense allocation would exceed its cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StateSpace {
 public:
  // `points` may be empty (abstract sites) or hold one coordinate vector per
  // site, all of the same dimension. `alpha` must be strictly positive and
  // sum to one.
  StateSpace(std::vector<std::vector<double>> points, std::vector<double> alpha);

  // Abstract sites without coordinates.
  static std::shared_ptr<const StateSpace> make(std::vector<double> alpha);
  static std::shared_ptr<const StateSpace> make(std::vector<std::vector<double>> points,
                                                std::vector<double> alpha);
  static std::shared_ptr<const StateSpace> uniform(std::size_t m);

  std::size_t size() const { return alpha_.size(); }
  std::size_t dim() const { return dim_; }
  bool has_coordinates() const { return !points_.empty(); }
  const std::vector<std::vector<double>>& points() const { return points_; }
  std::span<const double> alpha() const { return alpha_; }
  double alpha(std::size_t i) const { return alpha_[i]; }

 private:
  std::vector<std::vector<double>> points_;
  std::vector<double> alpha_;
  std::size_t dim_ = 0;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

// Probability weights on the sites of a StateSpace.
class DiscreteMeasure {
 public:
  DiscreteMeasure(SpacePtr space, std::vector<double> weights);

  // Normalizes nonnegative `weights` before validation.
  static DiscreteMeasure normalized(SpacePtr space, std::vector<double> weights);
  static DiscreteMeasure reference(SpacePtr space);  // alpha itself
  static DiscreteMeasure dirac(SpacePtr space, std::size_t site);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  bool interior() const;

 private:
  SpacePtr space_;
  std::vector<double> weights_;
};

// theta * a + (1 - theta) * b
DiscreteMeasure mix(const DiscreteMeasure& a, const DiscreteMeasure& b, double theta);

// Species counts summing to N.
class OccupancyVector {
 public:
  explicit OccupancyVector(std::vector<std::uint32_t> counts);

  std::span<const std::uint32_t> counts() const { return counts_; }
  std::uint32_t operator[](std::size_t i) const { return counts_[i]; }
  std::size_t size() const { return counts_.size(); }
  std::uint64_t total() const { return total_; }

 private:
  std::vector<std::uint32_t> counts_;
  std::uint64_t total_ = 0;
};

// Number of occupancy vectors with m species and total N, i.e. C(N+m-1, m-1),
// saturating at UINT64_MAX.
std::uint64_t occupancy_count(std::size_t m, std::uint64_t total);

// Visits every occupancy vector of m species summing to `total` in ascending
// lexicographic order, from (0,...,0,N) to (N,0,...,0).
void for_each_occupancy(std::size_t m, std::uint32_t total,
                        const std::function<void(std::span<const std::uint32_t>)>& visit);

// log of N! / prod k_i!
double log_multinomial(std::span<const std::uint32_t> counts);

// Measure on Omega^N stored densely, configurations in lexicographic order
// (first coordinate most significant).
class DenseProductMeasure {
 public:
  DenseProductMeasure(SpacePtr space, std::size_t bodies, std::vector<double> weights,
                      std::size_t cap = kDefaultDenseCap);

  static DenseProductMeasure product(const DiscreteMeasure& mu, std::size_t bodies,
                                     std::size_t cap = kDefaultDenseCap);

  const SpacePtr& space() const { return space_; }
  std::size_t bodies() const { return bodies_; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t config) const { return weights_[config]; }
  std::size_t configurations() const { return weights_.size(); }

  // Site index of coordinate `position` in configuration `config`.
  std::size_t site(std::size_t config, std::size_t position) const;
  std::vector<std::size_t> decode(std::size_t config) const;

 private:
  SpacePtr space_;
  std::size_t bodies_;
  std::vector<double> weights_;
};

// m^N with overflow detection; throws CapExceeded above `cap`.
std::size_t dense_size(std::size_t m, std::size_t bodies, std::size_t cap);

// -t log t with the value 0 at t = 0.
double psi(double t);

double entropy1(const DiscreteMeasure& mu);
double entropyN(const DenseProductMeasure& rho);

// Marginal on the (0-based) coordinate positions in `indices`, kept in
// increasing order.
DenseProductMeasure marginal(const DenseProductMeasure& rho, std::span<const std::size_t> indices);

DiscreteMeasure empirical_measure(const SpacePtr& space, const OccupancyVector& occupancy);

// log sum_i w_i exp(v_i), with -inf values contributing zero mass.
double log_mean_exp(std::span<const double> values, std::span<const double> weights);

}  // namespace mfs
