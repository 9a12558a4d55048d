#include "mfs/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mfs {

namespace {

double kahan_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void check_weights(std::span<const double> w, double tol, const char* what) {
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": weights must be finite and nonnegative");
    }
  }
  const double total = kahan_sum(w);
  if (std::abs(total - 1.0) > tol) {
    throw std::invalid_argument(std::string(what) + ": weights sum to " + std::to_string(total) +
                                ", not 1");
  }
}

}  // namespace

StateSpace::StateSpace(std::vector<std::vector<double>> points, std::vector<double> alpha)
    : points_(std::move(points)), alpha_(std::move(alpha)) {
  if (alpha_.empty()) throw std::invalid_argument("StateSpace: need at least one site");
  for (double a : alpha_) {
    if (!(a > 0.0)) {
      throw std::invalid_argument("StateSpace: a priori weights must be strictly positive");
    }
  }
  check_weights(alpha_, kInputMassTol, "StateSpace");
  if (!points_.empty()) {
    if (points_.size() != alpha_.size()) {
      throw std::invalid_argument("StateSpace: point count differs from weight count");
    }
    dim_ = points_.front().size();
    for (const auto& p : points_) {
      if (p.size() != dim_) throw std::invalid_argument("StateSpace: ragged coordinates");
    }
  }
}

SpacePtr StateSpace::make(std::vector<double> alpha) {
  return std::make_shared<const StateSpace>(std::vector<std::vector<double>>{}, std::move(alpha));
}

SpacePtr StateSpace::make(std::vector<std::vector<double>> points, std::vector<double> alpha) {
  return std::make_shared<const StateSpace>(std::move(points), std::move(alpha));
}

SpacePtr StateSpace::uniform(std::size_t m) {
  if (m == 0) throw std::invalid_argument("StateSpace: need at least one site");
  return make(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

DiscreteMeasure::DiscreteMeasure(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) throw std::invalid_argument("DiscreteMeasure: null state space");
  if (weights_.size() != space_->size()) {
    throw std::invalid_argument("DiscreteMeasure: dimension mismatch with state space");
  }
  check_weights(weights_, kInputMassTol, "DiscreteMeasure");
}

DiscreteMeasure DiscreteMeasure::normalized(SpacePtr space, std::vector<double> weights) {
  for (double x : weights) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
    }
  }
  const double total = kahan_sum(weights);
  if (!(total > 0.0)) throw std::invalid_argument("DiscreteMeasure: zero total mass");
  for (double& x : weights) x /= total;
  return DiscreteMeasure(std::move(space), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::reference(SpacePtr space) {
  std::vector<double> w(space->alpha().begin(), space->alpha().end());
  return DiscreteMeasure(std::move(space), std::move(w));
}

DiscreteMeasure DiscreteMeasure::dirac(SpacePtr space, std::size_t site) {
  if (site >= space->size()) throw std::out_of_range("DiscreteMeasure::dirac: site out of range");
  std::vector<double> w(space->size(), 0.0);
  w[site] = 1.0;
  return DiscreteMeasure(std::move(space), std::move(w));
}

bool DiscreteMeasure::interior() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double x) { return x > 0.0; });
}

DiscreteMeasure mix(const DiscreteMeasure& a, const DiscreteMeasure& b, double theta) {
  if (a.size() != b.size()) throw std::invalid_argument("mix: dimension mismatch");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("mix: theta outside [0,1]");
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = theta * a[i] + (1.0 - theta) * b[i];
  return DiscreteMeasure::normalized(a.space(), std::move(w));
}

OccupancyVector::OccupancyVector(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw std::invalid_argument("OccupancyVector: no species");
  for (auto k : counts_) total_ += k;
  if (total_ == 0) throw std::invalid_argument("OccupancyVector: total must be positive");
}

std::uint64_t occupancy_count(std::size_t m, std::uint64_t total) {
  if (m == 0) return 0;
  // C(total + m - 1, m - 1) built incrementally; each partial product is a
  // binomial coefficient, so the division is exact.
  const std::uint64_t k = m - 1;
  __extension__ using u128 = unsigned __int128;
  u128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (total + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(acc);
}

void for_each_occupancy(std::size_t m, std::uint32_t total,
                        const std::function<void(std::span<const std::uint32_t>)>& visit) {
  if (m == 0) throw std::invalid_argument("for_each_occupancy: no species");
  std::vector<std::uint32_t> k(m, 0);
  k[m - 1] = total;
  while (true) {
    visit(k);
    // Successor in ascending lexicographic order: find the rightmost position
    // i < m-1 that can be incremented by borrowing from the tail.
    std::size_t i = m - 1;
    std::uint32_t tail = k[m - 1];
    while (i > 0) {
      --i;
      if (tail > 0) break;
      tail += k[i];
      if (i == 0) return;
    }
    if (m == 1 || tail == 0) return;
    ++k[i];
    --tail;
    for (std::size_t j = i + 1; j < m; ++j) k[j] = 0;
    k[m - 1] = tail;
  }
}

double log_multinomial(std::span<const std::uint32_t> counts) {
  double total = 0.0;
  double out = 0.0;
  for (auto k : counts) {
    total += k;
    out -= std::lgamma(static_cast<double>(k) + 1.0);
  }
  return out + std::lgamma(total + 1.0);
}

std::size_t dense_size(std::size_t m, std::size_t bodies, std::size_t cap) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < bodies; ++i) {
    if (n > cap / m) {
      throw CapExceeded("dense product space of size " + std::to_string(m) + "^" +
                        std::to_string(bodies) + " exceeds cap " + std::to_string(cap));
    }
    n *= m;
  }
  if (n > cap) throw CapExceeded("dense product space exceeds cap " + std::to_string(cap));
  return n;
}

DenseProductMeasure::DenseProductMeasure(SpacePtr space, std::size_t bodies,
                                         std::vector<double> weights, std::size_t cap)
    : space_(std::move(space)), bodies_(bodies), weights_(std::move(weights)) {
  if (!space_) throw std::invalid_argument("DenseProductMeasure: null state space");
  if (bodies_ == 0) throw std::invalid_argument("DenseProductMeasure: need at least one body");
  if (weights_.size() != dense_size(space_->size(), bodies_, cap)) {
    throw std::invalid_argument("DenseProductMeasure: weight count is not m^N");
  }
  check_weights(weights_, kProductMassTol, "DenseProductMeasure");
}

DenseProductMeasure DenseProductMeasure::product(const DiscreteMeasure& mu, std::size_t bodies,
                                                 std::size_t cap) {
  const std::size_t m = mu.size();
  const std::size_t total = dense_size(m, bodies, cap);
  std::vector<double> w(total, 1.0);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rest = c;
    double v = 1.0;
    for (std::size_t b = 0; b < bodies; ++b) {
      v *= mu[rest % m];
      rest /= m;
    }
    w[c] = v;
  }
  return DenseProductMeasure(mu.space(), bodies, std::move(w), cap);
}

std::size_t DenseProductMeasure::site(std::size_t config, std::size_t position) const {
  const std::size_t m = space_->size();
  for (std::size_t b = position + 1; b < bodies_; ++b) config /= m;
  return config % m;
}

std::vector<std::size_t> DenseProductMeasure::decode(std::size_t config) const {
  const std::size_t m = space_->size();
  std::vector<std::size_t> out(bodies_);
  for (std::size_t b = bodies_; b-- > 0;) {
    out[b] = config % m;
    config /= m;
  }
  return out;
}

double psi(double t) {
  if (t == 0.0) return 0.0;
  return -t * std::log(t);
}

double entropy1(const DiscreteMeasure& mu) {
  const auto& space = *mu.space();
  if (mu.size() != space.size()) throw std::invalid_argument("entropy1: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += psi(mu[i] / space.alpha(i)) * space.alpha(i);
  return s;
}

double entropyN(const DenseProductMeasure& rho) {
  const auto& space = *rho.space();
  const std::size_t m = space.size();
  double s = 0.0;
  for (std::size_t c = 0; c < rho.configurations(); ++c) {
    const double w = rho[c];
    if (w == 0.0) continue;
    double ref = 1.0;
    std::size_t rest = c;
    for (std::size_t b = 0; b < rho.bodies(); ++b) {
      ref *= space.alpha(rest % m);
      rest /= m;
    }
    s += psi(w / ref) * ref;
  }
  return s;
}

DenseProductMeasure marginal(const DenseProductMeasure& rho, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("marginal: empty index set");
  std::vector<std::size_t> keep(indices.begin(), indices.end());
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
    throw std::invalid_argument("marginal: repeated index");
  }
  if (keep.back() >= rho.bodies()) throw std::out_of_range("marginal: index beyond N");

  const std::size_t m = rho.space()->size();
  const std::size_t out_size = dense_size(m, keep.size(), rho.configurations());
  std::vector<double> w(out_size, 0.0);
  for (std::size_t c = 0; c < rho.configurations(); ++c) {
    const auto sites = rho.decode(c);
    std::size_t target = 0;
    for (auto idx : keep) target = target * m + sites[idx];
    w[target] += rho[c];
  }
  return DenseProductMeasure(rho.space(), keep.size(), std::move(w), out_size);
}

DiscreteMeasure empirical_measure(const SpacePtr& space, const OccupancyVector& occupancy) {
  if (occupancy.size() != space->size()) {
    throw std::invalid_argument("empirical_measure: dimension mismatch");
  }
  std::vector<double> w(occupancy.size());
  const double n = static_cast<double>(occupancy.total());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = occupancy[i] / n;
  return DiscreteMeasure::normalized(space, std::move(w));
}

double log_mean_exp(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("log_mean_exp: size mismatch");
  double shift = -kInf;
  bool any_weight = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("log_mean_exp: negative weight");
    if (weights[i] > 0.0) {
      any_weight = true;
      shift = std::max(shift, values[i]);
    }
  }
  if (!any_weight) throw std::invalid_argument("log_mean_exp: all weights zero");
  if (shift == -kInf) return -kInf;
  if (shift == kInf) return kInf;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0 && values[i] != -kInf) sum += weights[i] * std::exp(values[i] - shift);
  }
  return shift + std::log(sum);
}

}  // namespace mfs
