#include "mfs/interaction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mfs/random.hpp"

namespace mfs {

namespace {

std::size_t checked_table_size(std::size_t m, std::size_t bodies) {
  if (bodies < 2 || bodies > kMaxBodies) {
    throw std::invalid_argument("Interaction: body count must be in [2, " +
                                std::to_string(kMaxBodies) + "]");
  }
  return dense_size(m, bodies, kMaxTableSize);
}

std::vector<std::size_t> decode_tuple(std::size_t index, std::size_t m, std::size_t bodies) {
  std::vector<std::size_t> t(bodies);
  for (std::size_t b = bodies; b-- > 0;) {
    t[b] = index % m;
    index /= m;
  }
  return t;
}

std::size_t encode_tuple(std::span<const std::size_t> t, std::size_t m) {
  std::size_t index = 0;
  for (auto s : t) index = index * m + s;
  return index;
}

// Contracts the trailing vectors.size() indices of a rank-`rank` array.
std::vector<double> contract_tail(std::span<const double> table, std::size_t m, std::size_t rank,
                                  std::span<const std::span<const double>> vectors) {
  if (vectors.size() > rank) throw std::invalid_argument("contract: too many vectors");
  bool nonnegative = true;
  for (auto v : vectors) {
    if (v.size() != m) throw std::invalid_argument("contract: dimension mismatch");
    for (double x : v) nonnegative = nonnegative && x >= 0.0;
  }
  std::vector<double> current(table.begin(), table.end());
  for (std::size_t k = vectors.size(); k-- > 0;) {
    // vectors[k] contracts index (rank - vectors.size() + k), which is the
    // last remaining index at this point.
    const auto w = vectors[k];
    std::vector<double> next(current.size() / m, 0.0);
    for (std::size_t r = 0; r < next.size(); ++r) {
      double acc = 0.0;
      bool infinite = false;
      for (std::size_t j = 0; j < m; ++j) {
        if (w[j] == 0.0) continue;
        const double entry = current[r * m + j];
        if (std::isinf(entry)) {
          if (!nonnegative) {
            throw std::domain_error("contract: +inf table entry reached with a signed weight");
          }
          infinite = true;
          continue;
        }
        acc += w[j] * entry;
      }
      next[r] = infinite ? kInf : acc;
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace

Interaction::Interaction(SpacePtr space, std::size_t bodies, std::vector<double> table)
    : space_(std::move(space)), bodies_(bodies), table_(std::move(table)) {
  if (!space_) throw std::invalid_argument("Interaction: null state space");
  const std::size_t m = space_->size();
  if (table_.size() != checked_table_size(m, bodies_)) {
    throw std::invalid_argument("Interaction: table size is not m^n");
  }
  for (double v : table_) {
    if (std::isnan(v) || v == -kInf) {
      throw std::invalid_argument("Interaction: entries must be real or +inf");
    }
  }
  std::vector<std::size_t> perm(bodies_);
  for (std::size_t idx = 0; idx < table_.size(); ++idx) {
    auto t = decode_tuple(idx, m, bodies_);
    // Adjacent transpositions generate the symmetric group.
    for (std::size_t b = 0; b + 1 < bodies_; ++b) {
      std::swap(t[b], t[b + 1]);
      const double other = table_[encode_tuple(t, m)];
      std::swap(t[b], t[b + 1]);
      if (other != table_[idx]) throw std::invalid_argument("Interaction: table is not symmetric");
    }
  }

  lower_bound_ = *std::min_element(table_.begin(), table_.end());
  sup_norm_ = 0.0;
  for (double v : table_) sup_norm_ = std::max(sup_norm_, std::abs(v));
  finite_ = std::isfinite(sup_norm_);

  std::vector<std::span<const double>> alphas(bodies_, space_->alpha());
  compat_ = contract_tail(table_, m, bodies_, alphas).front();
}

Interaction Interaction::symmetrized(SpacePtr space, std::size_t bodies,
                                     std::vector<double> table) {
  const std::size_t m = space->size();
  if (table.size() != checked_table_size(m, bodies)) {
    throw std::invalid_argument("Interaction: table size is not m^n");
  }
  return Interaction(std::move(space), bodies, symmetrize_table(table, m, bodies));
}

double Interaction::at(std::span<const std::size_t> tuple) const {
  if (tuple.size() != bodies_) throw std::invalid_argument("Interaction::at: wrong arity");
  return table_[encode_tuple(tuple, sites())];
}

std::vector<double> symmetrize_table(std::span<const double> table, std::size_t m,
                                     std::size_t bodies) {
  std::vector<double> out(table.size());
  std::vector<std::size_t> order(bodies);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    const auto t = decode_tuple(idx, m, bodies);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double sum = 0.0;
    std::size_t count = 0;
    bool infinite = false;
    std::vector<std::size_t> permuted(bodies);
    do {
      for (std::size_t b = 0; b < bodies; ++b) permuted[b] = t[order[b]];
      const double v = table[encode_tuple(permuted, m)];
      if (std::isinf(v)) infinite = true;
      else sum += v;
      ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    // Entries already equal across the orbit are copied so that symmetric
    // input is reproduced bit for bit.
    bool constant = true;
    std::iota(order.begin(), order.end(), std::size_t{0});
    do {
      for (std::size_t b = 0; b < bodies; ++b) permuted[b] = t[order[b]];
      constant = constant && table[encode_tuple(permuted, m)] == table[idx];
    } while (constant && std::next_permutation(order.begin(), order.end()));
    if (infinite) out[idx] = kInf;
    else if (constant) out[idx] = table[idx];
    else out[idx] = sum / static_cast<double>(count);
  }
  return out;
}

double contract(const Interaction& phi, std::span<const std::span<const double>> vectors) {
  if (vectors.size() != phi.bodies()) throw std::invalid_argument("contract: need n vectors");
  return contract_tail(phi.table(), phi.sites(), phi.bodies(), vectors).front();
}

std::vector<double> pair_kernel(const Interaction& phi, std::span<const double> nu) {
  std::vector<std::span<const double>> vs(phi.bodies() - 2, nu);
  return contract_tail(phi.table(), phi.sites(), phi.bodies(), vs);
}

double Phi(const DiscreteMeasure& nu, const Interaction& phi) {
  if (nu.size() != phi.sites()) throw std::invalid_argument("Phi: dimension mismatch");
  std::vector<std::span<const double>> vs(phi.bodies(), nu.weights());
  return contract(phi, vs);
}

double Phi1(const DiscreteMeasure& nu, std::span<const double> mu, const Interaction& phi) {
  if (nu.size() != phi.sites() || mu.size() != phi.sites()) {
    throw std::invalid_argument("Phi1: dimension mismatch");
  }
  std::vector<std::span<const double>> vs(phi.bodies(), nu.weights());
  vs.back() = mu;
  const double v = contract(phi, vs);
  return std::isinf(v) ? v : static_cast<double>(phi.bodies()) * v;
}

double Phi1(const DiscreteMeasure& nu, const DiscreteMeasure& mu, const Interaction& phi) {
  return Phi1(nu, mu.weights(), phi);
}

std::vector<double> one_body_field(const DiscreteMeasure& nu, const Interaction& phi) {
  if (nu.size() != phi.sites()) throw std::invalid_argument("one_body_field: dimension mismatch");
  std::vector<std::span<const double>> vs(phi.bodies() - 1, nu.weights());
  auto field = contract_tail(phi.table(), phi.sites(), phi.bodies(), vs);
  const double n = static_cast<double>(phi.bodies());
  for (auto& f : field) {
    if (!std::isinf(f)) f *= n;
  }
  return field;
}

double Phi2(const DiscreteMeasure& nu, std::span<const double> mu, const Interaction& phi) {
  if (nu.size() != phi.sites() || mu.size() != phi.sites()) {
    throw std::invalid_argument("Phi2: dimension mismatch");
  }
  std::vector<std::span<const double>> vs(phi.bodies(), nu.weights());
  vs[phi.bodies() - 1] = mu;
  vs[phi.bodies() - 2] = mu;
  const double n = static_cast<double>(phi.bodies());
  const double v = contract(phi, vs);
  if (std::isinf(v)) throw std::domain_error("Phi2: +inf entry reached");
  return n * (n - 1.0) * v;
}

std::string to_string(Shape s) {
  switch (s) {
    case Shape::Convex: return "convex";
    case Shape::Concave: return "concave";
    case Shape::Neither: return "neither";
    case Shape::Affine: return "affine";
  }
  return "unknown";
}

Shape shape_from_string(const std::string& s) {
  if (s == "convex") return Shape::Convex;
  if (s == "concave") return Shape::Concave;
  if (s == "neither") return Shape::Neither;
  if (s == "affine") return Shape::Affine;
  throw std::invalid_argument("unknown shape '" + s + "'");
}

namespace {

Shape shape_from_range(double lo, double hi) {
  const bool convex = lo >= -kShapeTol;
  const bool concave = hi <= kShapeTol;
  if (convex && concave) return Shape::Affine;
  if (convex) return Shape::Convex;
  if (concave) return Shape::Concave;
  return Shape::Neither;
}

}  // namespace

ShapeClass classify_shape(const Interaction& phi) {
  const std::size_t m = phi.sites();
  if (!phi.finite()) {
    throw std::invalid_argument("classify_shape: table has +inf entries; classify its finite part");
  }
  ShapeClass out;
  if (m == 1) {
    out.shape = Shape::Affine;
    return out;
  }

  if (phi.bodies() == 2) {
    // Orthonormal Helmert basis of the zero-sum subspace.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                              static_cast<Eigen::Index>(m - 1));
    for (std::size_t k = 1; k < m; ++k) {
      const double norm = std::sqrt(static_cast<double>(k * (k + 1)));
      for (std::size_t i = 0; i < k; ++i) q(static_cast<Eigen::Index>(i), k - 1) = 1.0 / norm;
      q(static_cast<Eigen::Index>(k), k - 1) = -static_cast<double>(k) / norm;
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> table(
        phi.table().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd restricted = q.transpose() * table * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(restricted, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    out.certificate.assign(ev.data(), ev.data() + ev.size());
    out.shape = shape_from_range(ev.minCoeff(), ev.maxCoeff());
    return out;
  }

  Rng rng(0);
  double lo = kInf, hi = -kInf;
  const auto alpha = DiscreteMeasure::reference(phi.space());
  for (std::size_t s = 0; s < 256; ++s) {
    const auto nu = (s == 0) ? alpha : random_interior_measure(phi.space(), rng);
    const auto dir = random_zero_sum(m, rng);
    const double d2 = Phi2(nu, dir, phi);
    lo = std::min(lo, d2);
    hi = std::max(hi, d2);
  }
  out.certificate = {lo, hi};
  out.shape = shape_from_range(lo, hi);
  return out;
}

}  // namespace mfs
