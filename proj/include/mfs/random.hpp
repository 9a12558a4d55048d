// Seeded, platform-independent draws used for multi-start points and probes.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mfs/state_space.hpp"

namespace mfs {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform on [0, 1) from the top 53 bits; std::uniform_real_distribution is
  // not reproducible across standard libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Weights proportional to independent Exp(1) draws (a flat Dirichlet sample),
// floored away from zero so the result is interior.
inline DiscreteMeasure random_interior_measure(const SpacePtr& space, Rng& rng) {
  std::vector<double> w(space->size());
  for (auto& x : w) x = -std::log1p(-rng.uniform()) + 1e-3;
  return DiscreteMeasure::normalized(space, std::move(w));
}

// Random direction with zero total mass, unit sup norm.
inline std::vector<double> random_zero_sum(std::size_t m, Rng& rng) {
  std::vector<double> d(m);
  double mean = 0.0;
  for (auto& x : d) {
    x = rng.uniform(-1.0, 1.0);
    mean += x;
  }
  mean /= static_cast<double>(m);
  double peak = 0.0;
  for (auto& x : d) {
    x -= mean;
    peak = std::max(peak, std::abs(x));
  }
  if (peak > 0.0) {
    for (auto& x : d) x /= peak;
  }
  return d;
}

}  // namespace mfs
