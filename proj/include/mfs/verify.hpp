// Invariant suites run by `mfs verify`. Each check aggregates many probes and
// records its worst case.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfs/models.hpp"

namespace mfs {

struct Check {
  std::string suite;
  std::string name;
  bool ok = true;
  double worst = 0.0;      // worst observed slack or error
  double tolerance = 0.0;
  std::size_t probes = 0;
  std::string detail;
};

struct VerifyReport {
  std::vector<Check> checks;
  std::vector<std::string> skipped;
  bool ok() const;
};

struct VerifyOptions {
  std::size_t n_max = 12;
  double cap = 10.0;
  std::uint64_t seed = 0;
  std::size_t probes = 100;
  std::uint64_t occupancy_cap = 10'000'000;
};

inline const std::vector<std::string> kSuites{"additivity", "bounds", "entropy", "cavity", "duality"};

// `suite` is one of kSuites or "all"; throws std::invalid_argument otherwise.
VerifyReport run_verify(const Model& model, const std::string& suite, const VerifyOptions& options = {});

void verify_additivity(const Model& model, const VerifyOptions& options, VerifyReport& report);
void verify_bounds(const Model& model, const VerifyOptions& options, VerifyReport& report);
void verify_entropy(const Model& model, const VerifyOptions& options, VerifyReport& report);
void verify_cavity(const Model& model, const VerifyOptions& options, VerifyReport& report);
void verify_duality(const Model& model, const VerifyOptions& options, VerifyReport& report);

// Symmetrization of a dense measure over all coordinate permutations.
DenseProductMeasure symmetrize(const DenseProductMeasure& rho);

DenseProductMeasure random_dense_measure(const SpacePtr& space, std::size_t bodies, std::uint64_t seed);

}  // namespace mfs
