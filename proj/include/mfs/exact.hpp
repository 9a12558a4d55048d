// Exact finite-N pressures by occupancy-number enumeration, Gibbs measures,
// the Gibbs function, and checks of the finite-N inequalities.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfs/interaction.hpp"
#include "mfs/state_space.hpp"

namespace mfs {

inline constexpr std::uint64_t kDefaultOccupancyCap = 10'000'000;

enum class HamiltonianKind { Standard, Evp };

// H_N on any configuration with the given occupancy.
double hamiltonian(const OccupancyVector& occupancy, const Interaction& phi);

// N * Phi(empirical measure).
double evp_hamiltonian(const OccupancyVector& occupancy, const Interaction& phi);

// log Z(N) (or log Z~(N)) by log-domain summation over occupancies.
double log_partition(std::size_t n_bodies, const Interaction& phi, HamiltonianKind which,
                     std::uint64_t occupancy_cap = kDefaultOccupancyCap);

// N^{-1} log Z(N).
double pressure(std::size_t n_bodies, const Interaction& phi, HamiltonianKind which,
                std::uint64_t occupancy_cap = kDefaultOccupancyCap);

DenseProductMeasure gibbs_measure(std::size_t n_bodies, const Interaction& phi,
                                  std::size_t dense_cap = kDefaultDenseCap);

// N^{-1} [S_N(rho) - rho(H_N)]
double gibbs_function(const DenseProductMeasure& rho, const Interaction& phi);

// n(n-1) ||phi||_inf / N, the gap allowed between p(N) and p~(N).
double pressure_gap_bound(std::size_t n_bodies, const Interaction& phi);

struct PressureRow {
  std::size_t n = 0;
  std::optional<double> p;  // empty below the body count
  double p_tilde = 0.0;
  double bound = 0.0;       // +inf when ||phi|| is infinite
  bool bound_ok = true;
};

struct PressureTable {
  std::string model;
  std::vector<PressureRow> rows;  // sorted by N
};

PressureTable pressure_table(const Interaction& phi, std::size_t n_min, std::size_t n_max,
                             std::string model = {},
                             std::uint64_t occupancy_cap = kDefaultOccupancyCap);

struct FiniteNCheck {
  std::string name;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

struct FiniteNReport {
  std::vector<FiniteNCheck> checks;
  std::vector<std::string> notes;
  std::size_t violations() const;
  bool ok() const { return violations() == 0; }
};

// Superadditivity of N p~(N) (reversed for concave Phi), subadditivity of
// N p(N), p(N) >= -C_alpha, and the |p - p~| bound for every admissible
// N1, N2 with N1 + N2 <= n_max.
FiniteNReport verify_finite_n(std::size_t n_max, const Interaction& phi,
                              std::uint64_t occupancy_cap = kDefaultOccupancyCap);

struct Extrapolation {
  double limit = 0.0;
  std::vector<double> coefficients;  // on {1, 1/N, ln N / N}
  double rms_residual = 0.0;
};

// Least-squares fit of p(N) on {1, 1/N, ln N / N}.
Extrapolation extrapolate_pressure(const PressureTable& table);
Extrapolation extrapolate_pressure(std::span<const std::size_t> ns, std::span<const double> ps);

}  // namespace mfs
