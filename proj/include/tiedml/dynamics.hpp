#pragma once

// The intermittent interval maps
//   T_γ(x) = x(1 + (2x)^{1/γ}) on [0, 1/2),   2x - 1 on [1/2, 1],
// with return set Ω = [1/2, 1]: orbits, return times, an Ulam approximation of
// the invariant density, empirical return sequences, and the Monte Carlo
// occupation statistic for tied-down limits.

#include <cstdint>
#include <span>
#include <vector>

#include "tiedml/functionals.hpp"
#include "tiedml/parallel.hpp"
#include "tiedml/stats.hpp"

namespace tiedml::dynamics {

double lsv_map(double gamma, double x);

/// Preimage of y ∈ [0, 1] under the left branch.
double left_branch_inverse(double gamma, double y);

struct ReturnTime {
  std::uint64_t steps = 0;
  bool censored = false;
};

/// min{j ≥ 1 : T^j x ∈ Ω} for x ∈ Ω, or `cap` with the censored flag.
ReturnTime return_time(double gamma, double x, std::uint64_t cap = 10'000'000);

struct UlamOptions {
  /// Number of equal cells on [0, 1]; cells near 0 are refined geometrically.
  std::size_t uniform_cells = 4000;
  /// Right end of the cell containing the fixed point.
  double x_min = 1e-7;
  /// Ratio of consecutive geometric cell edges.
  double ratio = 1.02;
};

/// Piecewise-constant density on the Ulam partition, normalized so that its
/// integral over Ω equals 1.
struct DensityTable {
  double gamma = 0.0;
  std::vector<double> edges;   // cell boundaries, edges.front() = 0, edges.back() = 1
  std::vector<double> values;  // density on each cell
  /// ‖π - P̂ᵀπ‖₁ / ‖π‖₁ for the cell masses π.
  double residual = 0.0;
  std::size_t omega_begin = 0;  // first cell inside Ω
  std::vector<double> omega_cdf;

  std::size_t cells() const noexcept { return values.size(); }
  /// Draw from the density restricted to Ω.
  double sample_omega(Rng& rng) const;
};

DensityTable ulam_density(double gamma, const UlamOptions& options = {});

/// Least-squares slope of log h against log x over cells with centres in [lo, hi].
double density_slope(const DensityTable& table, double lo, double hi);

/// Ω-visit epochs k ∈ [1, n] of orbits started from the invariant law on Ω.
struct OrbitSet {
  double gamma = 0.0;
  std::size_t n = 0;
  std::vector<std::vector<std::uint32_t>> visits;
  /// Orbits that reached the fixed point 0 exactly in floating point.
  std::size_t absorbed = 0;
};

OrbitSet simulate_orbits(const DensityTable& density, std::size_t n, std::size_t samples,
                         std::uint64_t seed);

/// û(k) = fraction of orbits with T^k x ∈ Ω, â(n) = Σ_{k ≤ n} û(k), k = 0..n
/// (û(0) = 1 and â(0) = 0).
struct EmpiricalReturns {
  std::vector<double> u_hat;
  std::vector<double> a_hat;
};

EmpiricalReturns empirical_returns(const OrbitSet& orbits);
EmpiricalReturns empirical_return_sequence(double gamma, std::size_t n_max, std::size_t samples,
                                           std::uint64_t seed, const UlamOptions& options = {});

/// Fraction of orbits whose first return exceeds m, for each m.
std::vector<double> return_tail(const OrbitSet& orbits, std::span<const std::size_t> ms);

/// Per orbit: (1/â(n)) Σ_{k ≤ n, T^k x ∈ Ω} 𝕘_t(ψ_k), ψ_k(t) = s_{⌊kt⌋}/â(k),
/// where s_τ counts Ω-visits at times 1..τ. Returns the Monte Carlo mean and
/// its standard error.
stats::Estimate umbrella_statistic(const OrbitSet& orbits, const EmpiricalReturns& returns,
                                   const ProductFunctional& pf, std::size_t n);

/// Umbrella statistic against a reference value of E 𝕘_t(𝔴_γ); passes when the
/// relative gap is at most `relative_tolerance`.
stats::ComparisonReport verify_umbrella_mc(const OrbitSet& orbits, const EmpiricalReturns& returns,
                                           const ProductFunctional& pf, std::size_t n,
                                           const stats::Estimate& reference,
                                           double relative_tolerance = 0.15);

}  // namespace tiedml::dynamics
