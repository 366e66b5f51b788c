#pragma once

// Samplers for the γ-stable subordinator η_γ, the Mittag-Leffler process
// 𝔪_γ = η_γ^{-1}, and the tied-down process 𝔴_γ, with Monte Carlo estimators
// for the identities that characterize 𝔴_γ.
//
// Normalization throughout: E(η_γ(1)^{-γ}) = E(𝔪_γ(1)) = 1.

#include <cstdint>
#include <vector>

#include "tiedml/functionals.hpp"
#include "tiedml/parallel.hpp"
#include "tiedml/paths.hpp"
#include "tiedml/stats.hpp"

namespace tiedml {

/// Tail index γ, strictly inside (0,1).
class GammaIndex {
 public:
  explicit GammaIndex(double gamma);
  double value() const noexcept { return gamma_; }
  operator double() const noexcept { return gamma_; }

 private:
  double gamma_;
};

struct SubordinatorSpec {
  GammaIndex gamma;
  /// Multiplier on the standard stable law; the normalized choice is
  /// Γ(1+γ)^{-1/γ}.
  double scale;
  /// Time step of the grid on which η is sampled.
  double grid_step;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  static SubordinatorSpec normalized(GammaIndex gamma, double grid_step, std::uint64_t seed,
                                     std::uint64_t stream = 0);
};

/// η on the grid {k·grid_step} ⊂ (0, horizon]: a step path with iid one-sided
/// stable increments per cell.
StepPath sample_subordinator(const SubordinatorSpec& spec, double horizon);

/// Step approximation of 𝔪_γ on [0, horizon]: jump epochs η(k·dt) and values
/// k·dt, i.e. the inverse of the grid subordinator lowered by one grid step so
/// that 𝔪(0) = 0. The subordinator is extended until it passes the horizon, so
/// the path is complete on [0, horizon]. `resolution` is the step height dt.
StepPath sample_ml_path(GammaIndex gamma, double horizon, double resolution, Rng& rng);

/// p!·Γ(1+γ)^p / Γ(1+pγ) = E(𝔪_γ(1)^p).
double ml_moment(GammaIndex gamma, int p);

/// E(𝔴_γ(1)^p) = E(𝔪_γ(1)^{p+1}) by size-biasing.
double tied_marginal_moment(GammaIndex gamma, int p);

struct TiedPath {
  StepPath path;
  /// Draws discarded because 𝔪 had no increase in (0,1].
  int resamples = 0;
};

/// tie_down of an 𝔪_γ sample on [0,1].
TiedPath sample_tied_path(GammaIndex gamma, double resolution, Rng& rng);

/// Samples of W_γ, read as the marginal 𝔴_γ(1).
struct TiedMarginal {
  GammaIndex gamma;
  std::vector<double> samples;
  int resamples = 0;
};

TiedMarginal sample_tied_marginal(GammaIndex gamma, std::size_t count, double resolution,
                                  std::uint64_t seed, std::uint64_t stream = 3);

/// Monte Carlo settings shared by the estimators.
struct McConfig {
  std::size_t samples = 100000;
  double resolution = 1e-3;
  std::uint64_t seed = 1;
  double z = 3.0;
  double tolerance = 0.0;
};

/// E(g(𝔴_γ)) for each functional, from one set of tied-down samples.
std::vector<stats::Estimate> estimate_tied_expectation(GammaIndex gamma,
                                                       const std::vector<PathFunctional>& gs,
                                                       const McConfig& config);

/// Both sides of  E h(𝔴_γ) = E ∫_0^1 h(Δ_{t,γ}𝔪_γ) d𝔪_γ(t)  for each h.
/// The left side uses tied-down samples, the right side Stieltjes sums over
/// independent 𝔪_γ samples with the integral started at ε; the mean ε-cutoff
/// bound is recorded in details.
std::vector<stats::ComparisonReport> estimate_propC(GammaIndex gamma,
                                                    const std::vector<PathFunctional>& hs,
                                                    const McConfig& config, double epsilon);

/// Both sides of  E 𝕘_t(𝔴_γ) = 𝔢_γ(𝕘_t)  for each product functional, where
///   𝔢_γ(𝕘_t) = E[ 𝔤(𝔪) 1{D ≤ 1} (1-D)^{-(1-γ)} h((1-D)^γ W) ],  D = 𝒟(𝔪_γ)(t_N),
/// with W an independent draw of 𝔴_γ(1).
std::vector<stats::ComparisonReport> estimate_propD(GammaIndex gamma,
                                                    const std::vector<ProductFunctional>& pfs,
                                                    const McConfig& config);

/// Density of Z_γ = η_γ(1) under the normalization above.
double stable_density(GammaIndex gamma, double x);

}  // namespace tiedml
