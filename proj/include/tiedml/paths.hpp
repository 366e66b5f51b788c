#pragma once

// Nondecreasing càdlàg step paths on a finite horizon and the path calculus
// used throughout: evaluation, inversion, waiting times, γ-scalings, the
// increment semiflow, tie-down, Stieltjes sums and a J1 upper bound.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tiedml {

/// Finite nondecreasing càdlàg step function on [0, horizon].
///
/// The path equals `initial` on [0, epochs[0]) and `values[j]` on
/// [epochs[j], epochs[j+1]). Epochs are strictly increasing in (0, horizon];
/// values are nondecreasing and not below `initial`. A horizon standing in for
/// ∞ is a truncation: functionals that reach it report censoring.
class StepPath {
 public:
  StepPath() = default;
  StepPath(double horizon, std::vector<double> epochs, std::vector<double> values,
           double initial = 0.0);

  /// Flat path at `value` on [0, horizon].
  static StepPath constant(double horizon, double value = 0.0);

  double horizon() const noexcept { return horizon_; }
  double initial() const noexcept { return initial_; }
  std::span<const double> epochs() const noexcept { return epochs_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t jump_count() const noexcept { return epochs_.size(); }
  double final_value() const noexcept { return values_.empty() ? initial_ : values_.back(); }
  /// Size of the j-th jump.
  double jump(std::size_t j) const noexcept {
    return values_[j] - (j == 0 ? initial_ : values_[j - 1]);
  }

  /// ξ(t), right-continuous. Throws DomainError outside [0, horizon].
  double eval(double t) const;
  /// ξ(t-), the left limit (ξ(0-) := ξ(0)).
  double eval_left(double t) const;

  /// Number of epochs ≤ t.
  std::size_t epochs_up_to(double t) const noexcept;

  friend bool operator==(const StepPath&, const StepPath&) = default;

 private:
  double horizon_ = 0.0;
  double initial_ = 0.0;
  std::vector<double> epochs_;
  std::vector<double> values_;
};

/// Read-only view of Δ_{a,γ}ξ, i.e. t ↦ ξ(a t)/a^γ, without materializing it.
class ScaledView {
 public:
  ScaledView(const StepPath& base, double a, double gamma);
  explicit ScaledView(const StepPath& base) : ScaledView(base, 1.0, 1.0) {}

  double eval(double t) const;
  double horizon() const noexcept { return horizon_; }
  double a() const noexcept { return a_; }

 private:
  const StepPath* base_;
  double a_;
  double inv_scale_;
  double horizon_;
};

/// Waiting time together with a censoring flag (the flat stretch reached the
/// truncation horizon).
struct WaitingTime {
  double time = 0.0;
  bool censored = false;
};

/// ξ^{-1}(t) := inf{s > 0 : ξ(s) > t} on t ∈ [0, value_range].
///
/// Throws DomainError if value_range exceeds the final value. Where t reaches
/// the final value the infimum is not certified by the truncation and the
/// output is capped at the input horizon.
StepPath inverse(const StepPath& path, double value_range);

/// 𝒢(ξ)(t) = inf{s ≤ t : ξ(s) = ξ(t)}: start of the flat stretch containing t.
double waiting_G(const StepPath& path, double t);

/// 𝒟(ξ)(t) = sup{s ≥ t : ξ(s) = ξ(t)}: end of the flat stretch containing t,
/// capped at the horizon with `censored` set when the stretch reaches it.
WaitingTime waiting_D(const StepPath& path, double t);

/// Δ_{a,γ}ξ = ξ(a·)/a^γ on [0, horizon/a].
StepPath scale(const StepPath& path, double a, double gamma);
/// Δ_{a,γ}ξ on [0, out_horizon]; requires a·out_horizon ≤ horizon.
StepPath scale(const StepPath& path, double a, double gamma, double out_horizon);

/// T_s ξ(t) = ξ(s+t) - ξ(s) on [0, horizon - s].
StepPath increment_shift(const StepPath& path, double s);

/// Δ_{G,γ}ξ restricted to [0,1] with G = 𝒢(ξ)(1). The result has its last
/// epoch exactly at 1. Throws DegenerateInputError if ξ has no increase in (0,1].
StepPath tie_down(const StepPath& path, double gamma);

/// Real functional on paths, evaluated through a ScaledView. `sup_norm` is the
/// declared bound ‖g‖_∞ (infinity when the functional is unbounded).
struct PathFunctional {
  std::string name;
  std::function<double(const ScaledView&)> fn;
  double sup_norm = 1.0;

  double operator()(const ScaledView& v) const { return fn(v); }
};

struct StieltjesResult {
  double value = 0.0;
  /// Bound on the part of the integral over (0, ε]: ‖g‖·(ξ(ε) - ξ(0)).
  double cutoff_bound = 0.0;
};

/// ∫_ε^1 g(Δ_{t,γ}ξ) dξ(t), as the exact finite sum over jump epochs in (ε, 1].
StieltjesResult stieltjes_functional(const PathFunctional& g, const StepPath& path, double gamma,
                                     double epsilon);

/// Search controls for j1_distance. Larger values never increase the bound.
struct J1Options {
  /// Maximum index gap between consecutive matched jumps in either path; the
  /// search costs O(m·k·max_gap²) segments for paths with m and k jumps.
  std::size_t max_gap = 4;
  /// Maximum number of slope thresholds tried.
  std::size_t max_thresholds = 64;
};

/// Upper bound on the Skorokhod J1 distance on [0, horizon]: the best
///   ‖ξ - η∘ℓ‖_∞ + ‖log ℓ'‖_∞
/// over piecewise-linear time changes ℓ that send matched jump epochs of ξ to
/// jump epochs of η (or of η to ξ, whichever is smaller), never worse than
/// ‖ξ - η‖_∞.
double j1_distance(const StepPath& p, const StepPath& q, double horizon,
                   const J1Options& options = {});

/// sup_{t∈[0,horizon]} |ξ(t) - η(t)|.
double uniform_distance(const StepPath& p, const StepPath& q, double horizon);

}  // namespace tiedml
