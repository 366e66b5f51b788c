#pragma once

// Test functions on paths: scalar factors with a finite limit at ∞ and the
// product functionals  ∏ g_ν(ξ(t_ν)) · h(ξ(1) - ξ(t_N)).

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tiedml/paths.hpp"

namespace tiedml {

/// Scalar function on [0,∞] drawn from a fixed family so that continuity on
/// the compactified half-line is guaranteed by construction. `monomial` is the
/// one unbounded member; it exists for exact-computation checks only and
/// reports bounded() == false.
class Factor {
 public:
  struct Constant { double c; };
  struct Exponential { double rate; };        // e^{-rate·x}
  struct InversePower { double beta; };       // (1+x)^{-beta}
  struct Spline {                             // linear, constant outside knots
    std::vector<double> knots;
    std::vector<double> values;
  };
  struct Monomial { double power; };          // x^power

  static Factor constant(double c);
  static Factor exponential(double rate);
  static Factor inverse_power(double beta);
  static Factor spline(std::vector<double> knots, std::vector<double> values);
  static Factor monomial(double power);

  /// Parses `const(c)`, `exp(rate)`, `invpow(beta)`, `pow(p)` or
  /// `spline(x0:y0,x1:y1,...)`. Throws ConfigError.
  static Factor parse(std::string_view spec);
  std::string spec() const;

  double operator()(double x) const;
  double limit_at_infinity() const;
  double sup_norm() const;
  bool bounded() const;

 private:
  using Kind = std::variant<Constant, Exponential, InversePower, Spline, Monomial>;
  explicit Factor(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// 𝕘_t(ξ) = ∏_{ν=1}^N g_ν(ξ(t_ν)) · h(ξ(1) - ξ(t_N)), with 0 ≤ t_1 < ... < t_N < 1.
/// N = 0 is allowed and reads as h(ξ(1) - ξ(0)).
class ProductFunctional {
 public:
  ProductFunctional(std::vector<double> times, std::vector<Factor> factors, Factor terminal);

  /// The functional identically equal to 1.
  static ProductFunctional unit();

  /// Parses `t1=factor;t2=factor;...;h=factor`, e.g. `0.5=exp(1);h=exp(1)`.
  static ProductFunctional parse(std::string_view spec);
  std::string spec() const;

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Factor>& factors() const noexcept { return factors_; }
  const Factor& terminal() const noexcept { return terminal_; }
  double last_time() const noexcept { return times_.empty() ? 0.0 : times_.back(); }

  bool bounded() const;
  double sup_norm() const;

  /// Evaluates on any path-like object with eval(t) defined on [0,1].
  template <typename PathLike>
  double evaluate(const PathLike& path) const {
    double product = 1.0;
    for (std::size_t nu = 0; nu < times_.size(); ++nu) {
      product *= factors_[nu](path.eval(times_[nu]));
    }
    return product * terminal_(path.eval(1.0) - path.eval(last_time()));
  }

 private:
  std::vector<double> times_;
  std::vector<Factor> factors_;
  Factor terminal_;
};

/// 𝕘_t(path) for a path on [0,1] (horizon ≥ 1 accepted).
double eval_product(const ProductFunctional& pf, const StepPath& path);

/// ξ ↦ H(ξ(1)).
PathFunctional terminal_functional(const Factor& h);
/// ξ ↦ 𝕘_t(ξ).
PathFunctional product_path_functional(const ProductFunctional& pf);
/// ξ ↦ c.
PathFunctional constant_functional(double c);

}  // namespace tiedml
