#pragma once

// One-sided γ-stable laws. The standard variate S has Laplace transform
// E e^{-λS} = e^{-λ^γ}; the normalized variate used for subordinators is
//   Z_γ = S / Γ(1+γ)^{1/γ},   so that   E(Z_γ^{-γ}) = 1.

#include <cmath>

#include "tiedml/parallel.hpp"

namespace tiedml::stable {

/// Kanter's function A(u) on (0, π):
///   A(u) = sin(γu)^{γ/(1-γ)} sin((1-γ)u) / sin(u)^{1/(1-γ)}.
double kanter_function(double gamma, double u);
double log_kanter_function(double gamma, double u);

/// Standard one-sided stable variate (Chambers-Mallows-Stuck with total
/// skewness, i.e. Kanter's representation S = (A(U)/E)^{(1-γ)/γ}).
double sample_standard(double gamma, Rng& rng);

/// log of the normalized variate Z_γ scaled by dt^{1/γ}: the log-increment of
/// the normalized subordinator over a time step dt.
double sample_log_increment(double gamma, double log_dt, Rng& rng);

/// Increments of the normalized subordinator over cells of length dt, with the
/// constants of Kanter's representation computed once.
class IncrementSampler {
 public:
  IncrementSampler(double gamma, double dt);
  double log_increment(Rng& rng) const;
  double operator()(Rng& rng) const { return std::exp(log_increment(rng)); }

 private:
  double gamma_;
  double one_minus_gamma_;
  double exponent_a_;  // (1-γ)/γ
  double exponent_b_;  // 1/γ
  double log_offset_;  // (log dt - log Γ(1+γ))/γ
};

/// Γ(1+γ)^{-1/γ}: Z_γ = normalized_scale(γ) · S.
double normalized_scale(double gamma);

/// 𝔪_γ(1) in law: Γ(1+γ)·S^{-γ}, mean 1.
double sample_ml_marginal(double gamma, Rng& rng);

/// Density of S via Zolotarev's integral
///   f_S(x) = γ/(1-γ) · x^{-1/(1-γ)} · (1/π) ∫_0^π A(u) exp(-x^{-γ/(1-γ)} A(u)) du.
/// Throws NumericError when the adaptive quadrature misses its tolerance.
double standard_density(double gamma, double x);

/// Density of Z_γ: f_Z(x) = k f_S(k x) with k = Γ(1+γ)^{1/γ}.
double normalized_density(double gamma, double x);

}  // namespace tiedml::stable
