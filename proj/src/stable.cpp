#include "tiedml/stable.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"

namespace tiedml::stable {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("stable law: gamma must lie in (0,1)");
}

}  // namespace

double log_kanter_function(double gamma, double u) {
  const double r = 1.0 / (1.0 - gamma);
  return gamma * r * std::log(std::sin(gamma * u)) + std::log(std::sin((1.0 - gamma) * u)) -
         r * std::log(std::sin(u));
}

double kanter_function(double gamma, double u) { return std::exp(log_kanter_function(gamma, u)); }

double sample_standard(double gamma, Rng& rng) {
  check_gamma(gamma);
  std::uniform_real_distribution<double> uniform(0.0, std::numbers::pi);
  std::exponential_distribution<double> expo(1.0);
  double u = 0.0;
  while (u == 0.0) u = uniform(rng);
  const double e = expo(rng);
  return std::exp((1.0 - gamma) / gamma * (log_kanter_function(gamma, u) - std::log(e)));
}

double sample_log_increment(double gamma, double log_dt, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, std::numbers::pi);
  std::exponential_distribution<double> expo(1.0);
  double u = 0.0;
  while (u == 0.0) u = uniform(rng);
  const double e = expo(rng);
  const double log_s = (1.0 - gamma) / gamma * (log_kanter_function(gamma, u) - std::log(e));
  return (log_dt - std::lgamma(1.0 + gamma)) / gamma + log_s;
}

IncrementSampler::IncrementSampler(double gamma, double dt)
    : gamma_(gamma),
      one_minus_gamma_(1.0 - gamma),
      exponent_a_((1.0 - gamma) / gamma),
      exponent_b_(1.0 / gamma),
      log_offset_((std::log(dt) - std::lgamma(1.0 + gamma)) / gamma) {
  check_gamma(gamma);
  if (!(dt > 0.0)) throw DomainError("stable increments: dt must be positive");
}

double IncrementSampler::log_increment(Rng& rng) const {
  constexpr double kScale = 0x1.0p-53;
  double u = 0.0;
  while (u == 0.0) u = static_cast<double>(rng() >> 11) * kScale * std::numbers::pi;
  double v = 0.0;
  while (v == 0.0) v = static_cast<double>(rng() >> 11) * kScale;
  const double e = -std::log(v);
  const double s_gamma = std::sin(gamma_ * u);
  const double s_rest = std::sin(one_minus_gamma_ * u);
  const double s_full = std::sin(u);
  // S = sin(γu) · (sin((1-γ)u)/E)^{(1-γ)/γ} · sin(u)^{-1/γ}
  return log_offset_ + std::log(s_gamma) + exponent_a_ * std::log(s_rest / e) -
         exponent_b_ * std::log(s_full);
}

double normalized_scale(double gamma) {
  check_gamma(gamma);
  return std::exp(-std::lgamma(1.0 + gamma) / gamma);
}

double sample_ml_marginal(double gamma, Rng& rng) {
  const double s = sample_standard(gamma, rng);
  return std::tgamma(1.0 + gamma) * std::pow(s, -gamma);
}

namespace {

// (1/π) Σ_{k≥1} (-1)^{k+1} Γ(kγ+1)/k! · sin(πkγ) · x^{-kγ-1}.
double density_series(double gamma, double x) {
  const double z = std::pow(x, -gamma);
  numeric::CompensatedSum sum;
  double z_power = 1.0;
  for (int k = 1; k <= 400; ++k) {
    const double kd = static_cast<double>(k);
    z_power *= z;
    const double magnitude = std::exp(std::lgamma(kd * gamma + 1.0) - std::lgamma(kd + 1.0)) * z_power;
    const double term = (k % 2 == 1 ? 1.0 : -1.0) * magnitude * std::sin(std::numbers::pi * kd * gamma);
    sum += term;
    if (magnitude < 1e-18 * std::abs(sum.value())) break;
  }
  return sum.value() / (std::numbers::pi * x);
}

}  // namespace

double standard_density(double gamma, double x) {
  check_gamma(gamma);
  if (!(x > 0.0)) throw DomainError("stable density: x must be positive");
  if (std::pow(x, -gamma) <= 0.25) return density_series(gamma, x);
  const double r = 1.0 / (1.0 - gamma);
  const double c = std::pow(x, -gamma * r);
  auto integrand = [&](double u) {
    if (u <= 0.0 || u >= std::numbers::pi) return 0.0;
    const double log_a = log_kanter_function(gamma, u);
    const double ca = c * std::exp(log_a);
    if (!(ca < 745.0)) return 0.0;
    return std::exp(log_a - ca);
  };
  double error = 0.0;
  double l1 = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, std::numbers::pi, 25, 1e-12, &error, &l1);
  const double prefactor = gamma * r * std::pow(x, -r) / std::numbers::pi;
  if (!(error <= 1e-9 * l1) && !(prefactor * error <= 1e-16)) {
    throw NumericError("stable density quadrature did not converge at x = " + std::to_string(x) +
                       " (error estimate " + std::to_string(error) + ")");
  }
  return prefactor * integral;
}

double normalized_density(double gamma, double x) {
  check_gamma(gamma);
  const double k = 1.0 / normalized_scale(gamma);
  return k * standard_density(gamma, k * x);
}

}  // namespace tiedml::stable
