#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tiedml::numeric {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Hurwitz zeta ζ(s, q) = Σ_{k≥0} (q+k)^{-s} for s > 1, q > 0 (Euler-Maclaurin).
double hurwitz_zeta(double s, double q);

/// Riemann zeta for any real s != 1 (thin wrapper, negative arguments included).
double riemann_zeta(double s);

/// Polylogarithm on the unit circle, Li_s(e^{iθ}) = Σ_{j≥1} j^{-s} e^{ijθ}, for
/// non-integer s > 1 and θ ∈ [-π, π]. Uses the expansion around μ = iθ = 0,
///   Li_s(e^μ) = Γ(1-s)(-μ)^{s-1} + Σ_k ζ(s-k) μ^k / k!,
/// which converges for |μ| < 2π.
std::complex<double> polylog_unit_circle(double s, double theta);

/// Li_s(e^{iθ}) - ζ(s), accurate for small θ where the difference is tiny.
std::complex<double> polylog_unit_circle_increment(double s, double theta);

/// Truncated linear convolution: out[n] = Σ_{m} a[m] b[n-m] for n < out_len.
/// Switches from the direct sum to an FFT product above a size threshold.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t out_len);

/// Direct O(len²) truncated convolution; reference path for `convolve`.
std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b,
                                    std::size_t out_len);

/// FFT truncated convolution regardless of size.
std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b,
                                 std::size_t out_len);

}  // namespace tiedml::numeric
