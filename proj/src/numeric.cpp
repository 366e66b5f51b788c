#include "tiedml/numeric.hpp"

#include <fftw3.h>

#include <array>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "tiedml/error.hpp"

namespace tiedml::numeric {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) {
    throw DomainError("hurwitz_zeta requires s > 1 and q > 0");
  }
  // B_{2j} / (2j)!
  static constexpr std::array<double, 10> kBernoulliOverFactorial = {
      1.0 / 6.0 / 2.0,
      -1.0 / 30.0 / 24.0,
      1.0 / 42.0 / 720.0,
      -1.0 / 30.0 / 40320.0,
      5.0 / 66.0 / 3628800.0,
      -691.0 / 2730.0 / 479001600.0,
      7.0 / 6.0 / 87178291200.0,
      -3617.0 / 510.0 / 20922789888000.0,
      43867.0 / 798.0 / 6402373705728000.0,
      -174611.0 / 330.0 / 2432902008176640000.0,
  };
  constexpr double kShift = 16.0;
  CompensatedSum sum;
  double x = q;
  while (x < kShift) {
    sum += std::pow(x, -s);
    x += 1.0;
  }
  sum += std::pow(x, 1.0 - s) / (s - 1.0);
  sum += 0.5 * std::pow(x, -s);
  double rising = s;                    // s (s+1) ... (s+2j-2)
  double power = std::pow(x, -s - 1.0);  // x^{-s-2j+1}
  const double inv_x2 = 1.0 / (x * x);
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    sum += kBernoulliOverFactorial[j] * rising * power;
    rising *= (s + 2.0 * static_cast<double>(j) + 1.0) * (s + 2.0 * static_cast<double>(j) + 2.0);
    power *= inv_x2;
  }
  return sum.value();
}

double riemann_zeta(double s) { return boost::math::zeta(s); }

namespace {

constexpr int kPolylogTerms = 120;

struct PolylogCoefficients {
  double s = 0.0;
  std::vector<double> coeff;  // ζ(s-k)/k!
  std::complex<double> singular_factor;  // Γ(1-s)
};

const PolylogCoefficients& coefficients_for(double s) {
  thread_local std::vector<std::unique_ptr<PolylogCoefficients>> cache;
  for (const auto& c : cache) {
    if (c->s == s) return *c;
  }
  auto entry = std::make_unique<PolylogCoefficients>();
  entry->s = s;
  entry->coeff.resize(kPolylogTerms);
  double factorial = 1.0;
  for (int k = 0; k < kPolylogTerms; ++k) {
    if (k > 0) factorial *= static_cast<double>(k);
    entry->coeff[static_cast<std::size_t>(k)] =
        boost::math::zeta(s - static_cast<double>(k)) / factorial;
  }
  entry->singular_factor = std::tgamma(1.0 - s);
  cache.push_back(std::move(entry));
  return *cache.back();
}

}  // namespace

namespace {

std::complex<double> polylog_expansion(double s, double theta, bool drop_constant) {
  if (!(s > 1.0) || std::floor(s) == s) {
    throw DomainError("polylog_unit_circle requires non-integer s > 1");
  }
  if (std::abs(theta) > std::numbers::pi + 1e-12) {
    throw DomainError("polylog_unit_circle requires |theta| <= pi");
  }
  const auto& c = coefficients_for(s);
  if (theta == 0.0) return {drop_constant ? 0.0 : boost::math::zeta(s), 0.0};
  const std::complex<double> mu(0.0, theta);
  const std::complex<double> singular = c.singular_factor * std::pow(-mu, s - 1.0);
  std::complex<double> series = 0.0;
  std::complex<double> power = 1.0;
  for (int k = 0; k < kPolylogTerms; ++k) {
    if (k > 0 || !drop_constant) {
      const std::complex<double> term = c.coeff[static_cast<std::size_t>(k)] * power;
      series += term;
      if (k > 8 && std::abs(term) < 1e-18 * std::abs(series + singular)) break;
    }
    power *= mu;
  }
  return singular + series;
}

}  // namespace

std::complex<double> polylog_unit_circle(double s, double theta) {
  return polylog_expansion(s, theta, false);
}

std::complex<double> polylog_unit_circle_increment(double s, double theta) {
  return polylog_expansion(s, theta, true);
}

std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b,
                                    std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  const std::size_t na = std::min(a.size(), out_len);
  for (std::size_t m = 0; m < na; ++m) {
    const double am = a[m];
    if (am == 0.0) continue;
    const std::size_t nb = std::min(b.size(), out_len - m);
    double* dst = out.data() + m;
    for (std::size_t j = 0; j < nb; ++j) dst[j] += am * b[j];
  }
  return out;
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanFree {
  void operator()(fftw_plan_s* p) const noexcept {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<fftw_plan_s, PlanFree>;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b,
                                 std::size_t out_len) {
  if (out_len == 0) return {};
  const std::size_t na = std::min(a.size(), out_len);
  const std::size_t nb = std::min(b.size(), out_len);
  if (na == 0 || nb == 0) return std::vector<double>(out_len, 0.0);
  const std::size_t n = next_pow2(na + nb - 1);
  const std::size_t nc = n / 2 + 1;
  RealBuffer ra(fftw_alloc_real(n));
  RealBuffer rb(fftw_alloc_real(n));
  ComplexBuffer ca(fftw_alloc_complex(nc));
  ComplexBuffer cb(fftw_alloc_complex(nc));
  Plan fa, fb, inv;
  {
    std::lock_guard lock(planner_mutex());
    fa.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), ra.get(), ca.get(), FFTW_ESTIMATE));
    fb.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), rb.get(), cb.get(), FFTW_ESTIMATE));
    inv.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), ca.get(), ra.get(), FFTW_ESTIMATE));
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(na), ra.get());
  std::copy(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(nb), rb.get());
  fftw_execute(fa.get());
  fftw_execute(fb.get());
  for (std::size_t k = 0; k < nc; ++k) {
    const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
    const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
    ca[k][0] = re;
    ca[k][1] = im;
  }
  fftw_execute(inv.get());
  std::vector<double> out(out_len, 0.0);
  const double scale = 1.0 / static_cast<double>(n);
  const std::size_t keep = std::min(out_len, na + nb - 1);
  for (std::size_t k = 0; k < keep; ++k) out[k] = ra[k] * scale;
  return out;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t out_len) {
  constexpr std::size_t kDirectLimit = 128;
  if (std::min({a.size(), b.size(), out_len}) <= kDirectLimit) {
    return convolve_direct(a, b, out_len);
  }
  return convolve_fft(a, b, out_len);
}

}  // namespace tiedml::numeric
