#pragma once

// Renewal shifts: lifetime distributions, renewal sequences, strong renewal
// diagnostics, convolution powers, lattice local limit checks, and exact
// conditional expectations of product functionals of the occupation path.

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tiedml/functionals.hpp"

namespace tiedml::renewal {

/// Lifetime law f on {1, 2, ...}, stored up to n_max. Mass beyond n_max (if
/// any) is kept as a sentinel and never enters exact computations, which only
/// query n ≤ n_max.
class LifetimeDist {
 public:
  enum class Family { Zeta, Geometric, Custom };

  /// f_n = n^{-(1+γ)} / ζ(1+γ) for γ ∈ (0,1]; tail index γ.
  static LifetimeDist zeta(double gamma, std::size_t n_max);
  /// f_n = q(1-q)^{n-1}; no tail index.
  static LifetimeDist geometric(double q, std::size_t n_max);
  /// f_n = probs[n-1]; must sum to 1 within 1e-12.
  static LifetimeDist custom(std::vector<double> probs, std::optional<double> tail_index = {});
  /// Whitespace-separated probabilities f_1, f_2, ...; a line `# gamma=<value>`
  /// declares the tail index.
  static LifetimeDist from_file(const std::string& path);
  /// Law of p·φ + r for φ ~ base: support in pℕ + r, span p, residue r.
  static LifetimeDist lattice(const LifetimeDist& base, std::size_t span, std::size_t residue);

  /// `zeta:G`, `geom:Q`, `custom:f1,f2,...`, `file:PATH`, optionally followed
  /// by `/P` or `/P+R` for the lattice image with span P and residue R.
  static LifetimeDist parse(std::string_view spec, std::size_t n_max);

  Family family() const noexcept { return family_; }
  const std::string& spec() const noexcept { return spec_; }
  std::optional<double> tail_index() const noexcept { return tail_index_; }
  std::size_t n_max() const noexcept { return probs_.size() - 1; }
  /// f_n, zero outside [1, n_max].
  double operator()(std::size_t n) const noexcept { return n < probs_.size() ? probs_[n] : 0.0; }
  /// f_0 = 0, f_1, ..., f_{n_max}.
  std::span<const double> probabilities() const noexcept { return probs_; }
  double sentinel_mass() const noexcept { return sentinel_; }
  /// gcd of the differences of the support and the common residue mod span.
  std::size_t span() const noexcept { return span_; }
  std::size_t residue() const noexcept { return residue_; }

  /// c(n) = P(φ ≥ n), exact including the mass beyond n_max.
  double tail(std::size_t n) const;
  /// P(φ > t) for real t ≥ 0, interpolated continuously between integers.
  double tail_continuous(double t) const;
  /// E e^{iθφ} - 1 for |θ| ≤ π/span (accurate when the difference is small).
  std::complex<double> characteristic_minus_one(double theta) const;

 private:
  LifetimeDist() = default;
  void finish(double tolerance);

  Family family_ = Family::Custom;
  std::string spec_;
  std::optional<double> tail_index_;
  std::vector<double> probs_;
  double sentinel_ = 0.0;
  double parameter_ = 0.0;
  std::vector<double> suffix_;  // suffix sums of probs_ for custom laws
  std::size_t span_ = 1;
  std::size_t residue_ = 0;
  std::shared_ptr<const LifetimeDist> base_;  // set for lattice images
  std::size_t lattice_span_ = 1;
  std::size_t lattice_shift_ = 0;
};

/// u(n), a(n) = Σ_{k=1}^n u(k) and c(n) = P(φ ≥ n) for n = 0..N.
struct RenewalTables {
  std::vector<double> u;
  std::vector<double> a;
  std::vector<double> c;

  std::size_t size() const noexcept { return u.size() - 1; }
  /// a^{-1}(x) by linear interpolation of the nondecreasing table a.
  double b(double x) const;
};

enum class RenewalMethod { Auto, Naive, Fft };

/// Solves u(n) = Σ_{k=1}^n f_k u(n-k) with u(0) = 1. `Fft` runs a
/// divide-and-conquer online convolution; `Auto` picks it above a small size.
RenewalTables renewal_sequence(const LifetimeDist& f, std::size_t n,
                               RenewalMethod method = RenewalMethod::Auto);

struct SrtDiagnostic {
  std::size_t n = 0;
  /// u(n)·n / (γ·a(n)).
  double ratio = 0.0;
  /// γ ∈ (0,1) declared or supplied and f aperiodic.
  bool in_regime = false;
  /// max_{k ≤ n} k·f_k / c(k); bounded values support f_n ≪ c(n)/n.
  double doney_constant = 0.0;
};

/// Throws ConfigError when neither f nor the caller provides γ.
SrtDiagnostic srt_ratio(const RenewalTables& tables, const LifetimeDist& f, std::size_t n,
                        std::optional<double> gamma = {});

struct ConvolutionPower {
  std::size_t k = 0;
  /// P(φ_k = m) for m = 0..N.
  std::vector<double> probabilities;
  double retained_mass = 0.0;
};

/// k-fold convolution of f truncated at N. Lattice laws are convolved on the
/// base lattice so that off-lattice entries are exact zeros.
ConvolutionPower convolution_power(const LifetimeDist& f, std::size_t k, std::size_t n);

/// b(n) = a^{-1}(n) for a(t) = 1/(Γ(1+γ)Γ(1-γ)·P(φ > t)), solved by bisection.
double tail_scaling_inverse(const LifetimeDist& f, double gamma, double n);

/// P(φ_n = k) for each k, by inversion of the characteristic function over
/// [0, π/span] (roots-of-unity filter on lattice laws). `scale` is the
/// integration variable's natural scale, normally b(n).
struct LatticeProbabilities {
  std::vector<double> values;
  /// max of |E e^{iθφ}|^n past the integration cutoff.
  double truncation_bound = 0.0;
};
LatticeProbabilities lattice_probabilities(const LifetimeDist& f, std::size_t n,
                                           std::span<const std::size_t> ks, double scale);

struct LltOptions {
  double kappa_lo = 0.5;
  double kappa_hi = 3.0;
  std::size_t points = 400;
};

struct LltResult {
  std::size_t n = 0;
  double b = 0.0;
  std::size_t span = 1;
  std::size_t residue = 0;
  /// sup over admissible k in the window of |b·P(φ_n=k) - span·f_Z(k/b)|.
  double sup_error = 0.0;
  double peak_density = 0.0;  // max of span·f_Z over the window
  /// Riemann estimate of ∫_window b·P(φ_n = ⌊κb⌋) dκ.
  double window_mass = 0.0;
  double truncation_bound = 0.0;
  /// mean over admissible k of b·P / f_Z.
  double mean_ratio = 0.0;
  std::vector<std::size_t> ks;
  std::vector<double> scaled_probabilities;
  std::vector<double> reference;
};

/// Aperiodic laws only; throws ConfigError for span > 1.
LltResult llt_check(const LifetimeDist& f, double gamma, std::size_t n,
                    const LltOptions& options = {});
/// Span ≥ 2; reference span·1{k ≡ n·residue mod span}·f_Z(k/b).
LltResult llt_check_arithmetic(const LifetimeDist& f, double gamma, std::size_t n,
                               const LltOptions& options = {});

/// Exact conditional expectations of product functionals of the occupation
/// path ψ_n(t) = s_{⌊nt⌋}/A given a renewal at n, where s_τ counts renewal
/// epochs in [1, τ]. Convolution powers are tabulated once up to `max_n`.
class TiedDownEngine {
 public:
  TiedDownEngine(const LifetimeDist& f, std::size_t max_n);

  const RenewalTables& tables() const noexcept { return tables_; }
  std::size_t max_n() const noexcept { return max_n_; }

  /// E[𝕘_t(ψ_n); renewal at n] with normalizer A.
  double joint(std::size_t n, const ProductFunctional& pf, double normalizer) const;
  /// joint(n, pf, a(n)) / u(n).
  double conditional(std::size_t n, const ProductFunctional& pf) const;
  /// (1/a(n)) Σ_{m=1}^n u(m)·conditional(m, pf).
  double cesaro(std::size_t n, const ProductFunctional& pf) const;

 private:
  std::vector<double> terminal_table(std::size_t length, const Factor& h, double normalizer) const;

  LifetimeDist f_;
  std::size_t max_n_;
  RenewalTables tables_;
  /// powers_[j][m] = f^{*j}(m) for j ≤ m ≤ max_n, stored triangularly.
  std::vector<std::vector<double>> powers_;
};

/// Checkpoint index max{i : i/n ≤ t}.
std::size_t checkpoint_index(std::size_t n, double t);

double tied_down_exact(const LifetimeDist& f, std::size_t n, const ProductFunctional& pf);
double cesaro_tied_down(const LifetimeDist& f, std::size_t n, const ProductFunctional& pf);

/// E[𝕘_t(ψ_n) | renewal at n] with normalizer A, by enumeration of all
/// renewal sets in {1..n-1} ∪ {n}; n ≤ 24.
double tied_down_enumerate(const LifetimeDist& f, std::size_t n, const ProductFunctional& pf,
                           double normalizer);

/// (1/a(N)) Σ_{n=1}^N |Σ_{k=1}^n g(k/a(n)) P(s_k = n) - g(1) u(n)| for each
/// requested N, from one streaming pass over k.
std::vector<double> cesaro_occupation_gap(const LifetimeDist& f, std::span<const std::size_t> ns,
                                     const Factor& g);

}  // namespace tiedml::renewal
