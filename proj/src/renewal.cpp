#include "tiedml/renewal.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"
#include "tiedml/parallel.hpp"
#include "tiedml/stable.hpp"

namespace tiedml::renewal {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr std::size_t kNaiveThreshold = 64;
/// Triangular tables of this many doubles or more are refused.
constexpr double kMaxTableEntries = 1.2e8;

std::complex<double> expm1_i(double theta) {
  const double s = std::sin(0.5 * theta);
  return {-2.0 * s * s, std::sin(theta)};
}

double parse_double(std::string_view text, const char* what) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(std::string("invalid ") + what + ": '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(std::string("invalid ") + what + ": '" + s + "'");
  return v;
}

std::size_t parse_size(std::string_view text, const char* what) {
  const double v = parse_double(text, what);
  if (!(v >= 0.0) || std::floor(v) != v) {
    throw ConfigError(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// LifetimeDist

void LifetimeDist::finish(double tolerance) {
  if (probs_.size() < 2) throw ConfigError("lifetime: empty support");
  probs_[0] = 0.0;
  numeric::CompensatedSum total;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("lifetime: probabilities must be finite and nonnegative");
    total += p;
  }
  total += sentinel_;
  if (std::abs(total.value() - 1.0) > tolerance) {
    throw ConfigError("lifetime: probabilities sum to " + std::to_string(total.value()) +
                      ", not 1");
  }
  std::size_t g = 0;
  std::size_t first = 0;
  for (std::size_t n = 1; n < probs_.size(); ++n) {
    if (probs_[n] == 0.0) continue;
    if (first == 0) {
      first = n;
    } else {
      g = std::gcd(g, n - first);
    }
  }
  if (first == 0) throw ConfigError("lifetime: no mass on {1, ..., n_max}");
  span_ = g == 0 ? first : g;
  residue_ = first % span_;
  if (tail_index_ && !(*tail_index_ > 0.0 && *tail_index_ <= 1.0)) {
    throw ConfigError("lifetime: tail index must lie in (0,1]");
  }
}

LifetimeDist LifetimeDist::zeta(double gamma, std::size_t n_max) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("zeta lifetime: gamma must lie in (0,1]");
  if (n_max < 1) throw ConfigError("zeta lifetime: n_max must be positive");
  LifetimeDist f;
  f.family_ = Family::Zeta;
  f.parameter_ = gamma;
  f.tail_index_ = gamma;
  std::ostringstream spec;
  spec << "zeta:" << gamma;
  f.spec_ = spec.str();
  const double s = 1.0 + gamma;
  const double z = numeric::riemann_zeta(s);
  f.probs_.resize(n_max + 1);
  f.probs_[0] = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    f.probs_[n] = std::pow(static_cast<double>(n), -s) / z;
  }
  f.sentinel_ = numeric::hurwitz_zeta(s, static_cast<double>(n_max) + 1.0) / z;
  f.finish(kMassTolerance);
  return f;
}

LifetimeDist LifetimeDist::geometric(double q, std::size_t n_max) {
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("geometric lifetime: q must lie in (0,1]");
  if (n_max < 1) throw ConfigError("geometric lifetime: n_max must be positive");
  LifetimeDist f;
  f.family_ = Family::Geometric;
  f.parameter_ = q;
  std::ostringstream spec;
  spec << "geom:" << q;
  f.spec_ = spec.str();
  f.probs_.resize(n_max + 1);
  double survive = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    f.probs_[n] = q * survive;
    survive *= 1.0 - q;
  }
  f.sentinel_ = survive;
  f.finish(kMassTolerance);
  return f;
}

LifetimeDist LifetimeDist::custom(std::vector<double> probs, std::optional<double> tail_index) {
  LifetimeDist f;
  f.family_ = Family::Custom;
  f.tail_index_ = tail_index;
  f.probs_.assign(1, 0.0);
  f.probs_.insert(f.probs_.end(), probs.begin(), probs.end());
  while (f.probs_.size() > 2 && f.probs_.back() == 0.0) f.probs_.pop_back();
  std::ostringstream spec;
  spec << "custom:";
  for (std::size_t i = 1; i < f.probs_.size(); ++i) spec << (i > 1 ? "," : "") << f.probs_[i];
  f.spec_ = spec.str();
  f.finish(kMassTolerance);
  f.suffix_.assign(f.probs_.size() + 1, 0.0);
  for (std::size_t n = f.probs_.size(); n-- > 0;) f.suffix_[n] = f.suffix_[n + 1] + f.probs_[n];
  return f;
}

LifetimeDist LifetimeDist::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("lifetime file not readable: " + path);
  std::vector<double> probs;
  std::optional<double> gamma;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      const std::string comment = line.substr(hash + 1);
      const auto key = comment.find("gamma=");
      if (key != std::string::npos) {
        std::string value = comment.substr(key + 6);
        value.erase(value.find_last_not_of(" \t\r") + 1);
        gamma = parse_double(value, "tail index");
      }
      line.resize(hash);
    }
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      if (!token.empty() && token.back() == ',') token.pop_back();
      if (!token.empty()) probs.push_back(parse_double(token, "probability"));
    }
  }
  LifetimeDist f = custom(std::move(probs), gamma);
  f.spec_ = "file:" + path;
  return f;
}

LifetimeDist LifetimeDist::lattice(const LifetimeDist& base, std::size_t span,
                                   std::size_t residue) {
  if (span < 1) throw ConfigError("lattice lifetime: span must be positive");
  if (residue >= span) throw ConfigError("lattice lifetime: residue must be below the span");
  if (base.base_) throw ConfigError("lattice lifetime: base must not itself be a lattice image");
  LifetimeDist f;
  f.family_ = base.family_;
  f.tail_index_ = base.tail_index_;
  f.spec_ = base.spec_ + "/" + std::to_string(span) +
            (residue ? "+" + std::to_string(residue) : std::string());
  f.parameter_ = base.parameter_;
  f.sentinel_ = base.sentinel_;
  f.probs_.assign(span * base.n_max() + residue + 1, 0.0);
  for (std::size_t m = 1; m <= base.n_max(); ++m) f.probs_[span * m + residue] = base.probs_[m];
  f.finish(kMassTolerance);
  f.base_ = std::make_shared<const LifetimeDist>(base);
  f.lattice_span_ = span;
  f.lattice_shift_ = residue;
  if (f.span_ != span * base.span_) throw ConfigError("lattice lifetime: span detection failed");
  return f;
}

LifetimeDist LifetimeDist::parse(std::string_view spec, std::size_t n_max) {
  std::size_t span = 1;
  std::size_t residue = 0;
  std::string_view body = spec;
  const auto slash = spec.find('/');
  if (slash != std::string_view::npos && spec.substr(0, 5) != "file:") {
    body = spec.substr(0, slash);
    std::string_view lattice = spec.substr(slash + 1);
    const auto plus = lattice.find('+');
    span = parse_size(lattice.substr(0, plus), "lattice span");
    if (plus != std::string_view::npos) residue = parse_size(lattice.substr(plus + 1), "lattice residue");
    if (span < 1) throw ConfigError("lattice span must be positive");
  }
  const auto colon = body.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("lifetime spec must look like zeta:G, geom:Q, custom:..., or file:PATH");
  }
  const std::string_view kind = body.substr(0, colon);
  const std::string_view arg = body.substr(colon + 1);
  LifetimeDist f;
  if (kind == "zeta") {
    f = zeta(parse_double(arg, "zeta tail index"), n_max);
  } else if (kind == "geom") {
    f = geometric(parse_double(arg, "geometric parameter"), n_max);
  } else if (kind == "custom") {
    std::vector<double> probs;
    std::string_view rest = arg;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      probs.push_back(parse_double(rest.substr(0, comma), "probability"));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    f = custom(std::move(probs));
  } else if (kind == "file") {
    f = from_file(std::string(arg));
  } else {
    throw ConfigError("unknown lifetime family '" + std::string(kind) + "'");
  }
  if (span > 1 || residue > 0) f = lattice(f, span, residue);
  return f;
}

double LifetimeDist::tail(std::size_t n) const {
  if (n <= 1) return 1.0;
  if (base_) {
    const std::size_t p = lattice_span_;
    const std::size_t r = lattice_shift_;
    if (n <= p + r) return 1.0;
    const std::size_t m = (n - r + p - 1) / p;
    return base_->tail(m);
  }
  switch (family_) {
    case Family::Zeta: {
      const double s = 1.0 + parameter_;
      return numeric::hurwitz_zeta(s, static_cast<double>(n)) / numeric::riemann_zeta(s);
    }
    case Family::Geometric:
      return std::pow(1.0 - parameter_, static_cast<double>(n - 1));
    case Family::Custom:
      return n < suffix_.size() ? suffix_[n] : 0.0;
  }
  return 0.0;
}

double LifetimeDist::tail_continuous(double t) const {
  if (!(t >= 0.0)) return 1.0;
  if (base_) {
    const auto p = static_cast<double>(lattice_span_);
    const auto r = static_cast<double>(lattice_shift_);
    return t < r ? 1.0 : base_->tail_continuous((t - r) / p);
  }
  switch (family_) {
    case Family::Zeta: {
      const double s = 1.0 + parameter_;
      return std::min(1.0, numeric::hurwitz_zeta(s, t + 1.0) / numeric::riemann_zeta(s));
    }
    case Family::Geometric:
      return std::pow(1.0 - parameter_, t);
    case Family::Custom: {
      const double fl = std::floor(t);
      const auto i = static_cast<std::size_t>(fl);
      const double lo = tail(i + 1);
      const double hi = tail(i + 2);
      return lo + (t - fl) * (hi - lo);
    }
  }
  return 0.0;
}

std::complex<double> LifetimeDist::characteristic_minus_one(double theta) const {
  if (base_) {
    const auto p = static_cast<double>(lattice_span_);
    const auto r = static_cast<double>(lattice_shift_);
    double phase = p * theta;
    phase = std::remainder(phase, 2.0 * std::numbers::pi);
    const std::complex<double> inner = base_->characteristic_minus_one(phase);
    const std::complex<double> shift = std::polar(1.0, r * theta);
    return shift * inner + expm1_i(r * theta);
  }
  switch (family_) {
    case Family::Zeta: {
      const double s = 1.0 + parameter_;
      if (std::floor(s) == s) break;
      return numeric::polylog_unit_circle_increment(s, theta) / numeric::riemann_zeta(s);
    }
    case Family::Geometric: {
      const double q = parameter_;
      return expm1_i(theta) / (1.0 - (1.0 - q) * std::polar(1.0, theta));
    }
    case Family::Custom:
      break;
  }
  std::complex<double> sum = 0.0;
  for (std::size_t n = 1; n < probs_.size(); ++n) {
    if (probs_[n] != 0.0) sum += probs_[n] * expm1_i(static_cast<double>(n) * theta);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Renewal sequences

double RenewalTables::b(double x) const {
  if (!(x >= 0.0)) throw DomainError("a^{-1}: argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x > a.back()) throw DomainError("a^{-1}: argument beyond the tabulated range");
  const auto it = std::lower_bound(a.begin(), a.end(), x);
  const auto n = static_cast<std::size_t>(it - a.begin());
  if (a[n] == x || n == 0) return static_cast<double>(n);
  const double lo = a[n - 1];
  const double hi = a[n];
  return static_cast<double>(n - 1) + (x - lo) / (hi - lo);
}

namespace {

std::vector<double> renewal_u_naive(std::span<const double> f, std::size_t n) {
  std::vector<double> u(n + 1, 0.0);
  u[0] = 1.0;
  for (std::size_t m = 1; m <= n; ++m) {
    const std::size_t kmax = std::min(m, f.size() - 1);
    double s = 0.0;
    for (std::size_t k = 1; k <= kmax; ++k) s += f[k] * u[m - k];
    u[m] = s;
  }
  return u;
}

void renewal_block(std::span<const double> f, std::vector<double>& u, std::vector<double>& acc,
                   std::size_t lo, std::size_t hi) {
  if (hi - lo <= kNaiveThreshold) {
    for (std::size_t m = lo; m < hi; ++m) {
      if (m == 0) {
        u[0] = 1.0;
        continue;
      }
      double s = acc[m];
      const std::size_t kmax = std::min(m - lo, f.size() - 1);
      for (std::size_t k = 1; k <= kmax; ++k) s += f[k] * u[m - k];
      u[m] = s;
    }
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  renewal_block(f, u, acc, lo, mid);
  const std::size_t flen = std::min(hi - lo, f.size());
  const auto contrib = numeric::convolve(std::span<const double>(u).subspan(lo, mid - lo),
                                         f.subspan(0, flen), hi - lo);
  for (std::size_t m = mid; m < hi; ++m) acc[m] += contrib[m - lo];
  renewal_block(f, u, acc, mid, hi);
}

std::vector<double> renewal_u_fft(std::span<const double> f, std::size_t n) {
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> acc(n + 1, 0.0);
  renewal_block(f, u, acc, 0, n + 1);
  return u;
}

}  // namespace

RenewalTables renewal_sequence(const LifetimeDist& f, std::size_t n, RenewalMethod method) {
  if (n < 1) throw ConfigError("renewal_sequence: N must be at least 1");
  const auto probs = f.probabilities();
  const auto used = probs.subspan(0, std::min(probs.size(), n + 1));
  RenewalTables t;
  const bool fft = method == RenewalMethod::Fft || (method == RenewalMethod::Auto && n > 2048);
  t.u = fft ? renewal_u_fft(used, n) : renewal_u_naive(used, n);
  t.a.assign(n + 1, 0.0);
  numeric::CompensatedSum a;
  for (std::size_t m = 1; m <= n; ++m) {
    a += t.u[m];
    t.a[m] = a.value();
  }
  t.c.assign(n + 1, 1.0);
  for (std::size_t m = 1; m <= n; ++m) t.c[m] = f.tail(m);
  return t;
}

SrtDiagnostic srt_ratio(const RenewalTables& tables, const LifetimeDist& f, std::size_t n,
                        std::optional<double> gamma) {
  const std::optional<double> g = gamma ? gamma : f.tail_index();
  if (!g) throw ConfigError("srt_ratio: the lifetime declares no tail index and none was given");
  if (n < 1 || n > tables.size()) throw DomainError("srt_ratio: n outside the tables");
  SrtDiagnostic d;
  d.n = n;
  d.ratio = tables.u[n] * static_cast<double>(n) / (*g * tables.a[n]);
  d.in_regime = f.tail_index().has_value() && *g > 0.0 && *g < 1.0 && f.span() == 1;
  for (std::size_t k = 1; k <= n; ++k) {
    const double fk = f(k);
    if (fk > 0.0) d.doney_constant = std::max(d.doney_constant, static_cast<double>(k) * fk / tables.c[k]);
  }
  return d;
}

ConvolutionPower convolution_power(const LifetimeDist& f, std::size_t k, std::size_t n) {
  if (k < 1) throw ConfigError("convolution_power: k must be at least 1");
  ConvolutionPower out;
  out.k = k;
  out.probabilities.assign(n + 1, 0.0);
  const std::size_t p = f.span();
  const std::size_t r = f.residue();
  // Write φ = p·ψ + r with ψ on {0,1,...}; then φ_k = p·ψ_k + k·r.
  if (k * r > n) return out;
  const std::size_t base_len = (n - k * r) / p + 1;
  std::vector<double> g(std::min(base_len, (f.n_max() - r) / p + 1), 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = f(p * j + r);
  while (g.size() > 1 && g.back() == 0.0) g.pop_back();
  std::vector<double> result{1.0};
  std::vector<double> power = g;
  std::size_t e = k;
  while (true) {
    if (e & 1U) result = numeric::convolve(result, power, std::min(base_len, result.size() + power.size() - 1));
    e >>= 1U;
    if (e == 0) break;
    power = numeric::convolve(power, power, std::min(base_len, 2 * power.size() - 1));
  }
  numeric::CompensatedSum mass;
  for (std::size_t j = 0; j < result.size(); ++j) {
    out.probabilities[p * j + k * r] = result[j];
    mass += result[j];
  }
  out.retained_mass = mass.value();
  return out;
}

// ---------------------------------------------------------------------------
// Local limit theorem

double tail_scaling_inverse(const LifetimeDist& f, double gamma, double n) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("tail scaling: gamma must lie in (0,1)");
  if (!(n > 0.0)) throw DomainError("tail scaling: n must be positive");
  const double k = std::tgamma(1.0 + gamma) * std::tgamma(1.0 - gamma);
  const double target = 1.0 / (k * n);
  if (target >= 1.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (f.tail_continuous(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("tail scaling: tail does not reach the target");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f.tail_continuous(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LatticeProbabilities lattice_probabilities(const LifetimeDist& f, std::size_t n,
                                           std::span<const std::size_t> ks, double scale) {
  if (n < 1) throw ConfigError("lattice_probabilities: n must be at least 1");
  if (!(scale > 0.0)) throw ConfigError("lattice_probabilities: scale must be positive");
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(f.span());
  const double theta_max = std::numbers::pi / p;
  constexpr double kNegligibleLog = -41.0;  // e^{-41} ≈ 1.6e-18
  auto log_psi = [&](double theta) { return std::log(1.0 + f.characteristic_minus_one(theta)); };

  // Locate the last θ at which |ψ|^n is not negligible.
  double theta_cut = std::min(theta_max, 1.0 / scale);
  double bound = 0.0;
  for (double theta = 1.0 / scale; theta < theta_max; theta *= 1.02) {
    const double level = nd * log_psi(theta).real();
    if (level > kNegligibleLog) theta_cut = std::min(theta_max, theta * 1.02);
  }
  for (double theta = theta_cut; theta < theta_max; theta *= 1.02) {
    bound = std::max(bound, std::exp(nd * log_psi(theta).real()));
  }
  if (theta_cut < theta_max) bound = std::max(bound, std::exp(nd * log_psi(theta_max).real()));

  // θ = v^q/scale removes the θ^{γ-1} behaviour of the phase at the origin.
  const double gamma = f.tail_index().value_or(0.5);
  const double q = std::max(2.0, std::ceil(1.0 / std::min(gamma, 1.0)));
  const double v_max = std::pow(theta_cut * scale, 1.0 / q);
  std::size_t k_max = 0;
  for (auto k : ks) k_max = std::max(k_max, k);
  double phase_budget = static_cast<double>(k_max) * theta_cut;
  for (double theta = 1.0 / scale; theta <= theta_cut; theta *= 1.05) {
    phase_budget = std::max(phase_budget, static_cast<double>(k_max) * theta_cut +
                                              nd * std::abs(log_psi(theta).imag()));
  }
  const auto panels = static_cast<std::size_t>(std::ceil(2.0 * q * phase_budget)) + 64;

  using Rule = boost::math::quadrature::gauss<double, 16>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  std::vector<double> node_theta;
  std::vector<double> node_weight;
  std::vector<double> node_phase;
  node_theta.reserve(panels * 16);
  const double h = v_max / static_cast<double>(panels);
  for (std::size_t j = 0; j < panels; ++j) {
    const double centre = (static_cast<double>(j) + 0.5) * h;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      for (int sign : {-1, 1}) {
        if (abscissa[i] == 0.0 && sign < 0) continue;
        const double v = centre + sign * 0.5 * h * abscissa[i];
        const double theta = std::pow(v, q) / scale;
        const double jac = q * std::pow(v, q - 1.0) / scale;
        const std::complex<double> lp = nd * log_psi(theta);
        node_theta.push_back(theta);
        node_weight.push_back(0.5 * h * weights[i] * jac * std::exp(lp.real()));
        node_phase.push_back(lp.imag());
      }
    }
  }

  LatticeProbabilities out;
  out.truncation_bound = bound;
  out.values.assign(ks.size(), 0.0);
  const auto target = static_cast<std::size_t>((n * f.residue()) % f.span());
  parallel_for(ks.size(), [&](std::size_t j) {
    const std::size_t k = ks[j];
    if (k % f.span() != target) return;
    const double kd = static_cast<double>(k);
    numeric::CompensatedSum sum;
    for (std::size_t i = 0; i < node_theta.size(); ++i) {
      sum += node_weight[i] * std::cos(node_phase[i] - kd * node_theta[i]);
    }
    out.values[j] = p / std::numbers::pi * sum.value();
  });
  return out;
}

namespace {

LltResult run_llt(const LifetimeDist& f, double gamma, std::size_t n, const LltOptions& options) {
  if (!(options.kappa_lo > 0.0 && options.kappa_hi > options.kappa_lo)) {
    throw ConfigError("llt: window must be a compact subinterval of (0,∞)");
  }
  if (options.points < 2) throw ConfigError("llt: at least two window points required");
  LltResult r;
  r.n = n;
  r.span = f.span();
  r.residue = f.residue();
  r.b = tail_scaling_inverse(f, gamma, static_cast<double>(n));
  const std::size_t target = (n * r.residue) % r.span;
  for (std::size_t j = 0; j < options.points; ++j) {
    const double kappa = options.kappa_lo + (options.kappa_hi - options.kappa_lo) *
                                                static_cast<double>(j) /
                                                static_cast<double>(options.points - 1);
    auto k = static_cast<std::size_t>(std::floor(kappa * r.b));
    k += (target + r.span - k % r.span) % r.span;
    if (!r.ks.empty() && k == r.ks.back()) continue;
    r.ks.push_back(k);
  }
  const auto probs = lattice_probabilities(f, n, r.ks, r.b);
  r.truncation_bound = probs.truncation_bound;
  r.scaled_probabilities.resize(r.ks.size());
  r.reference.resize(r.ks.size());
  parallel_for(r.ks.size(), [&](std::size_t j) {
    const double x = static_cast<double>(r.ks[j]) / r.b;
    r.scaled_probabilities[j] = r.b * probs.values[j];
    r.reference[j] = static_cast<double>(r.span) * stable::normalized_density(gamma, x);
  });
  numeric::CompensatedSum ratio;
  for (std::size_t j = 0; j < r.ks.size(); ++j) {
    r.sup_error = std::max(r.sup_error, std::abs(r.scaled_probabilities[j] - r.reference[j]));
    r.peak_density = std::max(r.peak_density, r.reference[j]);
    ratio += r.scaled_probabilities[j] / r.reference[j];
    if (j > 0) {
      const double dk = static_cast<double>(r.ks[j] - r.ks[j - 1]) / r.b;
      r.window_mass += 0.5 * dk * (r.scaled_probabilities[j] + r.scaled_probabilities[j - 1]) /
                       static_cast<double>(r.span);
    }
  }
  r.mean_ratio = ratio.value() / static_cast<double>(r.ks.size());
  return r;
}

}  // namespace

LltResult llt_check(const LifetimeDist& f, double gamma, std::size_t n, const LltOptions& options) {
  if (f.span() != 1) {
    throw ConfigError("llt_check: lifetime has span " + std::to_string(f.span()) +
                      "; use the arithmetic variant");
  }
  return run_llt(f, gamma, n, options);
}

LltResult llt_check_arithmetic(const LifetimeDist& f, double gamma, std::size_t n,
                               const LltOptions& options) {
  if (f.span() < 2) throw ConfigError("llt_check_arithmetic: lifetime is aperiodic (span 1)");
  return run_llt(f, gamma, n, options);
}

// ---------------------------------------------------------------------------
// Exact tied-down expectations

std::size_t checkpoint_index(std::size_t n, double t) {
  const double nd = static_cast<double>(n);
  auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t * nd)));
  i = std::min(i, n);
  while (i < n && static_cast<double>(i + 1) / nd <= t) ++i;
  while (i > 0 && static_cast<double>(i) / nd > t) --i;
  return i;
}

TiedDownEngine::TiedDownEngine(const LifetimeDist& f, std::size_t max_n) : f_(f), max_n_(max_n) {
  if (max_n < 1) throw ConfigError("tied-down engine: N must be at least 1");
  const double entries = 0.5 * static_cast<double>(max_n) * static_cast<double>(max_n);
  if (entries > kMaxTableEntries) {
    throw NumericError("tied-down engine: N = " + std::to_string(max_n) +
                       " exceeds the memory bound; use N <= " +
                       std::to_string(static_cast<std::size_t>(std::sqrt(2.0 * kMaxTableEntries))));
  }
  tables_ = renewal_sequence(f, max_n);
  const auto probs = f.probabilities();
  const auto step = probs.subspan(1, std::min(probs.size() - 1, max_n));
  powers_.resize(max_n + 1);
  powers_[0] = std::vector<double>(max_n + 1, 0.0);
  powers_[0][0] = 1.0;
  for (std::size_t j = 1; j <= max_n; ++j) {
    // powers_[j][m - j] = f^{*j}(m), computed from powers_[j-1] and f shifted by one.
    powers_[j] = numeric::convolve(powers_[j - 1], step, max_n - j + 1);
  }
}

std::vector<double> TiedDownEngine::terminal_table(std::size_t length, const Factor& h,
                                                   double normalizer) const {
  std::vector<double> table(length, 0.0);
  for (std::size_t j = 0; j < length; ++j) {
    const double hv = h(static_cast<double>(j + 1) / normalizer);
    const auto& row = powers_[j];
    for (std::size_t m = j; m < length; ++m) table[m] += row[m - j] * hv;
  }
  return table;
}

double TiedDownEngine::joint(std::size_t n, const ProductFunctional& pf, double normalizer) const {
  if (n < 1 || n > max_n_) throw DomainError("tied-down: n outside [1, N]");
  if (!(normalizer > 0.0)) throw DomainError("tied-down: normalizer must be positive");
  const auto& times = pf.times();
  const auto& factors = pf.factors();
  const std::size_t checkpoints = times.size();
  std::vector<std::size_t> taus(checkpoints);
  for (std::size_t nu = 0; nu < checkpoints; ++nu) taus[nu] = checkpoint_index(n, times[nu]);
  const std::size_t last = checkpoints ? taus.back() : 0;

  std::vector<std::vector<double>> g(checkpoints, std::vector<double>(last + 1));
  for (std::size_t nu = 0; nu < checkpoints; ++nu) {
    for (std::size_t c = 0; c <= last; ++c) g[nu][c] = factors[nu](static_cast<double>(c) / normalizer);
  }

  // v[t][c] = P(renewal at t with c renewals in [1,t]) times the factors of
  // the checkpoints already crossed.
  std::vector<std::vector<double>> v(last + 1);
  v[0] = {1.0};
  std::vector<double> mult;
  for (std::size_t t = 1; t <= last; ++t) {
    v[t].assign(t + 1, 0.0);
    double* out = v[t].data();
    bool weighted = false;
    std::size_t next = checkpoints;  // checkpoints with τ in [r, t) are merged in
    while (next > 0 && taus[next - 1] >= t) --next;
    for (std::size_t r = t; r-- > 0;) {
      while (next > 0 && taus[next - 1] >= r) {
        --next;
        if (!weighted) {
          mult.assign(t, 1.0);
          weighted = true;
        }
        for (std::size_t c = 0; c < t; ++c) mult[c] *= g[next][c];
      }
      const double w = f_(t - r);
      if (w == 0.0) continue;
      const double* src = v[r].data();
      if (weighted) {
        for (std::size_t c = 0; c <= r; ++c) out[c + 1] += w * mult[c] * src[c];
      } else {
        for (std::size_t c = 0; c <= r; ++c) out[c + 1] += w * src[c];
      }
    }
  }

  const std::vector<double> hv = terminal_table(n - last, pf.terminal(), normalizer);
  numeric::CompensatedSum total;
  std::vector<double> closing(last + 1, 1.0);
  for (std::size_t r = 0; r <= last; ++r) {
    numeric::CompensatedSum q;
    for (std::size_t p = last + 1; p <= n; ++p) {
      const double w = f_(p - r);
      if (w != 0.0) q += w * hv[n - p];
    }
    if (q.value() == 0.0) continue;
    numeric::CompensatedSum inner;
    for (std::size_t c = 0; c <= r; ++c) {
      double weight = v[r][c];
      if (weight == 0.0) continue;
      for (std::size_t nu = 0; nu < checkpoints; ++nu) {
        if (taus[nu] >= r) weight *= g[nu][c];
      }
      inner += weight;
    }
    total += inner.value() * q.value();
  }
  return total.value();
}

double TiedDownEngine::conditional(std::size_t n, const ProductFunctional& pf) const {
  if (n < 1 || n > max_n_) throw DomainError("tied-down: n outside [1, N]");
  const double un = tables_.u[n];
  if (!(un > 0.0)) throw DegenerateInputError("tied-down: no renewal possible at n = " + std::to_string(n));
  return joint(n, pf, tables_.a[n]) / un;
}

double TiedDownEngine::cesaro(std::size_t n, const ProductFunctional& pf) const {
  if (n < 1 || n > max_n_) throw DomainError("tied-down: n outside [1, N]");
  std::vector<double> terms(n + 1, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const std::size_t m = i + 1;
    if (tables_.u[m] > 0.0) terms[m] = joint(m, pf, tables_.a[m]);
  });
  numeric::CompensatedSum sum;
  for (std::size_t m = 1; m <= n; ++m) sum += terms[m];
  return sum.value() / tables_.a[n];
}

double tied_down_exact(const LifetimeDist& f, std::size_t n, const ProductFunctional& pf) {
  return TiedDownEngine(f, n).conditional(n, pf);
}

double cesaro_tied_down(const LifetimeDist& f, std::size_t n, const ProductFunctional& pf) {
  return TiedDownEngine(f, n).cesaro(n, pf);
}

double tied_down_enumerate(const LifetimeDist& f, std::size_t n, const ProductFunctional& pf,
                           double normalizer) {
  if (n < 1 || n > 24) throw DomainError("tied-down enumeration: n must lie in [1, 24]");
  const std::uint64_t subsets = std::uint64_t{1} << (n - 1);
  numeric::CompensatedSum weighted;
  numeric::CompensatedSum mass;
  std::vector<double> epochs;
  std::vector<double> values;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    epochs.clear();
    values.clear();
    double prob = 1.0;
    std::size_t previous = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && !(mask >> (i - 1) & 1U)) continue;
      prob *= f(i - previous);
      previous = i;
      epochs.push_back(static_cast<double>(i) / static_cast<double>(n));
      values.push_back(static_cast<double>(epochs.size()) / normalizer);
    }
    if (prob == 0.0) continue;
    const StepPath path(1.0, epochs, values);
    weighted += prob * eval_product(pf, path);
    mass += prob;
  }
  if (!(mass.value() > 0.0)) throw DegenerateInputError("tied-down enumeration: no renewal possible at n");
  return weighted.value() / mass.value();
}

std::vector<double> cesaro_occupation_gap(const LifetimeDist& f, std::span<const std::size_t> ns,
                                     const Factor& g) {
  if (ns.empty()) return {};
  const std::size_t top = *std::max_element(ns.begin(), ns.end());
  if (top < 1) throw ConfigError("cesaro_occupation_gap: N must be at least 1");
  const RenewalTables tables = renewal_sequence(f, top);
  const auto probs = f.probabilities();
  std::vector<double> step(probs.begin(), probs.begin() + static_cast<std::ptrdiff_t>(std::min(probs.size(), top + 1)));
  while (step.size() > 2 && step.back() == 0.0) step.pop_back();
  std::vector<double> sums(top + 1, 0.0);
  std::vector<double> power(step.begin(), step.end());  // P(s_1 = m)
  power.resize(top + 1, 0.0);
  for (std::size_t k = 1; k <= top; ++k) {
    const double kd = static_cast<double>(k);
    for (std::size_t m = k; m <= top; ++m) {
      if (power[m] != 0.0) sums[m] += g(kd / tables.a[m]) * power[m];
    }
    if (k == top) break;
    std::size_t first = k;
    while (first <= top && power[first] == 0.0) ++first;
    if (first > top) break;
    auto next = numeric::convolve(std::span<const double>(power).subspan(first), step, top + 1 - first);
    std::fill(power.begin(), power.end(), 0.0);
    std::copy(next.begin(), next.end(), power.begin() + static_cast<std::ptrdiff_t>(first));
  }

  const double g1 = g(1.0);
  std::vector<double> out;
  out.reserve(ns.size());
  for (std::size_t big_n : ns) {
    if (big_n < 1) throw ConfigError("cesaro_occupation_gap: N must be at least 1");
    numeric::CompensatedSum s;
    for (std::size_t m = 1; m <= big_n; ++m) s += std::abs(sums[m] - g1 * tables.u[m]);
    out.push_back(s.value() / tables.a[big_n]);
  }
  return out;
}

}  // namespace tiedml::renewal
