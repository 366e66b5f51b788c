#include "tiedml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"
#include "tiedml/parallel.hpp"
#include "tiedml/path_io.hpp"

namespace tiedml::stats {

namespace {

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

void require_nonempty(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw DomainError(what);
}

}  // namespace

double ks_distance(std::span<const double> xs, std::span<const double> ys) {
  require_nonempty(xs, "ks_distance: empty first sample");
  require_nonempty(ys, "ks_distance: empty second sample");
  const auto a = sorted_copy(xs);
  const auto b = sorted_copy(ys);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    const double x = std::min(i < a.size() ? a[i] : INFINITY, j < b.size() ? b[j] : INFINITY);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_distance_weighted(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> y_weights) {
  require_nonempty(xs, "ks_distance_weighted: empty first sample");
  require_nonempty(ys, "ks_distance_weighted: empty second sample");
  if (ys.size() != y_weights.size()) throw DomainError("ks_distance_weighted: weight count mismatch");
  const auto a = sorted_copy(xs);
  std::vector<std::size_t> order(ys.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return ys[l] < ys[r]; });
  numeric::CompensatedSum total;
  for (double w : y_weights) {
    if (!(w >= 0.0)) throw DomainError("ks_distance_weighted: negative weight");
    total += w;
  }
  const double wt = total.value();
  if (!(wt > 0.0)) throw DomainError("ks_distance_weighted: zero total weight");
  const double na = static_cast<double>(a.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double cum = 0.0;
  double d = 0.0;
  while (i < a.size() || j < order.size()) {
    const double x =
        std::min(i < a.size() ? a[i] : INFINITY, j < order.size() ? ys[order[j]] : INFINITY);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < order.size() && ys[order[j]] <= x) cum += y_weights[order[j++]];
    d = std::max(d, std::abs(static_cast<double>(i) / na - cum / wt));
  }
  return d;
}

double ks_distance_to_cdf(std::span<const double> xs, const std::function<double(double)>& cdf) {
  require_nonempty(xs, "ks_distance_to_cdf: empty sample");
  const auto a = sorted_copy(xs);
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  if (n == 0 || m == 0) throw DomainError("ks_critical_value: empty sample");
  // c(α) for the limiting Kolmogorov distribution.
  double c = 0.0;
  if (alpha == 0.05) {
    c = 1.3581;
  } else if (alpha == 0.01) {
    c = 1.6276;
  } else if (alpha == 0.001) {
    c = 1.9495;
  } else {
    throw ConfigError("ks_critical_value: alpha must be 0.05, 0.01 or 0.001");
  }
  const double n_eff = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  // Finite-size correction (Stephens): replace √n_eff by √n_eff + 0.12 + 0.11/√n_eff.
  const double root = std::sqrt(n_eff);
  return c / (root + 0.12 + 0.11 / root);
}

Estimate mean_estimate(std::span<const double> xs) {
  require_nonempty(xs, "mean_estimate: empty sample");
  numeric::CompensatedSum s;
  for (double x : xs) s += x;
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  if (xs.size() < 2) return {mean, 0.0};
  numeric::CompensatedSum ss;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss.value() / (n - 1.0) / n)};
}

Estimate moment_report(std::span<const double> xs, int p) {
  if (p < 1) throw DomainError("moment_report: p must be >= 1");
  std::vector<double> powers(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) powers[i] = p == 1 ? xs[i] : std::pow(xs[i], p);
  // For a sample mean the jackknife variance is exactly s²/n, so it is
  // computed in closed form.
  return mean_estimate(powers);
}

Estimate ratio_estimate(std::span<const double> numerators, std::span<const double> weights) {
  if (numerators.size() != weights.size()) throw DomainError("ratio_estimate: size mismatch");
  require_nonempty(weights, "ratio_estimate: empty sample");
  numeric::CompensatedSum sx;
  numeric::CompensatedSum sw;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sx += numerators[i];
    sw += weights[i];
  }
  const double n = static_cast<double>(weights.size());
  const double ratio = sx.value() / sw.value();
  const double wbar = sw.value() / n;
  numeric::CompensatedSum ss;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double r = numerators[i] - ratio * weights[i];
    ss += r * r;
  }
  const double se = n > 1 ? std::sqrt(ss.value() / (n - 1.0) / n) / wbar : 0.0;
  return {ratio, se};
}

Interval bootstrap_ci(std::span<const double> xs,
                      const std::function<double(std::span<const double>)>& statistic,
                      double level, std::size_t reps, std::uint64_t seed) {
  require_nonempty(xs, "bootstrap_ci: empty sample");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap_ci: level must lie in (0,1)");
  if (reps < 100) throw DomainError("bootstrap_ci: at least 100 replicates required");
  std::vector<double> stat(reps);
  parallel_for(reps, [&](std::size_t r) {
    Rng rng = make_rng(seed, 0xB007, r);
    std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
    std::vector<double> resample(xs.size());
    for (auto& v : resample) v = xs[pick(rng)];
    stat[r] = statistic(resample);
  });
  std::sort(stat.begin(), stat.end());
  const double tail = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(reps - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, reps - 1);
    const double w = pos - static_cast<double>(lo);
    return stat[lo] + w * (stat[hi] - stat[lo]);
  };
  return {quantile(tail), quantile(1.0 - tail)};
}

void write_ecdf_csv(std::ostream& out, std::span<const double> xs, std::span<const double> ys) {
  const auto a = sorted_copy(xs);
  const auto b = sorted_copy(ys);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
  out << "x,F_x,F_y\n";
  for (double x : pooled) {
    const auto ia = std::upper_bound(a.begin(), a.end(), x) - a.begin();
    const auto ib = std::upper_bound(b.begin(), b.end(), x) - b.begin();
    out << format_double(x) << ','
        << format_double(a.empty() ? 0.0 : static_cast<double>(ia) / static_cast<double>(a.size())) << ','
        << format_double(b.empty() ? 0.0 : static_cast<double>(ib) / static_cast<double>(b.size()))
        << '\n';
  }
}

double ComparisonReport::combined_se() const { return std::hypot(lhs_se, rhs_se); }

bool ComparisonReport::evaluate() {
  pass = std::isfinite(lhs) && std::isfinite(rhs) &&
         std::abs(lhs - rhs) <= tolerance + z * combined_se();
  return pass;
}

nlohmann::json to_json(const ComparisonReport& r) {
  return {{"schema", ComparisonReport::kSchema},
          {"experiment", r.experiment},
          {"params", r.params},
          {"lhs", r.lhs},
          {"lhs_se", r.lhs_se},
          {"rhs", r.rhs},
          {"rhs_se", r.rhs_se},
          {"tolerance", r.tolerance},
          {"z", r.z},
          {"pass", r.pass},
          {"samples", r.sample_sizes},
          {"seeds", r.seeds},
          {"details", r.details}};
}

ComparisonReport report_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<int>() != ComparisonReport::kSchema) {
    throw ConfigError("ComparisonReport: unsupported schema version");
  }
  ComparisonReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.params = j.at("params");
  r.lhs = j.at("lhs").get<double>();
  r.lhs_se = j.at("lhs_se").get<double>();
  r.rhs = j.at("rhs").get<double>();
  r.rhs_se = j.at("rhs_se").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.z = j.at("z").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.sample_sizes = j.value("samples", std::vector<std::uint64_t>{});
  r.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  r.details = j.value("details", nlohmann::json::object());
  return r;
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw DomainError("loglog_slope: need two or more paired values");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0 && ys[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  const auto n = static_cast<double>(xs.size());
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw DomainError("loglog_slope: x values must not all coincide");
  return sxy / sxx;
}

}  // namespace tiedml::stats
