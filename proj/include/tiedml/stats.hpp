#pragma once

// Sample comparisons behind every "equal in distribution" and "agrees within
// k standard errors" check, plus the ComparisonReport record.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace tiedml::stats {

/// sup_x |F_xs(x) - F_ys(x)| for the empirical CDFs. Throws DomainError on an
/// empty sample.
double ks_distance(std::span<const double> xs, std::span<const double> ys);

/// As ks_distance, with ys carrying nonnegative weights (importance sampling).
double ks_distance_weighted(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> y_weights);

/// sup_x |F_xs(x) - cdf(x)|.
double ks_distance_to_cdf(std::span<const double> xs, const std::function<double(double)>& cdf);

/// Two-sample KS critical value at level alpha ∈ {0.05, 0.01, 0.001} for
/// sample sizes n, m: Kolmogorov quantile over √n_eff with Stephens'
/// finite-size correction, n_eff = nm/(n+m).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Sample mean with its standard error.
Estimate mean_estimate(std::span<const double> xs);

/// p-th sample moment with jackknife standard error.
Estimate moment_report(std::span<const double> xs, int p);

/// Weighted mean Σwx/Σw with delta-method standard error.
Estimate ratio_estimate(std::span<const double> numerators, std::span<const double> weights);

/// Least-squares slope of log y against log x; all values must be positive.
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap interval for `statistic`, deterministic given seed.
Interval bootstrap_ci(std::span<const double> xs,
                      const std::function<double(std::span<const double>)>& statistic,
                      double level, std::size_t reps, std::uint64_t seed);

/// Writes x, F_xs(x), F_ys(x) at every pooled sample point.
void write_ecdf_csv(std::ostream& out, std::span<const double> xs, std::span<const double> ys);

/// Outcome of one experiment: an estimate (lhs) against a reference (rhs).
/// pass ⇔ |lhs - rhs| ≤ tolerance + z·sqrt(lhs_se² + rhs_se²).
struct ComparisonReport {
  static constexpr int kSchema = 1;

  std::string experiment;
  nlohmann::json params = nlohmann::json::object();
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double tolerance = 0.0;
  double z = 3.0;
  bool pass = false;
  std::vector<std::uint64_t> sample_sizes;
  std::vector<std::uint64_t> seeds;
  /// Extra diagnostics (cutoff bounds, retry counts, trend tables).
  nlohmann::json details = nlohmann::json::object();

  double combined_se() const;
  /// Recomputes `pass` from the rule above and returns it.
  bool evaluate();
};

nlohmann::json to_json(const ComparisonReport& report);
ComparisonReport report_from_json(const nlohmann::json& j);

}  // namespace tiedml::stats
