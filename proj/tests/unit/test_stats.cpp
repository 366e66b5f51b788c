#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tiedml/error.hpp"
#include "tiedml/stats.hpp"

using namespace tiedml::stats;

TEST_CASE("two-sample KS distance") {
  const std::vector<double> xs = {1.0, 2.0, 3.0};
  const std::vector<double> ys = {1.5, 2.5};
  CHECK(ks_distance(xs, ys) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const std::vector<double> neg = {-3.0, -2.0};
  const std::vector<double> pos = {1.5, 4.0};
  CHECK(ks_distance(neg, pos) == 1.0);
  const std::vector<double> ones = {1.0, 1.0};
  CHECK(ks_distance_weighted(xs, ys, ones) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(ks_distance({}, ys), tiedml::DomainError);
}

TEST_CASE("jackknife moment standard error") {
  const std::vector<double> xs = {0.0, 2.0};
  const Estimate e = moment_report(xs, 1);
  CHECK(e.value == 1.0);
  CHECK(e.se == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("log-log slope of a power law") {
  const std::vector<double> xs = {1.0, 10.0, 100.0};
  const std::vector<double> ys = {2.0, 2.0 * std::pow(10.0, -1.5), 2.0 * std::pow(100.0, -1.5)};
  CHECK(loglog_slope(xs, ys) == doctest::Approx(-1.5).epsilon(1e-13));
}

TEST_CASE("bootstrap intervals") {
  const std::vector<double> constant(50, 4.0);
  auto mean = [](std::span<const double> s) {
    double t = 0.0;
    for (double x : s) t += x;
    return t / static_cast<double>(s.size());
  };
  const Interval c = bootstrap_ci(constant, mean, 0.95, 200, 1);
  CHECK(c.lower == 4.0);
  CHECK(c.upper == 4.0);

  std::mt19937_64 rng(11);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> xs(80);
  for (double& x : xs) x = expo(rng);
  const Interval narrow = bootstrap_ci(xs, mean, 0.5, 400, 2);
  const Interval wide = bootstrap_ci(xs, mean, 0.99, 400, 2);
  CHECK(wide.lower <= narrow.lower);
  CHECK(wide.upper >= narrow.upper);

  int covered = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    for (double& x : xs) x = expo(rng);
    const Interval ci = bootstrap_ci(xs, mean, 0.9, 300, 100 + t);
    covered += ci.lower <= 1.0 && 1.0 <= ci.upper ? 1 : 0;
  }
  CHECK(std::abs(covered / double(trials) - 0.9) <= 0.05);
}

TEST_CASE("comparison report pass rule and JSON round trip") {
  ComparisonReport r;
  r.experiment = "demo";
  r.lhs = 1.1;
  r.rhs = 1.0;
  r.lhs_se = 0.03;
  r.rhs_se = 0.04;
  r.z = 3.0;
  CHECK(r.combined_se() == doctest::Approx(0.05));
  CHECK(r.evaluate());
  r.z = 1.0;
  CHECK_FALSE(r.evaluate());
  const ComparisonReport back = report_from_json(to_json(r));
  CHECK(back.lhs == r.lhs);
  CHECK(back.pass == r.pass);
  CHECK(to_json(back) == to_json(r));
}
