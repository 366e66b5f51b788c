#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"
#include "tiedml/processes.hpp"
#include "tiedml/stable.hpp"

using namespace tiedml;

TEST_CASE("Mittag-Leffler moments") {
  for (double g : {0.3, 0.5, 0.7}) CHECK(ml_moment(GammaIndex(g), 1) == doctest::Approx(1.0));
  CHECK(ml_moment(GammaIndex(0.5), 2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK(ml_moment(GammaIndex(1.0 - 1e-9), 3) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tied_marginal_moment(GammaIndex(0.5), 0) == doctest::Approx(1.0));
  CHECK(tied_marginal_moment(GammaIndex(0.5), 1) == doctest::Approx(std::numbers::pi / 2));
  CHECK(tied_marginal_moment(GammaIndex(0.5), 2) > tied_marginal_moment(GammaIndex(0.5), 1));
  CHECK_THROWS_AS(GammaIndex(1.0), ConfigError);
  CHECK_THROWS_AS(GammaIndex(0.0), ConfigError);
}

TEST_CASE("stable densities") {
  const double levy = std::exp(-0.25) / (2.0 * std::sqrt(std::numbers::pi));
  CHECK(stable::standard_density(0.5, 1.0) == doctest::Approx(0.219695644733861198).epsilon(1e-10));
  CHECK(levy == doctest::Approx(0.219695644733861198).epsilon(1e-15));
  const double c = stable::normalized_scale(0.5);
  CHECK(stable_density(GammaIndex(0.5), 2.0) ==
        doctest::Approx(stable::standard_density(0.5, 2.0 / c) / c).epsilon(1e-12));
}

TEST_CASE("normalized stable law has unit inverse moment") {
  for (double g : {0.3, 0.5, 0.7}) {
    // ∫ x^{-γ} f(x) dx on a log grid; the integrand decays at both ends.
    const int steps = 1500;
    const double lo = std::log(1e-6);
    const double hi = std::log(1e10);
    const double h = (hi - lo) / steps;
    numeric::CompensatedSum sum;
    for (int i = 0; i <= steps; ++i) {
      const double x = std::exp(lo + i * h);
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      sum += w * std::pow(x, 1.0 - g) * stable_density(GammaIndex(g), x) * h;
    }
    CHECK(sum.value() == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("samplers are deterministic in seed and stream") {
  Rng a = make_rng(7, 2, 5);
  Rng b = make_rng(7, 2, 5);
  const StepPath p = sample_ml_path(GammaIndex(0.5), 1.0, 1e-2, a);
  const StepPath q = sample_ml_path(GammaIndex(0.5), 1.0, 1e-2, b);
  CHECK(p == q);
  const auto spec = SubordinatorSpec::normalized(GammaIndex(0.5), 0.25, 3, 1);
  CHECK(sample_subordinator(spec, 1.0) == sample_subordinator(spec, 1.0));
  CHECK(sample_subordinator(spec, 1.0).jump_count() == 4);
  Rng c = make_rng(9, 1, 0);
  const TiedPath tied = sample_tied_path(GammaIndex(0.5), 1e-2, c);
  CHECK(tied.path.epochs().back() == 1.0);
}

TEST_CASE("small Monte Carlo sanity for the identities") {
  McConfig config;
  config.samples = 4000;
  config.resolution = 1e-2;
  config.seed = 5;
  const auto c = estimate_propC(GammaIndex(0.5), {constant_functional(1.0)}, config, 1e-10);
  REQUIRE(c.size() == 1);
  CHECK(c[0].lhs == 1.0);
  CHECK(c[0].pass);
  const auto d = estimate_propD(GammaIndex(0.7), {ProductFunctional::parse("0.5=exp(1);h=exp(1)")},
                                config);
  REQUIRE(d.size() == 1);
  CHECK(d[0].pass);
  CHECK(d[0].details.at("horizon_retries") == 0);
}
