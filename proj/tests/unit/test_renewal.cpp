#include <doctest.h>

#include <cmath>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"
#include "tiedml/renewal.hpp"

using namespace tiedml;
using namespace tiedml::renewal;

TEST_CASE("zeta lifetime normalization") {
  const auto f = LifetimeDist::zeta(0.5, 1000000);
  CHECK(f(1) == doctest::Approx(0.382793383999426562).epsilon(1e-13));
  CHECK(f.tail(1) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(f.tail_index().value() == 0.5);
  CHECK(numeric::hurwitz_zeta(1.5, 3.5) == doctest::Approx(1.15079755604335544925).epsilon(1e-13));
  CHECK(numeric::hurwitz_zeta(2.5, 0.25) == doctest::Approx(32.8474519546976858627).epsilon(1e-13));
  CHECK_THROWS_AS(LifetimeDist::parse("zeta:1.5", 10), ConfigError);
  CHECK_THROWS_AS(LifetimeDist::parse("gamma:0.5", 10), ConfigError);
}

TEST_CASE("polylogarithm on the unit circle") {
  const auto a = numeric::polylog_unit_circle(1.5, 0.3);
  CHECK(a.real() == doctest::Approx(1.24879625711207029817).epsilon(1e-12));
  CHECK(a.imag() == doctest::Approx(0.934945270107861038135).epsilon(1e-12));
  const auto b = numeric::polylog_unit_circle(1.25, -2.0);
  CHECK(b.real() == doctest::Approx(-0.516522617843227057523).epsilon(1e-12));
  CHECK(b.imag() == doctest::Approx(-0.617955069118634571155).epsilon(1e-12));
}

TEST_CASE("renewal sequences by hand") {
  const auto geom = renewal_sequence(LifetimeDist::geometric(0.5, 50), 50);
  for (std::size_t n = 1; n <= 50; ++n) CHECK(geom.u[n] == doctest::Approx(0.5).epsilon(1e-15));
  const auto two = renewal_sequence(LifetimeDist::parse("custom:0.5,0.5", 3), 3);
  CHECK(two.u[1] == 0.5);
  CHECK(two.u[2] == 0.75);
  CHECK(two.u[3] == 0.625);
  CHECK(two.a[3] == 1.875);
}

TEST_CASE("FFT and naive renewal recursions agree") {
  const auto f = LifetimeDist::zeta(0.5, 5000);
  const auto fft = renewal_sequence(f, 5000, RenewalMethod::Fft);
  const auto naive = renewal_sequence(f, 5000, RenewalMethod::Naive);
  for (std::size_t n = 0; n <= 5000; ++n) {
    CHECK(std::abs(fft.u[n] - naive.u[n]) <= 1e-12 * naive.u[n]);
  }
}

TEST_CASE("SRT diagnostics") {
  const auto f = LifetimeDist::zeta(0.5, 10000);
  const auto t = renewal_sequence(f, 10000);
  const auto d = srt_ratio(t, f, 10000);
  CHECK(d.in_regime);
  CHECK(std::abs(d.ratio - 1.0) < 0.1);
  const auto g = LifetimeDist::geometric(0.5, 100);
  const auto tg = renewal_sequence(g, 100);
  CHECK_THROWS_AS(srt_ratio(tg, g, 100), ConfigError);
  CHECK_FALSE(srt_ratio(tg, g, 100, 0.5).in_regime);
}

TEST_CASE("convolution powers") {
  const auto g = LifetimeDist::geometric(0.5, 200);
  const auto p2 = convolution_power(g, 2, 40);
  for (std::size_t n = 2; n <= 40; ++n) {
    CHECK(p2.probabilities[n] ==
          doctest::Approx(static_cast<double>(n - 1) * std::ldexp(1.0, -static_cast<int>(n)))
              .epsilon(1e-13));
  }
  CHECK(p2.retained_mass <= 1.0);
  CHECK(convolution_power(g, 2, 200).retained_mass > p2.retained_mass);
  const auto lattice = LifetimeDist::parse("zeta:0.5/2+1", 2000);
  CHECK(lattice.span() == 2);
  CHECK(lattice.residue() == 1);
  const auto p3 = convolution_power(lattice, 3, 400);
  for (std::size_t m = 0; m <= 400; m += 2) CHECK(p3.probabilities[m] == 0.0);
}

TEST_CASE("tied-down values against enumeration") {
  const auto f = LifetimeDist::geometric(0.5, 20);
  const auto pf = ProductFunctional::parse("h=pow(2)");
  const TiedDownEngine engine(f, 10);
  const double a3 = engine.tables().a[3];
  // Renewal sets containing 3: {3}, {1,3}, {2,3}, {1,2,3}, each of probability 1/8.
  const double by_hand =
      (std::pow(1.0 / a3, 2) + 2.0 * std::pow(2.0 / a3, 2) + std::pow(3.0 / a3, 2)) / 4.0;
  CHECK(engine.conditional(3, pf) == doctest::Approx(by_hand).epsilon(1e-14));
  CHECK(tied_down_enumerate(f, 3, pf, a3) == doctest::Approx(by_hand).epsilon(1e-14));
  for (std::size_t n = 1; n <= 10; ++n) {
    CHECK(engine.conditional(n, ProductFunctional::unit()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(engine.cesaro(n, ProductFunctional::unit()) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(checkpoint_index(10, 0.3) == 3);
  CHECK(checkpoint_index(3, 2.0 / 3.0) == 2);
}

TEST_CASE("Cesaro occupation statistic vanishes for unit lifetimes") {
  const auto delta = LifetimeDist::parse("custom:1", 1);
  const std::vector<std::size_t> ns = {10, 50};
  for (double v : cesaro_occupation_gap(delta, ns, Factor::exponential(1.0))) CHECK(v == 0.0);
}

TEST_CASE("local limit check at moderate n") {
  const auto f = LifetimeDist::zeta(0.5, 1 << 14);
  const auto r = llt_check(f, 0.5, 1024);
  CHECK(r.sup_error < 0.05 * r.peak_density);
  CHECK(r.window_mass <= 1.0 + 1e-9);
  CHECK_THROWS_AS(llt_check(LifetimeDist::lattice(f, 2, 1), 0.5, 1024), ConfigError);
}
