#include <doctest.h>

#include <cmath>

#include "tiedml/dynamics.hpp"
#include "tiedml/error.hpp"

using namespace tiedml;
using namespace tiedml::dynamics;

TEST_CASE("LSV map branches") {
  CHECK(lsv_map(0.5, 0.25) == doctest::Approx(5.0 / 16.0).epsilon(1e-15));
  CHECK(lsv_map(0.3, 0.75) == 0.5);
  CHECK(lsv_map(0.5, 0.5) == 0.0);
  CHECK(lsv_map(0.5, 0.5 - 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(lsv_map(0.5, 1.5), DomainError);
  for (double y : {0.0, 0.1, 0.5, 0.99}) {
    CHECK(lsv_map(0.5, left_branch_inverse(0.5, y)) == doctest::Approx(y).epsilon(1e-13));
  }
}

TEST_CASE("return times") {
  CHECK(return_time(0.5, 0.75).steps == 1);
  CHECK(return_time(0.5, 0.9).steps == 1);
  const ReturnTime capped = return_time(0.5, 0.5 + 1e-15, 10);
  CHECK(capped.censored);
  CHECK(capped.steps == 10);
}

TEST_CASE("Ulam density") {
  UlamOptions options;
  options.uniform_cells = 1000;
  const DensityTable table = ulam_density(0.5, options);
  CHECK(table.residual < 1e-8);
  CHECK(std::abs(density_slope(table, 1e-4, 1e-2) + 2.0) < 0.2);
  double omega_mass = 0.0;
  for (std::size_t i = table.omega_begin; i < table.cells(); ++i) {
    CHECK(table.values[i] > 0.0);
    omega_mass += table.values[i] * (table.edges[i + 1] - table.edges[i]);
  }
  CHECK(omega_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical returns and the unit statistic") {
  UlamOptions options;
  options.uniform_cells = 1000;
  const DensityTable table = ulam_density(0.5, options);
  const OrbitSet orbits = simulate_orbits(table, 2000, 300, 4);
  const EmpiricalReturns r = empirical_returns(orbits);
  CHECK(r.u_hat[0] == 1.0);
  CHECK(r.a_hat[0] == 0.0);
  for (std::size_t k = 1; k <= 2000; ++k) CHECK(r.a_hat[k] >= r.a_hat[k - 1]);
  const auto unit = umbrella_statistic(orbits, r, ProductFunctional::unit(), 2000);
  CHECK(unit.value == doctest::Approx(1.0).epsilon(1e-12));
  const OrbitSet again = simulate_orbits(table, 2000, 300, 4);
  CHECK(again.visits == orbits.visits);
}
