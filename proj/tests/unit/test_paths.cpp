#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tiedml/error.hpp"
#include "tiedml/functionals.hpp"
#include "tiedml/path_io.hpp"
#include "tiedml/paths.hpp"
#include "tiedml/selftest.hpp"

using namespace tiedml;

namespace {

StepPath reference_path() { return StepPath(1.0, {0.5, 0.8}, {1.0, 2.5}); }

StepPath staircase(int steps) {
  std::vector<double> epochs;
  std::vector<double> values;
  for (int k = 1; k <= steps; ++k) {
    epochs.push_back(k);
    values.push_back(k);
  }
  return StepPath(steps + 0.5, epochs, values);
}

}  // namespace

TEST_CASE("eval is right-continuous with left limits") {
  const StepPath p = reference_path();
  CHECK(p.eval(0.25) == 0.0);
  CHECK(p.eval(0.5) == 1.0);
  CHECK(p.eval_left(0.5) == 0.0);
  CHECK(p.eval(0.9) == 2.5);
  CHECK_THROWS_AS(p.eval(1.5), DomainError);
  CHECK_THROWS_AS(p.eval(-0.1), DomainError);
}

TEST_CASE("inverse of the staircase is floor plus one") {
  const StepPath inv = inverse(staircase(6), 5.0);
  for (double t : {0.0, 0.5, 1.0, 2.25, 3.0, 4.75}) {
    CHECK(inv.eval(t) == std::floor(t) + 1.0);
  }
  CHECK_THROWS_AS(inverse(staircase(6), 7.0), DomainError);
}

TEST_CASE("inverse of a two-jump path") {
  const StepPath xi(3.0, {1.0, 2.0}, {5.0, 7.0});
  CHECK(inverse(xi, 7.0).eval(6.0) == 2.0);
}

TEST_CASE("waiting times bracket the flat stretch") {
  const StepPath p = reference_path();
  CHECK(waiting_G(p, 0.9) == 0.8);
  CHECK(waiting_G(p, 0.6) == 0.5);
  CHECK(waiting_G(p, 0.25) == 0.0);
  CHECK(waiting_D(p, 0.6).time == 0.8);
  CHECK_FALSE(waiting_D(p, 0.6).censored);
  CHECK(waiting_D(p, 0.25).time == 0.5);
  const WaitingTime end = waiting_D(p, 0.9);
  CHECK(end.time == 1.0);
  CHECK(end.censored);
}

TEST_CASE("scaling") {
  const StepPath p = reference_path();
  CHECK(scale(p, 1.0, 0.5) == p);
  const StepPath half = scale(staircase(4), 2.0, 1.0);
  REQUIRE(half.jump_count() == 4);
  CHECK(half.epochs()[0] == 0.5);
  CHECK(half.epochs()[1] == 1.0);
  CHECK(half.values()[0] == 0.5);
  const StepPath wide(2.0, {0.5, 0.8}, {1.0, 2.5});
  const StepPath stretched = scale(wide, 0.5, 0.5);
  CHECK(stretched.horizon() == 4.0);
  CHECK(stretched.epochs()[0] == 1.0);
  CHECK(stretched.values()[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(scale(p, 0.5, 0.5, 4.0), DomainError);
}

TEST_CASE("increment shift") {
  const StepPath p = reference_path();
  CHECK(increment_shift(p, 0.0) == p);
  const StepPath shifted = increment_shift(p, 0.5);
  CHECK(shifted.horizon() == 0.5);
  REQUIRE(shifted.jump_count() == 1);
  CHECK(shifted.epochs()[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(shifted.values()[0] == 1.5);
  CHECK_THROWS_AS(increment_shift(p, 1.0), DomainError);
}

TEST_CASE("tie_down ends with a jump at one") {
  const StepPath tied = tie_down(reference_path(), 0.5);
  CHECK(tied.horizon() == 1.0);
  CHECK(tied.epochs().back() == 1.0);
  CHECK(tied.final_value() == doctest::Approx(2.5 / std::sqrt(0.8)));
  CHECK_THROWS_AS(tie_down(StepPath(2.0, {1.5}, {1.0}), 0.5), DegenerateInputError);
}

TEST_CASE("product functional evaluation") {
  const StepPath p = reference_path();
  CHECK(eval_product(ProductFunctional::unit(), p) == 1.0);
  const auto pf = ProductFunctional::parse("0.5=exp(1);h=const(1)");
  CHECK(eval_product(pf, p) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const auto two = ProductFunctional::parse("0.5=exp(1);h=invpow(1)");
  CHECK(eval_product(two, p) == doctest::Approx(0.4 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(ProductFunctional::parse(pf.spec()).spec() == pf.spec());
  CHECK_THROWS_AS(ProductFunctional::parse("0.5=exp(1);0.25=exp(1);h=exp(1)"), ConfigError);
  CHECK_THROWS_AS(Factor::parse("sin(1)"), ConfigError);
}

TEST_CASE("Stieltjes functional of a single jump") {
  const StepPath xi(1.0, {0.5}, {2.0});
  const PathFunctional g = terminal_functional(Factor::exponential(1.0));
  const StieltjesResult r = stieltjes_functional(g, xi, 0.5, 0.1);
  CHECK(r.value == doctest::Approx(2.0 * std::exp(-2.0 * std::sqrt(2.0))).epsilon(1e-14));
  CHECK(r.cutoff_bound == 0.0);
  CHECK(stieltjes_functional(g, xi, 0.5, 0.6).value == 0.0);
}

TEST_CASE("J1 distance of shifted unit jumps") {
  const StepPath p(1.0, {0.5}, {1.0});
  const StepPath q(1.0, {0.6}, {1.0});
  CHECK(j1_distance(p, q, 1.0) == doctest::Approx(std::log(1.25)).epsilon(1e-12));
  CHECK(j1_distance(q, p, 1.0) == doctest::Approx(std::log(1.25)).epsilon(1e-12));
  CHECK(j1_distance(p, p, 1.0) == 0.0);
  CHECK(uniform_distance(p, q, 1.0) == 1.0);
}

TEST_CASE("path serialization round trips bit-exactly") {
  const StepPath p(2.0, {0.1, 1.0 / 3.0, 1.75}, {0.2, std::nextafter(0.2, 1.0), 9.5}, 0.125);
  std::stringstream csv;
  write_path_csv(csv, p);
  CHECK(read_path_csv(csv) == p);
  CHECK(path_from_json(path_to_json(p)) == p);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("randomized path properties") {
  for (const auto& r : run_path_properties(500, 3)) {
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.checked > 0);
    CHECK(r.failures == 0);
  }
}
