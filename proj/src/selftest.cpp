#include "tiedml/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tiedml/error.hpp"
#include "tiedml/parallel.hpp"
#include "tiedml/path_io.hpp"
#include "tiedml/paths.hpp"

namespace tiedml {

namespace {

constexpr std::uint64_t kStream = 7;
constexpr int kGrid = 64;

struct Tally {
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string first_failure;

  void check(bool ok, std::size_t path_index, const std::string& what) {
    ++checked;
    if (ok) return;
    if (failures++ == 0) {
      first_failure = "path " + std::to_string(path_index) + ": " + what;
    }
  }
};

/// Jumps on the grid {k·horizon/64} with increments in {1/16, ..., 1}.
StepPath random_path(Rng& rng, bool strictly_increasing, double horizon = 0.0) {
  std::uniform_int_distribution<int> horizon_pick(0, 1);
  std::uniform_int_distribution<int> count_pick(0, 12);
  std::uniform_int_distribution<int> step_pick(strictly_increasing ? 1 : 0, 16);
  std::bernoulli_distribution keep(0.5);
  if (horizon == 0.0) horizon = horizon_pick(rng) == 0 ? 1.0 : 2.0;
  const int jumps = count_pick(rng);
  std::vector<int> slots;
  for (int k = 1; k <= kGrid; ++k) slots.push_back(k);
  std::shuffle(slots.begin(), slots.end(), rng);
  slots.resize(static_cast<std::size_t>(jumps));
  std::sort(slots.begin(), slots.end());
  const double initial = keep(rng) ? 0.0 : step_pick(rng) / 16.0;
  std::vector<double> epochs;
  std::vector<double> values;
  double level = initial;
  for (int k : slots) {
    int step = step_pick(rng);
    level += step / 16.0;
    epochs.push_back(horizon * k / kGrid);
    values.push_back(level);
  }
  return StepPath(horizon, std::move(epochs), std::move(values), initial);
}

double dyadic_time(Rng& rng, double horizon, int denominator, int lo = 0, int hi = -1) {
  std::uniform_int_distribution<int> pick(lo, hi < 0 ? denominator : hi);
  return horizon * pick(rng) / denominator;
}

/// Midpoints between grid epochs: never a jump epoch of random_path.
double continuity_point(Rng& rng, double horizon) {
  std::uniform_int_distribution<int> pick(0, kGrid - 1);
  return horizon * (pick(rng) + 0.5) / kGrid;
}

std::string describe(const StepPath& p) { return path_to_json(p).dump(); }

void involution(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath xi = random_path(rng, true);
  if (xi.jump_count() == 0) return;
  const StepPath inv = inverse(xi, xi.final_value());
  const StepPath back = inverse(inv, inv.final_value());
  const double last = xi.epochs().back();
  for (int r = 0; r < 8; ++r) {
    const double t = continuity_point(rng, xi.horizon());
    if (t >= last || t > back.horizon()) continue;
    tally.check(back.eval(t) == xi.eval(t), i, "inverse twice differs at " + format_double(t) +
                                                   " for " + describe(xi));
  }
}

void semiflow(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath xi = random_path(rng, false);
  const double s = dyadic_time(rng, xi.horizon(), 8, 0, 7);
  const double r = dyadic_time(rng, xi.horizon() - s, 8, 0, 7);
  const StepPath twice = increment_shift(increment_shift(xi, s), r);
  const StepPath once = increment_shift(xi, s + r);
  tally.check(twice == once, i,
              "shift by " + format_double(s) + " then " + format_double(r) + " for " + describe(xi));
}

void scaling(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath xi = random_path(rng, false);
  static constexpr double kHalfGamma[] = {0.25, 1.0, 4.0};
  static constexpr double kUnitGamma[] = {0.5, 1.0, 2.0};
  std::uniform_int_distribution<int> pick(0, 2);
  const bool half = std::bernoulli_distribution(0.5)(rng);
  const double gamma = half ? 0.5 : 1.0;
  const double a = half ? kHalfGamma[pick(rng)] : kUnitGamma[pick(rng)];
  const double b = half ? kHalfGamma[pick(rng)] : kUnitGamma[pick(rng)];
  const StepPath twice = scale(scale(xi, a, gamma), b, gamma);
  const StepPath once = scale(xi, a * b, gamma);
  tally.check(twice == once, i,
              "scale by " + format_double(a) + " then " + format_double(b) + " for " + describe(xi));
}

void sandwich(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath xi = random_path(rng, false);
  for (int r = 0; r < 4; ++r) {
    const double t = dyadic_time(rng, xi.horizon(), 2 * kGrid);
    const double g = waiting_G(xi, t);
    const WaitingTime d = waiting_D(xi, t);
    const double level = xi.eval(t);
    bool ok = g <= t && t <= d.time && xi.eval(g) == level && xi.eval(0.5 * (g + d.time)) == level;
    if (d.time > g) ok = ok && xi.eval_left(d.time) == level;
    tally.check(ok, i, "flat stretch around " + format_double(t) + " for " + describe(xi));
  }
}

void tie_down_epoch(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath xi = random_path(rng, false);
  if (xi.epochs_up_to(1.0) == 0 || xi.eval(1.0) == xi.initial()) return;
  std::uniform_int_distribution<int> pick(0, 1);
  const double gamma = pick(rng) == 0 ? 0.5 : 0.75;
  const StepPath tied = tie_down(xi, gamma);
  tally.check(tied.jump_count() > 0 && tied.epochs().back() == 1.0 && tied.horizon() == 1.0, i,
              "tie_down last epoch for " + describe(xi));
}

void stieltjes_unit(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath xi = random_path(rng, false);
  const PathFunctional one{"one", [](const ScaledView&) { return 1.0; }, 1.0};
  const double epsilon = dyadic_time(rng, 0.5, 16, 1, 15);
  const StieltjesResult r = stieltjes_functional(one, xi, 0.5, epsilon);
  tally.check(r.value == xi.eval(1.0) - xi.eval(epsilon), i,
              "unit integrand from " + format_double(epsilon) + " for " + describe(xi));
}

void j1_properties(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath p = random_path(rng, false);
  const StepPath q = random_path(rng, false, p.horizon());
  const double h = p.horizon();
  const double pq = j1_distance(p, q, h);
  const double qp = j1_distance(q, p, h);
  tally.check(std::abs(pq - qp) <= 1e-12, i,
              "asymmetric J1 " + format_double(pq) + " vs " + format_double(qp));
  tally.check(j1_distance(p, p, h) == 0.0, i, "nonzero J1 to itself for " + describe(p));
  tally.check(pq <= uniform_distance(p, q, h), i, "J1 above uniform distance");
}

void round_trip(std::size_t i, Rng& rng, Tally& tally) {
  const StepPath xi = random_path(rng, false);
  std::stringstream csv;
  write_path_csv(csv, xi);
  const bool csv_ok = read_path_csv(csv) == xi;
  const bool json_ok = path_from_json(nlohmann::json::parse(path_to_json(xi).dump())) == xi;
  tally.check(csv_ok && json_ok, i, "serialization round trip for " + describe(xi));
}

struct Property {
  const char* name;
  void (*run)(std::size_t, Rng&, Tally&);
};

constexpr Property kProperties[] = {
    {"involution", involution},         {"semiflow", semiflow},
    {"scaling-composition", scaling},   {"sandwich", sandwich},
    {"tie-down-epoch", tie_down_epoch}, {"stieltjes-unit", stieltjes_unit},
    {"j1-metric", j1_properties},       {"serialization", round_trip},
};

}  // namespace

std::vector<PropertyResult> run_path_properties(std::size_t paths, std::uint64_t seed) {
  std::vector<PropertyResult> results;
  std::uint64_t index = 0;
  for (const Property& property : kProperties) {
    std::vector<Tally> tallies(paths);
    const std::uint64_t base = index++;
    parallel_for(paths, [&](std::size_t i) {
      Rng rng = make_rng(seed, kStream + base, i);
      try {
        property.run(i, rng, tallies[i]);
      } catch (const std::exception& e) {
        tallies[i].check(false, i, e.what());
      }
    });
    PropertyResult result{property.name, 0, 0, {}};
    for (const Tally& t : tallies) {
      result.checked += t.checked;
      if (t.failures > 0 && result.failures == 0) result.first_failure = t.first_failure;
      result.failures += t.failures;
    }
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace tiedml
