#include "tiedml/dynamics.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"
#include "tiedml/renewal.hpp"

namespace tiedml::dynamics {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("LSV map: gamma must lie in (0,1)");
}

/// Left branch with the power (2x)^{1/γ} taken by repeated multiplication when
/// 1/γ is an integer.
class LeftBranch {
 public:
  explicit LeftBranch(double gamma) : exponent_(1.0 / gamma) {
    const double rounded = std::round(exponent_);
    if (std::abs(rounded - exponent_) < 1e-12 && rounded <= 16.0) {
      integer_power_ = static_cast<int>(rounded);
    }
  }

  double power(double y) const {
    if (integer_power_ > 0) {
      double p = y;
      for (int i = 1; i < integer_power_; ++i) p *= y;
      return p;
    }
    return std::pow(y, exponent_);
  }

  double operator()(double x) const { return x * (1.0 + power(2.0 * x)); }

 private:
  double exponent_;
  int integer_power_ = 0;
};

/// y - T_left^{-1}(y) = 2^{1/γ} x^{1+1/γ} at x = T_left^{-1}(y).
double left_offset(double gamma, double x) {
  return std::pow(2.0, 1.0 / gamma) * std::pow(x, 1.0 + 1.0 / gamma);
}

}  // namespace

double lsv_map(double gamma, double x) {
  check_gamma(gamma);
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("LSV map: x must lie in [0,1]");
  if (x >= 0.5) return 2.0 * x - 1.0;
  return LeftBranch(gamma)(x);
}

double left_branch_inverse(double gamma, double y) {
  check_gamma(gamma);
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("LSV inverse: y must lie in [0,1]");
  if (y == 0.0) return 0.0;
  const double c = std::pow(2.0, 1.0 / gamma);
  const double p = 1.0 + 1.0 / gamma;
  double x = std::min(y, 0.5);
  for (int it = 0; it < 200; ++it) {
    const double fx = x + c * std::pow(x, p) - y;
    const double dfx = 1.0 + c * p * std::pow(x, p - 1.0);
    const double next = x - fx / dfx;
    if (!(next < x) || x - next <= 1e-17 * x) {
      x = std::max(next, 0.0);
      break;
    }
    x = next;
  }
  return x;
}

ReturnTime return_time(double gamma, double x, std::uint64_t cap) {
  check_gamma(gamma);
  if (!(x >= 0.5 && x <= 1.0)) throw DomainError("return_time: x must lie in [1/2, 1]");
  const LeftBranch left(gamma);
  for (std::uint64_t j = 1; j <= cap; ++j) {
    x = x >= 0.5 ? 2.0 * x - 1.0 : left(x);
    if (x >= 0.5) return {j, false};
  }
  return {cap, true};
}

// ---------------------------------------------------------------------------
// Ulam approximation

double DensityTable::sample_omega(Rng& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double target = uniform(rng) * omega_cdf.back();
  auto it = std::upper_bound(omega_cdf.begin(), omega_cdf.end(), target);
  if (it == omega_cdf.end()) --it;
  const std::size_t cell = omega_begin + static_cast<std::size_t>(it - omega_cdf.begin());
  const double lo = edges[cell];
  const double hi = edges[cell + 1];
  return lo + uniform(rng) * (hi - lo);
}

DensityTable ulam_density(double gamma, const UlamOptions& options) {
  check_gamma(gamma);
  if (options.uniform_cells < 1000 || options.uniform_cells % 2 != 0) {
    throw ConfigError("Ulam grid: need an even number of at least 1000 uniform cells");
  }
  if (!(options.x_min > 0.0 && options.x_min < 0.5 / static_cast<double>(options.uniform_cells))) {
    throw ConfigError("Ulam grid: x_min must lie below the uniform cell width");
  }
  if (!(options.ratio > 1.0)) throw ConfigError("Ulam grid: ratio must exceed 1");

  DensityTable table;
  table.gamma = gamma;
  const auto uniform = static_cast<double>(options.uniform_cells);
  const double width = 1.0 / uniform;
  auto& edges = table.edges;
  edges.push_back(0.0);
  double x = options.x_min;
  while (x * (options.ratio - 1.0) < width) {
    edges.push_back(x);
    x *= options.ratio;
  }
  auto j = static_cast<std::size_t>(std::ceil((edges.back() + 0.5 * width) * uniform));
  for (; j <= options.uniform_cells; ++j) edges.push_back(static_cast<double>(j) / uniform);
  const std::size_t cells = edges.size() - 1;
  table.omega_begin = static_cast<std::size_t>(
      std::lower_bound(edges.begin(), edges.end(), 0.5) - edges.begin());
  if (edges[table.omega_begin] != 0.5) throw NumericError("Ulam grid: 1/2 is not a cell edge");

  const LeftBranch left(gamma);
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double l = edges[i];
    const double r = edges[i + 1];
    const bool right_branch = i >= table.omega_begin;
    const double y0 = right_branch ? 2.0 * l - 1.0 : left(l);
    const double y1 = right_branch ? 2.0 * r - 1.0 : left(r);
    auto jt = std::upper_bound(edges.begin(), edges.end(), y0);
    std::size_t target = static_cast<std::size_t>(jt - edges.begin()) - 1;
    for (; target < cells && edges[target] < y1; ++target) {
      const double a = std::max(y0, edges[target]);
      const double b = std::min(y1, edges[target + 1]);
      if (!(b > a)) continue;
      double length = 0.0;
      if (right_branch) {
        length = 0.5 * (b - a);
      } else {
        // Preimage endpoints x = y - δ(y); an endpoint equal to the image of
        // the cell's own edge maps back to that edge with δ = 0.
        const double xa = a == y0 ? l : left_branch_inverse(gamma, a);
        const double xb = b == y1 ? r : left_branch_inverse(gamma, b);
        const double ya = a == y0 ? l : a;
        const double yb = b == y1 ? r : b;
        const double da = a == y0 ? 0.0 : left_offset(gamma, xa);
        const double db = b == y1 ? 0.0 : left_offset(gamma, xb);
        length = (yb - ya) - (db - da);
      }
      const double fraction = length / (r - l);
      if (fraction > 0.0) rows[i].emplace_back(target, fraction);
    }
  }

  // Stationarity π = P̂ᵀπ with the equation of the fixed-point cell replaced
  // by the normalization Σ_{Ω} π = 1.
  for (std::size_t i = 0; i < cells; ++i) {
    if (i != 0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for (const auto& [target, fraction] : rows[i]) {
      if (target != 0) triplets.emplace_back(static_cast<int>(target), static_cast<int>(i), -fraction);
    }
    if (i >= table.omega_begin) triplets.emplace_back(0, static_cast<int>(i), 1.0);
  }
  const auto n = static_cast<Eigen::Index>(cells);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw NumericError("Ulam density: sparse factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  Eigen::VectorXd pi = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw NumericError("Ulam density: sparse solve failed");

  Eigen::VectorXd image = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < cells; ++i) {
    for (const auto& [target, fraction] : rows[i]) image(static_cast<Eigen::Index>(target)) += fraction * pi(static_cast<Eigen::Index>(i));
  }
  table.residual = (pi - image).lpNorm<1>() / pi.lpNorm<1>();
  table.values.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    if (pi(static_cast<Eigen::Index>(i)) < 0.0) {
      throw NumericError("Ulam density: negative cell mass (residual " + std::to_string(table.residual) + ")");
    }
    table.values[i] = pi(static_cast<Eigen::Index>(i)) / (edges[i + 1] - edges[i]);
  }
  numeric::CompensatedSum cdf;
  for (std::size_t i = table.omega_begin; i < cells; ++i) {
    cdf += pi(static_cast<Eigen::Index>(i));
    table.omega_cdf.push_back(cdf.value());
  }
  return table;
}

double density_slope(const DensityTable& table, double lo, double hi) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 1; i < table.cells(); ++i) {
    const double centre = std::sqrt(table.edges[i] * table.edges[i + 1]);
    if (centre < lo || centre > hi || !(table.values[i] > 0.0)) continue;
    xs.push_back(centre);
    ys.push_back(table.values[i]);
  }
  if (xs.size() < 3) throw DomainError("density_slope: fewer than three cells in the fit range");
  return stats::loglog_slope(xs, ys);
}

// ---------------------------------------------------------------------------
// Orbits

OrbitSet simulate_orbits(const DensityTable& density, std::size_t n, std::size_t samples,
                         std::uint64_t seed) {
  if (n < 1 || n > 0xFFFFFFFFULL) throw ConfigError("simulate_orbits: n out of range");
  if (samples < 2) throw ConfigError("simulate_orbits: at least 2 samples required");
  OrbitSet out;
  out.gamma = density.gamma;
  out.n = n;
  out.visits.resize(samples);
  std::vector<char> absorbed(samples, 0);
  const LeftBranch left(density.gamma);
  parallel_for(samples, [&](std::size_t s) {
    Rng rng = make_rng(seed, 4, s);
    double x = density.sample_omega(rng);
    auto& visits = out.visits[s];
    for (std::size_t k = 1; k <= n; ++k) {
      x = x >= 0.5 ? 2.0 * x - 1.0 : left(x);
      if (x >= 0.5) {
        if (x >= 1.0) {
          absorbed[s] = 1;
          break;
        }
        visits.push_back(static_cast<std::uint32_t>(k));
      } else if (x == 0.0) {
        absorbed[s] = 1;
        break;
      }
    }
    visits.shrink_to_fit();
  });
  for (char a : absorbed) out.absorbed += static_cast<std::size_t>(a);
  return out;
}

EmpiricalReturns empirical_returns(const OrbitSet& orbits) {
  EmpiricalReturns r;
  std::vector<std::uint64_t> counts(orbits.n + 1, 0);
  for (const auto& visits : orbits.visits) {
    for (std::uint32_t k : visits) ++counts[k];
  }
  const auto samples = static_cast<double>(orbits.visits.size());
  r.u_hat.assign(orbits.n + 1, 0.0);
  r.a_hat.assign(orbits.n + 1, 0.0);
  r.u_hat[0] = 1.0;
  std::uint64_t running = 0;
  for (std::size_t k = 1; k <= orbits.n; ++k) {
    running += counts[k];
    r.u_hat[k] = static_cast<double>(counts[k]) / samples;
    r.a_hat[k] = static_cast<double>(running) / samples;
  }
  return r;
}

EmpiricalReturns empirical_return_sequence(double gamma, std::size_t n_max, std::size_t samples,
                                           std::uint64_t seed, const UlamOptions& options) {
  const DensityTable density = ulam_density(gamma, options);
  return empirical_returns(simulate_orbits(density, n_max, samples, seed));
}

std::vector<double> return_tail(const OrbitSet& orbits, std::span<const std::size_t> ms) {
  std::vector<double> out;
  const auto samples = static_cast<double>(orbits.visits.size());
  for (std::size_t m : ms) {
    std::size_t beyond = 0;
    for (const auto& visits : orbits.visits) {
      if (visits.empty() || visits.front() > m) ++beyond;
    }
    out.push_back(static_cast<double>(beyond) / samples);
  }
  return out;
}

stats::Estimate umbrella_statistic(const OrbitSet& orbits, const EmpiricalReturns& returns,
                                   const ProductFunctional& pf, std::size_t n) {
  if (n < 1 || n > orbits.n || returns.a_hat.size() <= n) {
    throw DomainError("umbrella_statistic: n beyond the simulated horizon");
  }
  if (!(returns.a_hat[n] > 0.0)) throw DegenerateInputError("umbrella_statistic: no returns observed");
  const auto& times = pf.times();
  const auto& factors = pf.factors();
  const std::size_t checkpoints = times.size();
  std::vector<double> per_orbit(orbits.visits.size());
  parallel_for(orbits.visits.size(), [&](std::size_t s) {
    const auto& visits = orbits.visits[s];
    std::vector<std::size_t> seen(checkpoints, 0);  // visits at times ≤ current checkpoint
    numeric::CompensatedSum sum;
    for (std::size_t c = 0; c < visits.size() && visits[c] <= n; ++c) {
      const std::size_t k = visits[c];
      const double scale = returns.a_hat[k];
      double value = 1.0;
      std::size_t before_last = 0;
      for (std::size_t nu = 0; nu < checkpoints; ++nu) {
        const std::size_t tau = renewal::checkpoint_index(k, times[nu]);
        while (seen[nu] < visits.size() && visits[seen[nu]] <= tau) ++seen[nu];
        value *= factors[nu](static_cast<double>(seen[nu]) / scale);
        before_last = seen[nu];
      }
      value *= pf.terminal()(static_cast<double>(c + 1 - before_last) / scale);
      sum += value;
    }
    per_orbit[s] = sum.value() / returns.a_hat[n];
  });
  return stats::mean_estimate(per_orbit);
}

stats::ComparisonReport verify_umbrella_mc(const OrbitSet& orbits, const EmpiricalReturns& returns,
                                           const ProductFunctional& pf, std::size_t n,
                                           const stats::Estimate& reference,
                                           double relative_tolerance) {
  const stats::Estimate lhs = umbrella_statistic(orbits, returns, pf, n);
  const stats::Estimate half = umbrella_statistic(orbits, returns, pf, std::max<std::size_t>(1, n / 2));
  stats::ComparisonReport r;
  r.experiment = "umbrella-lsv";
  r.params = {{"gamma", orbits.gamma},
              {"n", n},
              {"orbits", orbits.visits.size()},
              {"functional", pf.spec()},
              {"relative_tolerance", relative_tolerance}};
  r.lhs = lhs.value;
  r.lhs_se = lhs.se;
  r.rhs = reference.value;
  r.rhs_se = reference.se;
  r.z = 0.0;
  r.tolerance = relative_tolerance * std::abs(reference.value);
  r.sample_sizes = {orbits.visits.size()};
  r.details["half_horizon_statistic"] = half.value;
  r.details["half_horizon_se"] = half.se;
  r.details["doubling_gap_in_se"] = std::abs(lhs.value - half.value) / std::hypot(lhs.se, half.se);
  r.details["absorbed_orbits"] = orbits.absorbed;
  r.details["a_hat_n"] = returns.a_hat[n];
  r.evaluate();
  return r;
}

}  // namespace tiedml::dynamics
