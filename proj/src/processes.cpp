#include "tiedml/processes.hpp"

#include <cmath>
#include <string>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"
#include "tiedml/stable.hpp"

namespace tiedml {

namespace {

constexpr std::uint64_t kTiedStream = 1;
constexpr std::uint64_t kFreeStream = 2;
constexpr std::uint64_t kMarginalStream = 3;

void check_config(const McConfig& config) {
  if (config.samples < 2) throw ConfigError("Monte Carlo: at least 2 samples required");
  if (!(config.resolution > 0.0 && config.resolution < 1.0)) {
    throw ConfigError("Monte Carlo: resolution must lie in (0,1)");
  }
}

nlohmann::json base_params(GammaIndex gamma, const McConfig& config) {
  return {{"gamma", gamma.value()},
          {"samples", config.samples},
          {"resolution", config.resolution},
          {"seed", config.seed}};
}

}  // namespace

GammaIndex::GammaIndex(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("gamma must lie strictly inside (0,1), got " + std::to_string(gamma));
  }
}

SubordinatorSpec SubordinatorSpec::normalized(GammaIndex gamma, double grid_step,
                                              std::uint64_t seed, std::uint64_t stream) {
  return {gamma, stable::normalized_scale(gamma), grid_step, seed, stream};
}

StepPath sample_subordinator(const SubordinatorSpec& spec, double horizon) {
  if (!(horizon > 0.0)) throw ConfigError("sample_subordinator: horizon must be positive");
  if (!(spec.grid_step > 0.0) || !(spec.scale > 0.0)) {
    throw ConfigError("sample_subordinator: grid step and scale must be positive");
  }
  Rng rng = make_rng(spec.seed, spec.stream, 0);
  const double gamma = spec.gamma;
  const double cell_scale = spec.scale * std::pow(spec.grid_step, 1.0 / gamma);
  std::vector<double> epochs;
  std::vector<double> values;
  double eta = 0.0;
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * spec.grid_step;
    if (t > horizon) break;
    eta += cell_scale * stable::sample_standard(gamma, rng);
    epochs.push_back(t);
    values.push_back(eta);
  }
  return StepPath(horizon, std::move(epochs), std::move(values));
}

StepPath sample_ml_path(GammaIndex gamma, double horizon, double resolution, Rng& rng) {
  if (!(horizon > 0.0)) throw ConfigError("sample_ml_path: horizon must be positive");
  if (!(resolution > 0.0)) throw ConfigError("sample_ml_path: resolution must be positive");
  const stable::IncrementSampler increment(gamma, resolution);
  std::vector<double> epochs;
  std::vector<double> values;
  epochs.reserve(static_cast<std::size_t>(2.0 * horizon / resolution) + 16);
  values.reserve(epochs.capacity());
  double initial = 0.0;
  double eta = 0.0;
  for (std::size_t k = 1;; ++k) {
    eta += increment(rng);
    if (eta > horizon) break;
    const double level = static_cast<double>(k) * resolution;
    if (eta <= 0.0) {
      initial = level;
    } else if (!epochs.empty() && eta <= epochs.back()) {
      values.back() = level;  // increment below the resolution of eta
    } else {
      epochs.push_back(eta);
      values.push_back(level);
    }
  }
  return StepPath(horizon, std::move(epochs), std::move(values), initial);
}

double ml_moment(GammaIndex gamma, int p) {
  if (p < 0) throw DomainError("ml_moment: p must be nonnegative");
  const double g = gamma;
  const double pd = static_cast<double>(p);
  return std::exp(std::lgamma(pd + 1.0) + pd * std::lgamma(1.0 + g) - std::lgamma(1.0 + pd * g));
}

double tied_marginal_moment(GammaIndex gamma, int p) {
  if (p < 0) throw DomainError("tied_marginal_moment: p must be nonnegative");
  return ml_moment(gamma, p + 1);
}

TiedPath sample_tied_path(GammaIndex gamma, double resolution, Rng& rng) {
  TiedPath out;
  while (true) {
    StepPath m = sample_ml_path(gamma, 1.0, resolution, rng);
    if (waiting_G(m, 1.0) > 0.0) {
      out.path = tie_down(m, gamma);
      return out;
    }
    ++out.resamples;
  }
}

TiedMarginal sample_tied_marginal(GammaIndex gamma, std::size_t count, double resolution,
                                  std::uint64_t seed, std::uint64_t stream) {
  TiedMarginal out{gamma, std::vector<double>(count), 0};
  std::vector<int> resamples(count, 0);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_rng(seed, stream, i);
    TiedPath tied = sample_tied_path(gamma, resolution, rng);
    out.samples[i] = tied.path.eval(1.0);
    resamples[i] = tied.resamples;
  });
  for (int r : resamples) out.resamples += r;
  return out;
}

std::vector<stats::Estimate> estimate_tied_expectation(GammaIndex gamma,
                                                       const std::vector<PathFunctional>& gs,
                                                       const McConfig& config) {
  check_config(config);
  const std::size_t n = config.samples;
  std::vector<std::vector<double>> values(gs.size(), std::vector<double>(n));
  parallel_for(n, [&](std::size_t i) {
    Rng rng = make_rng(config.seed, kTiedStream, i);
    const TiedPath tied = sample_tied_path(gamma, config.resolution, rng);
    const ScaledView view(tied.path);
    for (std::size_t f = 0; f < gs.size(); ++f) values[f][i] = gs[f](view);
  });
  std::vector<stats::Estimate> out;
  for (const auto& v : values) out.push_back(stats::mean_estimate(v));
  return out;
}

std::vector<stats::ComparisonReport> estimate_propC(GammaIndex gamma,
                                                    const std::vector<PathFunctional>& hs,
                                                    const McConfig& config, double epsilon) {
  check_config(config);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("estimate_propC: epsilon must lie in (0,1)");
  const std::size_t n = config.samples;
  const std::size_t nh = hs.size();
  std::vector<std::vector<double>> lhs(nh, std::vector<double>(n));
  std::vector<std::vector<double>> rhs(nh, std::vector<double>(n));
  std::vector<std::vector<double>> cutoff(nh, std::vector<double>(n));
  std::vector<int> resamples(n, 0);
  parallel_for(n, [&](std::size_t i) {
    Rng tied_rng = make_rng(config.seed, kTiedStream, i);
    const TiedPath tied = sample_tied_path(gamma, config.resolution, tied_rng);
    resamples[i] = tied.resamples;
    const ScaledView tied_view(tied.path);
    Rng free_rng = make_rng(config.seed, kFreeStream, i);
    const StepPath m = sample_ml_path(gamma, 1.0, config.resolution, free_rng);
    for (std::size_t f = 0; f < nh; ++f) {
      lhs[f][i] = hs[f](tied_view);
      const StieltjesResult s = stieltjes_functional(hs[f], m, gamma, epsilon);
      rhs[f][i] = s.value;
      cutoff[f][i] = s.cutoff_bound;
    }
  });
  int total_resamples = 0;
  for (int r : resamples) total_resamples += r;
  std::vector<stats::ComparisonReport> reports;
  for (std::size_t f = 0; f < nh; ++f) {
    stats::ComparisonReport r;
    r.experiment = "prop-c";
    r.params = base_params(gamma, config);
    r.params["functional"] = hs[f].name;
    r.params["epsilon"] = epsilon;
    const auto l = stats::mean_estimate(lhs[f]);
    const auto rr = stats::mean_estimate(rhs[f]);
    r.lhs = l.value;
    r.lhs_se = l.se;
    r.rhs = rr.value;
    r.rhs_se = rr.se;
    r.z = config.z;
    r.tolerance = config.tolerance;
    r.sample_sizes = {n, n};
    r.seeds = {config.seed};
    r.details["cutoff_bound"] = stats::mean_estimate(cutoff[f]).value;
    r.details["tied_resamples"] = total_resamples;
    r.evaluate();
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<stats::ComparisonReport> estimate_propD(GammaIndex gamma,
                                                    const std::vector<ProductFunctional>& pfs,
                                                    const McConfig& config) {
  check_config(config);
  const std::size_t n = config.samples;
  const std::size_t np = pfs.size();
  const double g = gamma;
  std::vector<std::vector<double>> lhs(np, std::vector<double>(n));
  std::vector<std::vector<double>> rhs(np, std::vector<double>(n));
  std::vector<double> weights(n);
  std::vector<int> resamples(n, 0);
  parallel_for(n, [&](std::size_t i) {
    Rng tied_rng = make_rng(config.seed, kTiedStream, i);
    const TiedPath tied = sample_tied_path(gamma, config.resolution, tied_rng);
    Rng free_rng = make_rng(config.seed, kFreeStream, i);
    const StepPath m = sample_ml_path(gamma, 1.0, config.resolution, free_rng);
    Rng w_rng = make_rng(config.seed, kMarginalStream, i);
    const TiedPath w_path = sample_tied_path(gamma, config.resolution, w_rng);
    resamples[i] = tied.resamples + w_path.resamples;
    const double w = w_path.path.eval(1.0);
    for (std::size_t f = 0; f < np; ++f) {
      const auto& pf = pfs[f];
      lhs[f][i] = pf.evaluate(tied.path);
      // The sampled 𝔪 is complete on [0,1]; a censored 𝒟 means D > 1.
      const WaitingTime d = waiting_D(m, pf.last_time());
      if (d.censored || d.time >= 1.0) {
        rhs[f][i] = 0.0;
        if (f == 0) weights[i] = 0.0;
        continue;
      }
      const double gap = 1.0 - d.time;
      const double weight = std::pow(gap, g - 1.0);
      if (f == 0) weights[i] = weight;
      double product = 1.0;
      for (std::size_t nu = 0; nu < pf.times().size(); ++nu) {
        product *= pf.factors()[nu](m.eval(pf.times()[nu]));
      }
      rhs[f][i] = product * weight * pf.terminal()(std::pow(gap, g) * w);
    }
  });
  int total_resamples = 0;
  for (int r : resamples) total_resamples += r;
  std::vector<stats::ComparisonReport> reports;
  for (std::size_t f = 0; f < np; ++f) {
    stats::ComparisonReport r;
    r.experiment = "prop-d";
    r.params = base_params(gamma, config);
    r.params["functional"] = pfs[f].spec();
    const auto l = stats::mean_estimate(lhs[f]);
    const auto rr = stats::mean_estimate(rhs[f]);
    r.lhs = l.value;
    r.lhs_se = l.se;
    r.rhs = rr.value;
    r.rhs_se = rr.se;
    r.z = config.z;
    r.tolerance = config.tolerance;
    r.sample_sizes = {n, n};
    r.seeds = {config.seed};
    r.details["horizon_retries"] = 0;
    r.details["tied_resamples"] = total_resamples;
    r.details["mean_weight"] = stats::mean_estimate(weights).value;
    r.evaluate();
    reports.push_back(std::move(r));
  }
  return reports;
}

double stable_density(GammaIndex gamma, double x) { return stable::normalized_density(gamma, x); }

}  // namespace tiedml
