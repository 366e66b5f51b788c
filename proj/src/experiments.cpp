#include "tiedml/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tiedml/dynamics.hpp"
#include "tiedml/error.hpp"
#include "tiedml/functionals.hpp"
#include "tiedml/parallel.hpp"
#include "tiedml/path_io.hpp"
#include "tiedml/processes.hpp"
#include "tiedml/renewal.hpp"
#include "tiedml/selftest.hpp"
#include "tiedml/stable.hpp"

namespace tiedml::experiments {

namespace {

using stats::ComparisonReport;
using nlohmann::json;

constexpr std::uint64_t kMarginalCheckStream = 5;
constexpr std::uint64_t kScaledStream = 6;
constexpr std::uint64_t kSizeBiasStream = 8;

const std::vector<std::string> kPropDFunctionals = {"0.5=exp(1);h=exp(1)",
                                                    "0.25=invpow(1);0.75=exp(0.5);h=invpow(2)"};
const std::vector<std::string> kTiedFunctionals = {"0.5=exp(1);h=exp(1)",
                                                   "0.5=invpow(1);h=exp(1)"};
const char* const kUmbrellaFunctional = "0.5=exp(1);h=const(1)";

ComparisonReport comparison(std::string experiment, json params, stats::Estimate lhs,
                            stats::Estimate rhs, double tolerance, double z,
                            std::vector<std::uint64_t> sizes, std::uint64_t seed) {
  ComparisonReport r;
  r.experiment = std::move(experiment);
  r.params = std::move(params);
  r.lhs = lhs.value;
  r.lhs_se = lhs.se;
  r.rhs = rhs.value;
  r.rhs_se = rhs.se;
  r.tolerance = tolerance;
  r.z = z;
  r.sample_sizes = std::move(sizes);
  r.seeds = {seed};
  r.evaluate();
  return r;
}

/// Deterministic check: passes iff |measured - target| ≤ tolerance.
ComparisonReport bound_check(std::string experiment, json params, double measured, double target,
                             double tolerance) {
  ComparisonReport r;
  r.experiment = std::move(experiment);
  r.params = std::move(params);
  r.lhs = measured;
  r.rhs = target;
  r.tolerance = tolerance;
  r.z = 0.0;
  r.evaluate();
  return r;
}

/// Number of i with xs[i+1] ≥ xs[i].
std::size_t increases(const std::vector<double>& xs) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) count += xs[i] >= xs[i - 1] ? 1 : 0;
  return count;
}

ComparisonReport trend_check(std::string experiment, json params, const std::vector<double>& xs) {
  params["sequence"] = xs;
  return bound_check(std::move(experiment), std::move(params),
                     static_cast<double>(increases(xs)), 0.0, 0.0);
}

std::string num(double x) { return format_double(x); }

std::vector<double> gammas_or(const Settings& s, std::vector<double> fallback) {
  if (s.gamma) return {*s.gamma};
  return fallback;
}

std::vector<std::size_t> ladder(std::size_t top, std::size_t levels) {
  std::vector<std::size_t> out;
  for (std::size_t l = levels; l-- > 0;) out.push_back(top >> l);
  if (out.front() == 0) throw ConfigError("problem size too small for a trend ladder");
  return out;
}

double gamma_of(const renewal::LifetimeDist& f, const Settings& s, const char* experiment) {
  if (s.gamma) return *s.gamma;
  if (f.tail_index()) return *f.tail_index();
  throw ConfigError(std::string(experiment) + ": lifetime has no tail index; pass --gamma");
}

std::string default_lifetime(const Settings& s, double gamma) {
  return s.lifetime.value_or("zeta:" + num(gamma));
}

std::vector<std::string> functionals_or(const Settings& s, const std::vector<std::string>& dflt) {
  if (s.functional) return {*s.functional};
  return dflt;
}

// ---------------------------------------------------------------------------

Outcome ml_moments(const Settings& s) {
  Outcome out{"ml-moments", {}, {}};
  const std::size_t n = s.samples.value_or(100000);
  const double dt = s.resolution.value_or(1e-3);
  const std::size_t ks_n = std::min<std::size_t>(n, 10000);
  std::ostringstream csv;
  csv << "gamma,quantity,estimate,se,reference\n";
  for (double g : gammas_or(s, {0.3, 0.5, 0.7})) {
    const GammaIndex gamma(g);
    const json params = {{"gamma", g}, {"samples", n}, {"resolution", dt}, {"seed", s.seed}};
    std::vector<double> fine(n);
    std::vector<double> coarse(n);
    std::vector<double> subordinator(n);
    parallel_for(n, [&](std::size_t i) {
      Rng rng = make_rng(s.seed, 2, i);
      const StepPath path = sample_ml_path(gamma, 1.0, dt, rng);
      const auto steps = static_cast<std::uint64_t>(std::llround(path.eval(1.0) / dt));
      fine[i] = static_cast<double>(steps) * dt;
      coarse[i] = static_cast<double>(steps / 2) * 2.0 * dt;
      Rng srng = make_rng(s.seed, kMarginalCheckStream, i);
      const double eta = stable::normalized_scale(g) * stable::sample_standard(g, srng);
      subordinator[i] = std::pow(eta, -g);
    });
    const stats::Estimate mean = stats::mean_estimate(fine);
    const stats::Estimate second = stats::moment_report(fine, 2);
    const stats::Estimate inverse_moment = stats::mean_estimate(subordinator);
    const stats::Estimate coarse_mean = stats::mean_estimate(coarse);
    out.reports.push_back(comparison("ml-moments/mean", params, mean, {1.0, 0.0}, 0.0, 3.0, {n},
                                     s.seed));
    out.reports.push_back(comparison("ml-moments/second-moment", params, second,
                                     {ml_moment(gamma, 2), 0.0}, 0.0, 4.0, {n}, s.seed));
    out.reports.push_back(comparison("ml-moments/subordinator-inverse-moment", params,
                                     inverse_moment, {1.0, 0.0}, 0.0, 3.0, {n}, s.seed));
    ComparisonReport halving = bound_check("ml-moments/grid-halving", params, coarse_mean.value,
                                           mean.value, mean.se);
    halving.lhs_se = coarse_mean.se;
    halving.rhs_se = mean.se;
    halving.details["coarse_resolution"] = 2.0 * dt;
    out.reports.push_back(halving);

    const std::vector<double> reference(fine.begin(), fine.begin() + static_cast<long>(ks_n));
    for (double a : {0.5, 2.0}) {
      std::vector<double> scaled(ks_n);
      parallel_for(ks_n, [&](std::size_t i) {
        Rng rng = make_rng(s.seed, kScaledStream + (a > 1.0 ? 1 : 0), i);
        const StepPath path = sample_ml_path(gamma, std::max(a, 1.0), dt, rng);
        scaled[i] = path.eval(a) / std::pow(a, g);
      });
      json p = params;
      p["a"] = a;
      p["samples"] = ks_n;
      ComparisonReport r =
          bound_check("ml-moments/self-similarity", p, stats::ks_distance(scaled, reference), 0.0,
                      stats::ks_critical_value(ks_n, ks_n, 0.01));
      r.sample_sizes = {ks_n, ks_n};
      r.seeds = {s.seed};
      out.reports.push_back(r);
    }
    csv << num(g) << ",mean," << num(mean.value) << ',' << num(mean.se) << ",1\n";
    csv << num(g) << ",second_moment," << num(second.value) << ',' << num(second.se) << ','
        << num(ml_moment(gamma, 2)) << '\n';
    csv << num(g) << ",inverse_moment," << num(inverse_moment.value) << ','
        << num(inverse_moment.se) << ",1\n";
    csv << num(g) << ",coarse_mean," << num(coarse_mean.value) << ',' << num(coarse_mean.se)
        << ',' << num(mean.value) << '\n';
  }
  out.artifacts.push_back({"ml_moments.csv", csv.str()});
  return out;
}

Outcome prop_c(const Settings& s) {
  Outcome out{"prop-c", {}, {}};
  const GammaIndex gamma(s.gamma.value_or(0.5));
  McConfig config;
  config.samples = s.samples.value_or(100000);
  config.resolution = s.resolution.value_or(1e-3);
  config.seed = s.seed;
  const double epsilon = 1e-10;
  const std::vector<PathFunctional> hs = {terminal_functional(Factor::exponential(1.0)),
                                          terminal_functional(Factor::inverse_power(1.0)),
                                          constant_functional(1.0)};
  out.reports = estimate_propC(gamma, hs, config, epsilon);

  const std::size_t n = config.samples;
  const TiedMarginal tied =
      sample_tied_marginal(gamma, n, config.resolution, s.seed, /*stream=*/3);
  std::vector<double> free(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = make_rng(s.seed, kSizeBiasStream, i);
    free[i] = stable::sample_ml_marginal(gamma, rng);
  });
  const json params = {{"gamma", gamma.value()},
                       {"samples", n},
                       {"resolution", config.resolution},
                       {"seed", s.seed}};
  ComparisonReport ks = bound_check("prop-c/size-bias-ks", params,
                                    stats::ks_distance_weighted(tied.samples, free, free), 0.0,
                                    s.tolerance.value_or(0.02));
  ks.sample_sizes = {n, n};
  ks.seeds = {s.seed};
  ks.details["tied_resamples"] = tied.resamples;
  out.reports.push_back(ks);
  out.reports.push_back(comparison("prop-c/tied-marginal-mean", params,
                                   stats::mean_estimate(tied.samples),
                                   {tied_marginal_moment(gamma, 1), 0.0}, 0.0, 3.0, {n}, s.seed));

  std::ostringstream csv;
  csv << "functional,lhs,lhs_se,rhs,rhs_se,pass\n";
  for (const auto& r : out.reports) {
    csv << r.experiment << ',' << num(r.lhs) << ',' << num(r.lhs_se) << ',' << num(r.rhs) << ','
        << num(r.rhs_se) << ',' << (r.pass ? 1 : 0) << '\n';
  }
  out.artifacts.push_back({"prop_c.csv", csv.str()});
  return out;
}

Outcome prop_d(const Settings& s) {
  Outcome out{"prop-d", {}, {}};
  McConfig config;
  config.samples = s.samples.value_or(100000);
  config.resolution = s.resolution.value_or(1e-3);
  config.seed = s.seed;
  std::vector<ProductFunctional> pfs;
  for (const auto& spec : functionals_or(s, kPropDFunctionals)) {
    pfs.push_back(ProductFunctional::parse(spec));
  }
  std::ostringstream csv;
  csv << "gamma,functional,lhs,lhs_se,rhs,rhs_se,pass\n";
  for (double g : gammas_or(s, {0.5, 0.7})) {
    for (auto& r : estimate_propD(GammaIndex(g), pfs, config)) {
      csv << num(g) << ',' << r.params.value("functional", r.experiment) << ',' << num(r.lhs)
          << ',' << num(r.lhs_se) << ',' << num(r.rhs) << ',' << num(r.rhs_se) << ','
          << (r.pass ? 1 : 0) << '\n';
      out.reports.push_back(std::move(r));
    }
  }
  out.artifacts.push_back({"prop_d.csv", csv.str()});
  return out;
}

double max_oracle_error(const renewal::LifetimeDist& f, std::size_t max_n,
                        const std::vector<ProductFunctional>& pfs) {
  const renewal::TiedDownEngine engine(f, max_n);
  double worst = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const double a = engine.tables().a[n];
    for (const auto& pf : pfs) {
      const double exact = engine.joint(n, pf, a) / engine.tables().u[n];
      const double oracle = renewal::tied_down_enumerate(f, n, pf, a);
      const double scale = std::max(std::abs(oracle), 1e-300);
      worst = std::max(worst, std::abs(exact - oracle) / scale);
    }
  }
  return worst;
}

ComparisonReport oracle_report(const std::string& experiment, std::size_t max_n,
                               const std::vector<std::string>& families,
                               const std::vector<ProductFunctional>& pfs) {
  json per_family = json::object();
  double worst = 0.0;
  for (const auto& spec : families) {
    const double err = max_oracle_error(renewal::LifetimeDist::parse(spec, 64), max_n, pfs);
    per_family[spec] = err;
    worst = std::max(worst, err);
  }
  json params = {{"max_n", max_n}, {"lifetimes", families}};
  for (const auto& pf : pfs) params["functionals"].push_back(pf.spec());
  ComparisonReport r = bound_check(experiment, params, worst, 0.0, 1e-12);
  r.details["max_relative_error"] = per_family;
  return r;
}

Outcome prop_e(const Settings& s) {
  Outcome out{"prop-e", {}, {}};
  const double g0 = s.gamma.value_or(0.5);
  const std::string spec = default_lifetime(s, g0);
  const std::size_t top = s.big_n.value_or(2000);
  const auto ns = ladder(top, 3);
  const renewal::LifetimeDist f = renewal::LifetimeDist::parse(spec, top);
  const GammaIndex gamma(gamma_of(f, s, "prop-e"));
  std::vector<ProductFunctional> pfs;
  for (const auto& p : functionals_or(s, kTiedFunctionals)) pfs.push_back(ProductFunctional::parse(p));

  std::vector<ProductFunctional> oracle_pfs = pfs;
  oracle_pfs.push_back(ProductFunctional::parse("h=pow(2)"));
  oracle_pfs.push_back(ProductFunctional::unit());
  out.reports.push_back(oracle_report("prop-e/oracle", 14,
                                      {"zeta:" + num(gamma.value()), "geom:0.5",
                                       "custom:0.2,0.3,0.1,0.4"},
                                      oracle_pfs));

  McConfig config;
  config.samples = s.samples.value_or(100000);
  config.resolution = s.resolution.value_or(1e-3);
  config.seed = s.seed;
  std::vector<PathFunctional> gs;
  for (const auto& pf : pfs) gs.push_back(product_path_functional(pf));
  const auto reference = estimate_tied_expectation(gamma, gs, config);

  const renewal::TiedDownEngine engine(f, top);
  std::ostringstream csv;
  csv << "functional,n,exact,reference,reference_se,gap\n";
  for (std::size_t p = 0; p < pfs.size(); ++p) {
    std::vector<double> gaps;
    double exact = 0.0;
    for (std::size_t n : ns) {
      exact = engine.conditional(n, pfs[p]);
      gaps.push_back(std::abs(exact - reference[p].value));
      csv << pfs[p].spec() << ',' << n << ',' << num(exact) << ',' << num(reference[p].value)
          << ',' << num(reference[p].se) << ',' << num(gaps.back()) << '\n';
    }
    const json params = {{"gamma", gamma.value()},
                         {"lifetime", spec},
                         {"functional", pfs[p].spec()},
                         {"n", ns},
                         {"samples", config.samples},
                         {"resolution", config.resolution},
                         {"seed", s.seed}};
    ComparisonReport limit =
        comparison("prop-e/limit", params, {exact, 0.0}, reference[p],
                   s.tolerance.value_or(0.05) * std::abs(reference[p].value), 3.0,
                   {config.samples}, s.seed);
    limit.details["gaps"] = gaps;
    out.reports.push_back(limit);
    out.reports.push_back(trend_check("prop-e/gap-trend", params, gaps));
  }
  out.artifacts.push_back({"prop_e.csv", csv.str()});
  return out;
}

Outcome tieddown(const Settings& s) {
  Outcome out{"tieddown", {}, {}};
  const double g0 = s.gamma.value_or(0.5);
  const std::string spec = default_lifetime(s, g0);
  const std::size_t top = s.big_n.value_or(200);
  const renewal::LifetimeDist f = renewal::LifetimeDist::parse(spec, top);
  const ProductFunctional pf = ProductFunctional::parse(s.functional.value_or(kTiedFunctionals[0]));
  out.reports.push_back(oracle_report("tieddown/oracle", std::min<std::size_t>(top, 14), {spec},
                                      {pf, ProductFunctional::unit()}));
  const renewal::TiedDownEngine engine(f, top);
  std::ostringstream csv;
  csv << "n,u,exact\n";
  for (std::size_t n = 1; n <= top; ++n) {
    csv << n << ',' << num(engine.tables().u[n]) << ',' << num(engine.conditional(n, pf)) << '\n';
  }
  out.artifacts.push_back({"tieddown.csv", csv.str()});
  return out;
}

Outcome umbrella_renewal(const Settings& s) {
  Outcome out{"umbrella-renewal", {}, {}};
  const double g0 = s.gamma.value_or(0.5);
  const std::string spec = default_lifetime(s, g0);
  const std::size_t top = s.big_n.value_or(2000);
  const auto ns = ladder(top, 3);
  const renewal::LifetimeDist f = renewal::LifetimeDist::parse(spec, top);
  const GammaIndex gamma(gamma_of(f, s, "umbrella-renewal"));
  const ProductFunctional pf = ProductFunctional::parse(s.functional.value_or(kTiedFunctionals[0]));

  McConfig config;
  config.samples = s.samples.value_or(100000);
  config.resolution = s.resolution.value_or(1e-3);
  config.seed = s.seed;
  const stats::Estimate reference =
      estimate_tied_expectation(gamma, {product_path_functional(pf)}, config).front();

  const renewal::TiedDownEngine engine(f, top);
  std::vector<double> cesaro;
  std::vector<double> exact;
  std::vector<double> cesaro_gaps;
  std::ostringstream csv;
  csv << "n,cesaro,exact,reference\n";
  for (std::size_t n : ns) {
    cesaro.push_back(engine.cesaro(n, pf));
    exact.push_back(engine.conditional(n, pf));
    cesaro_gaps.push_back(std::abs(cesaro.back() - reference.value));
    csv << n << ',' << num(cesaro.back()) << ',' << num(exact.back()) << ','
        << num(reference.value) << '\n';
  }
  const json params = {{"gamma", gamma.value()},   {"lifetime", spec},
                       {"functional", pf.spec()},  {"n", ns},
                       {"samples", config.samples}, {"seed", s.seed}};
  ComparisonReport limit = comparison("umbrella-renewal/limit", params, {cesaro.back(), 0.0},
                                      reference, s.tolerance.value_or(0.1) * std::abs(reference.value),
                                      3.0, {config.samples}, s.seed);
  limit.details["cesaro"] = cesaro;
  limit.details["tied_down_exact"] = exact;
  out.reports.push_back(limit);
  out.reports.push_back(trend_check("umbrella-renewal/gap-trend", params, cesaro_gaps));
  out.reports.push_back(bound_check("umbrella-renewal/unit", params,
                                    engine.cesaro(top, ProductFunctional::unit()), 1.0, 1e-12));
  out.artifacts.push_back({"umbrella_renewal.csv", csv.str()});
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(std::round(lo * std::pow(hi / lo, t)));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string density_csv(const dynamics::DensityTable& table) {
  std::ostringstream csv;
  csv << "cell_left,cell_right,value\n";
  for (std::size_t i = 0; i < table.cells(); ++i) {
    csv << num(table.edges[i]) << ',' << num(table.edges[i + 1]) << ',' << num(table.values[i])
        << '\n';
  }
  return csv.str();
}

std::string returns_csv(const dynamics::EmpiricalReturns& r) {
  std::ostringstream csv;
  csv << "k,u_hat,a_hat\n";
  for (std::size_t k = 0; k < r.u_hat.size(); ++k) {
    csv << k << ',' << num(r.u_hat[k]) << ',' << num(r.a_hat[k]) << '\n';
  }
  return csv.str();
}

void density_reports(Outcome& out, const dynamics::DensityTable& table, const json& params) {
  const double g = table.gamma;
  ComparisonReport slope = bound_check("lsv/density-slope", params,
                                       dynamics::density_slope(table, 1e-4, 1e-2), -1.0 / g,
                                       0.1 / g);
  slope.details["window"] = {1e-4, 1e-2};
  out.reports.push_back(slope);
  out.reports.push_back(bound_check("lsv/ulam-residual", params, table.residual, 0.0, 1e-8));
}

void return_reports(Outcome& out, const dynamics::OrbitSet& orbits,
                    const dynamics::EmpiricalReturns& returns, const json& params) {
  const double g = orbits.gamma;
  const double n = static_cast<double>(orbits.n);
  const auto ks = log_grid(std::min(1e3, n / 10.0), n, 40);
  std::vector<double> a;
  for (double k : ks) a.push_back(returns.a_hat[static_cast<std::size_t>(k)]);
  ComparisonReport slope =
      bound_check("lsv/return-sequence-slope", params, stats::loglog_slope(ks, a), g, 0.1);
  slope.details["window"] = {ks.front(), ks.back()};
  slope.details["absorbed_orbits"] = orbits.absorbed;
  out.reports.push_back(slope);

  const auto ms_real = log_grid(std::min(1e2, n / 100.0), std::min(1e4, n / 10.0), 30);
  std::vector<std::size_t> ms;
  for (double m : ms_real) ms.push_back(static_cast<std::size_t>(m));
  const auto tail = dynamics::return_tail(orbits, ms);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (tail[i] > 0.0) {
      xs.push_back(ms_real[i]);
      ys.push_back(tail[i]);
    }
  }
  ComparisonReport tail_slope =
      bound_check("lsv/return-tail-slope", params, stats::loglog_slope(xs, ys), -g, 0.1);
  tail_slope.details["window"] = {ms_real.front(), ms_real.back()};
  out.reports.push_back(tail_slope);
}

json lsv_params(const Settings& s, double g, std::size_t n, std::size_t samples) {
  return {{"gamma", g}, {"n", n}, {"samples", samples}, {"seed", s.seed}};
}

Outcome lsv_density(const Settings& s) {
  Outcome out{"lsv-density", {}, {}};
  const double g = s.gamma.value_or(0.5);
  dynamics::UlamOptions options;
  if (s.n) options.uniform_cells = *s.n;
  const auto table = dynamics::ulam_density(g, options);
  density_reports(out, table, {{"gamma", g}, {"uniform_cells", options.uniform_cells}});
  out.artifacts.push_back({"density.csv", density_csv(table)});
  return out;
}

Outcome lsv_returns(const Settings& s) {
  Outcome out{"lsv-returns", {}, {}};
  const double g = s.gamma.value_or(0.5);
  const std::size_t n = s.n.value_or(100000);
  const std::size_t samples = s.samples.value_or(10000);
  const auto table = dynamics::ulam_density(g);
  const auto orbits = dynamics::simulate_orbits(table, n, samples, s.seed);
  const auto returns = dynamics::empirical_returns(orbits);
  return_reports(out, orbits, returns, lsv_params(s, g, n, samples));
  out.artifacts.push_back({"returns.csv", returns_csv(returns)});
  return out;
}

Outcome umbrella_lsv(const Settings& s) {
  Outcome out{"umbrella-lsv", {}, {}};
  const GammaIndex gamma(s.gamma.value_or(0.5));
  const std::size_t n = s.n.value_or(100000);
  const std::size_t samples = s.samples.value_or(10000);
  const ProductFunctional pf = ProductFunctional::parse(s.functional.value_or(kUmbrellaFunctional));
  const json params = lsv_params(s, gamma, n, samples);

  const auto table = dynamics::ulam_density(gamma);
  density_reports(out, table, params);
  const auto orbits = dynamics::simulate_orbits(table, n, samples, s.seed);
  const auto returns = dynamics::empirical_returns(orbits);
  return_reports(out, orbits, returns, params);

  McConfig config;
  config.samples = 10 * samples;
  config.resolution = s.resolution.value_or(1e-3);
  config.seed = s.seed;
  const stats::Estimate reference =
      estimate_tied_expectation(gamma, {product_path_functional(pf)}, config).front();
  ComparisonReport umbrella = dynamics::verify_umbrella_mc(orbits, returns, pf, n, reference,
                                                           s.tolerance.value_or(0.15));
  umbrella.sample_sizes = {samples, config.samples};
  umbrella.seeds = {s.seed};
  out.reports.push_back(umbrella);
  const stats::Estimate unit =
      dynamics::umbrella_statistic(orbits, returns, ProductFunctional::unit(), n);
  out.reports.push_back(bound_check("umbrella-lsv/unit", params, unit.value, 1.0, 1e-9));

  out.artifacts.push_back({"density.csv", density_csv(table)});
  out.artifacts.push_back({"returns.csv", returns_csv(returns)});
  return out;
}

std::string tables_csv(const renewal::RenewalTables& t, const renewal::LifetimeDist& f,
                       std::optional<double> gamma, const std::vector<std::size_t>& rows) {
  std::ostringstream csv;
  csv << "n,u,a,c,ratio\n";
  for (std::size_t n : rows) {
    const double ratio =
        gamma && n > 0 ? renewal::srt_ratio(t, f, n, gamma).ratio : std::nan("");
    csv << n << ',' << num(t.u[n]) << ',' << num(t.a[n]) << ',' << num(t.c[n]) << ','
        << (std::isnan(ratio) ? std::string() : num(ratio)) << '\n';
  }
  return csv.str();
}

Outcome tables(const Settings& s) {
  Outcome out{"tables", {}, {}};
  const std::string spec = default_lifetime(s, s.gamma.value_or(0.5));
  const std::size_t n = s.n.value_or(10000);
  const renewal::LifetimeDist f = renewal::LifetimeDist::parse(spec, n);
  const auto t = renewal::renewal_sequence(f, n);
  std::size_t violations = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (!(t.u[k] >= 0.0 && t.u[k] <= 1.0)) ++violations;
    if (t.a[k] < t.a[k - 1] || t.c[k] > t.c[k - 1]) ++violations;
  }
  out.reports.push_back(
      bound_check("tables/invariants", {{"lifetime", spec}, {"n", n}}, violations, 0.0, 0.0));
  std::optional<double> gamma = s.gamma ? s.gamma : f.tail_index();
  if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) gamma.reset();
  std::vector<std::size_t> rows(n + 1);
  for (std::size_t k = 0; k <= n; ++k) rows[k] = k;
  out.artifacts.push_back({"tables.csv", tables_csv(t, f, gamma, rows)});
  return out;
}

Outcome srt(const Settings& s) {
  Outcome out{"srt", {}, {}};
  const std::string spec = default_lifetime(s, s.gamma.value_or(0.5));
  const std::size_t n = s.n.value_or(100000);
  const renewal::LifetimeDist f = renewal::LifetimeDist::parse(spec, n);
  const double g = gamma_of(f, s, "srt");
  const json params = {{"gamma", g}, {"lifetime", spec}, {"n", n}};

  const auto t = renewal::renewal_sequence(f, n, renewal::RenewalMethod::Fft);
  const auto at_n = renewal::srt_ratio(t, f, n, g);
  ComparisonReport ratio = bound_check("srt/ratio", params, at_n.ratio, 1.0, 0.1);
  ratio.details["in_regime"] = at_n.in_regime;
  ratio.details["doney_constant"] = at_n.doney_constant;
  out.reports.push_back(ratio);

  std::vector<std::size_t> decades;
  for (std::size_t d = 1000; d <= n; d *= 10) decades.push_back(d);
  std::vector<double> distances;
  for (std::size_t d : decades) distances.push_back(std::abs(renewal::srt_ratio(t, f, d, g).ratio - 1.0));
  json trend_params = params;
  trend_params["decades"] = decades;
  out.reports.push_back(trend_check("srt/ratio-trend", trend_params, distances));

  const std::size_t check_n = std::min<std::size_t>(n, 20000);
  const auto naive = renewal::renewal_sequence(f, check_n, renewal::RenewalMethod::Naive);
  double worst = 0.0;
  for (std::size_t k = 0; k <= check_n; ++k) {
    worst = std::max(worst, std::abs(t.u[k] - naive.u[k]) / std::max(naive.u[k], 1e-300));
  }
  json agree_params = params;
  agree_params["n"] = check_n;
  out.reports.push_back(bound_check("srt/fft-naive-agreement", agree_params, worst, 0.0, 1e-10));

  const double karamata = std::tgamma(1.0 + g) * std::tgamma(1.0 - g);
  const double product = t.a[n] * f.tail_continuous(static_cast<double>(n)) * karamata;
  out.reports.push_back(bound_check("srt/karamata", params, product, 1.0, 0.1));

  std::vector<std::size_t> rows;
  for (double k : log_grid(1.0, static_cast<double>(n), 200)) rows.push_back(static_cast<std::size_t>(k));
  out.artifacts.push_back({"srt.csv", tables_csv(t, f, g, rows)});
  return out;
}

std::string llt_csv(const std::vector<renewal::LltResult>& results) {
  std::ostringstream csv;
  csv << "n,span,k,b,scaled_probability,reference\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.ks.size(); ++i) {
      csv << r.n << ',' << r.span << ',' << r.ks[i] << ',' << num(r.b) << ','
          << num(r.scaled_probabilities[i]) << ',' << num(r.reference[i]) << '\n';
    }
  }
  return csv.str();
}

Outcome llt(const Settings& s) {
  Outcome out{"llt", {}, {}};
  const std::string spec = default_lifetime(s, s.gamma.value_or(0.5));
  const std::size_t top = s.n.value_or(4096);
  const auto ns = ladder(top, 4);
  const renewal::LifetimeDist f = renewal::LifetimeDist::parse(spec, 1 << 16);
  const double g = gamma_of(f, s, "llt");
  const renewal::LifetimeDist lattice = renewal::LifetimeDist::lattice(f, 2, 1);
  const double peak_tolerance = s.tolerance.value_or(0.05);

  std::vector<renewal::LltResult> all;
  for (int arithmetic = 0; arithmetic < 2; ++arithmetic) {
    const auto& law = arithmetic ? lattice : f;
    const std::string tag = arithmetic ? "llt/arithmetic" : "llt/aperiodic";
    std::vector<double> relative;
    renewal::LltResult last;
    for (std::size_t n : ns) {
      last = arithmetic ? renewal::llt_check_arithmetic(law, g, n) : renewal::llt_check(law, g, n);
      relative.push_back(last.sup_error / last.peak_density);
      all.push_back(last);
    }
    const json params = {{"gamma", g},
                         {"lifetime", law.spec()},
                         {"n", last.n},
                         {"span", last.span},
                         {"residue", last.residue}};
    ComparisonReport sup = bound_check(tag + "-sup-error", params, relative.back(), 0.0,
                                       peak_tolerance);
    sup.details["sup_error"] = last.sup_error;
    sup.details["peak_density"] = last.peak_density;
    sup.details["window_mass"] = last.window_mass;
    sup.details["mean_ratio"] = last.mean_ratio;
    sup.details["truncation_bound"] = last.truncation_bound;
    sup.details["b"] = last.b;
    out.reports.push_back(sup);
    json trend_params = params;
    trend_params["n"] = ns;
    out.reports.push_back(trend_check(tag + "-trend", trend_params, relative));
  }

  const std::size_t k = 16;
  const std::size_t length = 4096;
  const auto power = renewal::convolution_power(lattice, k, length);
  double off_lattice = 0.0;
  std::size_t zeros = 0;
  for (std::size_t m = 0; m <= length; ++m) {
    if (m % 2 != (k * lattice.residue()) % 2) {
      off_lattice = std::max(off_lattice, std::abs(power.probabilities[m]));
      ++zeros;
    }
  }
  ComparisonReport parity = bound_check("llt/parity-zeros",
                                        {{"lifetime", lattice.spec()}, {"k", k}, {"length", length}},
                                        off_lattice, 0.0, 0.0);
  parity.details["entries_checked"] = zeros;
  out.reports.push_back(parity);
  out.artifacts.push_back({"llt.csv", llt_csv(all)});
  return out;
}

Outcome cor7(const Settings& s) {
  Outcome out{"cor7", {}, {}};
  const std::string spec = s.lifetime.value_or("zeta:1");
  const std::size_t top = s.big_n.value_or(4000);
  const auto ns = ladder(top, 3);
  const Factor g = Factor::parse(s.functional.value_or("exp(1)"));
  const renewal::LifetimeDist f = renewal::LifetimeDist::parse(spec, 10 * top);
  const auto values = renewal::cesaro_occupation_gap(f, ns, g);
  const json params = {{"lifetime", spec}, {"n", ns}, {"g", g.spec()}};
  out.reports.push_back(trend_check("cor7/decreasing", params, values));

  const renewal::LifetimeDist delta = renewal::LifetimeDist::parse("custom:1", 1);
  const auto degenerate = renewal::cesaro_occupation_gap(delta, ns, g);
  const double largest = *std::max_element(degenerate.begin(), degenerate.end(),
                                           [](double a, double b) { return std::abs(a) < std::abs(b); });
  ComparisonReport zero = bound_check("cor7/unit-lifetime",
                                      {{"lifetime", "custom:1"}, {"n", ns}, {"g", g.spec()}},
                                      largest, 0.0, 0.0);
  zero.details["values"] = degenerate;
  out.reports.push_back(zero);

  std::ostringstream csv;
  csv << "n,statistic\n";
  for (std::size_t i = 0; i < ns.size(); ++i) csv << ns[i] << ',' << num(values[i]) << '\n';
  out.artifacts.push_back({"cor7.csv", csv.str()});
  return out;
}

Outcome paths_selftest(const Settings& s) {
  Outcome out{"paths-selftest", {}, {}};
  const std::size_t paths = s.samples.value_or(10000);
  for (const auto& p : run_path_properties(paths, s.seed)) {
    ComparisonReport r = bound_check("paths-selftest/" + p.name,
                                     {{"paths", paths}, {"seed", s.seed}},
                                     static_cast<double>(p.failures), 0.0, 0.0);
    r.sample_sizes = {p.checked};
    r.seeds = {s.seed};
    if (!p.first_failure.empty()) r.details["first_failure"] = p.first_failure;
    out.reports.push_back(r);
  }
  return out;
}

}  // namespace

json Settings::to_json() const {
  json j = json::object();
  if (gamma) j["gamma"] = *gamma;
  if (lifetime) j["lifetime"] = *lifetime;
  if (n) j["n"] = *n;
  if (big_n) j["big_n"] = *big_n;
  if (samples) j["samples"] = *samples;
  if (resolution) j["resolution"] = *resolution;
  if (functional) j["functional"] = *functional;
  if (tolerance) j["tolerance"] = *tolerance;
  j["seed"] = seed;
  return j;
}

bool Outcome::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> runners = {
      {"ml-moments", ml_moments},
      {"prop-c", prop_c},
      {"prop-d", prop_d},
      {"prop-e", prop_e},
      {"umbrella-renewal", umbrella_renewal},
      {"umbrella-lsv", umbrella_lsv},
      {"srt", srt},
      {"llt", llt},
      {"cor7", cor7},
      {"paths-selftest", paths_selftest},
      {"tables", tables},
      {"tieddown", tieddown},
      {"lsv-density", lsv_density},
      {"lsv-returns", lsv_returns},
  };
  return runners;
}

Outcome run(const std::string& name, const Settings& settings) {
  const auto& runners = registry();
  const auto it = runners.find(name);
  if (it == runners.end()) throw ConfigError("unknown experiment: " + name);
  return it->second(settings);
}

}  // namespace tiedml::experiments
