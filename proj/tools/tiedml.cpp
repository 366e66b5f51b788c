#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "tiedml/error.hpp"
#include "tiedml/experiments.hpp"
#include "tiedml/parallel.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using tiedml::experiments::Settings;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Flags {
  std::optional<double> gamma;
  std::optional<std::string> lifetime;
  std::optional<std::size_t> n;
  std::optional<std::size_t> big_n;
  std::optional<std::size_t> samples;
  std::optional<double> resolution;
  std::optional<std::string> functional;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> config;
};

struct Resolved {
  std::string experiment;
  Settings settings;
  unsigned threads = 0;
  fs::path out;
};

template <typename T>
void take(const json& j, const char* key, std::optional<T>& slot) {
  if (!j.contains(key)) return;
  try {
    slot = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw tiedml::ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void load_config(const std::string& path, Flags& from_file, std::optional<std::string>& experiment) {
  std::ifstream in(path);
  if (!in) throw tiedml::ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw tiedml::ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw tiedml::ConfigError("config file must hold a JSON object");
  static const std::set<std::string> known = {"experiment", "gamma",      "lifetime", "n",
                                              "big_n",      "samples",    "resolution",
                                              "functional", "tolerance",  "seed",
                                              "threads",    "out"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw tiedml::ConfigError("unknown config key '" + key + "'");
  }
  take(j, "experiment", experiment);
  take(j, "gamma", from_file.gamma);
  take(j, "lifetime", from_file.lifetime);
  take(j, "n", from_file.n);
  take(j, "big_n", from_file.big_n);
  take(j, "samples", from_file.samples);
  take(j, "resolution", from_file.resolution);
  take(j, "functional", from_file.functional);
  take(j, "tolerance", from_file.tolerance);
  take(j, "seed", from_file.seed);
  take(j, "threads", from_file.threads);
  take(j, "out", from_file.out);
}

template <typename T>
std::optional<T> prefer(const std::optional<T>& flag, const std::optional<T>& file) {
  return flag ? flag : file;
}

Resolved resolve(const Flags& flags, std::optional<std::string> experiment) {
  Flags file;
  std::optional<std::string> file_experiment;
  if (flags.config) load_config(*flags.config, file, file_experiment);
  if (!experiment) experiment = file_experiment;
  if (!experiment) throw tiedml::ConfigError("no experiment given");

  Resolved r;
  r.experiment = *experiment;
  Settings& s = r.settings;
  s.gamma = prefer(flags.gamma, file.gamma);
  s.lifetime = prefer(flags.lifetime, file.lifetime);
  s.n = prefer(flags.n, file.n);
  s.big_n = prefer(flags.big_n, file.big_n);
  s.samples = prefer(flags.samples, file.samples);
  s.resolution = prefer(flags.resolution, file.resolution);
  s.functional = prefer(flags.functional, file.functional);
  s.tolerance = prefer(flags.tolerance, file.tolerance);
  s.seed = prefer(flags.seed, file.seed).value_or(1);
  r.threads = prefer(flags.threads, file.threads).value_or(0);

  if (s.gamma && !(*s.gamma > 0.0 && *s.gamma <= 1.0)) {
    throw tiedml::ConfigError("--gamma must lie in (0,1]");
  }
  if (s.resolution && !(*s.resolution > 0.0 && *s.resolution < 1.0)) {
    throw tiedml::ConfigError("--resolution must lie in (0,1)");
  }
  if (s.samples && *s.samples < 2) throw tiedml::ConfigError("--samples must be at least 2");
  if (s.n && *s.n == 0) throw tiedml::ConfigError("--n must be positive");
  if (s.big_n && *s.big_n == 0) throw tiedml::ConfigError("--big-n must be positive");
  if (s.tolerance && !(*s.tolerance > 0.0)) throw tiedml::ConfigError("--tolerance must be positive");

  if (auto out = prefer(flags.out, file.out)) {
    r.out = *out;
  } else if (const char* env = std::getenv("TIEDML_OUT"); env && *env) {
    r.out = env;
  } else {
    r.out = "tiedml-out";
  }
  return r;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

void write_atomically(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

int execute(const Resolved& r) {
  tiedml::set_thread_cap(r.threads);
  const auto outcome = tiedml::experiments::run(r.experiment, r.settings);
  const bool pass = outcome.passed();

  json reports = json::array();
  for (const auto& report : outcome.reports) reports.push_back(tiedml::stats::to_json(report));
  const json document = {{"experiment", outcome.experiment},
                         {"settings", r.settings.to_json()},
                         {"pass", pass},
                         {"reports", reports}};

  std::vector<tiedml::experiments::Artifact> files = outcome.artifacts;
  files.insert(files.begin(), {"reports.json", document.dump(2) + "\n"});

  fs::create_directories(r.out);
  json listed = json::array();
  for (const auto& file : files) {
    write_atomically(r.out / file.name, file.content);
    listed.push_back({{"name", file.name}, {"bytes", file.content.size()},
                      {"sha256", sha256_hex(file.content)}});
  }
  const json manifest = {{"experiment", outcome.experiment},
                         {"settings", r.settings.to_json()},
                         {"pass", pass},
                         {"artifacts", listed}};
  write_atomically(r.out / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& report : outcome.reports) {
    std::cout << (report.pass ? "PASS " : "FAIL ") << report.experiment << "  lhs="
              << report.lhs << " rhs=" << report.rhs << " tol=" << report.tolerance
              << " se=" << report.combined_se() << '\n';
  }
  std::cout << (pass ? "all reports pass" : "some reports fail") << "; artifacts in "
            << r.out.string() << '\n';
  return pass ? 0 : kExitFail;
}

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--gamma", f.gamma, "Tail index");
  app.add_option("--lifetime", f.lifetime,
                 "Lifetime law: zeta:G, geom:Q, custom:f1,f2,..., file:PATH, optional /P or /P+R");
  app.add_option("--n", f.n, "Observation length or table size");
  app.add_option("--big-n", f.big_n, "Largest N of a trend ladder");
  app.add_option("--samples", f.samples, "Monte Carlo samples or orbits");
  app.add_option("--resolution", f.resolution, "Step height of sampled paths");
  app.add_option("--functional", f.functional, "Product functional, e.g. 0.5=exp(1);h=exp(1)");
  app.add_option("--tolerance", f.tolerance, "Override the experiment's tolerance");
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--threads", f.threads, "Worker thread cap (0 = all cores)");
  app.add_option("--out", f.out, "Output directory (default $TIEDML_OUT or ./tiedml-out)");
  app.add_option("--config", f.config, "JSON config file; flags override its values");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tied-down occupation-time limit experiments"};
  app.require_subcommand(0, 1);
  Flags flags;
  add_flags(app, flags);
  std::optional<std::string> chosen;

  auto bind = [&](CLI::App* sub, const std::string& experiment) {
    sub->fallthrough();
    sub->callback([&chosen, experiment] { chosen = experiment; });
  };
  const std::pair<const char*, const char*> top_level[] = {
      {"ml-moments", "Normalization, moment ladder, grid halving and self-similarity"},
      {"prop-c", "Tied-down expectations against Stieltjes sums of the free process"},
      {"prop-d", "Product functionals against the waiting-time representation"},
      {"prop-e", "Exact renewal-shift values against enumeration and the sampler"},
      {"umbrella-renewal", "Cesaro averages of exact renewal-shift values"},
      {"umbrella-lsv", "Occupation statistic of intermittent-map orbits"},
      {"srt", "Strong renewal ratio u(n)n/(gamma a(n))"},
      {"llt", "Local limit theorem for sums of lifetimes"},
      {"cor7", "Cesaro statistic of renewal occupation times"},
      {"paths-selftest", "Randomized path-calculus properties"},
  };
  for (const auto& [name, help] : top_level) bind(app.add_subcommand(name, help), name);

  auto* renewal = app.add_subcommand("renewal", "Renewal-shift computations");
  renewal->fallthrough();
  renewal->require_subcommand(1);
  bind(renewal->add_subcommand("tables", "u, a, c and SRT ratio tables"), "tables");
  bind(renewal->add_subcommand("srt", "Strong renewal ratio"), "srt");
  bind(renewal->add_subcommand("llt", "Local limit theorem"), "llt");
  bind(renewal->add_subcommand("tieddown", "Exact conditional expectations"), "tieddown");
  bind(renewal->add_subcommand("cesaro", "Cesaro averages"), "umbrella-renewal");
  bind(renewal->add_subcommand("cor7", "Cesaro occupation statistic"), "cor7");

  auto* lsv = app.add_subcommand("lsv", "Intermittent interval maps");
  lsv->fallthrough();
  lsv->require_subcommand(1);
  bind(lsv->add_subcommand("density", "Ulam invariant density"), "lsv-density");
  bind(lsv->add_subcommand("returns", "Empirical return sequence"), "lsv-returns");
  bind(lsv->add_subcommand("umbrella", "Occupation statistic against the sampler"), "umbrella-lsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return execute(resolve(flags, chosen));
  } catch (const tiedml::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
