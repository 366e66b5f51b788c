#pragma once

// Named verification experiments. Each one computes ComparisonReports and CSV
// artifacts entirely in memory; writing them out is left to the caller.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tiedml/stats.hpp"

namespace tiedml::experiments {

/// Inputs shared by all experiments. Unset fields take per-experiment defaults.
struct Settings {
  std::optional<double> gamma;
  std::optional<std::string> lifetime;
  std::optional<std::size_t> n;
  std::optional<std::size_t> big_n;
  std::optional<std::size_t> samples;
  std::optional<double> resolution;
  std::optional<std::string> functional;
  std::optional<double> tolerance;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  std::string experiment;
  std::vector<stats::ComparisonReport> reports;
  std::vector<Artifact> artifacts;

  bool passed() const;
};

using Runner = Outcome (*)(const Settings&);

/// Experiment names and their runners, in a fixed order.
const std::map<std::string, Runner>& registry();

/// Throws ConfigError for an unknown name.
Outcome run(const std::string& name, const Settings& settings);

}  // namespace tiedml::experiments
