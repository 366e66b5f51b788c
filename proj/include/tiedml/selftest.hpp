#pragma once

// Randomized property suite for the path calculus.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tiedml {

struct PropertyResult {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  /// Description of the first counterexample, empty when none was found.
  std::string first_failure;
};

/// Runs every path property over `paths` random dyadic step paths.
std::vector<PropertyResult> run_path_properties(std::size_t paths, std::uint64_t seed);

}  // namespace tiedml
