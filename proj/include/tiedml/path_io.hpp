#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "tiedml/paths.hpp"

namespace tiedml {

/// Two-column CSV. A `# horizon=<h>` line, the `epoch,value` header, a row at
/// epoch 0 carrying the initial value, then one row per jump. Numbers are
/// written in shortest round-trip form so reading back is bit-exact.
void write_path_csv(std::ostream& out, const StepPath& path);
StepPath read_path_csv(std::istream& in);

/// {"horizon": h, "initial": v0, "epochs": [...], "values": [...]}; "initial"
/// is optional on input and defaults to 0.
nlohmann::json path_to_json(const StepPath& path);
StepPath path_from_json(const nlohmann::json& j);

/// Shortest decimal text that parses back to exactly x.
std::string format_double(double x);

}  // namespace tiedml
