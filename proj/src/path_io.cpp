#include "tiedml/path_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "tiedml/error.hpp"

namespace tiedml {

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

namespace {

double parse_field(const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("path CSV: bad number '" + text + "'");
  }
  return v;
}

}  // namespace

void write_path_csv(std::ostream& out, const StepPath& path) {
  out << "# horizon=" << format_double(path.horizon()) << '\n';
  out << "epoch,value\n";
  out << "0," << format_double(path.initial()) << '\n';
  for (std::size_t j = 0; j < path.jump_count(); ++j) {
    out << format_double(path.epochs()[j]) << ',' << format_double(path.values()[j]) << '\n';
  }
}

StepPath read_path_csv(std::istream& in) {
  std::string line;
  double horizon = -1.0;
  double initial = 0.0;
  bool seen_header = false;
  std::vector<double> epochs;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# horizon=", 0) == 0) {
      horizon = parse_field(line.substr(10));
      continue;
    }
    if (line[0] == '#') continue;
    if (!seen_header) {
      if (line != "epoch,value") throw ConfigError("path CSV: expected 'epoch,value' header");
      seen_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("path CSV: row without comma");
    const double e = parse_field(line.substr(0, comma));
    const double v = parse_field(line.substr(comma + 1));
    if (e == 0.0) {
      if (!epochs.empty()) throw ConfigError("path CSV: epoch-0 row must come first");
      initial = v;
    } else {
      epochs.push_back(e);
      values.push_back(v);
    }
  }
  if (horizon <= 0.0) throw ConfigError("path CSV: missing '# horizon=' line");
  return StepPath(horizon, std::move(epochs), std::move(values), initial);
}

nlohmann::json path_to_json(const StepPath& path) {
  return {{"horizon", path.horizon()},
          {"initial", path.initial()},
          {"epochs", std::vector<double>(path.epochs().begin(), path.epochs().end())},
          {"values", std::vector<double>(path.values().begin(), path.values().end())}};
}

StepPath path_from_json(const nlohmann::json& j) {
  try {
    return StepPath(j.at("horizon").get<double>(), j.at("epochs").get<std::vector<double>>(),
                    j.at("values").get<std::vector<double>>(), j.value("initial", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("path JSON: ") + e.what());
  }
}

}  // namespace tiedml
