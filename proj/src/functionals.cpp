#include "tiedml/functionals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "tiedml/error.hpp"

namespace tiedml {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

double parse_number(std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("not a number: '" + t + "'");
  }
  return value;
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

Factor Factor::constant(double c) {
  if (!std::isfinite(c) || c < 0.0) throw ConfigError("const factor must be finite and >= 0");
  return Factor(Constant{c});
}

Factor Factor::exponential(double rate) {
  if (!std::isfinite(rate) || rate < 0.0) throw ConfigError("exp factor rate must be >= 0");
  return Factor(Exponential{rate});
}

Factor Factor::inverse_power(double beta) {
  if (!std::isfinite(beta) || beta < 0.0) throw ConfigError("invpow factor exponent must be >= 0");
  return Factor(InversePower{beta});
}

Factor Factor::spline(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size()) {
    throw ConfigError("spline factor needs matching, nonempty knots and values");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i]) || values[i] < 0.0) {
      throw ConfigError("spline factor knots/values must be finite, values >= 0");
    }
    if (i > 0 && !(knots[i] > knots[i - 1])) {
      throw ConfigError("spline factor knots must be strictly increasing");
    }
  }
  return Factor(Spline{std::move(knots), std::move(values)});
}

Factor Factor::monomial(double power) {
  if (!std::isfinite(power) || power < 0.0) throw ConfigError("pow factor exponent must be >= 0");
  return Factor(Monomial{power});
}

double Factor::operator()(double x) const {
  return std::visit(
      Overloaded{
          [](const Constant& f) { return f.c; },
          [x](const Exponential& f) { return std::exp(-f.rate * x); },
          [x](const InversePower& f) { return std::pow(1.0 + x, -f.beta); },
          [x](const Monomial& f) { return std::pow(x, f.power); },
          [x](const Spline& f) {
            if (x <= f.knots.front()) return f.values.front();
            if (x >= f.knots.back()) return f.values.back();
            const auto it = std::upper_bound(f.knots.begin(), f.knots.end(), x);
            const auto i = static_cast<std::size_t>(it - f.knots.begin());
            const double w = (x - f.knots[i - 1]) / (f.knots[i] - f.knots[i - 1]);
            return f.values[i - 1] + w * (f.values[i] - f.values[i - 1]);
          },
      },
      kind_);
}

double Factor::limit_at_infinity() const {
  return std::visit(
      Overloaded{
          [](const Constant& f) { return f.c; },
          [](const Exponential& f) { return f.rate == 0.0 ? 1.0 : 0.0; },
          [](const InversePower& f) { return f.beta == 0.0 ? 1.0 : 0.0; },
          [](const Monomial& f) {
            return f.power == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
          },
          [](const Spline& f) { return f.values.back(); },
      },
      kind_);
}

double Factor::sup_norm() const {
  return std::visit(
      Overloaded{
          [](const Constant& f) { return f.c; },
          [](const Exponential&) { return 1.0; },
          [](const InversePower&) { return 1.0; },
          [](const Monomial& f) {
            return f.power == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
          },
          [](const Spline& f) { return *std::max_element(f.values.begin(), f.values.end()); },
      },
      kind_);
}

bool Factor::bounded() const { return std::isfinite(sup_norm()); }

Factor Factor::parse(std::string_view spec) {
  const std::string s = trim(spec);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    throw ConfigError("factor spec must look like name(args): '" + s + "'");
  }
  const std::string name = s.substr(0, open);
  const std::string args = s.substr(open + 1, s.size() - open - 2);
  if (name == "const") return constant(parse_number(args));
  if (name == "exp") return exponential(parse_number(args));
  if (name == "invpow") return inverse_power(parse_number(args));
  if (name == "pow") return monomial(parse_number(args));
  if (name == "spline") {
    std::vector<double> knots;
    std::vector<double> values;
    for (const auto& pair : split(args, ',')) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) throw ConfigError("spline knot must be x:y, got '" + pair + "'");
      knots.push_back(parse_number(std::string_view(pair).substr(0, colon)));
      values.push_back(parse_number(std::string_view(pair).substr(colon + 1)));
    }
    return spline(std::move(knots), std::move(values));
  }
  throw ConfigError("unknown factor family '" + name + "'");
}

std::string Factor::spec() const {
  return std::visit(
      Overloaded{
          [](const Constant& f) { return "const(" + format_number(f.c) + ")"; },
          [](const Exponential& f) { return "exp(" + format_number(f.rate) + ")"; },
          [](const InversePower& f) { return "invpow(" + format_number(f.beta) + ")"; },
          [](const Monomial& f) { return "pow(" + format_number(f.power) + ")"; },
          [](const Spline& f) {
            std::string out = "spline(";
            for (std::size_t i = 0; i < f.knots.size(); ++i) {
              if (i > 0) out += ',';
              out += format_number(f.knots[i]) + ":" + format_number(f.values[i]);
            }
            return out + ")";
          },
      },
      kind_);
}

ProductFunctional::ProductFunctional(std::vector<double> times, std::vector<Factor> factors,
                                     Factor terminal)
    : times_(std::move(times)), factors_(std::move(factors)), terminal_(std::move(terminal)) {
  if (times_.size() != factors_.size()) {
    throw ConfigError("product functional: one factor per time required");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] >= 0.0 && times_[i] < 1.0)) {
      throw ConfigError("product functional: times must lie in [0,1)");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ConfigError("product functional: times must be strictly increasing");
    }
  }
}

ProductFunctional ProductFunctional::unit() { return ProductFunctional({}, {}, Factor::constant(1.0)); }

ProductFunctional ProductFunctional::parse(std::string_view spec) {
  std::vector<double> times;
  std::vector<Factor> factors;
  std::optional<Factor> terminal;
  // Entries are separated by ';'; factor arguments may contain ',' and ':'.
  for (const auto& entry : split(spec, ';')) {
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError("product functional entry needs '=': " + entry);
    const std::string key = trim(std::string_view(entry).substr(0, eq));
    const Factor factor = Factor::parse(std::string_view(entry).substr(eq + 1));
    if (key == "h") {
      terminal = factor;
    } else {
      times.push_back(parse_number(key));
      factors.push_back(factor);
    }
  }
  return ProductFunctional(std::move(times), std::move(factors),
                           terminal.value_or(Factor::constant(1.0)));
}

std::string ProductFunctional::spec() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    out << format_number(times_[i]) << '=' << factors_[i].spec() << ';';
  }
  out << "h=" << terminal_.spec();
  return out.str();
}

bool ProductFunctional::bounded() const {
  return terminal_.bounded() &&
         std::all_of(factors_.begin(), factors_.end(), [](const Factor& f) { return f.bounded(); });
}

double ProductFunctional::sup_norm() const {
  double norm = terminal_.sup_norm();
  for (const auto& f : factors_) norm *= f.sup_norm();
  return norm;
}

double eval_product(const ProductFunctional& pf, const StepPath& path) {
  if (path.horizon() < 1.0) throw DomainError("eval_product: path must cover [0,1]");
  return pf.evaluate(path);
}

PathFunctional terminal_functional(const Factor& h) {
  return {"terminal:" + h.spec(), [h](const ScaledView& v) { return h(v.eval(1.0)); },
          h.sup_norm()};
}

PathFunctional product_path_functional(const ProductFunctional& pf) {
  return {"product:" + pf.spec(), [pf](const ScaledView& v) { return pf.evaluate(v); },
          pf.sup_norm()};
}

PathFunctional constant_functional(double c) {
  return {"const:" + format_number(c), [c](const ScaledView&) { return c; }, std::abs(c)};
}

}  // namespace tiedml
