#include "tiedml/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tiedml/error.hpp"
#include "tiedml/numeric.hpp"

namespace tiedml {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

StepPath::StepPath(double horizon, std::vector<double> epochs, std::vector<double> values,
                   double initial)
    : horizon_(horizon), initial_(initial), epochs_(std::move(epochs)), values_(std::move(values)) {
  require(std::isfinite(horizon_) && horizon_ > 0.0, "StepPath: horizon must be positive");
  require(std::isfinite(initial_), "StepPath: initial value must be finite");
  require(epochs_.size() == values_.size(), "StepPath: epochs and values differ in length");
  double prev_epoch = 0.0;
  double prev_value = initial_;
  for (std::size_t j = 0; j < epochs_.size(); ++j) {
    require(epochs_[j] > prev_epoch, "StepPath: epochs must be strictly increasing and > 0");
    require(epochs_[j] <= horizon_, "StepPath: epoch beyond horizon");
    require(std::isfinite(values_[j]) && values_[j] >= prev_value,
            "StepPath: values must be finite and nondecreasing");
    prev_epoch = epochs_[j];
    prev_value = values_[j];
  }
}

StepPath StepPath::constant(double horizon, double value) { return StepPath(horizon, {}, {}, value); }

std::size_t StepPath::epochs_up_to(double t) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(epochs_.begin(), epochs_.end(), t) -
                                  epochs_.begin());
}

double StepPath::eval(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw DomainError("StepPath::eval: t = " + std::to_string(t) + " outside [0, " +
                      std::to_string(horizon_) + "]");
  }
  const std::size_t j = epochs_up_to(t);
  return j == 0 ? initial_ : values_[j - 1];
}

double StepPath::eval_left(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) throw DomainError("StepPath::eval_left: t outside horizon");
  const auto j = static_cast<std::size_t>(std::lower_bound(epochs_.begin(), epochs_.end(), t) -
                                          epochs_.begin());
  return j == 0 ? initial_ : values_[j - 1];
}

ScaledView::ScaledView(const StepPath& base, double a, double gamma)
    : base_(&base), a_(a), inv_scale_(1.0 / std::pow(a, gamma)), horizon_(base.horizon() / a) {
  require(a > 0.0 && std::isfinite(a), "ScaledView: scale must be positive");
}

double ScaledView::eval(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) throw DomainError("ScaledView::eval: t outside horizon");
  return base_->eval(std::min(a_ * t, base_->horizon())) * inv_scale_;
}

StepPath inverse(const StepPath& path, double value_range) {
  require(value_range > 0.0, "inverse: value range must be positive");
  if (value_range > path.final_value()) {
    throw DomainError("inverse: value range exceeds the final value of the path");
  }
  const auto epochs = path.epochs();
  const auto values = path.values();
  std::vector<double> out_epochs;
  std::vector<double> out_values;
  // Indices of the jumps with positive size, in order.
  std::vector<std::size_t> rises;
  for (std::size_t j = 0; j < epochs.size(); ++j) {
    if (path.jump(j) > 0.0) rises.push_back(j);
  }
  auto target = [&](std::size_t r) { return r < rises.size() ? epochs[rises[r]] : path.horizon(); };
  double out_initial = 0.0;
  std::size_t r = 0;
  if (path.initial() > 0.0) {
    out_epochs.push_back(path.initial());
    out_values.push_back(target(0));
  } else {
    out_initial = target(0);
  }
  // Past the threshold values[rises[r]] the infimum moves to the next rise.
  for (; r < rises.size(); ++r) {
    const double threshold = values[rises[r]];
    if (threshold > value_range) break;
    const double next = target(r + 1);
    const double current = out_values.empty() ? out_initial : out_values.back();
    if (next > current) {
      out_epochs.push_back(threshold);
      out_values.push_back(next);
    }
  }
  return StepPath(value_range, std::move(out_epochs), std::move(out_values), out_initial);
}

double waiting_G(const StepPath& path, double t) {
  path.eval(t);  // domain check
  std::size_t j = path.epochs_up_to(t);
  while (j > 0) {
    --j;
    if (path.jump(j) > 0.0) return path.epochs()[j];
  }
  return 0.0;
}

WaitingTime waiting_D(const StepPath& path, double t) {
  path.eval(t);
  for (std::size_t j = path.epochs_up_to(t); j < path.jump_count(); ++j) {
    if (path.jump(j) > 0.0) return {path.epochs()[j], false};
  }
  return {path.horizon(), true};
}

namespace {

StepPath scale_impl(const StepPath& path, double a, double gamma, double out_horizon) {
  const double divisor = std::pow(a, gamma);
  std::vector<double> epochs;
  std::vector<double> values;
  const auto src_e = path.epochs();
  const auto src_v = path.values();
  for (std::size_t j = 0; j < src_e.size(); ++j) {
    const double e = src_e[j] / a;
    if (e > out_horizon) break;
    epochs.push_back(e);
    values.push_back(src_v[j] / divisor);
  }
  return StepPath(out_horizon, std::move(epochs), std::move(values), path.initial() / divisor);
}

}  // namespace

StepPath scale(const StepPath& path, double a, double gamma) {
  require(a > 0.0 && std::isfinite(a), "scale: a must be positive");
  require(gamma > 0.0, "scale: gamma must be positive");
  return scale_impl(path, a, gamma, path.horizon() / a);
}

StepPath scale(const StepPath& path, double a, double gamma, double out_horizon) {
  require(a > 0.0 && std::isfinite(a), "scale: a must be positive");
  require(gamma > 0.0, "scale: gamma must be positive");
  require(out_horizon > 0.0, "scale: output horizon must be positive");
  if (a * out_horizon > path.horizon() * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) {
    throw DomainError("scale: a * output horizon exceeds the input horizon");
  }
  return scale_impl(path, a, gamma, out_horizon);
}

StepPath increment_shift(const StepPath& path, double s) {
  require(s >= 0.0, "increment_shift: s must be nonnegative");
  if (!(s < path.horizon())) throw DomainError("increment_shift: s must be below the horizon");
  if (s == 0.0) return path;
  const double base = path.eval(s);
  std::vector<double> epochs;
  std::vector<double> values;
  const auto src_e = path.epochs();
  const auto src_v = path.values();
  for (std::size_t j = path.epochs_up_to(s); j < src_e.size(); ++j) {
    epochs.push_back(src_e[j] - s);
    values.push_back(src_v[j] - base);
  }
  return StepPath(path.horizon() - s, std::move(epochs), std::move(values), 0.0);
}

StepPath tie_down(const StepPath& path, double gamma) {
  require(gamma > 0.0 && gamma < 1.0, "tie_down: gamma must lie in (0,1)");
  require(path.horizon() >= 1.0, "tie_down: path horizon must be at least 1");
  const double g = waiting_G(path, 1.0);
  if (g <= 0.0) throw DegenerateInputError("tie_down: path has no point of increase in (0,1]");
  return scale(path, g, gamma, 1.0);
}

StieltjesResult stieltjes_functional(const PathFunctional& g, const StepPath& path, double gamma,
                                     double epsilon) {
  require(epsilon > 0.0 && epsilon < 1.0, "stieltjes_functional: epsilon must lie in (0,1)");
  require(gamma > 0.0 && gamma < 1.0, "stieltjes_functional: gamma must lie in (0,1)");
  require(path.horizon() >= 1.0, "stieltjes_functional: path horizon must be at least 1");
  numeric::CompensatedSum sum;
  const auto epochs = path.epochs();
  for (std::size_t j = path.epochs_up_to(epsilon); j < epochs.size() && epochs[j] <= 1.0; ++j) {
    const double dm = path.jump(j);
    if (dm <= 0.0) continue;
    sum += g(ScaledView(path, epochs[j], gamma)) * dm;
  }
  StieltjesResult result;
  result.value = sum.value();
  result.cutoff_bound = g.sup_norm * (path.eval(epsilon) - path.eval(0.0));
  return result;
}

double uniform_distance(const StepPath& p, const StepPath& q, double horizon) {
  require(horizon > 0.0 && horizon <= p.horizon() && horizon <= q.horizon(),
          "uniform_distance: horizon must lie within both paths");
  double best = std::abs(p.eval(0.0) - q.eval(0.0));
  std::vector<double> times;
  for (double e : p.epochs()) {
    if (e <= horizon) times.push_back(e);
  }
  for (double e : q.epochs()) {
    if (e <= horizon) times.push_back(e);
  }
  for (double t : times) best = std::max(best, std::abs(p.eval(t) - q.eval(t)));
  return best;
}

namespace {

// Jumps with positive size up to the horizon: epoch and value after the jump.
struct Rises {
  double initial = 0.0;
  std::vector<double> epoch;
  std::vector<double> value;
};

Rises rises_of(const StepPath& path, double horizon) {
  Rises r;
  r.initial = path.initial();
  for (std::size_t j = 0; j < path.jump_count(); ++j) {
    if (path.epochs()[j] > horizon) break;
    if (path.jump(j) > 0.0) {
      r.epoch.push_back(path.epochs()[j]);
      r.value.push_back(path.values()[j]);
    }
  }
  return r;
}

struct Edge {
  std::size_t from;
  std::size_t to;
  double sup_cost;
  double slope_cost;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

double j1_bound(const StepPath& p, const StepPath& q, double horizon, const J1Options& options) {
  const double trivial = uniform_distance(p, q, horizon);
  if (trivial == 0.0) return 0.0;
  const Rises rp = rises_of(p, horizon);
  const Rises rq = rises_of(q, horizon);
  const std::size_t m = rp.epoch.size();
  const std::size_t k = rq.epoch.size();
  if (m == 0 || k == 0) return trivial;

  // Node 0 is the start (0,0), nodes 1..m*k are matched pairs (i,j), the last
  // node is the end (horizon, horizon). Pair (i,j) forces ℓ(e_i) = f_j.
  const std::size_t start = 0;
  const std::size_t end = m * k + 1;
  auto node = [k](std::size_t i, std::size_t j) { return 1 + i * k + j; };

  struct Anchor {
    double s, t;
    std::size_t i, j;  // next unmatched rise index after the anchor in each path
    double xi, eta;    // path values at the anchor (after matched jumps)
  };
  auto anchor_of = [&](std::size_t n) -> Anchor {
    if (n == start) return {0.0, 0.0, 0, 0, rp.initial, rq.initial};
    if (n == end) return {horizon, horizon, m, k, 0.0, 0.0};
    const std::size_t i = (n - 1) / k;
    const std::size_t j = (n - 1) % k;
    return {rp.epoch[i], rq.epoch[j], i + 1, j + 1, rp.value[i], rq.value[j]};
  };

  // Segment from anchor a to anchor b; unmatched rises strictly between them
  // (and at the horizon for the final segment) move the difference.
  auto segment = [&](const Anchor& a, std::size_t to, Edge& edge) -> bool {
    const bool is_end = to == end;
    const std::size_t bi = is_end ? m : (to - 1) / k;
    const std::size_t bj = is_end ? k : (to - 1) % k;
    const double sb = is_end ? horizon : rp.epoch[bi];
    const double tb = is_end ? horizon : rq.epoch[bj];
    const double ds = sb - a.s;
    const double dt = tb - a.t;
    if (ds < 0.0 || dt < 0.0) return false;
    if ((ds == 0.0) != (dt == 0.0)) return false;
    if (!is_end && ds == 0.0) return false;
    edge.slope_cost = ds == 0.0 ? 0.0 : std::abs(std::log(dt / ds));
    const double ratio = ds == 0.0 ? 1.0 : ds / dt;
    double xi = a.xi;
    double eta = a.eta;
    double worst = std::abs(xi - eta);
    std::size_t i = a.i;
    std::size_t j = a.j;
    while (i < bi || j < bj) {
      const double si = i < bi ? rp.epoch[i] : kInf;
      const double sj = j < bj ? a.s + (rq.epoch[j] - a.t) * ratio : kInf;
      const double s = std::min(si, sj);
      while (i < bi && rp.epoch[i] <= s) xi = rp.value[i++];
      while (j < bj && a.s + (rq.epoch[j] - a.t) * ratio <= s) eta = rq.value[j++];
      worst = std::max(worst, std::abs(xi - eta));
    }
    edge.sup_cost = worst;
    return true;
  };

  std::vector<Edge> edges;
  auto try_edge = [&](std::size_t from, std::size_t to) {
    Edge e{};
    if (segment(anchor_of(from), to, e)) {
      e.from = from;
      e.to = to;
      edges.push_back(e);
    }
  };
  // Consecutive anchors skip at most max_gap - 1 rises in either path.
  const std::size_t gap = std::max<std::size_t>(options.max_gap, 1);
  auto add_edges_into = [&](std::size_t to) {
    if (to == end) {
      try_edge(start, end);
      for (std::size_t i = m - std::min(m, gap); i < m; ++i) {
        for (std::size_t j = k - std::min(k, gap); j < k; ++j) try_edge(node(i, j), end);
      }
      return;
    }
    const std::size_t ti = (to - 1) / k;
    const std::size_t tj = (to - 1) % k;
    if (ti < gap && tj < gap) try_edge(start, to);
    for (std::size_t di = 1; di <= gap && di <= ti; ++di) {
      for (std::size_t dj = 1; dj <= gap && dj <= tj; ++dj) try_edge(node(ti - di, tj - dj), to);
    }
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) add_edges_into(node(i, j));
  }
  add_edges_into(end);

  std::vector<double> thresholds;
  thresholds.reserve(edges.size());
  for (const auto& e : edges) thresholds.push_back(e.slope_cost);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  if (thresholds.size() > options.max_thresholds && options.max_thresholds > 1) {
    std::vector<double> picked;
    const std::size_t n = thresholds.size();
    for (std::size_t r = 0; r < options.max_thresholds; ++r) {
      picked.push_back(thresholds[r * (n - 1) / (options.max_thresholds - 1)]);
    }
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    thresholds = std::move(picked);
  }

  // Edges are generated grouped by target in increasing node order, so one
  // sweep settles every node before it is used as a source.
  double best = trivial;
  std::vector<double> cost(end + 1);
  for (double lambda : thresholds) {
    if (lambda >= best) break;
    std::fill(cost.begin(), cost.end(), kInf);
    cost[start] = 0.0;
    for (const auto& e : edges) {
      if (e.slope_cost > lambda || cost[e.from] == kInf) continue;
      cost[e.to] = std::min(cost[e.to], std::max(cost[e.from], e.sup_cost));
    }
    best = std::min(best, lambda + cost[end]);
  }
  return best;
}

}  // namespace

double j1_distance(const StepPath& p, const StepPath& q, double horizon, const J1Options& options) {
  return std::min(j1_bound(p, q, horizon, options), j1_bound(q, p, horizon, options));
}

}  // namespace tiedml
