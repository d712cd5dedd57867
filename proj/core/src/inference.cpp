#include "mrfgs/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mrfgs::inference {

using graph::EdgeId;
using graph::FactorGraph;
using graph::FactorId;
using graph::FactorKind;
using graph::VarId;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

int floor_div2(int a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }
int ceil_div2(int a) { return -floor_div2(-a); }

/// Sum over fine labels d in [2c - band, 2c + band] of p(d), via prefix sums.
class WindowSums {
 public:
  explicit WindowSums(const VarMessage& m) : d_min_(m.d_min), prefix_(m.p.size() + 1, 0.0) {
    for (std::size_t k = 0; k < m.p.size(); ++k) prefix_[k + 1] = prefix_[k] + m.p[k];
  }
  double total() const { return prefix_.back(); }
  double range(int lo, int hi) const {
    const int n = static_cast<int>(prefix_.size()) - 1;
    const int a = std::clamp(lo - d_min_, 0, n);
    const int b = std::clamp(hi - d_min_ + 1, 0, n);
    return b > a ? prefix_[static_cast<std::size_t>(b)] - prefix_[static_cast<std::size_t>(a)] : 0.0;
  }

 private:
  int d_min_;
  std::vector<double> prefix_;
};

void check_domain(const VarMessage& target, std::span<double> out) {
  if (out.size() != target.p.size()) {
    throw std::invalid_argument("factor message: output size does not match target domain");
  }
}

}  // namespace

void normalize_log(std::span<const double> logs, std::span<double> out, double floor) {
  const std::size_t n = logs.size();
  if (n == 0) return;
  const double m = *std::max_element(logs.begin(), logs.end());
  const double mass = 1.0 - static_cast<double>(n) * floor;
  if (m == kNegInf || !std::isfinite(m)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = std::exp(logs[k] - m);
    s += out[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k] = floor + mass * (out[k] / s);
}

void normalize_linear(std::span<const double> values, std::span<double> out, double floor) {
  const std::size_t n = values.size();
  if (n == 0) return;
  double s = 0.0;
  for (double v : values) s += v;
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return;
  }
  const double mass = 1.0 - static_cast<double>(n) * floor;
  for (std::size_t k = 0; k < n; ++k) out[k] = floor + mass * (values[k] / s);
}

void spatial_factor_message(std::span<const VarMessage> incoming, std::size_t target,
                            const graph::PotentialParams& params, std::span<double> out) {
  const auto& tgt = incoming[target];
  check_domain(tgt, out);
  const std::size_t labels = tgt.p.size();
  std::vector<double> logs(labels, 0.0);

  if (params.spatial == graph::SpatialMode::Strict) {
    // The equality potential is diagonal, so the joint sum collapses to a
    // pointwise product of the other members' messages.
    for (std::size_t j = 0; j < incoming.size(); ++j) {
      if (j == target) continue;
      if (incoming[j].d_min != tgt.d_min || incoming[j].p.size() != labels) {
        throw std::invalid_argument("spatial factor members must share a label domain");
      }
      for (std::size_t k = 0; k < labels; ++k) logs[k] += safe_log(incoming[j].p[k]);
    }
    normalize_log(logs, out);
    return;
  }

  // Relaxed: star of Laplace couplings exp(-lambda |d_0 - d_j|) around the anchor.
  const auto laplace = [&](const VarMessage& m) {
    std::vector<double> b(labels, 0.0);
    for (std::size_t a = 0; a < labels; ++a) {
      for (std::size_t k = 0; k < labels; ++k) {
        b[a] += std::exp(-params.lambda * std::abs(static_cast<double>(a) - static_cast<double>(k))) * m.p[k];
      }
    }
    return b;
  };
  std::vector<double> anchor_logs(labels, 0.0);
  for (std::size_t j = 1; j < incoming.size(); ++j) {
    if (j == target) continue;
    const auto b = laplace(incoming[j]);
    for (std::size_t a = 0; a < labels; ++a) anchor_logs[a] += safe_log(b[a]);
  }
  if (target == 0) {
    normalize_log(anchor_logs, out);
    return;
  }
  for (std::size_t a = 0; a < labels; ++a) anchor_logs[a] += safe_log(incoming[0].p[a]);
  const double m = *std::max_element(anchor_logs.begin(), anchor_logs.end());
  if (m == kNegInf) {
    normalize_log(logs, out);
    return;
  }
  for (std::size_t t = 0; t < labels; ++t) {
    double s = 0.0;
    for (std::size_t a = 0; a < labels; ++a) {
      s += std::exp(-params.lambda * std::abs(static_cast<double>(a) - static_cast<double>(t)) + anchor_logs[a] - m);
    }
    logs[t] = safe_log(s);
  }
  normalize_log(logs, out);
}

void resolution_factor_message(std::span<const VarMessage> incoming, std::size_t target,
                               const graph::PotentialParams& params, std::span<double> out) {
  check_domain(incoming[target], out);
  const bool strict = params.resolution == graph::ResolutionMode::Strict;
  const int band = strict ? 0 : params.band;
  const double eps = strict ? 0.0 : params.res_epsilon;

  const auto& coarse = incoming[0];
  const std::size_t nc = coarse.p.size();

  // log A_j(c) = log sum_d phi(d, c) p_j(d) for every fine member j != target.
  std::vector<double> coarse_logs(nc, 0.0);
  for (std::size_t j = 1; j < incoming.size(); ++j) {
    if (j == target) continue;
    const WindowSums ws(incoming[j]);
    for (std::size_t k = 0; k < nc; ++k) {
      const int c = coarse.d_min + static_cast<int>(k);
      const double in_band = ws.range(2 * c - band, 2 * c + band);
      coarse_logs[k] += safe_log(eps * ws.total() + (1.0 - eps) * in_band);
    }
  }
  if (target == 0) {
    normalize_log(coarse_logs, out);
    return;
  }

  for (std::size_t k = 0; k < nc; ++k) coarse_logs[k] += safe_log(coarse.p[k]);
  const double m = *std::max_element(coarse_logs.begin(), coarse_logs.end());
  const auto& fine = incoming[target];
  std::vector<double> logs(fine.p.size(), kNegInf);
  if (m != kNegInf) {
    std::vector<double> e(nc);
    double total = 0.0;
    for (std::size_t k = 0; k < nc; ++k) {
      e[k] = std::exp(coarse_logs[k] - m);
      total += e[k];
    }
    for (std::size_t t = 0; t < fine.p.size(); ++t) {
      const int d = fine.d_min + static_cast<int>(t);
      const int c_lo = std::max(ceil_div2(d - band), coarse.d_min);
      const int c_hi = std::min(floor_div2(d + band), coarse.d_min + static_cast<int>(nc) - 1);
      double in_band = 0.0;
      for (int c = c_lo; c <= c_hi; ++c) in_band += e[static_cast<std::size_t>(c - coarse.d_min)];
      logs[t] = m + safe_log(eps * total + (1.0 - eps) * in_band);
    }
  }
  normalize_log(logs, out);
}

MessageStore::MessageStore(const FactorGraph& graph) {
  offsets_.assign(graph.edge_count() + 1, 0);
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    offsets_[e + 1] = offsets_[e] + static_cast<std::size_t>(graph.label_count(graph.edge_variable(e)));
  }
  v2f_.assign(offsets_.back(), 0.0);
  f2v_.assign(offsets_.back(), 0.0);
}

MessageStore init_messages(const FactorGraph& graph) {
  MessageStore store(graph);
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    const VarId v = graph.edge_variable(e);
    const auto prior = graph.evidence(v);
    auto v2f = store.var_to_factor(e);
    std::copy(prior.begin(), prior.end(), v2f.begin());
    auto f2v = store.factor_to_var(e);
    if (graph.factor(graph.edge_factor(e)).kind == FactorKind::Evidence) {
      std::copy(prior.begin(), prior.end(), f2v.begin());
    } else {
      std::fill(f2v.begin(), f2v.end(), 1.0 / static_cast<double>(f2v.size()));
    }
  }
  return store;
}

std::vector<double> update_variable_to_factor(const MessageStore& store, const FactorGraph& graph, EdgeId e) {
  const VarId v = graph.edge_variable(e);
  std::vector<double> logs(static_cast<std::size_t>(graph.label_count(v)), 0.0);
  for (EdgeId other : graph.edges_of(v)) {
    if (other == e) continue;
    const auto m = store.factor_to_var(other);
    for (std::size_t k = 0; k < logs.size(); ++k) logs[k] += safe_log(m[k]);
  }
  std::vector<double> out(logs.size());
  normalize_log(logs, out);
  return out;
}

namespace {

void factor_message_into(const MessageStore& store, const FactorGraph& graph, FactorId f, std::size_t slot,
                         const graph::PotentialParams& params, std::vector<VarMessage>& scratch,
                         std::span<double> out) {
  const auto& node = graph.factor(f);
  const auto vars = graph.neighbors(f);
  scratch.clear();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    scratch.push_back({graph.d_min(vars[j]), store.var_to_factor(node.first_edge + static_cast<EdgeId>(j))});
  }
  switch (node.kind) {
    case FactorKind::Evidence: {
      const auto prior = graph.evidence(vars[0]);
      std::copy(prior.begin(), prior.end(), out.begin());
      break;
    }
    case FactorKind::Spatial:
      spatial_factor_message(scratch, slot, params, out);
      break;
    case FactorKind::Resolution:
      resolution_factor_message(scratch, slot, params, out);
      break;
  }
}

}  // namespace

std::vector<double> update_factor_to_variable(const MessageStore& store, const FactorGraph& graph, EdgeId e,
                                              const graph::PotentialParams& params) {
  const FactorId f = graph.edge_factor(e);
  std::vector<double> out(static_cast<std::size_t>(graph.label_count(graph.edge_variable(e))));
  std::vector<VarMessage> scratch;
  factor_message_into(store, graph, f, e - graph.factor(f).first_edge, params, scratch, out);
  return out;
}

graph::EdgeId find_edge(const FactorGraph& graph, VarId v, FactorId f) {
  for (EdgeId e : graph.edges_of(v)) {
    if (graph.edge_factor(e) == f) return e;
  }
  throw std::invalid_argument("find_edge: variable and factor are not adjacent");
}

BeliefField::BeliefField(const FactorGraph& graph) {
  for (int z = 0; z < graph.levels(); ++z) levels_.push_back(graph.level(z));
  offsets_.assign(graph.variable_count() + 1, 0);
  for (VarId v = 0; v < graph.variable_count(); ++v) {
    offsets_[v + 1] = offsets_[v] + static_cast<std::size_t>(graph.label_count(v));
  }
  tables_.assign(offsets_.back(), 0.0);
}

namespace {

void belief_into(const MessageStore& store, const FactorGraph& graph, VarId v, std::vector<double>& logs,
                 std::span<double> out) {
  logs.assign(static_cast<std::size_t>(graph.label_count(v)), 0.0);
  for (EdgeId e : graph.edges_of(v)) {
    const auto m = store.factor_to_var(e);
    for (std::size_t k = 0; k < logs.size(); ++k) logs[k] += safe_log(m[k]);
  }
  normalize_log(logs, out, 0.0);
}

}  // namespace

BeliefField compute_beliefs(const MessageStore& store, const FactorGraph& graph) {
  BeliefField beliefs(graph);
  std::vector<double> logs;
  for (VarId v = 0; v < graph.variable_count(); ++v) belief_into(store, graph, v, logs, beliefs.table(v));
  return beliefs;
}

DisparityMap map_estimate(const BeliefField& beliefs, int level) {
  if (level < 0 || level >= beliefs.levels()) {
    throw std::out_of_range("map_estimate: no such level");
  }
  const auto& info = beliefs.level(level);
  DisparityMap map(info.width, info.height);
  for (std::size_t i = 0; i < info.pixel_count(); ++i) {
    const auto t = beliefs.table(info.first_variable + static_cast<VarId>(i));
    const auto best = std::max_element(t.begin(), t.end());  // first maximum: smaller label wins ties
    map.set(i, static_cast<float>(info.d_min + static_cast<int>(best - t.begin())));
  }
  return map;
}

double convergence_error(const DisparityMap& prev, const DisparityMap& curr) {
  if (prev.width() != curr.width() || prev.height() != curr.height()) {
    throw std::invalid_argument("convergence_error: dimension mismatch");
  }
  if (prev.empty()) return 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double d = static_cast<double>(curr.value(i)) - static_cast<double>(prev.value(i));
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(prev.size()));
}

namespace {

/// Probability-domain damping; both inputs are normalized tables.
void damp_into(std::span<const double> old_table, std::span<const double> fresh, double damping,
               std::span<double> out) {
  if (damping == 0.0) {
    std::copy(fresh.begin(), fresh.end(), out.begin());
    return;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = damping * old_table[k] + (1.0 - damping) * fresh[k];
    s += out[k];
  }
  for (double& v : out) v /= s;
}

template <bool kWithResolution>
BpResult run_bp_impl(const FactorGraph& graph, const BpOptions& options) {
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw std::invalid_argument("run_bp: damping must lie in [0, 1)");
  }
  if (options.max_iters < 1) {
    throw std::invalid_argument("run_bp: max_iters must be positive");
  }
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  MessageStore current = init_messages(graph);
  MessageStore next = current;
  BpResult result;
  result.beliefs = compute_beliefs(current, graph);
  DisparityMap prev_map = map_estimate(result.beliefs, 0);

  if (options.trace_csv != nullptr) *options.trace_csv << "iter,epsilon,wallclock_ms\n";

  std::vector<VarMessage> scratch;
  std::vector<double> fresh;
  std::vector<double> logs;
  std::vector<double> edge_logs;
  std::vector<double> excl;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    // Factor -> variable half-sweep, reading only the previous v2f buffer.
    double delta = 0.0;
    for (FactorId f = 0; f < graph.factor_count(); ++f) {
      const auto& node = graph.factor(f);
      if (node.kind == FactorKind::Evidence) continue;
      const auto vars = graph.neighbors(f);
      scratch.clear();
      for (std::size_t j = 0; j < vars.size(); ++j) {
        scratch.push_back({graph.d_min(vars[j]), current.var_to_factor(node.first_edge + static_cast<EdgeId>(j))});
      }
      for (std::size_t j = 0; j < vars.size(); ++j) {
        const EdgeId e = node.first_edge + static_cast<EdgeId>(j);
        fresh.resize(static_cast<std::size_t>(graph.label_count(vars[j])));
        if constexpr (kWithResolution) {
          if (node.kind == FactorKind::Resolution) {
            resolution_factor_message(scratch, j, options.potentials, fresh);
          } else {
            spatial_factor_message(scratch, j, options.potentials, fresh);
          }
        } else {
          spatial_factor_message(scratch, j, options.potentials, fresh);
        }
        auto dst = next.factor_to_var(e);
        const auto old = current.factor_to_var(e);
        damp_into(old, fresh, options.damping, dst);
        for (std::size_t k = 0; k < dst.size(); ++k) delta = std::max(delta, std::abs(dst[k] - old[k]));
      }
    }

    // Variable -> factor half-sweep from the fresh f2v buffer; beliefs fall out
    // of the same per-variable log sum.
    for (VarId v = 0; v < graph.variable_count(); ++v) {
      const auto edges = graph.edges_of(v);
      const auto labels = static_cast<std::size_t>(graph.label_count(v));
      logs.assign(labels, 0.0);
      edge_logs.resize(edges.size() * labels);
      for (std::size_t a = 0; a < edges.size(); ++a) {
        const auto m = next.factor_to_var(edges[a]);
        for (std::size_t k = 0; k < labels; ++k) {
          const double l = safe_log(m[k]);
          edge_logs[a * labels + k] = l;
          logs[k] += l;
        }
      }
      normalize_log(logs, result.beliefs.table(v), 0.0);
      for (std::size_t a = 0; a < edges.size(); ++a) {
        const EdgeId e = edges[a];
        if (graph.factor(graph.edge_factor(e)).kind == FactorKind::Evidence) continue;
        fresh.resize(labels);
        excl.resize(labels);
        for (std::size_t k = 0; k < labels; ++k) excl[k] = logs[k] - edge_logs[a * labels + k];
        normalize_log(excl, fresh);
        damp_into(current.var_to_factor(e), fresh, options.damping, next.var_to_factor(e));
      }
    }
    std::swap(current, next);

    DisparityMap map = map_estimate(result.beliefs, 0);
    const double eps = convergence_error(prev_map, map);
    prev_map = std::move(map);
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    result.trace.epsilon.push_back(eps);
    result.trace.message_delta.push_back(delta);
    result.trace.wallclock_ms.push_back(ms);
    result.trace.iterations = iter;
    if (options.trace_csv != nullptr) *options.trace_csv << iter << "," << eps << "," << ms << "\n";
    if (eps <= options.tau && delta <= options.message_tolerance) {
      result.trace.converged = true;
      break;
    }
  }
  result.messages = std::move(current);
  return result;
}

}  // namespace

BpResult run_bp(const FactorGraph& graph, const BpOptions& options) { return run_bp_impl<true>(graph, options); }

BpResult run_bp_single_level(const FactorGraph& graph, const BpOptions& options) {
  if (graph.has_resolution_factors()) {
    throw std::invalid_argument("run_bp_single_level: graph contains resolution factors");
  }
  return run_bp_impl<false>(graph, options);
}

}  // namespace mrfgs::inference
