#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "mrfgs/graph.hpp"
#include "mrfgs/image.hpp"

namespace mrfgs::inference {

inline constexpr double kMessageFloor = 1e-12;

/// Softmax of log-domain values followed by the floor blend
/// p = floor + (1 - n * floor) * q, so every entry is >= floor and the table
/// sums to one. An all -inf input yields the uniform table.
void normalize_log(std::span<const double> logs, std::span<double> out, double floor = kMessageFloor);

/// Same blend for non-negative linear-domain values.
void normalize_linear(std::span<const double> values, std::span<double> out, double floor = kMessageFloor);

/// A message table over the integer labels [d_min, d_min + p.size()).
struct VarMessage {
  int d_min = 0;
  std::span<const double> p;
};

/// Factor-to-variable message of a spatial factor towards member `target`.
/// `incoming[j]` is the variable-to-factor message of member j; the target's
/// own entry only supplies the output domain. Member 0 is the anchor.
void spatial_factor_message(std::span<const VarMessage> incoming, std::size_t target,
                            const graph::PotentialParams& params, std::span<double> out);

/// Factor-to-variable message of a resolution factor. Member 0 is the coarse
/// variable, members 1.. are its fine children.
void resolution_factor_message(std::span<const VarMessage> incoming, std::size_t target,
                               const graph::PotentialParams& params, std::span<double> out);

/// Per-edge message tables in both directions, sized by the edge variable's
/// label domain.
class MessageStore {
 public:
  MessageStore() = default;
  explicit MessageStore(const graph::FactorGraph& graph);

  std::span<const double> var_to_factor(graph::EdgeId e) const { return slice(v2f_, e); }
  std::span<const double> factor_to_var(graph::EdgeId e) const { return slice(f2v_, e); }
  std::span<double> var_to_factor(graph::EdgeId e) { return slice(v2f_, e); }
  std::span<double> factor_to_var(graph::EdgeId e) { return slice(f2v_, e); }

  std::size_t edge_count() const { return offsets_.size() - 1; }

  friend bool operator==(const MessageStore&, const MessageStore&) = default;

 private:
  template <typename V>
  static auto slice_impl(V& v, const std::vector<std::size_t>& off, graph::EdgeId e) {
    return std::span(v.data() + off[e], off[e + 1] - off[e]);
  }
  std::span<const double> slice(const std::vector<double>& v, graph::EdgeId e) const {
    return slice_impl(v, offsets_, e);
  }
  std::span<double> slice(std::vector<double>& v, graph::EdgeId e) { return slice_impl(v, offsets_, e); }

  std::vector<std::size_t> offsets_;
  std::vector<double> v2f_;
  std::vector<double> f2v_;
};

/// Variable-to-factor tables start at the variable's prior; factor-to-variable
/// tables start uniform except evidence edges, which carry the prior.
MessageStore init_messages(const graph::FactorGraph& graph);

/// Product of every factor-to-variable message into the edge's variable except
/// the one on edge `e`.
std::vector<double> update_variable_to_factor(const MessageStore& store, const graph::FactorGraph& graph,
                                              graph::EdgeId e);

/// Sum-product message from the edge's factor to the edge's variable.
std::vector<double> update_factor_to_variable(const MessageStore& store, const graph::FactorGraph& graph,
                                              graph::EdgeId e, const graph::PotentialParams& params);

/// Edge joining variable v and factor f; throws if they are not adjacent.
graph::EdgeId find_edge(const graph::FactorGraph& graph, graph::VarId v, graph::FactorId f);

/// Posterior tables for every variable.
class BeliefField {
 public:
  BeliefField() = default;
  explicit BeliefField(const graph::FactorGraph& graph);

  std::span<const double> table(graph::VarId v) const {
    return {tables_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<double> table(graph::VarId v) { return {tables_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]}; }

  int levels() const { return static_cast<int>(levels_.size()); }
  const graph::LevelInfo& level(int z) const { return levels_[static_cast<std::size_t>(z)]; }

  friend bool operator==(const BeliefField&, const BeliefField&) = default;

 private:
  std::vector<graph::LevelInfo> levels_;
  std::vector<std::size_t> offsets_;
  std::vector<double> tables_;
};

/// Normalized product of all incoming factor messages at each variable.
BeliefField compute_beliefs(const MessageStore& store, const graph::FactorGraph& graph);

/// Per-pixel argmax at one level; ties resolve to the smaller label.
DisparityMap map_estimate(const BeliefField& beliefs, int level);

/// Root-mean-square label change between two maps of equal size.
double convergence_error(const DisparityMap& prev, const DisparityMap& curr);

struct ConvergenceTrace {
  std::vector<double> epsilon;
  std::vector<double> message_delta;
  std::vector<double> wallclock_ms;
  bool converged = false;
  int iterations = 0;
};

struct BpOptions {
  double tau = 0.05;
  int max_iters = 50;
  double damping = 0.3;
  /// Extra stopping condition on the largest factor-message change; the
  /// default disables it.
  double message_tolerance = std::numeric_limits<double>::infinity();
  graph::PotentialParams potentials;
  /// Optional "iter,epsilon,wallclock_ms" stream.
  std::ostream* trace_csv = nullptr;
};

struct BpResult {
  BeliefField beliefs;
  ConvergenceTrace trace;
  MessageStore messages;
};

/// Synchronous flooding loopy BP over all levels jointly. Each iteration
/// recomputes every factor-to-variable message from the previous
/// variable-to-factor messages, then every variable-to-factor message; both
/// half-sweeps are damped in the probability domain. Stops once the level-0
/// MAP change is <= tau (and the message change is within tolerance) or after
/// max_iters.
BpResult run_bp(const graph::FactorGraph& graph, const BpOptions& options);

/// The same engine instantiated without any resolution-factor handling.
/// Throws std::invalid_argument if the graph contains resolution factors.
BpResult run_bp_single_level(const graph::FactorGraph& graph, const BpOptions& options);

}  // namespace mrfgs::inference
