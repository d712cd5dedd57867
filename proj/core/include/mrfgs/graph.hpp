#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mrfgs/image.hpp"
#include "mrfgs/priors.hpp"

namespace mrfgs::graph {

enum class FactorKind : std::uint8_t { Evidence, Spatial, Resolution };
enum class SpatialMode : std::uint8_t { Strict, Relaxed };
enum class ResolutionMode : std::uint8_t { Strict, Band };

struct PotentialParams {
  SpatialMode spatial = SpatialMode::Strict;
  /// Relaxed mode: exp(-lambda * |d_anchor - d_j|) per non-anchor member.
  double lambda = 1.0;
  ResolutionMode resolution = ResolutionMode::Band;
  int band = 1;
  double res_epsilon = 1e-3;
};

/// Spatial dependency potential. states[0] is the factor's anchor pixel.
/// Strict: 1 when all states agree, else 0. Relaxed: product over the other
/// members of exp(-lambda * |states[0] - states[j]|).
double spatial_potential(std::span<const int> states, SpatialMode mode, double lambda = 1.0);

/// Resolution dependency potential between one coarse label and its fine
/// children. Per child: 1 when |fine - 2 * coarse| <= band, else epsilon
/// (strict mode: band 0, epsilon 0). The potential is the product over children.
double resolution_potential(int coarse, std::span<const int> fine, ResolutionMode mode, int band = 1,
                            double epsilon = 1e-3);

using VarId = std::uint32_t;
using FactorId = std::uint32_t;
using EdgeId = std::uint32_t;

struct LevelInfo {
  int width = 0;
  int height = 0;
  int d_min = 0;
  int d_max = 0;
  VarId first_variable = 0;

  int label_count() const { return d_max - d_min + 1; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  friend bool operator==(const LevelInfo&, const LevelInfo&) = default;
};

struct VariableNode {
  int level = 0;
  std::uint32_t pixel = 0;
};

struct FactorNode {
  FactorKind kind = FactorKind::Evidence;
  int level = 0;
  EdgeId first_edge = 0;
  std::uint32_t degree = 0;
};

struct GraphOptions {
  int side = 7;
  double sigma_spatial = 3.0;
  double sigma_range = 0.1;
  double percentile = 97.0;
  bool resolution_factors = true;
};

/// Multi-level bipartite factor graph. Factor edges are stored contiguously:
/// spatial factors list their anchor pixel first, resolution factors list the
/// coarse variable first followed by up to four fine children.
class FactorGraph {
 public:
  int levels() const { return static_cast<int>(levels_.size()); }
  const LevelInfo& level(int z) const { return levels_[static_cast<std::size_t>(z)]; }

  std::size_t variable_count() const { return variables_.size(); }
  std::size_t factor_count() const { return factors_.size(); }
  std::size_t edge_count() const { return edge_var_.size(); }

  const VariableNode& variable(VarId v) const { return variables_[v]; }
  VarId variable_id(int level, std::size_t pixel) const {
    return levels_[static_cast<std::size_t>(level)].first_variable + static_cast<VarId>(pixel);
  }
  int label_count(VarId v) const { return level(variables_[v].level).label_count(); }
  int d_min(VarId v) const { return level(variables_[v].level).d_min; }

  const FactorNode& factor(FactorId f) const { return factors_[f]; }
  std::span<const VarId> neighbors(FactorId f) const {
    return {edge_var_.data() + factors_[f].first_edge, factors_[f].degree};
  }
  VarId edge_variable(EdgeId e) const { return edge_var_[e]; }
  FactorId edge_factor(EdgeId e) const { return edge_factor_[e]; }

  /// Edges incident to a variable, in factor order.
  std::span<const EdgeId> edges_of(VarId v) const {
    return {var_edges_.data() + var_edge_offset_[v], var_edge_offset_[v + 1] - var_edge_offset_[v]};
  }

  /// Evidence potential of a variable (its prior table).
  std::span<const double> evidence(VarId v) const {
    const auto& vn = variables_[v];
    return priors_[static_cast<std::size_t>(vn.level)].table(vn.pixel);
  }
  const priors::PriorField& prior(int z) const { return priors_[static_cast<std::size_t>(z)]; }

  std::size_t count(FactorKind kind) const;
  std::size_t count(FactorKind kind, int level) const;
  bool has_resolution_factors() const { return count(FactorKind::Resolution) > 0; }

  /// Builder interface.
  void add_level(priors::PriorField prior);
  FactorId add_factor(FactorKind kind, int level, std::span<const VarId> vars);
  void finalize();

 private:
  std::vector<LevelInfo> levels_;
  std::vector<priors::PriorField> priors_;
  std::vector<VariableNode> variables_;
  std::vector<FactorNode> factors_;
  std::vector<VarId> edge_var_;
  std::vector<FactorId> edge_factor_;
  std::vector<EdgeId> var_edges_;
  std::vector<std::size_t> var_edge_offset_;
};

/// One evidence and one spatial factor per pixel at every level; for levels
/// >= 1 one resolution factor per coarse pixel tying it to its 2x2 children.
/// Spatial neighbourhoods are the bilateral-selected taps of the level's guide.
FactorGraph build_graph(std::vector<priors::PriorField> priors, std::span<const GrayImage> guides,
                        const GraphOptions& options = {});

/// Line-oriented node/edge counts per level plus a variable degree histogram.
void write_graph_stats(std::ostream& os, const FactorGraph& graph);

}  // namespace mrfgs::graph
