#include "mrfgs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "mrfgs/filters.hpp"

namespace mrfgs::graph {

double spatial_potential(std::span<const int> states, SpatialMode mode, double lambda) {
  if (states.empty()) return 1.0;
  if (mode == SpatialMode::Strict) {
    return std::all_of(states.begin(), states.end(), [&](int s) { return s == states[0]; }) ? 1.0 : 0.0;
  }
  double dist = 0.0;
  for (std::size_t j = 1; j < states.size(); ++j) dist += std::abs(states[0] - states[j]);
  return std::exp(-lambda * dist);
}

double resolution_potential(int coarse, std::span<const int> fine, ResolutionMode mode, int band,
                            double epsilon) {
  if (mode == ResolutionMode::Strict) {
    band = 0;
    epsilon = 0.0;
  }
  double value = 1.0;
  for (int f : fine) {
    if (std::abs(f - 2 * coarse) > band) value *= epsilon;
  }
  return value;
}

std::size_t FactorGraph::count(FactorKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(factors_.begin(), factors_.end(), [&](const FactorNode& f) { return f.kind == kind; }));
}

std::size_t FactorGraph::count(FactorKind kind, int level) const {
  return static_cast<std::size_t>(std::count_if(factors_.begin(), factors_.end(), [&](const FactorNode& f) {
    return f.kind == kind && f.level == level;
  }));
}

void FactorGraph::add_level(priors::PriorField prior) {
  LevelInfo info;
  info.width = prior.width();
  info.height = prior.height();
  info.d_min = prior.d_min();
  info.d_max = prior.d_max();
  info.first_variable = static_cast<VarId>(variables_.size());
  const int z = static_cast<int>(levels_.size());
  for (std::size_t i = 0; i < info.pixel_count(); ++i) {
    variables_.push_back({z, static_cast<std::uint32_t>(i)});
  }
  levels_.push_back(info);
  priors_.push_back(std::move(prior));
}

FactorId FactorGraph::add_factor(FactorKind kind, int level, std::span<const VarId> vars) {
  FactorNode f;
  f.kind = kind;
  f.level = level;
  f.first_edge = static_cast<EdgeId>(edge_var_.size());
  f.degree = static_cast<std::uint32_t>(vars.size());
  const auto id = static_cast<FactorId>(factors_.size());
  for (VarId v : vars) {
    edge_var_.push_back(v);
    edge_factor_.push_back(id);
  }
  factors_.push_back(f);
  return id;
}

void FactorGraph::finalize() {
  var_edge_offset_.assign(variables_.size() + 1, 0);
  for (VarId v : edge_var_) ++var_edge_offset_[v + 1];
  for (std::size_t v = 0; v < variables_.size(); ++v) var_edge_offset_[v + 1] += var_edge_offset_[v];
  var_edges_.assign(edge_var_.size(), 0);
  std::vector<std::size_t> cursor(var_edge_offset_.begin(), var_edge_offset_.end() - 1);
  for (EdgeId e = 0; e < edge_var_.size(); ++e) {
    var_edges_[cursor[edge_var_[e]]++] = e;
  }
}

FactorGraph build_graph(std::vector<priors::PriorField> priors, std::span<const GrayImage> guides,
                        const GraphOptions& options) {
  if (priors.empty()) {
    throw std::invalid_argument("build_graph: at least one level is required");
  }
  if (guides.size() != priors.size()) {
    throw std::invalid_argument("build_graph: one guide image per level is required");
  }
  for (std::size_t z = 0; z < priors.size(); ++z) {
    if (guides[z].width() != priors[z].width() || guides[z].height() != priors[z].height()) {
      throw std::invalid_argument("build_graph: guide/prior dimension mismatch at level " + std::to_string(z));
    }
    if (z > 0 && (priors[z].width() != (priors[z - 1].width() + 1) / 2 ||
                  priors[z].height() != (priors[z - 1].height() + 1) / 2)) {
      throw std::invalid_argument("build_graph: level " + std::to_string(z) + " is not half of level " +
                                  std::to_string(z - 1));
    }
  }

  FactorGraph g;
  const int levels = static_cast<int>(priors.size());
  for (auto& p : priors) g.add_level(std::move(p));

  std::vector<VarId> members;
  for (int z = 0; z < levels; ++z) {
    const auto& info = g.level(z);
    for (std::size_t i = 0; i < info.pixel_count(); ++i) {
      const VarId v = g.variable_id(z, i);
      g.add_factor(FactorKind::Evidence, z, std::span(&v, 1));
    }
    const GrayImage& guide = guides[static_cast<std::size_t>(z)];
    for (int y = 0; y < info.height; ++y) {
      for (int x = 0; x < info.width; ++x) {
        const auto weights =
            imaging::bilateral_weights(guide, x, y, options.side, options.sigma_spatial, options.sigma_range);
        const auto offsets = imaging::select_influential_neighbors(weights, options.percentile);
        members.clear();
        members.push_back(g.variable_id(z, static_cast<std::size_t>(y * info.width + x)));
        for (const auto& o : offsets) {
          members.push_back(g.variable_id(z, static_cast<std::size_t>((y + o.dy) * info.width + (x + o.dx))));
        }
        g.add_factor(FactorKind::Spatial, z, members);
      }
    }
  }

  if (options.resolution_factors) {
    for (int z = 1; z < levels; ++z) {
      const auto& coarse = g.level(z);
      const auto& fine = g.level(z - 1);
      for (int y = 0; y < coarse.height; ++y) {
        for (int x = 0; x < coarse.width; ++x) {
          members.clear();
          members.push_back(g.variable_id(z, static_cast<std::size_t>(y * coarse.width + x)));
          for (int v = 0; v < 2; ++v) {
            for (int u = 0; u < 2; ++u) {
              const int fx = 2 * x + u;
              const int fy = 2 * y + v;
              if (fx < fine.width && fy < fine.height) {
                members.push_back(g.variable_id(z - 1, static_cast<std::size_t>(fy * fine.width + fx)));
              }
            }
          }
          g.add_factor(FactorKind::Resolution, z, members);
        }
      }
    }
  }
  g.finalize();
  return g;
}

void write_graph_stats(std::ostream& os, const FactorGraph& graph) {
  os << "levels " << graph.levels() << "\n";
  os << "variables " << graph.variable_count() << "\n";
  os << "factors " << graph.factor_count() << "\n";
  os << "edges " << graph.edge_count() << "\n";
  for (int z = 0; z < graph.levels(); ++z) {
    const auto& info = graph.level(z);
    os << "level " << z << " size " << info.width << "x" << info.height << " labels [" << info.d_min << ","
       << info.d_max << "] variables " << info.pixel_count() << " evidence "
       << graph.count(FactorKind::Evidence, z) << " spatial " << graph.count(FactorKind::Spatial, z)
       << " resolution " << graph.count(FactorKind::Resolution, z) << "\n";
  }
  std::map<std::size_t, std::size_t> degree;
  for (VarId v = 0; v < graph.variable_count(); ++v) ++degree[graph.edges_of(v).size()];
  for (const auto& [d, n] : degree) os << "degree " << d << " " << n << "\n";
}

}  // namespace mrfgs::graph
