#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mrfgs/graph.hpp"

using namespace mrfgs;
using namespace mrfgs::graph;

namespace {

priors::PriorField uniform_prior(int level, int w, int h, int d_min, int d_max) {
  priors::PriorField pf(level, w, h, d_min, d_max);
  for (std::size_t i = 0; i < pf.pixel_count(); ++i) {
    for (double& v : pf.table(i)) v = 1.0 / pf.label_count();
  }
  return pf;
}

GrayImage noise(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0, 1);
  GrayImage g(w, h);
  for (float& v : g.data()) v = u(rng);
  return g;
}

}  // namespace

TEST(Potentials, StrictSpatial) {
  EXPECT_EQ(spatial_potential(std::vector<int>{3, 4, 3}, SpatialMode::Strict), 0.0);
  EXPECT_EQ(spatial_potential(std::vector<int>{5, 5, 5}, SpatialMode::Strict), 1.0);
}

TEST(Potentials, RelaxedSpatialIsAnchorStar) {
  EXPECT_DOUBLE_EQ(spatial_potential(std::vector<int>{3, 4, 1}, SpatialMode::Relaxed, 0.5), std::exp(-1.5));
  EXPECT_DOUBLE_EQ(spatial_potential(std::vector<int>{3, 3}, SpatialMode::Relaxed, 2.0), 1.0);
}

TEST(Potentials, StrictResolution) {
  EXPECT_EQ(resolution_potential(2, std::vector<int>{4, 4, 4, 4}, ResolutionMode::Strict), 1.0);
  EXPECT_EQ(resolution_potential(2, std::vector<int>{4, 4, 5, 4}, ResolutionMode::Strict), 0.0);
}

TEST(Potentials, BandResolution) {
  EXPECT_EQ(resolution_potential(2, std::vector<int>{5, 4, 4, 3}, ResolutionMode::Band, 1, 1e-3), 1.0);
  EXPECT_DOUBLE_EQ(resolution_potential(2, std::vector<int>{7, 4, 4, 4}, ResolutionMode::Band, 1, 1e-3), 1e-3);
}

TEST(BuildGraph, SingleLevelCounts) {
  const std::vector<GrayImage> guides = {noise(4, 4, 1)};
  const auto g = build_graph({uniform_prior(0, 4, 4, 0, 3)}, guides);
  EXPECT_EQ(g.variable_count(), 16u);
  EXPECT_EQ(g.count(FactorKind::Evidence), 16u);
  EXPECT_EQ(g.count(FactorKind::Spatial), 16u);
  EXPECT_EQ(g.count(FactorKind::Resolution), 0u);
  EXPECT_FALSE(g.has_resolution_factors());
}

TEST(BuildGraph, TwoLevelResolutionFactors) {
  const std::vector<GrayImage> guides = {noise(4, 4, 2), noise(2, 2, 3)};
  const auto g = build_graph({uniform_prior(0, 4, 4, 0, 7), uniform_prior(1, 2, 2, 0, 4)}, guides);
  EXPECT_EQ(g.variable_count(), 20u);
  EXPECT_EQ(g.count(FactorKind::Resolution), 4u);
  EXPECT_EQ(g.count(FactorKind::Spatial, 1), 4u);
  std::vector<int> parents(16, 0);
  for (FactorId f = 0; f < g.factor_count(); ++f) {
    if (g.factor(f).kind != FactorKind::Resolution) continue;
    const auto vars = g.neighbors(f);
    ASSERT_EQ(vars.size(), 5u);
    EXPECT_EQ(g.variable(vars[0]).level, 1);
    const auto cp = g.variable(vars[0]).pixel;
    for (std::size_t k = 1; k < vars.size(); ++k) {
      const auto& fine = g.variable(vars[k]);
      EXPECT_EQ(fine.level, 0);
      EXPECT_EQ((fine.pixel % 4) / 2 + 2 * ((fine.pixel / 4) / 2), cp);
      ++parents[fine.pixel];
    }
  }
  for (int p : parents) EXPECT_EQ(p, 1);
}

TEST(BuildGraph, OddSizeEdgeChildren) {
  const std::vector<GrayImage> guides = {noise(5, 3, 4), noise(3, 2, 5)};
  const auto g = build_graph({uniform_prior(0, 5, 3, 0, 3), uniform_prior(1, 3, 2, 0, 2)}, guides);
  std::size_t fine_edges = 0;
  for (FactorId f = 0; f < g.factor_count(); ++f) {
    if (g.factor(f).kind == FactorKind::Resolution) fine_edges += g.neighbors(f).size() - 1;
  }
  EXPECT_EQ(fine_edges, 15u);
}

TEST(BuildGraph, ResolutionMachineryCanBeDisabled) {
  const std::vector<GrayImage> guides = {noise(4, 4, 2), noise(2, 2, 3)};
  GraphOptions o;
  o.resolution_factors = false;
  const auto g = build_graph({uniform_prior(0, 4, 4, 0, 7), uniform_prior(1, 2, 2, 0, 4)}, guides, o);
  EXPECT_EQ(g.count(FactorKind::Resolution), 0u);
}

TEST(BuildGraph, SpatialFactorsAnchorFirstAndWithinLevel) {
  const std::vector<GrayImage> guides = {noise(9, 7, 6)};
  const auto g = build_graph({uniform_prior(0, 9, 7, 0, 3)}, guides);
  std::vector<int> anchored(63, 0);
  for (FactorId f = 0; f < g.factor_count(); ++f) {
    if (g.factor(f).kind != FactorKind::Spatial) continue;
    const auto vars = g.neighbors(f);
    ASSERT_GE(vars.size(), 2u);
    ++anchored[vars[0]];
    const auto& a = g.variable(vars[0]);
    for (auto v : vars.subspan(1)) {
      const auto& b = g.variable(v);
      EXPECT_NE(v, vars[0]);
      EXPECT_LE(std::abs(static_cast<int>(a.pixel % 9) - static_cast<int>(b.pixel % 9)), 3);
      EXPECT_LE(std::abs(static_cast<int>(a.pixel / 9) - static_cast<int>(b.pixel / 9)), 3);
    }
  }
  for (int c : anchored) EXPECT_EQ(c, 1);
}

TEST(BuildGraph, EdgeIndexConsistent) {
  const std::vector<GrayImage> guides = {noise(6, 6, 7), noise(3, 3, 8)};
  const auto g = build_graph({uniform_prior(0, 6, 6, 0, 5), uniform_prior(1, 3, 3, 0, 3)}, guides);
  std::size_t total = 0;
  for (VarId v = 0; v < g.variable_count(); ++v) {
    for (auto e : g.edges_of(v)) EXPECT_EQ(g.edge_variable(e), v);
    total += g.edges_of(v).size();
  }
  EXPECT_EQ(total, g.edge_count());
}

TEST(BuildGraph, RejectsMismatchedLevels) {
  const std::vector<GrayImage> guides = {noise(4, 4, 1), noise(3, 2, 1)};
  EXPECT_THROW(build_graph({uniform_prior(0, 4, 4, 0, 3), uniform_prior(1, 3, 2, 0, 2)}, guides),
               std::invalid_argument);
  const std::vector<GrayImage> one = {noise(4, 4, 1)};
  EXPECT_THROW(build_graph({uniform_prior(0, 4, 4, 0, 3), uniform_prior(1, 2, 2, 0, 2)}, one),
               std::invalid_argument);
}

TEST(BuildGraph, StatsMentionEveryLevel) {
  const std::vector<GrayImage> guides = {noise(4, 4, 2), noise(2, 2, 3)};
  const auto g = build_graph({uniform_prior(0, 4, 4, 0, 7), uniform_prior(1, 2, 2, 0, 4)}, guides);
  std::ostringstream os;
  write_graph_stats(os, g);
  EXPECT_NE(os.str().find("level 0"), std::string::npos);
  EXPECT_NE(os.str().find("level 1"), std::string::npos);
}
