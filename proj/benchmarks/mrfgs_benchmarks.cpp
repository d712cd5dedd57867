#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mrfgs/filters.hpp"
#include "mrfgs/graph.hpp"
#include "mrfgs/inference.hpp"
#include "mrfgs/priors.hpp"
#include "mrfgs/refine.hpp"
#include "mrfgs/segmentation.hpp"
#include "mrfgs/synthetic.hpp"

using namespace mrfgs;

namespace {

GrayImage noise(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0, 1);
  GrayImage g(w, h);
  for (float& v : g.data()) v = u(rng);
  return g;
}

std::vector<double> random_table(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> t(static_cast<std::size_t>(n));
  double z = 0.0;
  for (double& v : t) z += (v = u(rng));
  for (double& v : t) v /= z;
  return t;
}

priors::PriorField random_prior(int level, int w, int h, int labels, unsigned seed) {
  std::mt19937 rng(seed);
  priors::PriorField pf(level, w, h, 0, labels - 1);
  for (std::size_t i = 0; i < pf.pixel_count(); ++i) {
    const auto t = random_table(rng, labels);
    std::copy(t.begin(), t.end(), pf.table(i).begin());
  }
  return pf;
}

}  // namespace

static void BM_SpatialMessage(benchmark::State& state) {
  const int labels = static_cast<int>(state.range(0));
  std::mt19937 rng(1);
  std::vector<std::vector<double>> tables;
  std::vector<inference::VarMessage> in;
  for (int j = 0; j < 3; ++j) tables.push_back(random_table(rng, labels));
  for (const auto& t : tables) in.push_back({0, t});
  graph::PotentialParams p;
  p.spatial = state.range(1) ? graph::SpatialMode::Relaxed : graph::SpatialMode::Strict;
  std::vector<double> out(static_cast<std::size_t>(labels));
  for (auto _ : state) {
    inference::spatial_factor_message(in, 1, p, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SpatialMessage)->ArgsProduct({{16, 64}, {0, 1}});

static void BM_ResolutionMessage(benchmark::State& state) {
  const int fine = static_cast<int>(state.range(0));
  std::mt19937 rng(2);
  std::vector<std::vector<double>> tables = {random_table(rng, fine / 2 + 1)};
  for (int j = 0; j < 4; ++j) tables.push_back(random_table(rng, fine));
  std::vector<inference::VarMessage> in;
  for (const auto& t : tables) in.push_back({0, t});
  const std::size_t target = static_cast<std::size_t>(state.range(1));
  std::vector<double> out(tables[target].size());
  for (auto _ : state) {
    inference::resolution_factor_message(in, target, {}, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ResolutionMessage)->ArgsProduct({{16, 64}, {0, 1}});

static void BM_BeliefPropagation(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int levels = static_cast<int>(state.range(1));
  std::vector<priors::PriorField> fields;
  std::vector<GrayImage> guides;
  int w = side, labels = 24;
  for (int z = 0; z < levels; ++z) {
    fields.push_back(random_prior(z, w, w, labels, 3u + static_cast<unsigned>(z)));
    guides.push_back(noise(w, w, 7u + static_cast<unsigned>(z)));
    w = (w + 1) / 2;
    labels = labels / 2 + 1;
  }
  const auto g = graph::build_graph(fields, guides);
  inference::BpOptions o;
  o.tau = 0.0;
  o.max_iters = 5;
  for (auto _ : state) benchmark::DoNotOptimize(inference::run_bp(g, o).trace.iterations);
  state.counters["variables"] = static_cast<double>(g.variable_count());
}
BENCHMARK(BM_BeliefPropagation)->ArgsProduct({{32, 64}, {1, 2}})->Unit(benchmark::kMillisecond);

static void BM_CostVolume(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto left = noise(side, side, 11);
  const auto right = noise(side, side, 12);
  const segmentation::SegmentMap seg(side, side, std::vector<int>(static_cast<std::size_t>(side * side), 0));
  priors::ZonalStats stats;
  stats.zones = {priors::Zone{16.0, 8.0, 10, false}};
  stats.global = stats.zones[0];
  for (auto _ : state) benchmark::DoNotOptimize(priors::build_cost_volume(left, right, seg, stats, 40));
}
BENCHMARK(BM_CostVolume)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_WeightedMedianFilter(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> d(0, 30);
  DisparityMap map(side, side);
  for (std::size_t i = 0; i < map.size(); ++i) map.set(i, static_cast<float>(d(rng)));
  const auto guide = noise(side, side, 6);
  for (auto _ : state) benchmark::DoNotOptimize(refine::weighted_median_filter(map, guide));
}
BENCHMARK(BM_WeightedMedianFilter)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_TextureSegmentation(benchmark::State& state) {
  const auto scene = bench::synthetic_planes();
  const auto gray = imaging::to_grayscale(scene.left);
  segmentation::SegmentationOptions o;
  o.kmeans.replicates = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(segmentation::segment_texture(gray, o));
}
BENCHMARK(BM_TextureSegmentation)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
