#include "mrfgs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <type_traits>

#include "mrfgs/filters.hpp"
#include "mrfgs/image_io.hpp"
#include "mrfgs/refine.hpp"

namespace mrfgs::bench {

namespace fs = std::filesystem;

PipelineError::PipelineError(std::string stage, const std::string& message)
    : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

namespace {

using Timings = std::vector<std::pair<std::string, double>>;

/// Runs one stage, records its duration and tags failures with its name.
template <typename F>
auto stage(const char* name, Timings& timings, F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  const auto record = [&] {
    timings.emplace_back(name, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto out = fn();
      record();
      return out;
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

int largest_odd_at_most(int n) { return n % 2 == 1 ? n : n - 1; }

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.levels < 1) throw std::invalid_argument("levels must be >= 1");
  if (cfg.percentile < 0.0 || cfg.percentile > 100.0) throw std::invalid_argument("percentile must lie in [0,100]");
  if (cfg.window < 1 || cfg.window % 2 == 0) throw std::invalid_argument("window must be odd and positive");
  if (!(cfg.damping >= 0.0 && cfg.damping < 1.0)) throw std::invalid_argument("damping must lie in [0,1)");
  if (cfg.tau < 0.0) throw std::invalid_argument("tau must be non-negative");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (cfg.sigma_spatial <= 0.0 || cfg.sigma_range <= 0.0) throw std::invalid_argument("bilateral sigmas must be positive");
  if (cfg.max_disparity < 0) throw std::invalid_argument("max_disparity must be non-negative");
  if (!cfg.resolution_machinery && cfg.levels != 1) {
    throw std::invalid_argument("the single-level engine needs levels == 1");
  }
}

MetricRow evaluate(const DisparityMap& est, const DisparityMap& gt) {
  return {metrics::avg_abs_error(est, gt), metrics::psnr(est, gt), metrics::bad_percent(est, gt, 2.0)};
}

int resolve_max_disparity(const StereoCase& stereo, const RunConfig& cfg) {
  if (cfg.max_disparity > 0) return cfg.max_disparity;
  if (stereo.ndisp && *stereo.ndisp > 0) return *stereo.ndisp;
  return std::max(1, stereo.left.width() / 3);
}

LevelZero prepare_level_zero(const StereoCase& stereo, const RunConfig& cfg) {
  validate(cfg);
  LevelZero z;
  auto& t = z.stage_ms;
  z.max_disparity = resolve_max_disparity(stereo, cfg);

  stage("grayscale", t, [&] {
    z.left_gray = imaging::to_grayscale(stereo.left);
    z.right_gray = imaging::to_grayscale(stereo.right);
  });
  stage("homomorphic", t, [&] {
    const int limit = largest_odd_at_most(std::min(z.left_gray.width(), z.left_gray.height()));
    const int window = std::min(cfg.homomorphic_window, limit);
    z.left_corrected = imaging::homomorphic_filter(z.left_gray, window);
    z.right_corrected = imaging::homomorphic_filter(z.right_gray, window);
  });
  stage("segmentation", t, [&] {
    segmentation::SegmentationOptions so;
    so.kmeans.clusters = cfg.clusters;
    so.kmeans.replicates = cfg.kmeans_replicates;
    so.kmeans.seed = cfg.seed;
    so.min_segment_size = cfg.min_segment_size;
    z.segments = segmentation::segment_texture(z.left_corrected, so);
  });
  stage("sparse_match", t, [&] {
    const auto corners = priors::detect_corners(z.left_corrected, cfg.max_corners, cfg.corner_quality);
    priors::MatchOptions mo;
    mo.search_max = z.max_disparity;
    mo.window = cfg.window;
    mo.ratio = cfg.match_ratio;
    z.matches = priors::match_sparse(z.left_corrected, z.right_corrected, corners, mo);
  });
  stage("zonal_stats", t, [&] { z.zones = priors::zonal_stats(z.segments, z.matches); });
  stage("cost_volume", t, [&] {
    z.cost = priors::build_cost_volume(z.left_corrected, z.right_corrected, z.segments, z.zones, z.max_disparity,
                                       cfg.window);
  });
  return z;
}

PipelineResult infer(const StereoCase& stereo, const LevelZero& base, const RunConfig& cfg) {
  validate(cfg);
  PipelineResult result;
  Timings t = base.stage_ms;

  std::vector<priors::CostVolume> volumes = stage("pyramid", t, [&] {
    std::vector<priors::CostVolume> v{base.cost};
    for (int z = 1; z < cfg.levels; ++z) v.push_back(priors::downsample_cost_volume(v.back()));
    return v;
  });
  std::vector<GrayImage> guides = stage("guides", t, [&] {
    std::vector<GrayImage> g{base.left_gray};
    for (int z = 1; z < cfg.levels; ++z) g.push_back(imaging::lowpass_downsample2(g.back()));
    return g;
  });
  std::vector<priors::PriorField> fields = stage("priors", t, [&] {
    std::vector<priors::PriorField> f;
    for (const auto& cv : volumes) f.push_back(priors::cost_to_prior(cv, cfg.prior_mode));
    return f;
  });
  const graph::FactorGraph g = stage("graph", t, [&] {
    graph::GraphOptions go;
    go.side = cfg.window;
    go.sigma_spatial = cfg.sigma_spatial;
    go.sigma_range = cfg.sigma_range;
    go.percentile = cfg.percentile;
    go.resolution_factors = cfg.levels > 1;
    return graph::build_graph(std::move(fields), guides, go);
  });

  std::ofstream trace_file;
  if (!cfg.dump_dir.empty()) {
    fs::create_directories(cfg.dump_dir);
    io::write_pgm(segmentation::segments_to_image(base.segments), cfg.dump_dir / "segments.pgm");
    priors::write_cost_volume(base.cost, cfg.dump_dir / "cost_volume_l0.bin");
    std::ofstream stats(cfg.dump_dir / "graph_stats.txt");
    graph::write_graph_stats(stats, g);
    trace_file.open(cfg.dump_dir / "trace.csv");
  }

  const inference::BpResult bp = stage("belief_propagation", t, [&] {
    inference::BpOptions bo;
    bo.tau = cfg.tau;
    bo.max_iters = cfg.max_iters;
    bo.damping = cfg.damping;
    bo.potentials = cfg.potentials;
    if (trace_file.is_open()) bo.trace_csv = &trace_file;
    return cfg.resolution_machinery ? inference::run_bp(g, bo) : inference::run_bp_single_level(g, bo);
  });
  result.raw = stage("map", t, [&] { return inference::map_estimate(bp.beliefs, 0); });
  result.final = cfg.post_process ? stage("weighted_median", t, [&] {
    refine::MedianOptions mo;
    mo.side = cfg.window;
    mo.sigma_spatial = cfg.sigma_spatial;
    mo.sigma_range = cfg.sigma_range;
    return refine::weighted_median_filter(result.raw, base.left_gray, mo);
  })
                                   : result.raw;

  auto& r = result.report;
  r.case_name = stereo.name;
  r.levels = cfg.levels;
  r.post_processed = cfg.post_process;
  stage("metrics", t, [&] {
    r.raw = evaluate(result.raw, stereo.ground_truth);
    r.final = evaluate(result.final, stereo.ground_truth);
  });
  r.iterations = bp.trace.iterations;
  r.converged = bp.trace.converged;
  r.max_disparity = base.max_disparity;
  r.stage_ms = std::move(t);
  r.config = cfg;
  result.trace = bp.trace;
  return result;
}

PipelineResult run_pipeline(const StereoCase& stereo, const RunConfig& cfg) {
  return infer(stereo, prepare_level_zero(stereo, cfg), cfg);
}

Comparison compare_modes(const StereoCase& stereo, const RunConfig& cfg) {
  RunConfig base_cfg = cfg;
  base_cfg.post_process = true;
  base_cfg.dump_dir.clear();
  const LevelZero base = prepare_level_zero(stereo, base_cfg);

  Comparison out;
  out.case_name = stereo.name;
  out.shared_cost = base.cost;
  const auto run_mode = [&](const char* mode, int levels) {
    RunConfig c = base_cfg;
    c.levels = levels;
    const PipelineResult r = infer(stereo, base, c);
    out.rows.push_back({mode, levels, false, r.report.raw, r.report.iterations, r.report.converged});
    out.rows.push_back({mode, levels, true, r.report.final, r.report.iterations, r.report.converged});
  };
  run_mode("FGS", 1);
  run_mode("MR-FGS", cfg.levels);
  return out;
}

}  // namespace mrfgs::bench
