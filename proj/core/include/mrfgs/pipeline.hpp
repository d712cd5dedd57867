#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrfgs/graph.hpp"
#include "mrfgs/inference.hpp"
#include "mrfgs/metrics.hpp"
#include "mrfgs/middlebury.hpp"
#include "mrfgs/priors.hpp"
#include "mrfgs/segmentation.hpp"

namespace mrfgs::bench {

struct RunConfig {
  int levels = 2;
  double percentile = 97.0;
  double sigma_spatial = 3.0;
  double sigma_range = 0.1;
  int window = 7;
  int homomorphic_window = 21;
  priors::PriorMode prior_mode = priors::PriorMode::Similarity;
  graph::PotentialParams potentials;
  double tau = 0.05;
  int max_iters = 50;
  double damping = 0.3;
  std::uint64_t seed = 1;
  int clusters = 15;
  int kmeans_replicates = 5;
  int min_segment_size = 50;
  int max_corners = 2000;
  double corner_quality = 0.01;
  double match_ratio = 0.8;
  /// 0 selects the case's ndisp hint, or a third of the image width.
  int max_disparity = 0;
  bool post_process = true;
  /// When false the single-level engine is used; requires levels == 1.
  bool resolution_machinery = true;
  /// Empty disables intermediate dumps.
  std::filesystem::path dump_dir;
};

void validate(const RunConfig& cfg);

/// A stage failure; what() is prefixed with the stage name.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct MetricRow {
  double avg_err = 0.0;
  metrics::Psnr psnr;
  double bad2 = 0.0;
  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

MetricRow evaluate(const DisparityMap& est, const DisparityMap& gt);

struct EvalReport {
  std::string case_name;
  int levels = 0;
  bool post_processed = false;
  MetricRow raw;
  MetricRow final;
  int iterations = 0;
  bool converged = false;
  int max_disparity = 0;
  std::vector<std::pair<std::string, double>> stage_ms;
  RunConfig config;
};

struct PipelineResult {
  DisparityMap raw;
  DisparityMap final;
  EvalReport report;
  inference::ConvergenceTrace trace;
};

/// Everything up to and including the level-0 cost volume. It depends on
/// the configuration but not on the number of levels.
struct LevelZero {
  GrayImage left_gray;
  GrayImage right_gray;
  GrayImage left_corrected;
  GrayImage right_corrected;
  segmentation::SegmentMap segments;
  priors::SparseMatches matches;
  priors::ZonalStats zones;
  priors::CostVolume cost;
  int max_disparity = 0;
  std::vector<std::pair<std::string, double>> stage_ms;
};

int resolve_max_disparity(const StereoCase& stereo, const RunConfig& cfg);

LevelZero prepare_level_zero(const StereoCase& stereo, const RunConfig& cfg);

/// Pyramid, priors, graph, BP, MAP and optional weighted median from a
/// prepared level zero.
PipelineResult infer(const StereoCase& stereo, const LevelZero& base, const RunConfig& cfg);

PipelineResult run_pipeline(const StereoCase& stereo, const RunConfig& cfg);

struct ComparisonRow {
  std::string mode;  // "FGS" or "MR-FGS"
  int levels = 0;
  bool post_processed = false;
  MetricRow metrics;
  int iterations = 0;
  bool converged = false;
};

struct Comparison {
  std::string case_name;
  std::vector<ComparisonRow> rows;
  /// Both modes are run from this one level-zero volume.
  priors::CostVolume shared_cost;
};

/// FGS mode (one level) and multi-resolution mode (cfg.levels), each with and
/// without post-processing.
Comparison compare_modes(const StereoCase& stereo, const RunConfig& cfg);

}  // namespace mrfgs::bench
