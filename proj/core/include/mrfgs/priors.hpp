#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mrfgs/image.hpp"
#include "mrfgs/segmentation.hpp"

namespace mrfgs::priors {

struct Corner {
  int x = 0;
  int y = 0;
  double score = 0.0;
};

/// Minimum-eigenvalue corner response over a 3x3 structure-tensor window,
/// greedy non-maximum suppression within radius 5, sorted by descending score.
std::vector<Corner> detect_corners(const GrayImage& img, int max_points = 2000, double quality = 0.01);

inline constexpr int kCornerSuppressionRadius = 5;

struct SparseMatch {
  int x = 0;
  int y = 0;
  double disparity = 0.0;
  double confidence = 0.0;
};
using SparseMatches = std::vector<SparseMatch>;

struct MatchOptions {
  int search_max = 64;
  int window = 7;
  /// Keep a match when best <= ratio * second best.
  double ratio = 0.8;
};

/// Mean absolute difference between `window`-sized patches of `left` at
/// (x, y) and `right` at (x - d, y); taps are border-replicated.
double patch_sad(const GrayImage& left, const GrayImage& right, int x, int y, int d, int window);

/// Row scan for each point over disparities [0, search_max] with a ratio test.
/// The runner-up ignores disparities adjacent to the winner.
SparseMatches match_sparse(const GrayImage& left, const GrayImage& right, std::span<const Corner> points,
                           const MatchOptions& options);

struct Zone {
  double mu = 0.0;
  double sigma = 0.0;
  int count = 0;         // matches that fell inside the segment
  bool fallback = false;  // mu/sigma taken from the global sample
};

struct ZonalStats {
  std::vector<Zone> zones;  // indexed by segment id
  Zone global;
};

inline constexpr double kSigmaMin = 2.0;
inline constexpr int kMinZoneMatches = 3;

/// Per-segment sample mean and standard deviation of match disparities.
ZonalStats zonal_stats(const segmentation::SegmentMap& seg, const SparseMatches& matches,
                       double sigma_min = kSigmaMin, int min_matches = kMinZoneMatches);

struct LabelRange {
  int lo = 0;
  int hi = 0;
  int size() const { return hi - lo + 1; }
  bool contains(int d) const { return d >= lo && d <= hi; }
  friend bool operator==(const LabelRange&, const LabelRange&) = default;
};

/// Sparse per-pixel cost table: each pixel holds costs for its own label range.
class CostVolume {
 public:
  CostVolume() = default;
  CostVolume(int level, int width, int height, std::vector<LabelRange> ranges);

  int level() const { return level_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return ranges_.size(); }
  int d_min() const { return d_min_; }
  int d_max() const { return d_max_; }
  int label_count() const { return d_max_ - d_min_ + 1; }

  const LabelRange& range(std::size_t i) const { return ranges_[i]; }
  std::span<float> costs(std::size_t i) {
    return {costs_.data() + offsets_[i], static_cast<std::size_t>(ranges_[i].size())};
  }
  std::span<const float> costs(std::size_t i) const {
    return {costs_.data() + offsets_[i], static_cast<std::size_t>(ranges_[i].size())};
  }
  float cost(std::size_t i, int d) const { return costs(i)[static_cast<std::size_t>(d - ranges_[i].lo)]; }
  std::span<const float> all_costs() const { return costs_; }

  /// Override the global label bounds; they must enclose every pixel range.
  void set_global_range(int d_min, int d_max);

  friend bool operator==(const CostVolume&, const CostVolume&) = default;

 private:
  int level_ = 0;
  int width_ = 0;
  int height_ = 0;
  int d_min_ = 0;
  int d_max_ = 0;
  std::vector<LabelRange> ranges_;
  std::vector<std::size_t> offsets_;
  std::vector<float> costs_;
};

/// Level-0 SAD volume restricted to each pixel's zonal range
/// [round(mu - sigma), round(mu + sigma)] clipped to [0, max_disparity].
CostVolume build_cost_volume(const GrayImage& left, const GrayImage& right,
                             const segmentation::SegmentMap& seg, const ZonalStats& stats,
                             int max_disparity, int window = 7);

/// Next pyramid level: each dense-completed disparity slice is low-passed and
/// decimated, then label pairs (2d, 2d+1) are averaged into coarse label d.
CostVolume downsample_cost_volume(const CostVolume& cv);

enum class PriorMode { Similarity, Literal };

inline constexpr double kPriorFloor = 1e-6;

/// Cost row -> distribution over the same labels. Similarity: exp(-c/beta);
/// literal: c itself. An all-zero row becomes uniform.
std::vector<double> normalize_costs(std::span<const float> costs, PriorMode mode, double beta);

/// Per-pixel distributions over a level's full label set.
class PriorField {
 public:
  PriorField() = default;
  PriorField(int level, int width, int height, int d_min, int d_max);

  int level() const { return level_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int d_min() const { return d_min_; }
  int d_max() const { return d_max_; }
  int label_count() const { return d_max_ - d_min_ + 1; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  std::span<double> table(std::size_t i) {
    return {tables_.data() + i * static_cast<std::size_t>(label_count()), static_cast<std::size_t>(label_count())};
  }
  std::span<const double> table(std::size_t i) const {
    return {tables_.data() + i * static_cast<std::size_t>(label_count()), static_cast<std::size_t>(label_count())};
  }

  friend bool operator==(const PriorField&, const PriorField&) = default;

 private:
  int level_ = 0;
  int width_ = 0;
  int height_ = 0;
  int d_min_ = 0;
  int d_max_ = 0;
  std::vector<double> tables_;
};

/// Mean in-range cost of a volume; the default similarity temperature.
double mean_cost(const CostVolume& cv);

/// Out-of-range labels receive kPriorFloor; every table sums to one.
/// beta <= 0 selects mean_cost(cv).
PriorField cost_to_prior(const CostVolume& cv, PriorMode mode, double beta = 0.0);

/// Binary dump: "MRCV" magic, int32 level/width/height/d_min/d_max, then per
/// pixel int32 lo, int32 hi and float32 costs. Little-endian.
void write_cost_volume(const CostVolume& cv, const std::filesystem::path& path);
CostVolume read_cost_volume(const std::filesystem::path& path);

}  // namespace mrfgs::priors
