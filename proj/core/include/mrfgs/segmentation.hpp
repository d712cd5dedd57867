#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mrfgs/image.hpp"

namespace mrfgs::segmentation {

/// Complex Gabor filter with an isotropic Gaussian envelope. The envelope
/// makes the kernel separable: k(x, y) = kx(x) * ky(y) with complex 1-D parts.
struct GaborFilter {
  double orientation_deg = 0.0;
  double wavelength = 0.0;
  double sigma = 0.0;
  int radius = 0;
  std::vector<float> x_re, x_im;  // exp(-x^2/2s^2) * exp(i*2pi*x*cos(theta)/lambda)
  std::vector<float> y_re, y_im;  // exp(-y^2/2s^2) * exp(i*2pi*y*sin(theta)/lambda)
};

struct GaborBank {
  std::vector<double> orientations_deg;
  std::vector<double> wavelengths;
  std::vector<GaborFilter> filters;  // wavelength-major, orientation-minor
};

/// Smallest wavelength of the bank, 4/sqrt(2) (~2.83) pixels.
inline constexpr double kMinGaborWavelength = 2.8284271247461903;

/// Envelope sigma for a one-octave frequency bandwidth.
double gabor_sigma(double wavelength);

/// Orientations 0..150 in 30 degree steps; wavelengths doubling from 2.83 up
/// to the image diagonal.
GaborBank build_gabor_bank(int width, int height);

/// Row-major feature matrix: `count` rows of `dims` values.
struct FeatureSet {
  int width = 0;
  int height = 0;
  int dims = 0;
  std::vector<float> values;

  std::size_t count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dims), static_cast<std::size_t>(dims)};
  }
};

/// Raw magnitude response of one filter (no smoothing or standardization).
GrayImage gabor_magnitude(const GrayImage& img, const GaborFilter& filter);

/// Per-pixel texture features: one smoothed, standardized magnitude per
/// filter, followed by x and y scaled by 1/max(width, height).
FeatureSet gabor_features(const GrayImage& img, const GaborBank& bank);

class SegmentMap {
 public:
  SegmentMap() = default;
  SegmentMap(int width, int height, std::vector<int> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  int segment_count() const { return count_; }
  int label(int x, int y) const { return labels_[static_cast<std::size_t>(y * width_ + x)]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }

  friend bool operator==(const SegmentMap&, const SegmentMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int count_ = 0;
  std::vector<int> labels_;
};

/// Renumber labels densely in raster order of first appearance.
std::vector<int> relabel_dense(std::span<const int> labels);

struct KMeansOptions {
  int clusters = 15;
  int replicates = 5;
  int max_iters = 500;
  std::uint64_t seed = 1;
};

struct KMeansResult {
  SegmentMap segments;
  std::vector<double> replicate_inertia;
  int best_replicate = 0;
};

/// Lloyd's algorithm with k-means++ seeding; the lowest-inertia replicate wins.
KMeansResult kmeans_segment(const FeatureSet& features, const KMeansOptions& options);

/// Fold every segment smaller than `min_size` pixels into the neighbouring
/// segment it shares the longest 4-connected boundary with.
SegmentMap merge_small_segments(const SegmentMap& seg, int min_size = 50);

struct SegmentationOptions {
  KMeansOptions kmeans;
  int min_segment_size = 50;
};

/// Gabor features -> k-means -> small-segment merge.
SegmentMap segment_texture(const GrayImage& img, const SegmentationOptions& options);

/// Labels spread over [0,1] for visual inspection.
GrayImage segments_to_image(const SegmentMap& seg);

}  // namespace mrfgs::segmentation
