#pragma once

#include <filesystem>
#include <string>

#include "mrfgs/image.hpp"

namespace mrfgs::metrics {

/// Mean |est - gt| over pixels valid in the ground truth.
double avg_abs_error(const DisparityMap& est, const DisparityMap& gt);

/// Peak signal-to-noise ratio against a 255 peak. A zero squared error is
/// reported as `perfect` with an infinite `db`.
struct Psnr {
  double db = 0.0;
  bool perfect = false;

  std::string to_string() const;
  friend bool operator==(const Psnr&, const Psnr&) = default;
};

Psnr psnr(const DisparityMap& est, const DisparityMap& gt);

/// Percentage of valid ground-truth pixels with |est - gt| > threshold.
double bad_percent(const DisparityMap& est, const DisparityMap& gt, double threshold);

/// Signed est - gt; pixels invalid in the ground truth are invalid.
DisparityMap error_map(const DisparityMap& est, const DisparityMap& gt);

/// Blue-white-red rendering of a signed map, symmetric around zero with the
/// given half-range (<= 0 picks the largest magnitude). Invalid pixels are black.
void write_error_png(const DisparityMap& err, const std::filesystem::path& path, double half_range = 0.0);

/// Valid values stretched linearly to [0,1]; invalid pixels are 0.
GrayImage normalized_disparity(const DisparityMap& map);

}  // namespace mrfgs::metrics
