#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mrfgs/image.hpp"

namespace mrfgs::bench {

struct StereoCase {
  std::string name;
  ColorImage left;
  ColorImage right;
  DisparityMap ground_truth;
  double disparity_scale = 1.0;
  std::optional<int> ndisp;
};

/// Supported vintages: 2003 (im2/im6/disp2, GT / 4), 2005 and 2006
/// (view1/view5/disp1, GT / 3) and 2014 (im0/im1/disp0GT.pfm + calib.txt).
/// Zero-valued integer GT and non-finite PFM GT are invalid.
StereoCase load_middlebury_case(const std::filesystem::path& dir, int vintage);

/// Parses "ndisp=<n>" from a Middlebury calib.txt.
std::optional<int> parse_ndisp(const std::filesystem::path& calib);

/// Images low-passed and decimated twice; GT sampled every fourth pixel and
/// divided by four.
StereoCase quarter_resolution(const StereoCase& full);

}  // namespace mrfgs::bench
