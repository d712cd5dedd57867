#pragma once

#include <cstdint>

#include "mrfgs/middlebury.hpp"

namespace mrfgs::bench {

struct SyntheticOptions {
  int width = 128;
  int height = 128;
  std::uint64_t seed = 7;
  /// Fraction of the image covered by a flat, textureless patch.
  double homogeneous_fraction = 0.2;
};

/// Three textured fronto-parallel planes at disparities 4 (background),
/// 10 (rectangle) and 16 (disc, front-most). The middle of the rectangle is
/// textureless. Each plane's texture is fixed in its own coordinates so the
/// right view is right(x, y) = T_k(x + d_k, y) for the front-most plane k
/// covering x + d_k.
StereoCase synthetic_planes(const SyntheticOptions& options = {});

/// Textured pair with right == left and all-zero ground truth.
StereoCase synthetic_zero_disparity(const SyntheticOptions& options = {});

}  // namespace mrfgs::bench
