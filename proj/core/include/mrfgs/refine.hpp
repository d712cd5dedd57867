#pragma once

#include <span>

#include "mrfgs/image.hpp"

namespace mrfgs::refine {

/// Smallest value whose cumulative weight reaches half the total weight.
/// Zero-weight samples are ignored; throws if no weight is positive.
float weighted_median(std::span<const float> values, std::span<const double> weights);

struct MedianOptions {
  int side = 7;
  double sigma_spatial = 3.0;
  double sigma_range = 0.1;
};

/// Edge-aware weighted median using bilateral weights of the guide around
/// each centre. Invalid pixels contribute no samples; a pixel whose window
/// holds no valid sample stays as it was.
DisparityMap weighted_median_filter(const DisparityMap& map, const GrayImage& guide,
                                    const MedianOptions& options = {});

}  // namespace mrfgs::refine
