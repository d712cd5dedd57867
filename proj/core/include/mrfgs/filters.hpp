#pragma once

#include <compare>
#include <span>
#include <vector>

#include "mrfgs/image.hpp"

namespace mrfgs::imaging {

/// Square tap weights centred on a pixel; taps outside the image are 0.
struct KernelWeights {
  int side = 0;
  std::vector<double> weights;

  int radius() const { return side / 2; }
  double at(int dx, int dy) const {
    return weights[static_cast<std::size_t>((dy + radius()) * side + (dx + radius()))];
  }
  double sum() const;
};

struct PixelOffset {
  int dx = 0;
  int dy = 0;
  friend auto operator<=>(const PixelOffset&, const PixelOffset&) = default;
};

/// ITU-R BT.601 luma.
GrayImage to_grayscale(const ColorImage& img);

/// Separable convolution with border replication. Kernels must have odd length.
GrayImage convolve_separable(const GrayImage& img, std::span<const float> kx, std::span<const float> ky);

/// Mean over a window x window neighbourhood, border-replicated.
GrayImage box_mean(const GrayImage& img, int window);

/// Log-domain high-pass that removes slowly varying multiplicative
/// illumination: exp(log(I+eps) - boxmean(log(I+eps))), rescaled to [0,1].
/// A flat response maps to 0.5.
GrayImage homomorphic_filter(const GrayImage& img, int window = 21);

inline constexpr double kHomomorphicEpsilon = 1e-4;

/// Bilateral coefficients around (cx, cy), unnormalized; the centre tap is 1.
KernelWeights bilateral_weights(const GrayImage& img, int cx, int cy, int side = 7,
                                double sigma_spatial = 3.0, double sigma_range = 0.1);

/// Non-centre offsets whose weight reaches the given percentile of all
/// non-centre weights (linear interpolation between order statistics).
/// Ties at the cutoff are kept; zero-weight taps never qualify.
std::vector<PixelOffset> select_influential_neighbors(const KernelWeights& weights,
                                                      double percentile = 97.0);

/// Linear-interpolated percentile of an unsorted sample, p in [0, 100].
double percentile_linear(std::vector<double> values, double p);

/// 5-tap binomial low-pass [1 4 6 4 1]/16 then decimation by two;
/// output dimensions are ceil(dim / 2).
GrayImage lowpass_downsample2(const GrayImage& img);
ColorImage lowpass_downsample2(const ColorImage& img);

}  // namespace mrfgs::imaging
