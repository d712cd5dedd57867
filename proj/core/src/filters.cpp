#include "mrfgs/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mrfgs::imaging {

double KernelWeights::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

GrayImage to_grayscale(const ColorImage& img) {
  GrayImage out(img.width(), img.height());
  const auto r = img.plane(0).data();
  const auto g = img.plane(1).data();
  const auto b = img.plane(2).data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<float>(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
  }
  return out;
}

GrayImage convolve_separable(const GrayImage& img, std::span<const float> kx, std::span<const float> ky) {
  if (kx.size() % 2 == 0 || ky.size() % 2 == 0) {
    throw std::invalid_argument("convolve_separable: kernels must have odd length");
  }
  const int w = img.width();
  const int h = img.height();
  const int rx = static_cast<int>(kx.size() / 2);
  const int ry = static_cast<int>(ky.size() / 2);

  GrayImage tmp(w, h);
  std::vector<int> cols(static_cast<std::size_t>(w + 2 * rx));
  for (int x = -rx; x < w + rx; ++x) cols[static_cast<std::size_t>(x + rx)] = std::clamp(x, 0, w - 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -rx; k <= rx; ++k) {
        acc += static_cast<double>(kx[static_cast<std::size_t>(k + rx)]) *
               img(cols[static_cast<std::size_t>(x + k + rx)], y);
      }
      tmp(x, y) = static_cast<float>(acc);
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -ry; k <= ry; ++k) {
        acc += static_cast<double>(ky[static_cast<std::size_t>(k + ry)]) * tmp(x, std::clamp(y + k, 0, h - 1));
      }
      out(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

GrayImage box_mean(const GrayImage& img, int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("box_mean: window must be odd and positive");
  }
  const std::vector<float> k(static_cast<std::size_t>(window), 1.0f / static_cast<float>(window));
  return convolve_separable(img, k, k);
}

GrayImage homomorphic_filter(const GrayImage& img, int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("homomorphic_filter: window must be odd");
  }
  if (window > img.width() || window > img.height()) {
    throw std::invalid_argument("homomorphic_filter: window larger than image");
  }
  GrayImage logimg(img.width(), img.height());
  {
    auto src = img.data();
    auto dst = logimg.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = static_cast<float>(std::log(std::max(0.0, static_cast<double>(src[i])) + kHomomorphicEpsilon));
    }
  }
  const GrayImage low = box_mean(logimg, window);

  std::vector<double> high(img.size());
  for (std::size_t i = 0; i < high.size(); ++i) {
    high[i] = std::exp(static_cast<double>(logimg.data()[i]) - static_cast<double>(low.data()[i]));
  }
  const auto [lo, hi] = std::minmax_element(high.begin(), high.end());
  const double range = *hi - *lo;
  GrayImage out(img.width(), img.height());
  auto dst = out.data();
  if (!(range > 1e-9 * std::max(1.0, std::abs(*hi)))) {
    std::fill(dst.begin(), dst.end(), 0.5f);
    return out;
  }
  for (std::size_t i = 0; i < high.size(); ++i) {
    dst[i] = static_cast<float>((high[i] - *lo) / range);
  }
  return out;
}

KernelWeights bilateral_weights(const GrayImage& img, int cx, int cy, int side, double sigma_spatial,
                                double sigma_range) {
  if (side < 1 || side % 2 == 0) {
    throw std::invalid_argument("bilateral_weights: side must be odd");
  }
  if (!img.contains(cx, cy)) {
    throw std::out_of_range("bilateral_weights: centre outside image");
  }
  KernelWeights k;
  k.side = side;
  k.weights.assign(static_cast<std::size_t>(side * side), 0.0);
  const int r = side / 2;
  const double center = img(cx, cy);
  const double ss = 2.0 * sigma_spatial * sigma_spatial;
  const double sr = 2.0 * sigma_range * sigma_range;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const int x = cx + dx;
      const int y = cy + dy;
      if (!img.contains(x, y)) continue;
      const double diff = static_cast<double>(img(x, y)) - center;
      const double w = std::exp(-static_cast<double>(dx * dx + dy * dy) / ss) * std::exp(-diff * diff / sr);
      k.weights[static_cast<std::size_t>((dy + r) * side + (dx + r))] = w;
    }
  }
  return k;
}

double percentile_linear(std::vector<double> values, double p) {
  if (values.empty()) {
    throw std::invalid_argument("percentile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<PixelOffset> select_influential_neighbors(const KernelWeights& weights, double percentile) {
  const int r = weights.radius();
  std::vector<double> others;
  others.reserve(weights.weights.size());
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx != 0 || dy != 0) others.push_back(weights.at(dx, dy));
    }
  }
  std::vector<PixelOffset> out;
  if (others.empty()) return out;
  const double cutoff = percentile_linear(others, percentile);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const double w = weights.at(dx, dy);
      if (w > 0.0 && w >= cutoff) out.push_back({dx, dy});
    }
  }
  return out;
}

namespace {

constexpr float kBinomial5[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};

}  // namespace

GrayImage lowpass_downsample2(const GrayImage& img) {
  if (img.width() < 1 || img.height() < 1) {
    throw std::invalid_argument("lowpass_downsample2: empty image");
  }
  const GrayImage smooth = convolve_separable(img, kBinomial5, kBinomial5);
  const int w = (img.width() + 1) / 2;
  const int h = (img.height() + 1) / 2;
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out(x, y) = smooth(2 * x, 2 * y);
    }
  }
  return out;
}

ColorImage lowpass_downsample2(const ColorImage& img) {
  return ColorImage(lowpass_downsample2(img.plane(0)), lowpass_downsample2(img.plane(1)),
                    lowpass_downsample2(img.plane(2)));
}

}  // namespace mrfgs::imaging
