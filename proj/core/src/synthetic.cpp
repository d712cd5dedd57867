#include "mrfgs/synthetic.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "mrfgs/filters.hpp"

namespace mrfgs::bench {

namespace {

constexpr int kMargin = 32;

std::vector<float> gaussian_taps(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<float> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += std::exp(-0.5 * i * i / (sigma * sigma));
  for (int i = -r; i <= r; ++i) {
    k[static_cast<std::size_t>(i + r)] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)) / sum);
  }
  return k;
}

/// Gaussian-smoothed uniform noise stretched to [0.15, 0.85]. The blur
/// scales give each plane its own texture signature.
GrayImage noise_texture(int width, int height, double sigma_x, double sigma_y, std::mt19937_64& rng) {
  GrayImage img(width, height);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : img.data()) v = u(rng);
  img = imaging::convolve_separable(img, gaussian_taps(sigma_x), gaussian_taps(sigma_y));
  float lo = img.data()[0];
  float hi = lo;
  for (float v : img.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (float& v : img.data()) v = 0.15f + 0.7f * (v - lo) / std::max(hi - lo, 1e-6f);
  return img;
}

struct Plane {
  int disparity;
  GrayImage texture;  // world coordinates, width + kMargin columns
  bool (*covers)(int x, int y, int w, int h);
};

bool covers_all(int, int, int, int) { return true; }

bool covers_rectangle(int x, int y, int w, int h) {
  return x >= w / 8 && x < w * 13 / 16 && y >= h / 16 && y < h * 25 / 32;
}

bool covers_disc(int x, int y, int w, int h) {
  const double cx = 0.8 * w;
  const double cy = 0.82 * h;
  const double r = 0.12 * std::min(w, h);
  return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
}

ColorImage as_color(const GrayImage& g) { return ColorImage(g, g, g); }

}  // namespace

StereoCase synthetic_planes(const SyntheticOptions& options) {
  const int w = options.width;
  const int h = options.height;
  if (w < 32 || h < 32) throw std::invalid_argument("synthetic_planes: scene must be at least 32x32");
  std::mt19937_64 rng(options.seed);

  // Back to front.
  std::array<Plane, 3> planes = {
      Plane{4, noise_texture(w + kMargin, h, 0.7, 0.7, rng), covers_all},
      Plane{10, noise_texture(w + kMargin, h, 2.0, 2.0, rng), covers_rectangle},
      Plane{16, noise_texture(w + kMargin, h, 0.7, 3.0, rng), covers_disc},
  };

  // The flat patch sits inside the rectangle with textured margins on every
  // side, clear of the disc.
  const double flat_area = options.homogeneous_fraction * w * h;
  const int flat_w = static_cast<int>(std::lround(std::sqrt(flat_area)));
  const int flat_h = static_cast<int>(std::lround(flat_area / flat_w));
  const int cx = (w / 8 + w * 13 / 16) / 2;
  const int cy = (h / 16 + h * 25 / 32) / 2;
  for (int y = cy - flat_h / 2; y < cy - flat_h / 2 + flat_h; ++y) {
    for (int x = cx - flat_w / 2; x < cx - flat_w / 2 + flat_w; ++x) planes[1].texture(x, y) = 0.5f;
  }

  GrayImage left(w, h);
  GrayImage right(w, h);
  DisparityMap gt(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (auto it = planes.rbegin(); it != planes.rend(); ++it) {
        if (it->covers(x, y, w, h)) {
          left(x, y) = it->texture(x, y);
          gt.set(x, y, static_cast<float>(it->disparity));
          break;
        }
      }
      for (auto it = planes.rbegin(); it != planes.rend(); ++it) {
        const int xl = x + it->disparity;
        if (it->covers(xl, y, w, h)) {
          right(x, y) = it->texture(xl, y);
          break;
        }
      }
    }
  }

  StereoCase c;
  c.name = "synthetic";
  c.left = as_color(left);
  c.right = as_color(right);
  c.ground_truth = std::move(gt);
  c.ndisp = 24;
  return c;
}

StereoCase synthetic_zero_disparity(const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);
  const GrayImage tex = noise_texture(options.width, options.height, 0.7, 0.7, rng);
  StereoCase c;
  c.name = "zero-disparity";
  c.left = as_color(tex);
  c.right = as_color(tex);
  c.ground_truth = DisparityMap(options.width, options.height, 0.0f);
  c.ndisp = 16;
  return c;
}

}  // namespace mrfgs::bench
