#include "mrfgs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "mrfgs/image_io.hpp"

namespace mrfgs::metrics {

namespace {

void check_same_dims(const DisparityMap& est, const DisparityMap& gt) {
  if (est.width() != gt.width() || est.height() != gt.height()) {
    throw std::invalid_argument("metrics: estimate and ground truth differ in size");
  }
}

}  // namespace

double avg_abs_error(const DisparityMap& est, const DisparityMap& gt) {
  check_same_dims(est, gt);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid(i)) continue;
    sum += std::abs(static_cast<double>(est.value(i)) - static_cast<double>(gt.value(i)));
    ++n;
  }
  if (n == 0) throw std::invalid_argument("avg_abs_error: ground truth has no valid pixels");
  return sum / static_cast<double>(n);
}

std::string Psnr::to_string() const {
  if (perfect) return "perfect";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", db);
  return buf;
}

Psnr psnr(const DisparityMap& est, const DisparityMap& gt) {
  check_same_dims(est, gt);
  double sse = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid(i)) continue;
    const double e = static_cast<double>(est.value(i)) - static_cast<double>(gt.value(i));
    sse += e * e;
    ++n;
  }
  if (sse == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(255.0 * 255.0 * static_cast<double>(n) / sse), false};
}

double bad_percent(const DisparityMap& est, const DisparityMap& gt, double threshold) {
  check_same_dims(est, gt);
  std::size_t bad = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid(i)) continue;
    ++n;
    if (std::abs(static_cast<double>(est.value(i)) - static_cast<double>(gt.value(i))) > threshold) ++bad;
  }
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

DisparityMap error_map(const DisparityMap& est, const DisparityMap& gt) {
  check_same_dims(est, gt);
  DisparityMap out(gt.width(), gt.height());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.valid(i)) {
      out.set(i, est.value(i) - gt.value(i));
    } else {
      out.invalidate(i);
    }
  }
  return out;
}

void write_error_png(const DisparityMap& err, const std::filesystem::path& path, double half_range) {
  if (half_range <= 0.0) {
    for (std::size_t i = 0; i < err.size(); ++i) {
      if (err.valid(i)) half_range = std::max(half_range, std::abs(static_cast<double>(err.value(i))));
    }
    if (half_range <= 0.0) half_range = 1.0;
  }
  ColorImage img(err.width(), err.height());
  for (int y = 0; y < err.height(); ++y) {
    for (int x = 0; x < err.width(); ++x) {
      float r = 0.0f;
      float g = 0.0f;
      float b = 0.0f;
      if (err.valid(x, y)) {
        const auto t = static_cast<float>(std::clamp(err.value(x, y) / half_range, -1.0, 1.0));
        r = t < 0.0f ? 1.0f + t : 1.0f;
        b = t > 0.0f ? 1.0f - t : 1.0f;
        g = 1.0f - std::abs(t);
      }
      img.plane(0)(x, y) = r;
      img.plane(1)(x, y) = g;
      img.plane(2)(x, y) = b;
    }
  }
  io::write_png(img, path);
}

GrayImage normalized_disparity(const DisparityMap& map) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map.valid(i) || !std::isfinite(map.value(i))) continue;
    lo = std::min(lo, map.value(i));
    hi = std::max(hi, map.value(i));
  }
  GrayImage out(map.width(), map.height());
  const float span = hi > lo ? hi - lo : 1.0f;
  auto data = out.data();
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map.valid(i) && std::isfinite(map.value(i))) data[i] = (map.value(i) - lo) / span;
  }
  return out;
}

}  // namespace mrfgs::metrics
