#include "mrfgs/image.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace mrfgs {

namespace {

void check_dims(int width, int height) {
  if (width < 0 || height < 0) {
    throw std::invalid_argument("image dimensions must be non-negative");
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height, float fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("image data length does not match width x height");
  }
}

float GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

ColorImage::ColorImage(int width, int height)
    : planes_{GrayImage(width, height), GrayImage(width, height), GrayImage(width, height)} {}

ColorImage::ColorImage(GrayImage r, GrayImage g, GrayImage b)
    : planes_{std::move(r), std::move(g), std::move(b)} {
  for (const auto& p : planes_) {
    if (p.width() != planes_[0].width() || p.height() != planes_[0].height()) {
      throw std::invalid_argument("color planes must share dimensions");
    }
  }
}

DisparityMap::DisparityMap(int width, int height, float fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  values_.assign(n, fill);
  valid_.assign(n, 1);
}

std::size_t DisparityMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

}  // namespace mrfgs
