#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mrfgs {

/// Single-channel image, row-major, intensities nominally in [0,1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f);
  GrayImage(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& operator()(int x, int y) { return data_[index(x, y)]; }
  float operator()(int x, int y) const { return data_[index(x, y)]; }

  /// Border-replicated access.
  float clamped(int x, int y) const;

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Three-plane RGB image.
class ColorImage {
 public:
  ColorImage() = default;
  ColorImage(int width, int height);
  ColorImage(GrayImage r, GrayImage g, GrayImage b);

  int width() const { return planes_[0].width(); }
  int height() const { return planes_[0].height(); }
  bool empty() const { return planes_[0].empty(); }

  GrayImage& plane(int c) { return planes_[static_cast<std::size_t>(c)]; }
  const GrayImage& plane(int c) const { return planes_[static_cast<std::size_t>(c)]; }

  friend bool operator==(const ColorImage&, const ColorImage&) = default;

 private:
  std::array<GrayImage, 3> planes_;
};

/// Per-pixel disparity (pixels) with a validity mask.
///
/// Values are stored as 32-bit floats so that a PFM round trip is lossless.
class DisparityMap {
 public:
  DisparityMap() = default;
  DisparityMap(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  float value(int x, int y) const { return values_[index(x, y)]; }
  float value(std::size_t i) const { return values_[i]; }
  bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  bool valid(std::size_t i) const { return valid_[i] != 0; }

  void set(int x, int y, float v) { set(index(x, y), v); }
  void set(std::size_t i, float v) {
    values_[i] = v;
    valid_[i] = 1;
  }
  void invalidate(int x, int y) { invalidate(index(x, y)); }
  void invalidate(std::size_t i) { valid_[i] = 0; }

  std::span<const float> values() const { return values_; }
  std::size_t valid_count() const;

  friend bool operator==(const DisparityMap&, const DisparityMap&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> values_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace mrfgs
