#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mrfgs/image.hpp"

namespace mrfgs {

/// Malformed or unsupported image file; carries the byte offset where
/// decoding stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

namespace io {

/// Undecoded samples as stored on disk (rows top-down, channels interleaved).
/// `maxval` is the PNM/PNG full-scale value, or 1 for PFM.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  double maxval = 1.0;
  bool floating = false;
  std::vector<float> samples;
};

using AnyImage = std::variant<GrayImage, ColorImage>;

/// Decode PGM (P5), PPM (P6), PFM (Pf/PF) or PNG without normalization.
RawImage read_raw(const std::filesystem::path& path);
RawImage decode_pnm(const std::vector<unsigned char>& bytes);
RawImage decode_pfm(const std::vector<unsigned char>& bytes);

/// Integer formats are normalized to [0,1]. PFM samples pass through unscaled,
/// including +/-inf, since they usually hold disparities rather than intensities.
AnyImage read_image(const std::filesystem::path& path);

/// Color inputs are reduced with to_grayscale.
GrayImage read_gray(const std::filesystem::path& path);
/// Gray inputs are replicated into all three planes.
ColorImage read_color(const std::filesystem::path& path);

/// PFM disparity file; non-finite samples become invalid pixels.
DisparityMap read_pfm_disparity(const std::filesystem::path& path);

/// Little-endian "Pf", bottom-up rows. Invalid pixels are written as +inf.
void write_pfm(const DisparityMap& map, const std::filesystem::path& path);
std::vector<unsigned char> encode_pfm(const DisparityMap& map);

/// P5 with the given maxval (<= 65535). Values are clamped to [0,1] and rounded.
void write_pgm(const GrayImage& img, const std::filesystem::path& path, int maxval = 255);
std::vector<unsigned char> encode_pgm(const GrayImage& img, int maxval = 255);

void write_png(const GrayImage& img, const std::filesystem::path& path);
void write_png(const ColorImage& img, const std::filesystem::path& path);

}  // namespace io
}  // namespace mrfgs
