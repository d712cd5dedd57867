#include "mrfgs/middlebury.hpp"

#include <array>
#include <fstream>
#include <stdexcept>
#include <string_view>

#include "mrfgs/filters.hpp"
#include "mrfgs/image_io.hpp"

namespace mrfgs::bench {

namespace fs = std::filesystem;

namespace {

fs::path find_with_extension(const fs::path& dir, std::string_view stem, std::span<const std::string_view> exts) {
  for (auto ext : exts) {
    fs::path p = dir / (std::string(stem) + std::string(ext));
    if (fs::exists(p)) return p;
  }
  throw std::runtime_error("missing file " + (dir / std::string(stem)).string() + ".*");
}

DisparityMap scaled_ground_truth(const fs::path& path, double scale) {
  const io::RawImage raw = io::read_raw(path);
  DisparityMap gt(raw.width, raw.height);
  const auto stride = static_cast<std::size_t>(raw.channels);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double stored = raw.samples[i * stride];
    if (stored <= 0.0) {
      gt.invalidate(i);
    } else {
      gt.set(i, static_cast<float>(stored / scale));
    }
  }
  return gt;
}

}  // namespace

std::optional<int> parse_ndisp(const fs::path& calib) {
  std::ifstream in(calib);
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    constexpr std::string_view key = "ndisp=";
    if (line.rfind(key, 0) == 0) {
      try {
        return std::stoi(line.substr(key.size()));
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

StereoCase load_middlebury_case(const fs::path& dir, int vintage) {
  static constexpr std::array<std::string_view, 3> kImageExts = {".png", ".ppm", ".pgm"};
  static constexpr std::array<std::string_view, 2> kGtExts = {".png", ".pgm"};
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());

  StereoCase c;
  c.name = dir.filename().string();
  if (c.name.empty()) c.name = dir.parent_path().filename().string();
  switch (vintage) {
    case 2003:
      c.left = io::read_color(find_with_extension(dir, "im2", kImageExts));
      c.right = io::read_color(find_with_extension(dir, "im6", kImageExts));
      c.disparity_scale = 4.0;
      c.ground_truth = scaled_ground_truth(find_with_extension(dir, "disp2", kGtExts), c.disparity_scale);
      break;
    case 2005:
    case 2006:
      c.left = io::read_color(find_with_extension(dir, "view1", kImageExts));
      c.right = io::read_color(find_with_extension(dir, "view5", kImageExts));
      c.disparity_scale = 3.0;
      c.ground_truth = scaled_ground_truth(find_with_extension(dir, "disp1", kGtExts), c.disparity_scale);
      break;
    case 2014: {
      c.left = io::read_color(find_with_extension(dir, "im0", kImageExts));
      c.right = io::read_color(find_with_extension(dir, "im1", kImageExts));
      const fs::path gt = dir / "disp0GT.pfm";
      if (!fs::exists(gt)) throw std::runtime_error("missing file " + gt.string());
      c.ground_truth = io::read_pfm_disparity(gt);
      c.ndisp = parse_ndisp(dir / "calib.txt");
      break;
    }
    default:
      throw std::invalid_argument("unknown Middlebury vintage " + std::to_string(vintage));
  }
  if (c.left.width() != c.right.width() || c.left.height() != c.right.height()) {
    throw std::runtime_error("left and right images differ in size");
  }
  if (c.ground_truth.width() != c.left.width() || c.ground_truth.height() != c.left.height()) {
    throw std::runtime_error("ground truth and images differ in size");
  }
  return c;
}

StereoCase quarter_resolution(const StereoCase& full) {
  StereoCase q;
  q.name = full.name;
  q.disparity_scale = full.disparity_scale;
  q.ndisp = full.ndisp ? std::optional<int>((*full.ndisp + 3) / 4) : std::nullopt;
  q.left = imaging::lowpass_downsample2(imaging::lowpass_downsample2(full.left));
  q.right = imaging::lowpass_downsample2(imaging::lowpass_downsample2(full.right));
  q.ground_truth = DisparityMap(q.left.width(), q.left.height());
  for (int y = 0; y < q.left.height(); ++y) {
    for (int x = 0; x < q.left.width(); ++x) {
      const int sx = 4 * x;
      const int sy = 4 * y;
      if (full.ground_truth.valid(sx, sy)) {
        q.ground_truth.set(x, y, full.ground_truth.value(sx, sy) / 4.0f);
      } else {
        q.ground_truth.invalidate(x, y);
      }
    }
  }
  return q;
}

}  // namespace mrfgs::bench
