#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "mrfgs/image_io.hpp"
#include "mrfgs/priors.hpp"

namespace mrfgs::priors {

namespace {

static_assert(std::endian::native == std::endian::little, "cost-volume dump assumes a little-endian host");

template <typename T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (in.size() - pos < sizeof(T)) {
    throw FormatError("truncated cost volume", pos);
  }
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void write_cost_volume(const CostVolume& cv, const std::filesystem::path& path) {
  std::vector<unsigned char> out{'M', 'R', 'C', 'V'};
  for (std::int32_t v : {cv.level(), cv.width(), cv.height(), cv.d_min(), cv.d_max()}) put(out, v);
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
    put<std::int32_t>(out, cv.range(i).lo);
    put<std::int32_t>(out, cv.range(i).hi);
    for (float c : cv.costs(i)) put(out, c);
  }
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

CostVolume read_cost_volume(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  const std::vector<unsigned char> in{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  if (in.size() < 4 || std::memcmp(in.data(), "MRCV", 4) != 0) {
    throw FormatError("not a cost-volume dump", 0);
  }
  std::size_t pos = 4;
  const auto level = get<std::int32_t>(in, pos);
  const auto width = get<std::int32_t>(in, pos);
  const auto height = get<std::int32_t>(in, pos);
  const auto d_min = get<std::int32_t>(in, pos);
  const auto d_max = get<std::int32_t>(in, pos);
  if (width <= 0 || height <= 0) throw FormatError("bad cost-volume dimensions", 8);

  // Ranges precede costs per pixel, so collect both in one pass.
  std::vector<LabelRange> ranges;
  std::vector<float> costs;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(width) * height; ++i) {
    const auto lo = get<std::int32_t>(in, pos);
    const auto hi = get<std::int32_t>(in, pos);
    if (hi < lo) throw FormatError("bad label range", pos - 8);
    ranges.push_back({lo, hi});
    for (int d = lo; d <= hi; ++d) costs.push_back(get<float>(in, pos));
  }
  CostVolume cv(level, width, height, std::move(ranges));
  cv.set_global_range(d_min, d_max);
  std::size_t k = 0;
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
    for (float& c : cv.costs(i)) c = costs[k++];
  }
  return cv;
}

}  // namespace mrfgs::priors
