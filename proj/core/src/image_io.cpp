#include "mrfgs/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>

#include "mrfgs/filters.hpp"

namespace mrfgs {

FormatError::FormatError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

namespace io {

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

/// Tokenizer over a netpbm-style header.
class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (out.empty()) {
      throw FormatError("malformed header: unexpected end of header", pos_);
    }
    return out;
  }

  long integer(const char* what) {
    const auto start = pos_;
    const auto tok = token();
    long v = 0;
    for (char c : tok) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw FormatError(std::string("malformed header: bad ") + what, start);
      }
      v = v * 10 + (c - '0');
      if (v > 1'000'000'000L) {
        throw FormatError(std::string("malformed header: ") + what + " too large", start);
      }
    }
    return v;
  }

  /// Exactly one whitespace byte separates the header from the payload.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("malformed header: missing separator before payload", pos_);
    }
    ++pos_;
  }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

void require_payload(const std::vector<unsigned char>& bytes, std::size_t start, std::size_t needed) {
  if (bytes.size() < start || bytes.size() - start < needed) {
    throw FormatError("truncated payload: expected " + std::to_string(needed) + " bytes", bytes.size());
  }
}

bool has_prefix(const std::vector<unsigned char>& bytes, std::string_view p) {
  return bytes.size() >= p.size() && std::equal(p.begin(), p.end(), bytes.begin(), [](char a, unsigned char b) {
           return static_cast<unsigned char>(a) == b;
         });
}

struct PngReadContext {
  const std::vector<unsigned char>* bytes = nullptr;
  std::size_t pos = 0;
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
};

RawImage decode_png(const std::vector<unsigned char>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw std::runtime_error("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng: cannot create info struct");
  }
  // Everything touched after setjmp lives on the heap so a longjmp cannot
  // leave it in an indeterminate register state.
  const auto ctx = std::make_unique<PngReadContext>();
  ctx->bytes = &bytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("malformed PNG", ctx->pos);
  }
  png_set_read_fn(png, ctx.get(), [](png_structp p, png_bytep dst, png_size_t n) {
    auto* c = static_cast<PngReadContext*>(png_get_io_ptr(p));
    if (c->bytes->size() - c->pos < n) {
      png_error(p, "truncated");
    }
    std::memcpy(dst, c->bytes->data() + c->pos, n);
    c->pos += n;
  });
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  ctx->pixels.resize(rowbytes * height);
  ctx->rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) ctx->rows[y] = ctx->pixels.data() + y * rowbytes;
  png_read_image(png, ctx->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) {
    throw FormatError("unsupported PNG channel count " + std::to_string(channels), 0);
  }
  RawImage out;
  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.maxval = depth == 16 ? 65535.0 : 255.0;
  const std::size_t row_len = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  out.samples.resize(row_len * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    const unsigned char* row = ctx->rows[y];
    for (std::size_t k = 0; k < row_len; ++k) {
      const float v = depth == 16 ? static_cast<float>((row[2 * k] << 8) | row[2 * k + 1])
                                  : static_cast<float>(row[k]);
      out.samples[y * row_len + k] = v;
    }
  }
  return out;
}

template <typename T>
T byteswap_if(T v, bool swap) {
  if (!swap) return v;
  auto u = std::bit_cast<std::uint32_t>(v);
  u = ((u & 0xFFu) << 24) | ((u & 0xFF00u) << 8) | ((u >> 8) & 0xFF00u) | (u >> 24);
  return std::bit_cast<T>(u);
}

}  // namespace

RawImage decode_pnm(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2) {
    throw FormatError("malformed header: file too short", 0);
  }
  if (bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("unsupported magic number", 0);
  }
  HeaderReader hr(bytes);
  hr.token();
  RawImage out;
  out.channels = bytes[1] == '5' ? 1 : 3;
  out.width = static_cast<int>(hr.integer("width"));
  out.height = static_cast<int>(hr.integer("height"));
  const long maxval = hr.integer("maxval");
  if (maxval < 1 || maxval > 65535) {
    throw FormatError("malformed header: maxval out of range", hr.pos());
  }
  hr.end_of_header();
  out.maxval = static_cast<double>(maxval);

  const std::size_t count = static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height) *
                            static_cast<std::size_t>(out.channels);
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t start = hr.pos();
  require_payload(bytes, start, count * bps);
  out.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (bps == 2) {
      out.samples[k] = static_cast<float>((bytes[start + 2 * k] << 8) | bytes[start + 2 * k + 1]);
    } else {
      out.samples[k] = static_cast<float>(bytes[start + k]);
    }
  }
  return out;
}

RawImage decode_pfm(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2) {
    throw FormatError("malformed header: file too short", 0);
  }
  if (bytes[0] != 'P' || (bytes[1] != 'f' && bytes[1] != 'F')) {
    throw FormatError("unsupported magic number", 0);
  }
  HeaderReader hr(bytes);
  hr.token();
  RawImage out;
  out.floating = true;
  out.channels = bytes[1] == 'f' ? 1 : 3;
  out.width = static_cast<int>(hr.integer("width"));
  out.height = static_cast<int>(hr.integer("height"));
  const auto scale_at = hr.pos();
  const auto scale_tok = hr.token();
  double scale = 0.0;
  {
    std::istringstream ss(scale_tok);
    ss.imbue(std::locale::classic());
    if (!(ss >> scale) || !ss.eof() || scale == 0.0 || !std::isfinite(scale)) {
      throw FormatError("malformed header: bad scale '" + scale_tok + "'", scale_at);
    }
  }
  hr.end_of_header();
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);

  const std::size_t row_len = static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.channels);
  const std::size_t count = row_len * static_cast<std::size_t>(out.height);
  const std::size_t start = hr.pos();
  require_payload(bytes, start, count * 4);
  out.samples.resize(count);
  for (int y = 0; y < out.height; ++y) {
    // Rows are stored bottom-up.
    const std::size_t src_row = static_cast<std::size_t>(out.height - 1 - y);
    for (std::size_t k = 0; k < row_len; ++k) {
      float v;
      std::memcpy(&v, bytes.data() + start + 4 * (src_row * row_len + k), 4);
      out.samples[static_cast<std::size_t>(y) * row_len + k] = byteswap_if(v, swap);
    }
  }
  return out;
}

RawImage read_raw(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (bytes.empty()) {
    throw FormatError("malformed header: empty file " + path.string(), 0);
  }
  if (has_prefix(bytes, "\x89PNG")) {
    return decode_png(bytes);
  }
  if (has_prefix(bytes, "Pf") || has_prefix(bytes, "PF")) {
    return decode_pfm(bytes);
  }
  return decode_pnm(bytes);
}

AnyImage read_image(const std::filesystem::path& path) {
  const auto raw = read_raw(path);
  const double scale = raw.floating ? 1.0 : 1.0 / raw.maxval;
  const auto plane = [&](int c) {
    GrayImage g(raw.width, raw.height);
    auto dst = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const float v = raw.samples[i * static_cast<std::size_t>(raw.channels) + static_cast<std::size_t>(c)];
      dst[i] = raw.floating ? v : static_cast<float>(v * scale);
    }
    return g;
  };
  if (raw.channels == 1) {
    return plane(0);
  }
  return ColorImage(plane(0), plane(1), plane(2));
}

GrayImage read_gray(const std::filesystem::path& path) {
  auto img = read_image(path);
  if (auto* g = std::get_if<GrayImage>(&img)) return std::move(*g);
  return imaging::to_grayscale(std::get<ColorImage>(img));
}

ColorImage read_color(const std::filesystem::path& path) {
  auto img = read_image(path);
  if (auto* c = std::get_if<ColorImage>(&img)) return std::move(*c);
  const auto& g = std::get<GrayImage>(img);
  return ColorImage(g, g, g);
}

DisparityMap read_pfm_disparity(const std::filesystem::path& path) {
  const auto raw = decode_pfm(slurp(path));
  if (raw.channels != 1) {
    throw FormatError("disparity PFM must be single-channel (Pf)", 0);
  }
  DisparityMap map(raw.width, raw.height);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    const float v = raw.samples[i];
    if (std::isfinite(v)) {
      map.set(i, v);
    } else {
      map.invalidate(i);
    }
  }
  return map;
}

std::vector<unsigned char> encode_pfm(const DisparityMap& map) {
  std::string header = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n-1.0\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  const std::size_t w = static_cast<std::size_t>(map.width());
  out.reserve(out.size() + map.size() * 4);
  for (int y = map.height() - 1; y >= 0; --y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      float v = map.valid(i) ? map.value(i) : std::numeric_limits<float>::infinity();
      v = byteswap_if(v, std::endian::native != std::endian::little);
      unsigned char buf[4];
      std::memcpy(buf, &v, 4);
      out.insert(out.end(), buf, buf + 4);
    }
  }
  return out;
}

void write_pfm(const DisparityMap& map, const std::filesystem::path& path) {
  spill(encode_pfm(map), path);
}

std::vector<unsigned char> encode_pgm(const GrayImage& img, int maxval) {
  if (maxval < 1 || maxval > 65535) {
    throw std::invalid_argument("PGM maxval must be in [1, 65535]");
  }
  std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n" +
                       std::to_string(maxval) + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  for (float v : img.data()) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * maxval));
    if (maxval > 255) {
      out.push_back(static_cast<unsigned char>(q >> 8));
    }
    out.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path, int maxval) {
  spill(encode_pgm(img, maxval), path);
}

namespace {

unsigned char to_byte(float v) {
  return static_cast<unsigned char>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0));
}

void write_png_buffer(const std::vector<unsigned char>& buf, int width, int height, bool color,
                      const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr) == 0) {
    throw std::runtime_error("PNG write failed for " + path.string() + ": " + image.message);
  }
}

}  // namespace

void write_png(const GrayImage& img, const std::filesystem::path& path) {
  std::vector<unsigned char> buf(img.size());
  std::transform(img.data().begin(), img.data().end(), buf.begin(), to_byte);
  write_png_buffer(buf, img.width(), img.height(), false, path);
}

void write_png(const ColorImage& img, const std::filesystem::path& path) {
  const std::size_t n = static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.height());
  std::vector<unsigned char> buf(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      buf[3 * i + static_cast<std::size_t>(c)] = to_byte(img.plane(c).data()[i]);
    }
  }
  write_png_buffer(buf, img.width(), img.height(), true, path);
}

}  // namespace io
}  // namespace mrfgs
