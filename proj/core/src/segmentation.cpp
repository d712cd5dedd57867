#include "mrfgs/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mrfgs/filters.hpp"

namespace mrfgs::segmentation {

double gabor_sigma(double wavelength) {
  // One-octave bandwidth: (2^b + 1) / (2^b - 1) = 3 for b = 1.
  return wavelength / std::numbers::pi * std::sqrt(std::numbers::ln2 / 2.0) * 3.0;
}

namespace {

GaborFilter make_filter(double orientation_deg, double wavelength) {
  GaborFilter f;
  f.orientation_deg = orientation_deg;
  f.wavelength = wavelength;
  f.sigma = gabor_sigma(wavelength);
  f.radius = static_cast<int>(std::ceil(3.0 * f.sigma));
  const double theta = orientation_deg * std::numbers::pi / 180.0;
  const double omega = 2.0 * std::numbers::pi / wavelength;
  const double wx = omega * std::cos(theta);
  const double wy = omega * std::sin(theta);
  const std::size_t n = static_cast<std::size_t>(2 * f.radius + 1);
  f.x_re.resize(n);
  f.x_im.resize(n);
  f.y_re.resize(n);
  f.y_im.resize(n);
  double norm = 0.0;
  for (int t = -f.radius; t <= f.radius; ++t) {
    norm += std::exp(-0.5 * t * t / (f.sigma * f.sigma));
  }
  for (int t = -f.radius; t <= f.radius; ++t) {
    const auto k = static_cast<std::size_t>(t + f.radius);
    const double g = std::exp(-0.5 * t * t / (f.sigma * f.sigma)) / norm;
    f.x_re[k] = static_cast<float>(g * std::cos(wx * t));
    f.x_im[k] = static_cast<float>(g * std::sin(wx * t));
    f.y_re[k] = static_cast<float>(g * std::cos(wy * t));
    f.y_im[k] = static_cast<float>(g * std::sin(wy * t));
  }
  return f;
}

std::vector<float> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int t = -r; t <= r; ++t) sum += std::exp(-0.5 * t * t / (sigma * sigma));
  for (int t = -r; t <= r; ++t) {
    k[static_cast<std::size_t>(t + r)] = static_cast<float>(std::exp(-0.5 * t * t / (sigma * sigma)) / sum);
  }
  return k;
}

/// Deterministic uniform draw in [0,1) independent of the standard library's
/// distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double squared_distance(std::span<const float> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    s += d * d;
  }
  return s;
}

struct Replicate {
  std::vector<int> labels;
  double inertia = 0.0;
};

Replicate run_replicate(const FeatureSet& fs, int k, int max_iters, std::mt19937_64& rng) {
  const std::size_t n = fs.count();
  const auto dims = static_cast<std::size_t>(fs.dims);
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> centers(kk * dims);
  auto center = [&](std::size_t c) { return std::span<double>(centers.data() + c * dims, dims); };
  auto set_center = [&](std::size_t c, std::size_t point) {
    const auto row = fs.row(point);
    std::copy(row.begin(), row.end(), center(c).begin());
  };

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  set_center(0, static_cast<std::size_t>(rng() % n));
  for (std::size_t c = 1; c < kk; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(fs.row(i), center(c - 1)));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng() % n);
    }
    set_center(c, pick);
  }

  Replicate rep;
  rep.labels.assign(n, -1);
  std::vector<double> dist(n, 0.0);
  std::vector<double> sums(kk * dims);
  std::vector<std::size_t> counts(kk);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        const double d = squared_distance(fs.row(i), center(c));
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      dist[i] = best_d;
      if (rep.labels[i] != best) {
        rep.labels[i] = best;
        changed = true;
      }
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(rep.labels[i]);
      ++counts[c];
      const auto row = fs.row(i);
      for (std::size_t d = 0; d < dims; ++d) sums[c * dims + d] += row[d];
    }
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster from the point worst served by its centre.
        const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        set_center(c, far);
        dist[far] = 0.0;
        rep.labels[far] = static_cast<int>(c);
        changed = true;
        continue;
      }
      for (std::size_t d = 0; d < dims; ++d) {
        centers[c * dims + d] = sums[c * dims + d] / static_cast<double>(counts[c]);
      }
    }
    if (!changed) break;
  }

  rep.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.inertia += squared_distance(fs.row(i), center(static_cast<std::size_t>(rep.labels[i])));
  }
  return rep;
}

}  // namespace

GaborBank build_gabor_bank(int width, int height) {
  if (width < 4 || height < 4) {
    throw std::invalid_argument("build_gabor_bank: image must be at least 4x4");
  }
  GaborBank bank;
  bank.orientations_deg = {0.0, 30.0, 60.0, 90.0, 120.0, 150.0};
  const double hyp = std::hypot(static_cast<double>(width), static_cast<double>(height));
  for (double lambda = kMinGaborWavelength; lambda <= hyp * (1.0 + 1e-9); lambda *= 2.0) {
    bank.wavelengths.push_back(lambda);
  }
  for (double lambda : bank.wavelengths) {
    for (double theta : bank.orientations_deg) {
      bank.filters.push_back(make_filter(theta, lambda));
    }
  }
  return bank;
}

GrayImage gabor_magnitude(const GrayImage& img, const GaborFilter& filter) {
  // Zero-mean input so the filter's small DC leakage cannot respond to flat regions.
  double mean = 0.0;
  for (float v : img.data()) mean += v;
  mean /= static_cast<double>(std::max<std::size_t>(1, img.size()));
  GrayImage centred(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    centred.data()[i] = static_cast<float>(img.data()[i] - mean);
  }

  const float one[1] = {1.0f};
  const GrayImage row_re = imaging::convolve_separable(centred, filter.x_re, one);
  const GrayImage row_im = imaging::convolve_separable(centred, filter.x_im, one);
  const GrayImage rr = imaging::convolve_separable(row_re, one, filter.y_re);
  const GrayImage ii = imaging::convolve_separable(row_im, one, filter.y_im);
  const GrayImage ri = imaging::convolve_separable(row_re, one, filter.y_im);
  const GrayImage ir = imaging::convolve_separable(row_im, one, filter.y_re);

  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double re = static_cast<double>(rr.data()[i]) - ii.data()[i];
    const double im = static_cast<double>(ri.data()[i]) + ir.data()[i];
    out.data()[i] = static_cast<float>(std::hypot(re, im));
  }
  return out;
}

FeatureSet gabor_features(const GrayImage& img, const GaborBank& bank) {
  FeatureSet fs;
  fs.width = img.width();
  fs.height = img.height();
  const int channels = static_cast<int>(bank.filters.size());
  fs.dims = channels + 2;
  const std::size_t n = fs.count();
  const auto dims = static_cast<std::size_t>(fs.dims);
  fs.values.assign(n * dims, 0.0f);

  for (int c = 0; c < channels; ++c) {
    const auto& filter = bank.filters[static_cast<std::size_t>(c)];
    const auto g = gaussian_kernel(filter.wavelength / 2.0);
    const GrayImage smooth = imaging::convolve_separable(gabor_magnitude(img, filter), g, g);
    double mean = 0.0;
    for (float v : smooth.data()) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (float v : smooth.data()) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      fs.values[i * dims + static_cast<std::size_t>(c)] =
          sd > 1e-12 ? static_cast<float>((smooth.data()[i] - mean) / sd) : 0.0f;
    }
  }
  const double scale = 1.0 / std::max(fs.width, fs.height);
  for (int y = 0; y < fs.height; ++y) {
    for (int x = 0; x < fs.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * fs.width + x);
      fs.values[i * dims + static_cast<std::size_t>(channels)] = static_cast<float>(x * scale);
      fs.values[i * dims + static_cast<std::size_t>(channels) + 1] = static_cast<float>(y * scale);
    }
  }
  return fs;
}

SegmentMap::SegmentMap(int width, int height, std::vector<int> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("SegmentMap: label count does not match dimensions");
  }
  labels_ = relabel_dense(labels_);
  count_ = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end()) + 1;
}

std::vector<int> relabel_dense(std::span<const int> labels) {
  std::map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

KMeansResult kmeans_segment(const FeatureSet& features, const KMeansOptions& options) {
  if (options.clusters < 1 || options.replicates < 1 || options.max_iters < 1) {
    throw std::invalid_argument("kmeans_segment: clusters, replicates and max_iters must be positive");
  }
  if (features.count() < static_cast<std::size_t>(options.clusters)) {
    throw std::invalid_argument("kmeans_segment: fewer pixels than clusters");
  }
  KMeansResult result;
  std::vector<int> best_labels;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.replicates; ++r) {
    std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r + 1));
    auto rep = run_replicate(features, options.clusters, options.max_iters, rng);
    result.replicate_inertia.push_back(rep.inertia);
    if (rep.inertia < best) {
      best = rep.inertia;
      best_labels = std::move(rep.labels);
      result.best_replicate = r;
    }
  }
  result.segments = SegmentMap(features.width, features.height, std::move(best_labels));
  return result;
}

SegmentMap merge_small_segments(const SegmentMap& seg, int min_size) {
  std::vector<int> labels(seg.labels().begin(), seg.labels().end());
  const int w = seg.width();
  const int h = seg.height();
  int count = seg.segment_count();
  while (count > 1) {
    std::vector<int> sizes(static_cast<std::size_t>(count), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    int victim = -1;
    for (int l = 0; l < count; ++l) {
      if (sizes[static_cast<std::size_t>(l)] > 0 && sizes[static_cast<std::size_t>(l)] < min_size &&
          (victim < 0 || sizes[static_cast<std::size_t>(l)] < sizes[static_cast<std::size_t>(victim)])) {
        victim = l;
      }
    }
    if (victim < 0) break;

    std::vector<long> contact(static_cast<std::size_t>(count), 0);
    auto touch = [&](std::size_t a, std::size_t b) {
      if (labels[a] == victim && labels[b] != victim) ++contact[static_cast<std::size_t>(labels[b])];
      if (labels[b] == victim && labels[a] != victim) ++contact[static_cast<std::size_t>(labels[a])];
    };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto i = static_cast<std::size_t>(y * w + x);
        if (x + 1 < w) touch(i, i + 1);
        if (y + 1 < h) touch(i, i + static_cast<std::size_t>(w));
      }
    }
    const auto target = static_cast<int>(std::max_element(contact.begin(), contact.end()) - contact.begin());
    if (contact[static_cast<std::size_t>(target)] == 0) break;
    for (int& l : labels) {
      if (l == victim) l = target;
    }
    labels = relabel_dense(labels);
    count = *std::max_element(labels.begin(), labels.end()) + 1;
  }
  return SegmentMap(w, h, std::move(labels));
}

SegmentMap segment_texture(const GrayImage& img, const SegmentationOptions& options) {
  const auto bank = build_gabor_bank(img.width(), img.height());
  const auto features = gabor_features(img, bank);
  auto km = kmeans_segment(features, options.kmeans);
  return merge_small_segments(km.segments, options.min_segment_size);
}

GrayImage segments_to_image(const SegmentMap& seg) {
  GrayImage out(seg.width(), seg.height());
  const float denom = seg.segment_count() > 1 ? static_cast<float>(seg.segment_count() - 1) : 1.0f;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = static_cast<float>(seg.label(i)) / denom;
  }
  return out;
}

}  // namespace mrfgs::segmentation
