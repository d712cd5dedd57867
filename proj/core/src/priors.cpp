#include "mrfgs/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mrfgs/filters.hpp"

namespace mrfgs::priors {

std::vector<Corner> detect_corners(const GrayImage& img, int max_points, double quality) {
  const int w = img.width();
  const int h = img.height();
  std::vector<Corner> out;
  if (w < 3 || h < 3 || max_points <= 0) return out;

  GrayImage ixx(w, h), ixy(w, h), iyy(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto p = [&](int dx, int dy) { return static_cast<double>(img.clamped(x + dx, y + dy)); };
      const double gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1) - p(-1, -1) - 2 * p(-1, 0) - p(-1, 1)) / 8.0;
      const double gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1) - p(-1, -1) - 2 * p(0, -1) - p(1, -1)) / 8.0;
      ixx(x, y) = static_cast<float>(gx * gx);
      ixy(x, y) = static_cast<float>(gx * gy);
      iyy(x, y) = static_cast<float>(gy * gy);
    }
  }
  const GrayImage a = imaging::box_mean(ixx, 3);
  const GrayImage b = imaging::box_mean(ixy, 3);
  const GrayImage c = imaging::box_mean(iyy, 3);

  std::vector<double> score(img.size());
  double best = 0.0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    const double aa = a.data()[i];
    const double bb = b.data()[i];
    const double cc = c.data()[i];
    const double half_diff = 0.5 * (aa - cc);
    const double s = 0.5 * (aa + cc) - std::sqrt(half_diff * half_diff + bb * bb);
    score[i] = std::max(0.0, s);
    best = std::max(best, score[i]);
  }
  if (best <= 1e-12) return out;

  const double threshold = quality * best;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (score[i] > 0.0 && score[i] >= threshold) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t l, std::size_t r) { return score[l] > score[r]; });

  constexpr int r = kCornerSuppressionRadius;
  std::vector<std::uint8_t> taken(img.size(), 0);
  for (std::size_t i : candidates) {
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    bool suppressed = false;
    for (int dy = -r; dy <= r && !suppressed; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy > r * r || !img.contains(x + dx, y + dy)) continue;
        if (taken[static_cast<std::size_t>((y + dy) * w + (x + dx))]) {
          suppressed = true;
          break;
        }
      }
    }
    if (suppressed) continue;
    taken[i] = 1;
    out.push_back({x, y, score[i]});
    if (static_cast<int>(out.size()) >= max_points) break;
  }
  return out;
}

double patch_sad(const GrayImage& left, const GrayImage& right, int x, int y, int d, int window) {
  const int r = window / 2;
  double acc = 0.0;
  for (int v = -r; v <= r; ++v) {
    const int py = std::clamp(y + v, 0, left.height() - 1);
    for (int u = -r; u <= r; ++u) {
      const int px = std::clamp(x + u, 0, left.width() - 1);
      const int qx = std::clamp(px - d, 0, right.width() - 1);
      acc += std::abs(static_cast<double>(left(px, py)) - static_cast<double>(right(qx, py)));
    }
  }
  return acc / static_cast<double>(window * window);
}

SparseMatches match_sparse(const GrayImage& left, const GrayImage& right, std::span<const Corner> points,
                           const MatchOptions& options) {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw std::invalid_argument("match_sparse: image dimensions differ");
  }
  SparseMatches out;
  std::vector<double> costs;
  for (const auto& p : points) {
    const int dmax = std::min(options.search_max, p.x);
    if (dmax < 2) continue;
    costs.resize(static_cast<std::size_t>(dmax + 1));
    for (int d = 0; d <= dmax; ++d) {
      costs[static_cast<std::size_t>(d)] = patch_sad(left, right, p.x, p.y, d, options.window);
    }
    const auto best_it = std::min_element(costs.begin(), costs.end());
    const int best_d = static_cast<int>(best_it - costs.begin());
    double second = std::numeric_limits<double>::infinity();
    for (int d = 0; d <= dmax; ++d) {
      if (std::abs(d - best_d) > 1) second = std::min(second, costs[static_cast<std::size_t>(d)]);
    }
    if (!std::isfinite(second) || second <= 0.0) continue;
    if (*best_it > options.ratio * second) continue;
    out.push_back({p.x, p.y, static_cast<double>(best_d), second / std::max(*best_it, 1e-9)});
  }
  return out;
}

namespace {

Zone summarize(const std::vector<double>& ds, double sigma_min) {
  Zone z;
  z.count = static_cast<int>(ds.size());
  if (ds.empty()) {
    z.sigma = sigma_min;
    return z;
  }
  z.mu = std::accumulate(ds.begin(), ds.end(), 0.0) / static_cast<double>(ds.size());
  double ss = 0.0;
  for (double d : ds) ss += (d - z.mu) * (d - z.mu);
  const double sd = ds.size() > 1 ? std::sqrt(ss / static_cast<double>(ds.size() - 1)) : 0.0;
  z.sigma = std::max(sd, sigma_min);
  return z;
}

}  // namespace

ZonalStats zonal_stats(const segmentation::SegmentMap& seg, const SparseMatches& matches, double sigma_min,
                       int min_matches) {
  std::vector<std::vector<double>> per(static_cast<std::size_t>(seg.segment_count()));
  std::vector<double> all;
  for (const auto& m : matches) {
    if (m.x < 0 || m.y < 0 || m.x >= seg.width() || m.y >= seg.height()) {
      throw std::out_of_range("zonal_stats: match outside segment map");
    }
    per[static_cast<std::size_t>(seg.label(m.x, m.y))].push_back(m.disparity);
    all.push_back(m.disparity);
  }
  ZonalStats stats;
  stats.global = summarize(all, sigma_min);
  stats.zones.reserve(per.size());
  for (const auto& ds : per) {
    Zone z = summarize(ds, sigma_min);
    if (z.count < min_matches) {
      z.mu = stats.global.mu;
      z.sigma = stats.global.sigma;
      z.fallback = true;
    }
    stats.zones.push_back(z);
  }
  return stats;
}

CostVolume::CostVolume(int level, int width, int height, std::vector<LabelRange> ranges)
    : level_(level), width_(width), height_(height), ranges_(std::move(ranges)) {
  if (ranges_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) || ranges_.empty()) {
    throw std::invalid_argument("CostVolume: range count does not match dimensions");
  }
  offsets_.resize(ranges_.size());
  std::size_t total = 0;
  d_min_ = std::numeric_limits<int>::max();
  d_max_ = std::numeric_limits<int>::min();
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (ranges_[i].lo > ranges_[i].hi) {
      throw std::invalid_argument("CostVolume: empty label range");
    }
    offsets_[i] = total;
    total += static_cast<std::size_t>(ranges_[i].size());
    d_min_ = std::min(d_min_, ranges_[i].lo);
    d_max_ = std::max(d_max_, ranges_[i].hi);
  }
  costs_.assign(total, 0.0f);
}

void CostVolume::set_global_range(int d_min, int d_max) {
  for (const auto& r : ranges_) {
    if (r.lo < d_min || r.hi > d_max) {
      throw std::invalid_argument("CostVolume: global range must enclose all pixel ranges");
    }
  }
  d_min_ = d_min;
  d_max_ = d_max;
}

CostVolume build_cost_volume(const GrayImage& left, const GrayImage& right, const segmentation::SegmentMap& seg,
                             const ZonalStats& stats, int max_disparity, int window) {
  if (left.width() != right.width() || left.height() != right.height() || seg.width() != left.width() ||
      seg.height() != left.height()) {
    throw std::invalid_argument("build_cost_volume: dimension mismatch");
  }
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("build_cost_volume: window must be odd");
  }
  if (stats.global.count == 0) {
    throw std::runtime_error("build_cost_volume: empty disparity range (no sparse matches)");
  }
  if (stats.zones.size() < static_cast<std::size_t>(seg.segment_count())) {
    throw std::invalid_argument("build_cost_volume: zonal stats do not cover every segment");
  }
  const int w = left.width();
  const int h = left.height();
  std::vector<LabelRange> ranges(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& z = stats.zones[static_cast<std::size_t>(seg.label(i))];
    const int lo = static_cast<int>(std::lround(z.mu - z.sigma));
    const int hi = static_cast<int>(std::lround(z.mu + z.sigma));
    ranges[i] = {std::clamp(lo, 0, max_disparity), std::clamp(hi, 0, max_disparity)};
  }
  CostVolume cv(0, w, h, std::move(ranges));

  GrayImage diff(w, h);
  for (int d = cv.d_min(); d <= cv.d_max(); ++d) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        diff(x, y) = std::abs(left(x, y) - right(std::clamp(x - d, 0, w - 1), y));
      }
    }
    const GrayImage slice = imaging::box_mean(diff, window);
    for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
      const auto& r = cv.range(i);
      if (r.contains(d)) cv.costs(i)[static_cast<std::size_t>(d - r.lo)] = std::max(0.0f, slice.data()[i]);
    }
  }
  return cv;
}

CostVolume downsample_cost_volume(const CostVolume& cv) {
  if (cv.width() < 2 || cv.height() < 2) {
    throw std::invalid_argument("downsample_cost_volume: level too small");
  }
  const int fw = cv.width();
  const int fh = cv.height();
  const int cw = (fw + 1) / 2;
  const int ch = (fh + 1) / 2;
  const int cd_min = cv.d_min() / 2;            // floor for non-negative labels
  const int cd_max = (cv.d_max() + 1) / 2;      // ceil

  std::vector<LabelRange> ranges(static_cast<std::size_t>(cw) * static_cast<std::size_t>(ch));
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      int lo = std::numeric_limits<int>::max();
      int hi = std::numeric_limits<int>::min();
      for (int v = 0; v < 2; ++v) {
        for (int u = 0; u < 2; ++u) {
          const int fx = 2 * x + u;
          const int fy = 2 * y + v;
          if (fx >= fw || fy >= fh) continue;
          const auto& r = cv.range(static_cast<std::size_t>(fy * fw + fx));
          lo = std::min(lo, r.lo);
          hi = std::max(hi, r.hi);
        }
      }
      ranges[static_cast<std::size_t>(y * cw + x)] = {lo / 2, (hi + 1) / 2};
    }
  }
  CostVolume out(cv.level() + 1, cw, ch, std::move(ranges));
  out.set_global_range(cd_min, cd_max);

  std::vector<float> fill(cv.pixel_count());
  for (std::size_t i = 0; i < fill.size(); ++i) {
    const auto c = cv.costs(i);
    fill[i] = *std::max_element(c.begin(), c.end());
  }
  const auto slice_at = [&](int d) {
    GrayImage s(fw, fh);
    for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
      s.data()[i] = cv.range(i).contains(d) ? cv.cost(i, d) : fill[i];
    }
    return imaging::lowpass_downsample2(s);
  };

  for (int c = cd_min; c <= cd_max; ++c) {
    std::vector<GrayImage> parts;
    for (int d : {2 * c, 2 * c + 1}) {
      if (d >= cv.d_min() && d <= cv.d_max()) parts.push_back(slice_at(d));
    }
    if (parts.empty()) continue;
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
      if (!out.range(i).contains(c)) continue;
      float v = parts[0].data()[i];
      if (parts.size() == 2) v = 0.5f * (v + parts[1].data()[i]);
      out.costs(i)[static_cast<std::size_t>(c - out.range(i).lo)] = v;
    }
  }
  // ceil(d_max / 2) has no fine pair when d_max is odd; it repeats the label below.
  if (2 * cd_max > cv.d_max()) {
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
      const auto& r = out.range(i);
      if (r.contains(cd_max) && r.contains(cd_max - 1)) {
        out.costs(i)[static_cast<std::size_t>(cd_max - r.lo)] = out.cost(i, cd_max - 1);
      }
    }
  }
  return out;
}

std::vector<double> normalize_costs(std::span<const float> costs, PriorMode mode, double beta) {
  std::vector<double> s(costs.size());
  if (s.empty()) return s;
  if (mode == PriorMode::Literal) {
    std::transform(costs.begin(), costs.end(), s.begin(), [](float c) { return static_cast<double>(c); });
  } else {
    const double cmin = *std::min_element(costs.begin(), costs.end());
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = beta > 0.0 ? std::exp(-(static_cast<double>(costs[k]) - cmin) / beta) : 1.0;
    }
  }
  const double sum = std::accumulate(s.begin(), s.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(s.begin(), s.end(), 1.0 / static_cast<double>(s.size()));
    return s;
  }
  for (double& v : s) v /= sum;
  return s;
}

PriorField::PriorField(int level, int width, int height, int d_min, int d_max)
    : level_(level), width_(width), height_(height), d_min_(d_min), d_max_(d_max) {
  if (d_max < d_min) {
    throw std::invalid_argument("PriorField: empty label set");
  }
  tables_.assign(pixel_count() * static_cast<std::size_t>(label_count()), 0.0);
}

double mean_cost(const CostVolume& cv) {
  const auto all = cv.all_costs();
  if (all.empty()) return 0.0;
  double s = 0.0;
  for (float c : all) s += c;
  return s / static_cast<double>(all.size());
}

PriorField cost_to_prior(const CostVolume& cv, PriorMode mode, double beta) {
  if (beta <= 0.0) beta = mean_cost(cv);
  PriorField field(cv.level(), cv.width(), cv.height(), cv.d_min(), cv.d_max());
  const double labels = static_cast<double>(field.label_count());
  const double mass = 1.0 - labels * kPriorFloor;
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
    auto table = field.table(i);
    std::fill(table.begin(), table.end(), kPriorFloor);
    const auto& r = cv.range(i);
    const auto q = normalize_costs(cv.costs(i), mode, beta);
    for (int d = r.lo; d <= r.hi; ++d) {
      table[static_cast<std::size_t>(d - cv.d_min())] += mass * q[static_cast<std::size_t>(d - r.lo)];
    }
  }
  return field;
}

}  // namespace mrfgs::priors
