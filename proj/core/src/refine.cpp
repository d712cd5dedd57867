#include "mrfgs/refine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mrfgs/filters.hpp"

namespace mrfgs::refine {

float weighted_median(std::span<const float> values, std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw std::invalid_argument("weighted_median: values and weights differ in length");
  }
  std::vector<std::size_t> order;
  order.reserve(values.size());
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] > 0.0) {
      order.push_back(k);
      total += weights[k];
    }
  }
  if (order.empty()) throw std::invalid_argument("weighted_median: no positive weight");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double half = 0.5 * total;
  double acc = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    acc += weights[order[j]];
    // Equal values are a single support point of the distribution.
    const bool last_of_value = j + 1 == order.size() || values[order[j + 1]] != values[order[j]];
    if (last_of_value && acc >= half) return values[order[j]];
  }
  return values[order.back()];
}

DisparityMap weighted_median_filter(const DisparityMap& map, const GrayImage& guide, const MedianOptions& options) {
  if (guide.width() != map.width() || guide.height() != map.height()) {
    throw std::invalid_argument("weighted_median_filter: guide and map dimensions differ");
  }
  if (options.side < 1 || options.side % 2 == 0) {
    throw std::invalid_argument("weighted_median_filter: window side must be odd and positive");
  }
  const int r = options.side / 2;
  DisparityMap out = map;
  std::vector<float> values;
  std::vector<double> weights;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const auto kw = imaging::bilateral_weights(guide, x, y, options.side, options.sigma_spatial,
                                                 options.sigma_range);
      values.clear();
      weights.clear();
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int u = x + dx;
          const int v = y + dy;
          if (!map.contains(u, v) || !map.valid(u, v)) continue;
          const double w = kw.at(dx, dy);
          if (w <= 0.0) continue;
          values.push_back(map.value(u, v));
          weights.push_back(w);
        }
      }
      if (!values.empty()) out.set(x, y, weighted_median(values, weights));
    }
  }
  return out;
}

}  // namespace mrfgs::refine
