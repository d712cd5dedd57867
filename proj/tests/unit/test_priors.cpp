#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mrfgs/filters.hpp"
#include "mrfgs/priors.hpp"

using namespace mrfgs;
using namespace mrfgs::priors;

namespace {

GrayImage random_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  GrayImage g(w, h);
  for (float& v : g.data()) v = u(rng);
  const std::vector<float> k = {0.25f, 0.5f, 0.25f};
  return imaging::convolve_separable(g, k, k);
}

/// right(x, y) = left(x + shift, y), so left(x) matches right(x - shift).
GrayImage shifted(const GrayImage& left, int shift) {
  GrayImage r(left.width(), left.height());
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < left.width(); ++x) r(x, y) = left.clamped(x + shift, y);
  }
  return r;
}

segmentation::SegmentMap one_segment(int w, int h) {
  return segmentation::SegmentMap(w, h, std::vector<int>(static_cast<std::size_t>(w * h), 0));
}

ZonalStats forced_zone(double mu, double sigma) {
  ZonalStats s;
  s.zones = {Zone{mu, sigma, 10, false}};
  s.global = s.zones[0];
  return s;
}

}  // namespace

TEST(Corners, ConstantImageHasNone) { EXPECT_TRUE(detect_corners(GrayImage(20, 20, 0.5f)).empty()); }

TEST(Corners, CheckerboardCornerLocated) {
  GrayImage g(21, 21);
  for (int y = 0; y < 21; ++y) {
    for (int x = 0; x < 21; ++x) g(x, y) = ((x < 10) != (y < 10)) ? 1.0f : 0.0f;
  }
  const auto c = detect_corners(g);
  ASSERT_FALSE(c.empty());
  EXPECT_LE(std::abs(c[0].x - 9.5), 1.0);
  EXPECT_LE(std::abs(c[0].y - 9.5), 1.0);
}

TEST(Corners, SortedDescendingAndSuppressed) {
  const auto c = detect_corners(random_image(60, 40, 1), 500, 0.01);
  ASSERT_GT(c.size(), 2u);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_GE(c[k - 1].score, c[k].score);
  for (std::size_t a = 0; a < c.size(); ++a) {
    for (std::size_t b = a + 1; b < c.size(); ++b) {
      EXPECT_GT(std::hypot(c[a].x - c[b].x, c[a].y - c[b].y), kCornerSuppressionRadius);
    }
  }
  for (const auto& p : c) EXPECT_GE(p.score, 0.01 * c[0].score);
}

TEST(Matching, ZeroDisparityPair) {
  const auto g = random_image(60, 40, 2);
  const auto m = match_sparse(g, g, detect_corners(g), {});
  ASSERT_FALSE(m.empty());
  for (const auto& s : m) EXPECT_EQ(s.disparity, 0.0);
}

TEST(Matching, RecoversShift) {
  const auto left = random_image(80, 50, 3);
  const auto right = shifted(left, 5);
  MatchOptions o;
  o.search_max = 20;
  const auto corners = detect_corners(left);
  const auto m = match_sparse(left, right, corners, o);
  int interior = 0, correct = 0;
  for (const auto& s : m) {
    if (s.x < 10 || s.x > 70) continue;
    ++interior;
    correct += s.disparity == 5.0;
  }
  ASSERT_GT(interior, 10);
  EXPECT_GE(correct, static_cast<int>(0.95 * interior));
}

TEST(Matching, TexturelessPointRejected) {
  const GrayImage flat(30, 30, 0.4f);
  const std::vector<Corner> pts = {{15, 15, 1.0}};
  EXPECT_TRUE(match_sparse(flat, flat, pts, {}).empty());
}

TEST(Matching, ConfidenceIsSecondOverBest) {
  const auto left = random_image(60, 40, 4);
  const auto right = shifted(left, 3);
  MatchOptions o;
  o.search_max = 10;
  for (const auto& s : match_sparse(left, right, detect_corners(left), o)) {
    const double best = patch_sad(left, right, s.x, s.y, static_cast<int>(s.disparity), o.window);
    EXPECT_GE(s.confidence, 1.0 / o.ratio - 1e-9);
    EXPECT_GE(s.confidence * std::max(best, 1e-9), best);
  }
}

TEST(PatchSad, HandEnumeratedRow) {
  // One-row images, 3x3 window: every row tap clamps to y = 0.
  // x=1, d=1: left columns 0..2 = (0,1,0); right columns -1..1 clamp to
  // (0,0,1) = (1,1,0); |diff| = (1,0,0).
  const GrayImage left(4, 1, std::vector<float>{0, 1, 0, 0});
  const GrayImage right(4, 1, std::vector<float>{1, 0, 0, 0});
  EXPECT_NEAR(patch_sad(left, right, 1, 0, 1, 3), 1.0 / 3.0, 1e-7);
  EXPECT_NEAR(patch_sad(left, right, 1, 0, 0, 3), 2.0 / 3.0, 1e-7);
}

TEST(Zonal, SampleStatistics) {
  const segmentation::SegmentMap seg(3, 1, std::vector<int>{0, 0, 0});
  const SparseMatches m = {{0, 0, 10, 2}, {1, 0, 12, 2}, {2, 0, 14, 2}};
  const auto z = zonal_stats(seg, m);
  EXPECT_DOUBLE_EQ(z.zones[0].mu, 12.0);
  EXPECT_DOUBLE_EQ(z.zones[0].sigma, 2.0);
  EXPECT_FALSE(z.zones[0].fallback);
}

TEST(Zonal, FallbacksUseGlobal) {
  const segmentation::SegmentMap seg(6, 1, std::vector<int>{0, 0, 0, 1, 2, 2});
  const SparseMatches m = {{0, 0, 10, 2}, {1, 0, 20, 2}, {2, 0, 30, 2}, {3, 0, 40, 2}};
  const auto z = zonal_stats(seg, m);
  const double mu = 25.0;
  const double sd = std::sqrt((225.0 + 25.0 + 25.0 + 225.0) / 3.0);
  EXPECT_DOUBLE_EQ(z.global.mu, mu);
  EXPECT_NEAR(z.global.sigma, sd, 1e-12);
  for (int s : {1, 2}) {
    EXPECT_TRUE(z.zones[static_cast<std::size_t>(s)].fallback);
    EXPECT_DOUBLE_EQ(z.zones[static_cast<std::size_t>(s)].mu, mu);
  }
  EXPECT_EQ(z.zones[1].count, 1);
}

TEST(Zonal, SigmaClampedAtMinimum) {
  const segmentation::SegmentMap seg(3, 1, std::vector<int>{0, 0, 0});
  const auto z = zonal_stats(seg, {{0, 0, 7, 2}, {1, 0, 7, 2}, {2, 0, 7, 2}});
  EXPECT_DOUBLE_EQ(z.zones[0].sigma, kSigmaMin);
}

TEST(CostVolume, SelfMatchIsZeroAtDisparityZero) {
  const auto g = random_image(30, 20, 5);
  const auto cv = build_cost_volume(g, g, one_segment(30, 20), forced_zone(1.0, 1.0), 10);
  EXPECT_EQ(cv.d_min(), 0);
  EXPECT_EQ(cv.d_max(), 2);
  for (int y = 3; y < 17; ++y) {
    for (int x = 3; x < 27; ++x) EXPECT_EQ(cv.cost(static_cast<std::size_t>(y * 30 + x), 0), 0.0f);
  }
}

TEST(CostVolume, MatchesPatchSadAndIsBounded) {
  const auto l = random_image(25, 15, 6);
  const auto r = random_image(25, 15, 7);
  const auto cv = build_cost_volume(l, r, one_segment(25, 15), forced_zone(4.0, 2.0), 10);
  for (int y = 0; y < 15; ++y) {
    for (int x = 0; x < 25; ++x) {
      const auto i = static_cast<std::size_t>(y * 25 + x);
      for (int d = 2; d <= 6; ++d) {
        const float c = cv.cost(i, d);
        EXPECT_NEAR(c, patch_sad(l, r, x, y, d, 7), 1e-5);
        EXPECT_GE(c, 0.0f);
        EXPECT_LE(c, 1.0f);
      }
    }
  }
}

TEST(CostVolume, ArgminInsideRangeByConstruction) {
  const auto l = random_image(25, 15, 8);
  const auto cv = build_cost_volume(l, shifted(l, 3), one_segment(25, 15), forced_zone(3.0, 2.0), 10);
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) EXPECT_EQ(cv.costs(i).size(), 5u);
}

TEST(CostVolume, NoMatchesThrows) {
  ZonalStats s;
  s.zones = {Zone{}};
  const auto g = random_image(10, 10, 9);
  EXPECT_THROW(build_cost_volume(g, g, one_segment(10, 10), s, 5), std::runtime_error);
}

TEST(CostPyramid, ConstantVolumeStaysConstant) {
  CostVolume cv(0, 8, 6, std::vector<LabelRange>(48, LabelRange{2, 9}));
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
    for (float& c : cv.costs(i)) c = 0.3f;
  }
  const auto coarse = downsample_cost_volume(cv);
  EXPECT_EQ(coarse.width(), 4);
  EXPECT_EQ(coarse.height(), 3);
  EXPECT_EQ(coarse.d_min(), 1);
  EXPECT_EQ(coarse.d_max(), 5);
  for (float c : coarse.all_costs()) EXPECT_FLOAT_EQ(c, 0.3f);
}

TEST(CostPyramid, RangeRule) {
  CostVolume cv(0, 2, 2, std::vector<LabelRange>(4, LabelRange{4, 6}));
  const auto coarse = downsample_cost_volume(cv);
  EXPECT_EQ(coarse.range(0).lo, 2);
  EXPECT_EQ(coarse.range(0).hi, 3);
}

TEST(CostPyramid, SingleSliceMapsToHalfLabel) {
  CostVolume cv(0, 4, 4, std::vector<LabelRange>(16, LabelRange{0, 7}));
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) cv.costs(i)[4] = 1.0f;
  const auto coarse = downsample_cost_volume(cv);
  for (std::size_t i = 0; i < coarse.pixel_count(); ++i) {
    for (int c = 0; c <= 3; ++c) {
      EXPECT_FLOAT_EQ(coarse.cost(i, c), c == 2 ? 0.5f : 0.0f);
    }
  }
}

TEST(Priors, UniformCostsGiveUniformPrior) {
  for (auto mode : {PriorMode::Literal, PriorMode::Similarity}) {
    const std::vector<float> c = {5, 5, 5, 5};
    for (double q : normalize_costs(c, mode, 2.0)) EXPECT_DOUBLE_EQ(q, 0.25);
  }
}

TEST(Priors, LiteralFormula) {
  const std::vector<float> c = {1, 3};
  const auto q = normalize_costs(c, PriorMode::Literal, 1.0);
  EXPECT_DOUBLE_EQ(q[0], 0.25);
  EXPECT_DOUBLE_EQ(q[1], 0.75);
}

TEST(Priors, SimilarityFormula) {
  const std::vector<float> c = {0.0f, static_cast<float>(std::log(4.0))};
  const auto q = normalize_costs(c, PriorMode::Similarity, 1.0);
  EXPECT_NEAR(q[0], 0.8, 1e-7);
  EXPECT_NEAR(q[1], 0.2, 1e-7);
}

TEST(Priors, AllZeroLiteralRowIsUniform) {
  const std::vector<float> c = {0, 0, 0};
  for (double q : normalize_costs(c, PriorMode::Literal, 1.0)) EXPECT_DOUBLE_EQ(q, 1.0 / 3.0);
}

TEST(Priors, TablesNormalizedAndFloored) {
  std::mt19937 rng(10);
  std::uniform_real_distribution<float> u(0, 1);
  std::vector<LabelRange> ranges;
  for (int i = 0; i < 30; ++i) ranges.push_back({i % 5, 5 + i % 4});
  CostVolume cv(0, 6, 5, ranges);
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
    for (float& c : cv.costs(i)) c = u(rng);
  }
  for (auto mode : {PriorMode::Literal, PriorMode::Similarity}) {
    const auto pf = cost_to_prior(cv, mode);
    for (std::size_t i = 0; i < pf.pixel_count(); ++i) {
      const auto t = pf.table(i);
      EXPECT_NEAR(std::accumulate(t.begin(), t.end(), 0.0), 1.0, 1e-9);
      for (double v : t) EXPECT_GE(v, kPriorFloor);
    }
  }
}

TEST(CostVolumeIo, RoundTrip) {
  std::vector<LabelRange> ranges;
  for (int i = 0; i < 12; ++i) ranges.push_back({i % 3, 3 + i % 2});
  CostVolume cv(1, 4, 3, ranges);
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> u(0, 1);
  for (std::size_t i = 0; i < cv.pixel_count(); ++i) {
    for (float& c : cv.costs(i)) c = u(rng);
  }
  const auto p = std::filesystem::path(MRFGS_TEST_TMP) / "cv.bin";
  std::filesystem::create_directories(p.parent_path());
  write_cost_volume(cv, p);
  EXPECT_EQ(read_cost_volume(p), cv);
}
