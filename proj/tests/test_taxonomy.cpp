#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "glens/taxonomy.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace glens;

namespace {
const BBox kTarget{0.4, 0.4, 0.6, 0.6};
}

TEST(Classify, InsideTargetIsCorrect) {
  const auto r = classify({0.5, 0.5}, kTarget, {});
  EXPECT_EQ(r.category, ResponseCategory::Correct);
  EXPECT_EQ(r.distance_to_target, 0.0);
  EXPECT_FALSE(r.nearest_distractor_id);
}

TEST(Classify, NearTargetIsBiased) {
  const auto r = classify({0.62, 0.5}, kTarget, {}, {0.05});
  EXPECT_EQ(r.category, ResponseCategory::Biased);
  EXPECT_NEAR(r.distance_to_target, 0.02, 1e-15);
}

TEST(Classify, InsideDistractorIsMisleading) {
  const std::vector<Distractor> d{{"other", {0.88, 0.88, 0.95, 0.95}}};
  const auto r = classify({0.9, 0.9}, kTarget, d, {0.05});
  EXPECT_EQ(r.category, ResponseCategory::Misleading);
  ASSERT_TRUE(r.nearest_distractor_id);
  EXPECT_EQ(*r.nearest_distractor_id, "other");
  EXPECT_EQ(*r.nearest_distractor_distance, 0.0);
}

TEST(Classify, FarFromEverythingIsConfusion) {
  const std::vector<Distractor> d{{"a", {0.45, 0.65, 0.55, 0.7}}, {"b", {0.3, 0.45, 0.35, 0.55}}};
  const auto r = classify({0.05, 0.95}, kTarget, d, {0.05});
  EXPECT_EQ(r.category, ResponseCategory::Confusion);
  EXPECT_FALSE(r.nearest_distractor_id);
}

TEST(Classify, TargetBoundaryIsBiasedNotCorrect) {
  const auto r = classify({0.4, 0.5}, kTarget, {});
  EXPECT_EQ(r.category, ResponseCategory::Biased);
  EXPECT_EQ(r.distance_to_target, 0.0);
}

TEST(Classify, BiasedTakesPriorityOverMisleading) {
  const std::vector<Distractor> d{{"x", {0.61, 0.45, 0.7, 0.55}}};
  EXPECT_EQ(classify({0.63, 0.5}, kTarget, d).category, ResponseCategory::Biased);
}

TEST(Classify, DistanceEqualToTauIsNotNear) {
  const auto r = classify({0.75, 0.5}, {0.25, 0.25, 0.5, 0.75}, {}, {0.25});
  EXPECT_EQ(r.distance_to_target, 0.25);
  EXPECT_EQ(r.category, ResponseCategory::Confusion);
}

TEST(Classify, ReportsNearestDistractor) {
  const std::vector<Distractor> d{{"far", {0.85, 0.1, 0.9, 0.15}}, {"near", {0.81, 0.2, 0.86, 0.25}}};
  const auto r = classify({0.8, 0.22}, kTarget, d);
  EXPECT_EQ(r.category, ResponseCategory::Misleading);
  EXPECT_EQ(*r.nearest_distractor_id, "near");
  EXPECT_NEAR(*r.nearest_distractor_distance, 0.01, 1e-12);
}

TEST(Classify, TargetListedAsDistractorIsInvalidScene) {
  const std::vector<Distractor> d{{"dup", kTarget}};
  EXPECT_GLENS_ERROR(classify({0.5, 0.5}, kTarget, d), ErrorCode::InvalidScene);
}

TEST(Classify, NegativeTauRejected) {
  EXPECT_GLENS_ERROR(classify({0.5, 0.5}, kTarget, {}, {-0.1}), ErrorCode::InvalidArgument);
}

TEST(Classify, ZeroTauOnlyCorrectOrConfusion) {
  const std::vector<Distractor> d{{"o", {0.8, 0.8, 0.9, 0.9}}};
  EXPECT_EQ(classify({0.4, 0.5}, kTarget, d, {0.0}).category, ResponseCategory::Confusion);
  EXPECT_EQ(classify({0.85, 0.85}, kTarget, d, {0.0}).category, ResponseCategory::Confusion);
}

TEST(Classify, MatchesOracleOnRandomScenes) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto box = [&] {
    double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
    return BBox{std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
  };
  for (int i = 0; i < 2000; ++i) {
    const BBox t = box();
    std::vector<Distractor> ds;
    std::vector<oracle::Box> ob;
    const int n = static_cast<int>(gen() % 5);
    for (int k = 0; k < n; ++k) {
      const BBox b = box();
      ds.push_back({std::to_string(k), b});
      ob.push_back({b.x1, b.y1, b.x2, b.y2});
    }
    const Point p{u(gen), u(gen)};
    const double tau = u(gen) * 0.2;
    const auto got = classify(p, t, ds, {tau});
    const auto want = oracle::classify(p.x, p.y, {t.x1, t.y1, t.x2, t.y2}, ob, tau);
    ASSERT_EQ(static_cast<int>(got.category), static_cast<int>(want.branch));
  }
}

TEST(Classify, LargerTauNeverMovesAwayFromTarget) {
  // Growing tau can only turn Confusion/Misleading into Biased, never back.
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Point p{u(gen), u(gen)};
    const std::vector<Distractor> d{{"o", {0.1, 0.1, 0.2, 0.2}}};
    const auto small = classify(p, kTarget, d, {0.05});
    const auto large = classify(p, kTarget, d, {0.1});
    if (small.category == ResponseCategory::Biased) {
      ASSERT_EQ(large.category, ResponseCategory::Biased);
    }
    if (small.category == ResponseCategory::Correct) {
      ASSERT_EQ(large.category, ResponseCategory::Correct);
    }
    if (large.category == ResponseCategory::Confusion) {
      ASSERT_EQ(small.category, ResponseCategory::Confusion);
    }
  }
}

TEST(Category, StringRoundTrip) {
  for (auto c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
  EXPECT_FALSE(parse_category("Wrong"));
}

TEST(ThresholdCurve, AllContainedIsOne) {
  const std::vector<DistanceObservation> obs{{true, 0.0}, {true, 0.0}};
  const std::vector<double> th{0.05, 0.1};
  for (double v : threshold_curve(obs, th)) EXPECT_EQ(v, 1.0);
}

TEST(ThresholdCurve, HandCountedExample) {
  const std::vector<DistanceObservation> obs{{true, 0.0}, {false, 0.07}, {false, 0.25}};
  const std::vector<double> th{0.05, 0.10, 0.30};
  const auto c = threshold_curve(obs, th);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c[2], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c[3], 1.0);
}

TEST(ThresholdCurve, BoundaryPointCountsOnlyUnderThresholds) {
  const std::vector<DistanceObservation> obs{{false, 0.0}};
  const std::vector<double> th{0.05};
  const auto c = threshold_curve(obs, th);
  EXPECT_EQ(c[0], 0.0);
  EXPECT_EQ(c[1], 1.0);
}

TEST(ThresholdCurve, Errors) {
  const std::vector<double> th{0.05};
  EXPECT_GLENS_ERROR(threshold_curve({}, th), ErrorCode::EmptyInput);
  const std::vector<DistanceObservation> obs{{true, 0.0}};
  const std::vector<double> bad{0.1, 0.05};
  EXPECT_GLENS_ERROR(threshold_curve(obs, bad), ErrorCode::InvalidArgument);
}

TEST(ThresholdCurve, ReferenceCurveShape) {
  // 1000 records shaped like a reference curve: 759 inside, then the
  // increments 86, 29, 35, 30 falling into successive bands, 61 beyond.
  std::vector<DistanceObservation> obs;
  auto add = [&](int n, bool in, double d) {
    for (int i = 0; i < n; ++i) obs.push_back({in, d});
  };
  add(759, true, 0.0);
  add(86, false, 0.02);
  add(29, false, 0.07);
  add(35, false, 0.15);
  add(30, false, 0.25);
  add(61, false, 0.5);
  const std::vector<double> th{0.05, 0.10, 0.20, 0.30};
  const auto c = threshold_curve(obs, th);
  EXPECT_NEAR(c[0], 0.759, 1e-12);
  EXPECT_NEAR(c[1], 0.845, 1e-12);
  EXPECT_NEAR(c[2], 0.874, 1e-12);
  EXPECT_NEAR(c[3], 0.909, 1e-12);
  EXPECT_NEAR(c[4], 0.939, 1e-12);
}
