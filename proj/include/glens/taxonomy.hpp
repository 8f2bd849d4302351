#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glens/error.hpp"
#include "glens/geometry.hpp"

namespace glens {

enum class ResponseCategory { Correct, Biased, Misleading, Confusion };

inline constexpr std::array<ResponseCategory, 4> kAllCategories{
    ResponseCategory::Correct, ResponseCategory::Biased, ResponseCategory::Misleading,
    ResponseCategory::Confusion};

constexpr std::string_view to_string(ResponseCategory c) {
  switch (c) {
    case ResponseCategory::Correct: return "Correct";
    case ResponseCategory::Biased: return "Biased";
    case ResponseCategory::Misleading: return "Misleading";
    case ResponseCategory::Confusion: return "Confusion";
  }
  return "Unknown";
}

inline std::optional<ResponseCategory> parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

struct ClassifierConfig {
  double tau = 0.05;
};

struct Distractor {
  std::string id;
  BBox box;
};

struct ClassificationResult {
  ResponseCategory category = ResponseCategory::Confusion;
  double distance_to_target = 0.0;
  std::optional<std::string> nearest_distractor_id;
  std::optional<double> nearest_distractor_distance;
};

/// Categorize a predicted click against the target box and the other icons
/// in the scene. Branch order: inside target, near target, near any other
/// icon, nothing nearby.
///
/// The distractor list must not contain the target box; an exact duplicate is
/// rejected with InvalidScene. For Misleading results the nearest distractor
/// under tau is reported.
inline ClassificationResult classify(const Point& p, const BBox& target,
                                     std::span<const Distractor> distractors,
                                     const ClassifierConfig& cfg = {}) {
  if (!(cfg.tau >= 0.0) || !std::isfinite(cfg.tau))
    throw Error(ErrorCode::InvalidArgument, "tau must be a finite non-negative number");
  for (const auto& d : distractors)
    if (d.box == target)
      throw Error(ErrorCode::InvalidScene, "target box listed among distractors (icon '" + d.id + "')");

  ClassificationResult r;
  if (contains(p, target)) {
    r.category = ResponseCategory::Correct;
    r.distance_to_target = 0.0;
    return r;
  }
  r.distance_to_target = point_to_box_distance(p, target);
  if (r.distance_to_target < cfg.tau) {
    r.category = ResponseCategory::Biased;
    return r;
  }
  for (const auto& d : distractors) {
    const double dist = point_to_box_distance(p, d.box);
    if (dist < cfg.tau && (!r.nearest_distractor_distance || dist < *r.nearest_distractor_distance)) {
      r.nearest_distractor_id = d.id;
      r.nearest_distractor_distance = dist;
    }
  }
  r.category = r.nearest_distractor_id ? ResponseCategory::Misleading : ResponseCategory::Confusion;
  return r;
}

struct DistanceObservation {
  bool contained = false;
  double distance_to_target = 0.0;
};

/// Proportion of records inside the target, followed by the proportion inside
/// or strictly closer than each threshold. Output has thresholds.size() + 1
/// entries.
inline std::vector<double> threshold_curve(std::span<const DistanceObservation> records,
                                           std::span<const double> thresholds) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "threshold curve needs at least one record");
  for (std::size_t k = 1; k < thresholds.size(); ++k)
    if (!(thresholds[k - 1] < thresholds[k]))
      throw Error(ErrorCode::InvalidArgument, "thresholds must be strictly ascending");

  std::vector<std::size_t> counts(thresholds.size() + 1, 0);
  for (const auto& r : records) {
    if (r.contained) {
      for (auto& c : counts) ++c;
      continue;
    }
    for (std::size_t k = 0; k < thresholds.size(); ++k)
      if (r.distance_to_target < thresholds[k]) ++counts[k + 1];
  }
  std::vector<double> out;
  out.reserve(counts.size());
  const double n = static_cast<double>(records.size());
  for (auto c : counts) out.push_back(static_cast<double>(c) / n);
  return out;
}

}  // namespace glens
