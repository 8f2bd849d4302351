#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "glens/error.hpp"

namespace glens {

// Normalized image coordinate: x is a fraction of width, y of height.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box in normalized coordinates.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  constexpr double width() const { return x2 - x1; }
  constexpr double height() const { return y2 - y1; }
  constexpr Point center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct PixelDims {
  std::int64_t width = 1;
  std::int64_t height = 1;

  friend bool operator==(const PixelDims&, const PixelDims&) = default;
};

struct PixelPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

inline bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

inline bool is_valid(const Point& p) { return in_unit_interval(p.x) && in_unit_interval(p.y); }

inline bool is_valid(const BBox& b) {
  return in_unit_interval(b.x1) && in_unit_interval(b.y1) && in_unit_interval(b.x2) &&
         in_unit_interval(b.y2) && b.x1 < b.x2 && b.y1 < b.y2;
}

inline bool is_valid(const PixelDims& d) { return d.width >= 1 && d.height >= 1; }

inline Point checked_point(double x, double y) {
  Point p{x, y};
  if (!is_valid(p)) throw Error(ErrorCode::InvalidArgument, "point outside [0,1]^2");
  return p;
}

inline BBox checked_bbox(double x1, double y1, double x2, double y2) {
  BBox b{x1, y1, x2, y2};
  if (!is_valid(b)) throw Error(ErrorCode::InvalidArgument, "bbox must satisfy 0<=x1<x2<=1, 0<=y1<y2<=1");
  return b;
}

// Strict containment: a point on the boundary is not inside.
constexpr bool contains(const Point& p, const BBox& b) {
  return b.x1 < p.x && p.x < b.x2 && b.y1 < p.y && p.y < b.y2;
}

// Euclidean distance from p to the closest point of b; zero inside or on the
// boundary.
inline double point_to_box_distance(const Point& p, const BBox& b) {
  const double dx = std::max({b.x1 - p.x, 0.0, p.x - b.x2});
  const double dy = std::max({b.y1 - p.y, 0.0, p.y - b.y2});
  return std::sqrt(dx * dx + dy * dy);
}

// Gap between two boxes; zero when they touch or overlap.
inline double box_to_box_distance(const BBox& a, const BBox& b) {
  const double dx = std::max({a.x1 - b.x2, 0.0, b.x1 - a.x2});
  const double dy = std::max({a.y1 - b.y2, 0.0, b.y1 - a.y2});
  return std::sqrt(dx * dx + dy * dy);
}

// Round half up to the nearest pixel.
inline PixelPoint to_pixels(const Point& p, const PixelDims& d) {
  return {static_cast<std::int64_t>(std::floor(p.x * static_cast<double>(d.width) + 0.5)),
          static_cast<std::int64_t>(std::floor(p.y * static_cast<double>(d.height) + 0.5))};
}

inline Point from_pixels(const PixelPoint& px, const PixelDims& d) {
  return {static_cast<double>(px.x) / static_cast<double>(d.width),
          static_cast<double>(px.y) / static_cast<double>(d.height)};
}

}  // namespace glens
