#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "glens/error.hpp"
#include "glens/geometry.hpp"
#include "glens/image.hpp"

namespace glens {

struct CropConfig {
  double alpha = 0.8;
};

// Pixel window inside a parent image of size `parent`.
struct CropWindow {
  std::int64_t x_start = 0;
  std::int64_t y_start = 0;
  std::int64_t width = 1;
  std::int64_t height = 1;
  PixelDims parent;

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

namespace detail {

// One axis of the crop plan. `size` is the already-floored window length.
inline std::int64_t crop_start(double coord, std::int64_t dim, std::int64_t size) {
  const double centered = std::floor(coord * static_cast<double>(dim) - static_cast<double>(size) / 2.0);
  std::int64_t start = std::min(std::max(static_cast<std::int64_t>(centered), std::int64_t{0}), dim - size);
  // Only reachable for one-pixel windows: keep the point's own cell inside.
  const std::int64_t cell = std::min(static_cast<std::int64_t>(std::floor(coord * static_cast<double>(dim))), dim - 1);
  if (cell < start) start = cell;
  if (cell >= start + size) start = cell - size + 1;
  return start;
}

}  // namespace detail

/// Window of floor(alpha*W) x floor(alpha*H) pixels centered on p as far as
/// the image bounds allow:
///   x_start = min(max(floor(x*W - w/2), 0), W - w)
/// with w the integer window width, and the same for y. The pixel cell
/// containing p is always inside the window.
inline CropWindow plan_crop(const Point& p, const PixelDims& dims, const CropConfig& cfg = {}) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw Error(ErrorCode::InvalidArgument, "crop ratio alpha must lie in (0,1)");
  if (!is_valid(dims)) throw Error(ErrorCode::DegenerateImage, "image dimensions must be positive");
  if (!is_valid(p)) throw Error(ErrorCode::InvalidArgument, "point outside [0,1]^2");

  CropWindow w;
  w.parent = dims;
  w.width = static_cast<std::int64_t>(std::floor(cfg.alpha * static_cast<double>(dims.width)));
  w.height = static_cast<std::int64_t>(std::floor(cfg.alpha * static_cast<double>(dims.height)));
  if (w.width < 1 || w.height < 1)
    throw Error(ErrorCode::DegenerateImage, "crop window would be smaller than one pixel");
  w.x_start = detail::crop_start(p.x, dims.width, w.width);
  w.y_start = detail::crop_start(p.y, dims.height, w.height);
  return w;
}

// Crop-relative point back into the full image frame.
inline Point remap_to_full(const Point& p_crop, const CropWindow& w) {
  return {(static_cast<double>(w.x_start) + p_crop.x * static_cast<double>(w.width)) /
              static_cast<double>(w.parent.width),
          (static_cast<double>(w.y_start) + p_crop.y * static_cast<double>(w.height)) /
              static_cast<double>(w.parent.height)};
}

// Full-image point expressed relative to the crop window. Not clamped.
inline Point to_crop(const Point& p_full, const CropWindow& w) {
  return {(p_full.x * static_cast<double>(w.parent.width) - static_cast<double>(w.x_start)) /
              static_cast<double>(w.width),
          (p_full.y * static_cast<double>(w.parent.height) - static_cast<double>(w.y_start)) /
              static_cast<double>(w.height)};
}

inline Image crop_pixels(const Image& image, const CropWindow& w) {
  if (image.dims() != w.parent)
    throw Error(ErrorCode::DimensionMismatch, "image size does not match the crop window's parent");
  if (w.x_start < 0 || w.y_start < 0 || w.width < 1 || w.height < 1 ||
      w.x_start + w.width > w.parent.width || w.y_start + w.height > w.parent.height)
    throw Error(ErrorCode::DimensionMismatch, "crop window exceeds the image");
  Image out(w.width, w.height);
  const auto row_bytes = static_cast<std::size_t>(w.width * 4);
  for (std::int64_t y = 0; y < w.height; ++y)
    std::memcpy(out.at(0, y), image.at(w.x_start, w.y_start + y), row_bytes);
  return out;
}

struct RefinedPoint {
  Point final_point;
  Point first_pass;
  Point second_pass_crop;
};

// The second-pass answer, taken relative to the crop, is always the final one.
inline RefinedPoint refine(const Point& first_pass, const Point& second_pass_crop, const CropWindow& w) {
  return {remap_to_full(second_pass_crop, w), first_pass, second_pass_crop};
}

}  // namespace glens
