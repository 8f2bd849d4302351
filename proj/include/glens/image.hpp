#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "glens/error.hpp"
#include "glens/geometry.hpp"

namespace glens {

// 8-bit RGBA raster, row-major, no padding.
struct Image {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> rgba;

  Image() = default;
  Image(std::int64_t w, std::int64_t h, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0,
        std::uint8_t a = 255)
      : width(w), height(h), rgba(static_cast<std::size_t>(w * h * 4)) {
    if (w < 1 || h < 1) throw Error(ErrorCode::DegenerateImage, "image dimensions must be positive");
    for (std::size_t i = 0; i < rgba.size(); i += 4) {
      rgba[i] = r;
      rgba[i + 1] = g;
      rgba[i + 2] = b;
      rgba[i + 3] = a;
    }
  }

  PixelDims dims() const { return {width, height}; }

  std::uint8_t* at(std::int64_t x, std::int64_t y) {
    return rgba.data() + static_cast<std::size_t>((y * width + x) * 4);
  }
  const std::uint8_t* at(std::int64_t x, std::int64_t y) const {
    return rgba.data() + static_cast<std::size_t>((y * width + x) * 4);
  }

  friend bool operator==(const Image&, const Image&) = default;
};

inline void write_png(const std::filesystem::path& path, const Image& img) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_RGBA;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.rgba.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::Io, "cannot write " + path.string() + ": " + msg);
  }
}

inline Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw Error(ErrorCode::Io, "cannot read " + path.string() + ": " + png.message);
  png.format = PNG_FORMAT_RGBA;
  Image img;
  img.width = png.width;
  img.height = png.height;
  img.rgba.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.rgba.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::Io, "cannot decode " + path.string() + ": " + msg);
  }
  return img;
}

}  // namespace glens
