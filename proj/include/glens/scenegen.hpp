#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glens/error.hpp"
#include "glens/geometry.hpp"
#include "glens/image.hpp"
#include "glens/rng.hpp"
#include "glens/taxonomy.hpp"

namespace glens {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr std::string_view kDefaultInstructionTemplate = "Click the {name} icon.";

struct IconAsset {
  std::string id;
  std::string name;
  Image pixels;
  std::string source;  // file path, or "builtin"
  bool has_alpha = true;
};

struct IconLibrary {
  std::vector<IconAsset> icons;

  const IconAsset* find(std::string_view id) const {
    for (const auto& icon : icons)
      if (icon.id == id) return &icon;
    return nullptr;
  }
};

struct Placement {
  std::string icon_id;
  std::string name;
  BBox bbox;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct SceneManifest {
  std::string scene_id;
  std::string background;  // "procedural:<seed>" or an image path
  std::string image;       // rendered scene file, relative to the manifest
  PixelDims dims;
  std::vector<Placement> placements;
  std::string target_icon_id;
  std::string instruction;
  std::uint64_t seed = 0;
  std::optional<std::string> split;

  const Placement& target() const {
    for (const auto& p : placements)
      if (p.icon_id == target_icon_id) return p;
    throw Error(ErrorCode::InvalidScene, "scene " + scene_id + " has no placement for its target");
  }

  std::vector<Distractor> distractors() const {
    std::vector<Distractor> out;
    for (const auto& p : placements)
      if (p.icon_id != target_icon_id) out.push_back({p.icon_id, p.bbox});
    return out;
  }

  friend bool operator==(const SceneManifest&, const SceneManifest&) = default;
};

struct LayoutConstraints {
  double margin = 0.02;
  double scale_min = 0.04;  // icon size as a fraction of min(W, H)
  double scale_max = 0.10;
  int max_attempts = 1000;  // per icon
};

// ---------------------------------------------------------------------------
// Instructions

inline std::string instruction_for(std::string_view name, std::string_view tmpl = kDefaultInstructionTemplate) {
  constexpr std::string_view slot = "{name}";
  if (tmpl.find(slot) == std::string_view::npos)
    throw Error(ErrorCode::BadTemplate, "instruction template lacks a {name} slot");
  if (name.empty()) throw Error(ErrorCode::EmptyName, "icon name is empty");
  std::string out;
  std::size_t pos = 0;
  for (auto hit = tmpl.find(slot); hit != std::string_view::npos; hit = tmpl.find(slot, pos)) {
    out.append(tmpl.substr(pos, hit - pos));
    out.append(name);
    pos = hit + slot.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

inline std::string instruction_for(const IconAsset& icon, std::string_view tmpl = kDefaultInstructionTemplate) {
  return instruction_for(icon.name, tmpl);
}

// ---------------------------------------------------------------------------
// Built-in assets

namespace detail {

struct NamedColor {
  std::string_view name;
  std::array<std::uint8_t, 3> rgb;
};

inline constexpr std::array<NamedColor, 6> kIconColors{{
    {"red", {220, 40, 40}},
    {"green", {40, 170, 70}},
    {"blue", {40, 90, 220}},
    {"orange", {245, 150, 20}},
    {"purple", {140, 60, 190}},
    {"teal", {20, 160, 160}},
}};

inline constexpr std::array<std::string_view, 10> kIconShapes{
    "circle", "square", "triangle", "diamond", "ring", "plus", "cross", "hourglass", "star", "moon"};

// Shape membership for a point in [-1, 1]^2, y pointing down.
inline bool shape_contains(std::string_view shape, double x, double y) {
  const double r = std::hypot(x, y);
  if (shape == "circle") return r < 0.85;
  if (shape == "square") return std::max(std::abs(x), std::abs(y)) < 0.72;
  if (shape == "triangle") return y < 0.75 && y > -0.85 && std::abs(x) < (y + 0.85) * 0.55;
  if (shape == "diamond") return std::abs(x) + std::abs(y) < 0.9;
  if (shape == "ring") return r > 0.5 && r < 0.88;
  if (shape == "plus")
    return (std::abs(x) < 0.25 && std::abs(y) < 0.85) || (std::abs(y) < 0.25 && std::abs(x) < 0.85);
  if (shape == "cross") {
    const double u = (x + y) / std::numbers::sqrt2, v = (x - y) / std::numbers::sqrt2;
    return (std::abs(u) < 0.22 && std::abs(v) < 0.9) || (std::abs(v) < 0.22 && std::abs(u) < 0.9);
  }
  if (shape == "hourglass") return std::abs(y) < 0.85 && std::abs(x) <= std::abs(y) + 0.08;
  if (shape == "star") {
    const double theta = std::atan2(y, x) + std::numbers::pi / 2.0;
    return r < 0.52 + 0.36 * std::cos(5.0 * theta);
  }
  if (shape == "moon") return r < 0.85 && std::hypot(x - 0.38, y + 0.2) > 0.68;
  return false;
}

}  // namespace detail

/// Sixty procedurally drawn RGBA icons (ten shapes in six colors), opaque
/// inside the shape and fully transparent outside.
inline IconLibrary builtin_icon_library(int size = 64) {
  IconLibrary lib;
  for (const auto& color : detail::kIconColors) {
    for (auto shape : detail::kIconShapes) {
      Image img(size, size, 0, 0, 0, 0);
      for (int py = 0; py < size; ++py) {
        for (int px = 0; px < size; ++px) {
          const double x = (px + 0.5) / size * 2.0 - 1.0;
          const double y = (py + 0.5) / size * 2.0 - 1.0;
          if (!detail::shape_contains(shape, x, y)) continue;
          auto* pix = img.at(px, py);
          pix[0] = color.rgb[0];
          pix[1] = color.rgb[1];
          pix[2] = color.rgb[2];
          pix[3] = 255;
        }
      }
      IconAsset icon;
      icon.id = std::string(color.name) + "-" + std::string(shape);
      icon.name = std::string(color.name) + " " + std::string(shape);
      icon.pixels = std::move(img);
      icon.source = "builtin";
      icon.has_alpha = true;
      lib.icons.push_back(std::move(icon));
    }
  }
  return lib;
}

// Desktop-like backdrop: a diagonal two-color gradient with a taskbar strip.
inline Image procedural_background(const PixelDims& dims, std::uint64_t seed) {
  Rng rng(seed);
  std::array<double, 3> top{}, bottom{};
  for (int c = 0; c < 3; ++c) {
    top[c] = rng.uniform(20.0, 120.0);
    bottom[c] = rng.uniform(80.0, 230.0);
  }
  Image img(dims.width, dims.height);
  const std::int64_t taskbar = std::max<std::int64_t>(1, dims.height / 20);
  for (std::int64_t y = 0; y < dims.height; ++y) {
    for (std::int64_t x = 0; x < dims.width; ++x) {
      auto* pix = img.at(x, y);
      if (y >= dims.height - taskbar) {
        pix[0] = pix[1] = pix[2] = 32;
        continue;
      }
      const double t = (static_cast<double>(x) / static_cast<double>(dims.width) +
                        static_cast<double>(y) / static_cast<double>(dims.height)) / 2.0;
      for (int c = 0; c < 3; ++c)
        pix[c] = static_cast<std::uint8_t>(std::lround(top[c] + (bottom[c] - top[c]) * t));
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Compositing

// Normalized box to integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  std::int64_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

inline PixelRect to_pixel_rect(const BBox& b, const PixelDims& d) {
  const auto w = static_cast<double>(d.width), h = static_cast<double>(d.height);
  return {std::llround(b.x1 * w), std::llround(b.y1 * h), std::llround(b.x2 * w), std::llround(b.y2 * h)};
}

// Source-over blend of one channel with 8-bit alpha, rounded to nearest.
constexpr std::uint8_t blend_channel(std::uint8_t fg, std::uint8_t bg, std::uint8_t alpha) {
  return static_cast<std::uint8_t>((alpha * fg + (255 - alpha) * bg + 127) / 255);
}

/// Draw each placed icon into a copy of the background, scaled to its box
/// with nearest-neighbor sampling and alpha-blended over what is below.
inline Image composite(const Image& background, const std::vector<Placement>& placements, const IconLibrary& icons) {
  Image out = background;
  for (const auto& pl : placements) {
    const IconAsset* icon = icons.find(pl.icon_id);
    if (!icon) throw Error(ErrorCode::InvalidScene, "unknown icon id '" + pl.icon_id + "'");
    const PixelRect r = to_pixel_rect(pl.bbox, background.dims());
    if (r.x0 < 0 || r.y0 < 0 || r.x1 > background.width || r.y1 > background.height || r.x1 <= r.x0 ||
        r.y1 <= r.y0)
      throw Error(ErrorCode::DimensionMismatch, "placement of '" + pl.icon_id + "' falls outside the background");
    const std::int64_t pw = r.x1 - r.x0, ph = r.y1 - r.y0;
    const auto& src = icon->pixels;
    for (std::int64_t dy = 0; dy < ph; ++dy) {
      const std::int64_t sy = dy * src.height / ph;
      for (std::int64_t dx = 0; dx < pw; ++dx) {
        const std::int64_t sx = dx * src.width / pw;
        const auto* s = src.at(sx, sy);
        auto* d = out.at(r.x0 + dx, r.y0 + dy);
        const std::uint8_t a = s[3];
        d[0] = blend_channel(s[0], d[0], a);
        d[1] = blend_channel(s[1], d[1], a);
        d[2] = blend_channel(s[2], d[2], a);
        d[3] = blend_channel(255, d[3], a);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene generation

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

struct GeneratedScene {
  SceneManifest manifest;
  Image image;
};

struct SceneRequest {
  std::string scene_id;
  std::string background_ref;
  const Image* background = nullptr;
  std::size_t icon_count = 5;
  std::uint64_t seed = 0;
  LayoutConstraints constraints;
  std::string instruction_template = std::string(kDefaultInstructionTemplate);
};

/// Place `icon_count` distinct icons by rejection sampling, pick one target
/// uniformly, and render the scene. Everything is a function of the request;
/// the same request always yields an identical manifest and raster.
///
/// Boxes sit on whole pixels, strictly inside the image, and are stored
/// rounded to 6 decimals. Pairwise gaps (measured on the stored boxes) are at
/// least `margin`.
inline GeneratedScene generate_scene(const SceneRequest& req, const IconLibrary& library) {
  if (library.icons.empty()) throw Error(ErrorCode::EmptyLibrary, "icon library is empty");
  if (!req.background) throw Error(ErrorCode::InvalidArgument, "scene request has no background");
  if (req.icon_count < 1) throw Error(ErrorCode::InvalidArgument, "a scene needs at least one icon");
  if (req.icon_count > library.icons.size())
    throw Error(ErrorCode::InvalidArgument, "scene asks for " + std::to_string(req.icon_count) +
                                                " icons but the library holds " +
                                                std::to_string(library.icons.size()));
  const auto& lc = req.constraints;
  if (!(lc.scale_min > 0.0 && lc.scale_min <= lc.scale_max && lc.scale_max < 1.0))
    throw Error(ErrorCode::InvalidArgument, "icon scale range must satisfy 0 < min <= max < 1");
  if (!(lc.margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be non-negative");

  const PixelDims dims = req.background->dims();
  const double W = static_cast<double>(dims.width), H = static_cast<double>(dims.height);
  Rng rng(req.seed);

  // Partial Fisher-Yates: the first icon_count entries are the drawn icons.
  std::vector<std::size_t> order(library.icons.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < req.icon_count; ++i)
    std::swap(order[i], order[i + rng.below(order.size() - i)]);

  SceneManifest m;
  m.scene_id = req.scene_id;
  m.background = req.background_ref;
  m.image = req.scene_id + ".png";
  m.dims = dims;
  m.seed = req.seed;

  for (std::size_t k = 0; k < req.icon_count; ++k) {
    const IconAsset& icon = library.icons[order[k]];
    bool placed = false;
    for (int attempt = 0; attempt < lc.max_attempts && !placed; ++attempt) {
      const double side = rng.uniform(lc.scale_min, lc.scale_max) * static_cast<double>(std::min(dims.width, dims.height));
      const double longest = static_cast<double>(std::max(icon.pixels.width, icon.pixels.height));
      const auto pw = std::max<std::int64_t>(1, std::llround(side * static_cast<double>(icon.pixels.width) / longest));
      const auto ph = std::max<std::int64_t>(1, std::llround(side * static_cast<double>(icon.pixels.height) / longest));
      // One free pixel on every side keeps boxes strictly inside the image.
      if (pw + 2 > dims.width || ph + 2 > dims.height) continue;
      const std::int64_t x = rng.between(1, dims.width - pw - 1);
      const std::int64_t y = rng.between(1, dims.height - ph - 1);
      const BBox box{round6(static_cast<double>(x) / W), round6(static_cast<double>(y) / H),
                     round6(static_cast<double>(x + pw) / W), round6(static_cast<double>(y + ph) / H)};
      const bool clear = std::all_of(m.placements.begin(), m.placements.end(), [&](const Placement& other) {
        return box_to_box_distance(box, other.bbox) >= lc.margin;
      });
      if (!clear) continue;
      m.placements.push_back({icon.id, icon.name, box});
      placed = true;
    }
    if (!placed)
      throw Error(ErrorCode::OverconstrainedLayout,
                  "scene " + req.scene_id + ": could not place icon '" + icon.id + "' (" + std::to_string(k + 1) +
                      " of " + std::to_string(req.icon_count) + ") after " + std::to_string(lc.max_attempts) +
                      " attempts");
  }

  const auto& target = m.placements[rng.below(m.placements.size())];
  m.target_icon_id = target.icon_id;
  m.instruction = instruction_for(target.name, req.instruction_template);

  GeneratedScene out{std::move(m), Image{}};
  out.image = composite(*req.background, out.manifest.placements, library);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json manifest_to_json(const SceneManifest& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["scene_id"] = m.scene_id;
  j["background"] = m.background;
  j["image"] = m.image;
  j["dims"] = {{"width", m.dims.width}, {"height", m.dims.height}};
  auto placements = nlohmann::ordered_json::array();
  for (const auto& p : m.placements) {
    nlohmann::ordered_json pj;
    pj["icon_id"] = p.icon_id;
    pj["name"] = p.name;
    pj["bbox"] = {round6(p.bbox.x1), round6(p.bbox.y1), round6(p.bbox.x2), round6(p.bbox.y2)};
    placements.push_back(std::move(pj));
  }
  j["placements"] = std::move(placements);
  j["target_icon_id"] = m.target_icon_id;
  j["instruction"] = m.instruction;
  j["seed"] = m.seed;
  if (m.split) j["split"] = *m.split;
  return j;
}

inline std::string manifest_to_string(const SceneManifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

inline SceneManifest manifest_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& msg) -> SceneManifest {
    throw Error(ErrorCode::InvalidScene, "manifest: " + msg);
  };
  try {
    if (j.at("schema_version").get<int>() != kManifestSchemaVersion) return fail("unsupported schema_version");
    SceneManifest m;
    m.scene_id = j.at("scene_id").get<std::string>();
    m.background = j.value("background", std::string{});
    m.image = j.at("image").get<std::string>();
    m.dims = {j.at("dims").at("width").get<std::int64_t>(), j.at("dims").at("height").get<std::int64_t>()};
    if (!is_valid(m.dims)) return fail("dims must be positive");
    for (const auto& pj : j.at("placements")) {
      const auto& b = pj.at("bbox");
      if (!b.is_array() || b.size() != 4) return fail("bbox must hold 4 numbers");
      Placement p{pj.at("icon_id").get<std::string>(), pj.value("name", std::string{}),
                  BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()}};
      if (!is_valid(p.bbox)) return fail("invalid bbox for icon '" + p.icon_id + "'");
      m.placements.push_back(std::move(p));
    }
    m.target_icon_id = j.at("target_icon_id").get<std::string>();
    m.instruction = j.value("instruction", std::string{});
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("split")) m.split = j.at("split").get<std::string>();
    const auto hits = std::count_if(m.placements.begin(), m.placements.end(),
                                    [&](const Placement& p) { return p.icon_id == m.target_icon_id; });
    if (hits != 1) return fail("target_icon_id must appear exactly once among placements");
    return m;
  } catch (const nlohmann::json::exception& e) {
    return fail(e.what());
  }
}

inline SceneManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidScene, path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

/// Icon directory with an index.json of the form
///   { "<id>": { "name": "<label>", "file": "<png relative to the directory>" }, ... }
/// Icons are ordered by id so that seeded draws do not depend on file order.
inline IconLibrary load_icon_library(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw Error(ErrorCode::Io, "cannot open " + (dir / "index.json").string());
  nlohmann::json index;
  try {
    in >> index;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, "index.json: " + std::string(e.what()));
  }
  if (!index.is_object()) throw Error(ErrorCode::Io, "index.json must map icon ids to {name, file}");
  IconLibrary lib;
  for (const auto& [id, entry] : index.items()) {
    IconAsset icon;
    icon.id = id;
    icon.name = entry.at("name").get<std::string>();
    if (icon.name.empty()) throw Error(ErrorCode::EmptyName, "icon '" + id + "' has an empty name");
    icon.source = (dir / entry.at("file").get<std::string>()).string();
    icon.pixels = read_png(icon.source);
    icon.has_alpha = false;
    for (std::size_t i = 3; i < icon.pixels.rgba.size(); i += 4)
      if (icon.pixels.rgba[i] != 255) {
        icon.has_alpha = true;
        break;
      }
    lib.icons.push_back(std::move(icon));
  }
  std::sort(lib.icons.begin(), lib.icons.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (lib.icons.empty()) throw Error(ErrorCode::EmptyLibrary, "icon index lists no icons");
  return lib;
}

}  // namespace glens
