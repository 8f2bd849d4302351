#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "glens/cropgen.hpp"
#include "glens/pss.hpp"
#include "glens/records.hpp"
#include "glens/rng.hpp"
#include "glens/scenegen.hpp"

namespace glens {

// Synthetic predictors standing in for a model. All are deterministic in
// (seed, scene_id, pass).
enum class MockMode {
  Center,      // always (0.5, 0.5), one-hot logits at "5"
  Target,      // center of the target box
  Offset,      // 0.02 beyond the target's right edge (left edge if no room)
  Distractor,  // center of a randomly chosen non-target icon
  Random,      // uniform over the image
  Mixed,       // per-record draw: 55% target, 20% offset, 15% distractor, 10% random
};

inline std::optional<MockMode> parse_mock_mode(std::string_view s) {
  if (s == "center") return MockMode::Center;
  if (s == "target") return MockMode::Target;
  if (s == "offset") return MockMode::Offset;
  if (s == "distractor") return MockMode::Distractor;
  if (s == "random") return MockMode::Random;
  if (s == "mixed") return MockMode::Mixed;
  return std::nullopt;
}

constexpr std::string_view to_string(MockMode m) {
  switch (m) {
    case MockMode::Center: return "center";
    case MockMode::Target: return "target";
    case MockMode::Offset: return "offset";
    case MockMode::Distractor: return "distractor";
    case MockMode::Random: return "random";
    case MockMode::Mixed: return "mixed";
  }
  return "unknown";
}

inline constexpr double kMockOffset = 0.02;

inline Point offset_point(const BBox& target) {
  const double x = target.x2 + kMockOffset <= 1.0 ? target.x2 + kMockOffset : target.x1 - kMockOffset;
  return {x, target.center().y};
}

namespace detail {

// Raw logits peaked at `digit`: a tent of height `sharpness` per step plus
// Gaussian noise; the emitted digit is forced to be the argmax.
inline DigitDistribution mock_logits(int digit, double sharpness, double noise, Rng& rng) {
  DigitDistribution d;
  for (int i = 0; i < 10; ++i)
    d.values[static_cast<std::size_t>(i)] = sharpness * (3.0 - std::abs(i - digit)) + noise * rng.normal();
  const auto top = peak(d);
  if (top.index != digit) d.values[static_cast<std::size_t>(digit)] = top.value + 0.1;
  return d;
}

inline int tenths_digit(std::string_view number) {
  const auto dot = number.find('.');
  return number[dot + 1] - '0';
}

}  // namespace detail

inline PredictionRecord mock_predict(const Task& task, const SceneManifest& scene, MockMode mode, std::uint64_t seed,
                                     const std::string& model_id) {
  Rng rng(derive_seed(seed, task.scene_id + "|" + std::string(to_string(task.pass))));
  MockMode behaviour = mode;
  if (mode == MockMode::Mixed) {
    const double u = rng.uniform01();
    behaviour = u < 0.55 ? MockMode::Target : u < 0.75 ? MockMode::Offset : u < 0.90 ? MockMode::Distractor : MockMode::Random;
  }

  const BBox target = scene.target().bbox;
  Point full{0.5, 0.5};
  switch (behaviour) {
    case MockMode::Target: full = target.center(); break;
    case MockMode::Offset: full = offset_point(target); break;
    case MockMode::Distractor: {
      const auto others = scene.distractors();
      if (others.empty())
        full = {rng.uniform01(), rng.uniform01()};
      else
        full = others[rng.below(others.size())].box.center();
      break;
    }
    case MockMode::Random: full = {rng.uniform01(), rng.uniform01()}; break;
    default: break;
  }

  Point answer = full;
  if (task.pass == Pass::Crop && behaviour != MockMode::Center) {
    if (!task.crop_window) throw Error(ErrorCode::InvalidArgument, "crop task without a crop window");
    answer = to_crop(full, *task.crop_window);
    answer = {std::clamp(answer.x, 0.0, 1.0), std::clamp(answer.y, 0.0, 1.0)};
  }

  char text[64];
  std::snprintf(text, sizeof(text), "[%.2f, %.2f]", answer.x, answer.y);
  const auto parsed = parse_coordinates(text);

  PredictionRecord r;
  r.scene_id = task.scene_id;
  r.model_id = model_id;
  r.instruction = task.instruction;
  r.pass = task.pass;
  r.raw_text = text;
  r.pred = {parsed.x, parsed.y};
  r.crop_window = task.crop_window;
  r.split = scene.split;

  const int dx = detail::tenths_digit(std::string_view(text).substr(parsed.x_begin, parsed.x_len));
  const int dy = detail::tenths_digit(std::string_view(text).substr(parsed.y_begin, parsed.y_len));
  if (behaviour == MockMode::Center) {
    r.x_digit_logits = one_hot(dx);
    r.y_digit_logits = one_hot(dy);
  } else {
    double sharpness = 2.6, noise = 0.6;
    if (behaviour == MockMode::Offset) sharpness = 2.3, noise = 0.7;
    if (behaviour == MockMode::Distractor) sharpness = 1.1, noise = 0.8;
    if (behaviour == MockMode::Random) sharpness = 0.5, noise = 1.0;
    r.x_digit_logits = detail::mock_logits(dx, sharpness, noise, rng);
    r.y_digit_logits = detail::mock_logits(dy, sharpness, noise, rng);
  }
  r.key_token_probs = std::vector<double>{softmax(r.x_digit_logits).values[static_cast<std::size_t>(dx)],
                                          softmax(r.y_digit_logits).values[static_cast<std::size_t>(dy)]};
  return r;
}

}  // namespace glens
