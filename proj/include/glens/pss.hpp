#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glens/error.hpp"

namespace glens {

// Scores over the ten digit tokens "0".."9" at one generation step.
struct DigitDistribution {
  std::array<double, 10> values{};

  friend bool operator==(const DigitDistribution&, const DigitDistribution&) = default;
};

inline DigitDistribution make_digit_distribution(std::span<const double> values) {
  if (values.size() != 10)
    throw Error(ErrorCode::MalformedDistribution,
                "expected 10 digit scores, got " + std::to_string(values.size()));
  DigitDistribution d;
  for (std::size_t i = 0; i < 10; ++i) {
    if (!std::isfinite(values[i]))
      throw Error(ErrorCode::MalformedDistribution, "non-finite digit score at index " + std::to_string(i));
    d.values[i] = values[i];
  }
  return d;
}

inline DigitDistribution one_hot(int index) {
  DigitDistribution d;
  d.values.at(static_cast<std::size_t>(index)) = 1.0;
  return d;
}

// Numerically stable exponential normalization over the ten entries.
inline DigitDistribution softmax(const DigitDistribution& logits) {
  const double mx = *std::max_element(logits.values.begin(), logits.values.end());
  DigitDistribution out;
  double total = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    out.values[i] = std::exp(logits.values[i] - mx);
    total += out.values[i];
  }
  for (auto& v : out.values) v /= total;
  return out;
}

struct PssConfig {
  double c = 4.5;
  bool normalize_input = true;
};

enum class PssBranch { Edge, Interior };

constexpr std::string_view to_string(PssBranch b) { return b == PssBranch::Edge ? "Edge" : "Interior"; }

struct PssResult {
  double score = 0.0;
  int peak_index = 0;
  double peak_value = 0.0;
  PssBranch branch = PssBranch::Edge;
  // |s| on the edge branch, w on the interior branch.
  double slope_factor = 0.0;
};

struct Peak {
  int index = 0;
  double value = 0.0;
};

// Ties resolve to the lowest index.
inline Peak peak(const DigitDistribution& v) {
  int best = 0;
  for (int i = 1; i < 10; ++i)
    if (v.values[static_cast<std::size_t>(i)] > v.values[static_cast<std::size_t>(best)]) best = i;
  return {best, v.values[static_cast<std::size_t>(best)]};
}

/// Peak Sharpness Score of one digit distribution.
///
/// With the peak p at either end, the score is 2|s|m where s is the mean
/// adjacent difference over the whole vector. Otherwise the mean slopes of
/// v[0..p] and v[p..9] are combined with weights p and 9-p, and the score is
/// C*w*m. Sums of adjacent differences telescope, so each slope reduces to an
/// endpoint difference.
///
/// When cfg.normalize_input is set the input is treated as raw logits and
/// softmax-normalized first; peak_value then refers to the normalized value.
inline PssResult pss(const DigitDistribution& input, const PssConfig& cfg = {}) {
  for (double v : input.values)
    if (!std::isfinite(v)) throw Error(ErrorCode::MalformedDistribution, "non-finite digit score");
  if (!(cfg.c > 0.0)) throw Error(ErrorCode::InvalidArgument, "normalization constant C must be positive");

  const DigitDistribution v = cfg.normalize_input ? softmax(input) : input;
  const auto [p, m] = peak(v);
  const auto& x = v.values;

  PssResult r;
  r.peak_index = p;
  r.peak_value = m;
  if (p == 0 || p == 9) {
    const double s = (x[9] - x[0]) / 9.0;
    r.branch = PssBranch::Edge;
    r.slope_factor = std::abs(s);
    r.score = 2.0 * r.slope_factor * m;
  } else {
    const auto pu = static_cast<std::size_t>(p);
    const double a_left = (x[pu] - x[0]) / p;
    const double a_right = (x[9] - x[pu]) / (9 - p);
    r.branch = PssBranch::Interior;
    r.slope_factor = (p * std::abs(a_left) + (9 - p) * std::abs(a_right)) / 9.0;
    r.score = cfg.c * r.slope_factor * m;
  }
  return r;
}

// Record-level score: mean of the two per-axis scores.
struct RecordPss {
  PssResult x;
  PssResult y;
  double score = 0.0;
};

inline RecordPss pss_record(const DigitDistribution& x, const DigitDistribution& y, const PssConfig& cfg = {}) {
  RecordPss r{pss(x, cfg), pss(y, cfg), 0.0};
  r.score = (r.x.score + r.y.score) / 2.0;
  return r;
}

// ---------------------------------------------------------------------------
// Coordinate text and key tokens

enum class CoordinateFormat {
  Strict,   // "[x, y]"
  Lenient,  // also "(x, y)" and bare "x, y"
};

// The key token of each coordinate is its first digit after the decimal point.
struct KeyTokenSpec {
  CoordinateFormat format = CoordinateFormat::Strict;
};

struct ParsedCoordinates {
  double x = 0.0;
  double y = 0.0;
  // Character ranges of the two numbers inside the raw text.
  std::size_t x_begin = 0, x_len = 0;
  std::size_t y_begin = 0, y_len = 0;
};

inline ParsedCoordinates parse_coordinates(std::string_view text, CoordinateFormat format = CoordinateFormat::Strict) {
  static const std::regex bracket(R"(\[\s*([0-9]*\.?[0-9]+)\s*,\s*([0-9]*\.?[0-9]+)\s*\])");
  static const std::regex paren(R"(\(\s*([0-9]*\.?[0-9]+)\s*,\s*([0-9]*\.?[0-9]+)\s*\))");
  static const std::regex bare(R"(([0-9]*\.?[0-9]+)\s*,\s*([0-9]*\.?[0-9]+))");

  std::match_results<std::string_view::const_iterator> m;
  bool found = std::regex_search(text.begin(), text.end(), m, bracket);
  if (!found && format == CoordinateFormat::Lenient)
    found = std::regex_search(text.begin(), text.end(), m, paren) ||
            std::regex_search(text.begin(), text.end(), m, bare);
  if (!found)
    throw Error(ErrorCode::UnparsableOutput, "no coordinate pair in \"" + std::string(text) + "\"");

  ParsedCoordinates out;
  out.x_begin = static_cast<std::size_t>(m.position(1));
  out.x_len = static_cast<std::size_t>(m.length(1));
  out.y_begin = static_cast<std::size_t>(m.position(2));
  out.y_len = static_cast<std::size_t>(m.length(2));
  out.x = std::stod(m.str(1));
  out.y = std::stod(m.str(2));
  if (out.x < 0.0 || out.x > 1.0 || out.y < 0.0 || out.y > 1.0)
    throw Error(ErrorCode::UnparsableOutput, "coordinates outside [0,1] in \"" + std::string(text) + "\"");
  return out;
}

// One generated token and, if captured, the digit scores at that step.
struct GenerationStep {
  std::string token;
  std::optional<DigitDistribution> digit_scores;
};

struct KeyDigits {
  DigitDistribution x;
  DigitDistribution y;
};

/// Pick the digit distributions at the key token of each coordinate.
///
/// The steps must concatenate to raw_text. The key character of each number
/// must be emitted as its own single-digit token with scores attached;
/// otherwise MissingKeyStep is raised.
inline KeyDigits extract_key_digits(std::string_view raw_text, std::span<const GenerationStep> steps,
                                    const KeyTokenSpec& spec = {}) {
  const ParsedCoordinates parsed = parse_coordinates(raw_text, spec.format);

  auto key_offset = [&](std::size_t begin, std::size_t len, const char* axis) {
    const auto number = raw_text.substr(begin, len);
    const auto dot = number.find('.');
    if (dot == std::string_view::npos || dot + 1 >= number.size())
      throw Error(ErrorCode::MissingKeyStep, std::string(axis) + " coordinate has no tenths digit");
    return begin + dot + 1;
  };
  const std::size_t x_key = key_offset(parsed.x_begin, parsed.x_len, "x");
  const std::size_t y_key = key_offset(parsed.y_begin, parsed.y_len, "y");

  std::optional<DigitDistribution> x_dist, y_dist;
  std::size_t offset = 0;
  for (const auto& step : steps) {
    if (offset > raw_text.size() || raw_text.substr(offset, step.token.size()) != step.token)
      throw Error(ErrorCode::MissingKeyStep, "generation steps do not reproduce the output text");
    const bool single_digit = step.token.size() == 1 && step.token[0] >= '0' && step.token[0] <= '9';
    if (offset == x_key && single_digit) x_dist = step.digit_scores;
    if (offset == y_key && single_digit) y_dist = step.digit_scores;
    offset += step.token.size();
  }
  if (!x_dist) throw Error(ErrorCode::MissingKeyStep, "no digit scores at the x key token");
  if (!y_dist) throw Error(ErrorCode::MissingKeyStep, "no digit scores at the y key token");
  return {*x_dist, *y_dist};
}

// ---------------------------------------------------------------------------
// Perplexity and embedding diagnostics

inline double perplexity(std::span<const double> key_token_probs) {
  if (key_token_probs.empty()) throw Error(ErrorCode::EmptyInput, "perplexity of an empty token list");
  double sum_log = 0.0;
  for (double p : key_token_probs) {
    if (!(p > 0.0 && p <= 1.0))
      throw Error(ErrorCode::InvalidProbability, "token probability must lie in (0,1], got " + std::to_string(p));
    sum_log += std::log(p);
  }
  return std::exp(-sum_log / static_cast<double>(key_token_probs.size()));
}

struct ContinuityReport {
  std::vector<double> adjacent_cosines;         // n-1 entries
  std::vector<double> second_difference_norms;  // n-2 entries
};

inline ContinuityReport semantic_continuity(std::span<const std::vector<double>> embeddings) {
  if (embeddings.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "semantic continuity needs at least 3 embeddings");
  const std::size_t dim = embeddings.front().size();
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be at least 1");
  std::vector<double> norms;
  norms.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    if (e.size() != dim) throw Error(ErrorCode::InvalidArgument, "embeddings differ in dimension");
    const double n = std::sqrt(std::inner_product(e.begin(), e.end(), e.begin(), 0.0));
    if (!(n > 0.0)) throw Error(ErrorCode::DegenerateEmbedding, "zero-norm embedding");
    norms.push_back(n);
  }

  ContinuityReport r;
  for (std::size_t i = 0; i + 1 < embeddings.size(); ++i) {
    const auto& a = embeddings[i];
    const auto& b = embeddings[i + 1];
    r.adjacent_cosines.push_back(std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (norms[i] * norms[i + 1]));
  }
  for (std::size_t i = 1; i + 1 < embeddings.size(); ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d2 = (embeddings[i + 1][k] - embeddings[i][k]) - (embeddings[i][k] - embeddings[i - 1][k]);
      sq += d2 * d2;
    }
    r.second_difference_norms.push_back(std::sqrt(sq));
  }
  return r;
}

}  // namespace glens
