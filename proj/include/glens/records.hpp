#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glens/cropgen.hpp"
#include "glens/error.hpp"
#include "glens/geometry.hpp"
#include "glens/pss.hpp"
#include "glens/taxonomy.hpp"

namespace glens {

using ojson = nlohmann::ordered_json;

inline constexpr int kRecordSchemaVersion = 1;

// Round to 9 significant digits. The JSON writer prints the shortest string
// that round-trips, so rounded values serialize with at most 9 digits.
inline double sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

enum class Pass { Full, Crop };

constexpr std::string_view to_string(Pass p) { return p == Pass::Full ? "full" : "crop"; }

inline std::optional<Pass> parse_pass(std::string_view s) {
  if (s == "full") return Pass::Full;
  if (s == "crop") return Pass::Crop;
  return std::nullopt;
}

struct PassProvenance {
  Point pred;
  std::optional<std::string> raw_text;
};

// Present on records produced by `refine`: pred is already in the full frame.
struct RefinedFrom {
  PassProvenance first_pass;
  PassProvenance second_pass;
};

struct PredictionRecord {
  std::string scene_id;
  std::string model_id;
  std::string instruction;
  Pass pass = Pass::Full;
  std::optional<std::string> raw_text;
  Point pred;
  DigitDistribution x_digit_logits;
  DigitDistribution y_digit_logits;
  std::optional<std::vector<double>> key_token_probs;
  std::optional<CropWindow> crop_window;
  std::optional<std::string> timestamp;
  std::optional<std::string> split;
  std::optional<RefinedFrom> refined;
  // Model failure: no coordinates were produced.
  std::optional<std::string> error;
};

struct Task {
  std::string scene_id;
  std::string image;
  std::string instruction;
  Pass pass = Pass::Full;
  std::optional<CropWindow> crop_window;
  std::optional<PassProvenance> first_pass;
  std::optional<std::string> model_id;
};

struct PssSummary {
  double score = 0.0;
  PssResult x;
  PssResult y;
};

struct EvalRecord {
  std::string scene_id;
  std::string model_id;
  std::string split;
  Pass pass = Pass::Full;
  ResponseCategory category = ResponseCategory::Confusion;
  double distance_to_target = 0.0;
  Point pred;
  std::optional<std::string> nearest_distractor_id;
  std::optional<double> nearest_distractor_distance;
  std::optional<PssSummary> pss;
  std::optional<double> perplexity;
};

// ---------------------------------------------------------------------------
// Schema checking

struct SchemaIssue {
  std::string pointer;
  std::string message;
};

namespace detail {

class Checker {
 public:
  explicit Checker(const nlohmann::json& j) : root_(j) {}

  std::vector<SchemaIssue> issues;

  void fail(std::string pointer, std::string message) { issues.push_back({std::move(pointer), std::move(message)}); }

  const nlohmann::json* field(const nlohmann::json& obj, const std::string& base, const char* key, bool required) {
    if (obj.contains(key)) return &obj.at(key);
    if (required) fail(base + "/" + key, "required field missing");
    return nullptr;
  }

  std::optional<std::string> string(const nlohmann::json& obj, const std::string& base, const char* key,
                                    bool required) {
    const auto* v = field(obj, base, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(base + "/" + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<double> number(const nlohmann::json& v, const std::string& pointer) {
    if (!v.is_number()) {
      fail(pointer, "expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(pointer, "expected a finite number");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::int64_t> integer(const nlohmann::json& obj, const std::string& base, const char* key) {
    const auto* v = field(obj, base, key, true);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(base + "/" + key, "expected an integer");
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<Point> point(const nlohmann::json& obj, const std::string& base, const char* key, bool required) {
    const auto* v = field(obj, base, key, required);
    if (!v) return std::nullopt;
    const std::string ptr = base + "/" + key;
    if (!v->is_object()) {
      fail(ptr, "expected an object {x, y}");
      return std::nullopt;
    }
    std::optional<double> x, y;
    if (const auto* xv = field(*v, ptr, "x", true)) x = number(*xv, ptr + "/x");
    if (const auto* yv = field(*v, ptr, "y", true)) y = number(*yv, ptr + "/y");
    if (!x || !y) return std::nullopt;
    if (!is_valid(Point{*x, *y})) {
      fail(ptr, "coordinates must lie in [0,1]");
      return std::nullopt;
    }
    return Point{*x, *y};
  }

  std::optional<DigitDistribution> digits(const nlohmann::json& obj, const std::string& base, const char* key) {
    const auto* v = field(obj, base, key, true);
    if (!v) return std::nullopt;
    const std::string ptr = base + "/" + key;
    if (!v->is_array() || v->size() != 10) {
      fail(ptr, "expected an array of exactly 10 numbers");
      return std::nullopt;
    }
    DigitDistribution d;
    bool ok = true;
    for (std::size_t i = 0; i < 10; ++i) {
      auto n = number((*v)[i], ptr + "/" + std::to_string(i));
      if (n)
        d.values[i] = *n;
      else
        ok = false;
    }
    return ok ? std::optional{d} : std::nullopt;
  }

  std::optional<CropWindow> crop_window(const nlohmann::json& obj, const std::string& base, bool required) {
    const auto* v = field(obj, base, "crop_window", required);
    if (!v) return std::nullopt;
    const std::string ptr = base + "/crop_window";
    if (!v->is_object()) {
      fail(ptr, "expected an object");
      return std::nullopt;
    }
    auto xs = integer(*v, ptr, "x_start"), ys = integer(*v, ptr, "y_start");
    auto w = integer(*v, ptr, "width"), h = integer(*v, ptr, "height");
    auto pw = integer(*v, ptr, "parent_w"), ph = integer(*v, ptr, "parent_h");
    if (!xs || !ys || !w || !h || !pw || !ph) return std::nullopt;
    CropWindow cw{*xs, *ys, *w, *h, {*pw, *ph}};
    if (cw.x_start < 0 || cw.y_start < 0 || cw.width < 1 || cw.height < 1 ||
        cw.x_start + cw.width > cw.parent.width || cw.y_start + cw.height > cw.parent.height) {
      fail(ptr, "window must have positive size and lie inside its parent");
      return std::nullopt;
    }
    return cw;
  }

  const nlohmann::json& root() const { return root_; }

 private:
  const nlohmann::json& root_;
};

inline std::optional<PassProvenance> provenance(Checker& c, const nlohmann::json& obj, const std::string& base,
                                                const char* key) {
  const auto* v = c.field(obj, base, key, true);
  if (!v) return std::nullopt;
  const std::string ptr = base + "/" + key;
  if (!v->is_object()) {
    c.fail(ptr, "expected an object");
    return std::nullopt;
  }
  auto pred = c.point(*v, ptr, "pred", true);
  auto raw = c.string(*v, ptr, "raw_text", false);
  if (!pred) return std::nullopt;
  return PassProvenance{*pred, raw};
}

}  // namespace detail

struct ParseOutcome {
  std::optional<PredictionRecord> record;
  std::vector<SchemaIssue> issues;
};

/// Check one prediction line against the record schema and decode it.
/// Issues carry JSON-pointer paths. raw_text, when present, must parse in
/// the requested format and agree with pred.
inline ParseOutcome parse_prediction(const nlohmann::json& j, CoordinateFormat format = CoordinateFormat::Strict) {
  detail::Checker c(j);
  ParseOutcome out;
  if (!j.is_object()) {
    c.fail("", "expected a JSON object");
    out.issues = std::move(c.issues);
    return out;
  }
  PredictionRecord r;
  if (const auto* v = c.field(j, "", "schema_version", true)) {
    if (!v->is_number_integer() || v->get<int>() != kRecordSchemaVersion)
      c.fail("/schema_version", "unsupported schema_version (expected 1)");
  }
  r.scene_id = c.string(j, "", "scene_id", true).value_or("");
  r.model_id = c.string(j, "", "model_id", true).value_or("");
  if (auto pass = c.string(j, "", "pass", true)) {
    if (auto p = parse_pass(*pass))
      r.pass = *p;
    else
      c.fail("/pass", "expected \"full\" or \"crop\"");
  }
  r.error = c.string(j, "", "error", false);
  r.split = c.string(j, "", "split", false);
  r.timestamp = c.string(j, "", "timestamp", false);

  if (r.error) {
    // Failure records carry no coordinates.
    r.instruction = c.string(j, "", "instruction", false).value_or("");
    if (c.issues.empty()) out.record = std::move(r);
    out.issues = std::move(c.issues);
    return out;
  }

  r.instruction = c.string(j, "", "instruction", true).value_or("");
  r.raw_text = c.string(j, "", "raw_text", false);
  auto pred = c.point(j, "", "pred", true);
  auto xd = c.digits(j, "", "x_digit_logits");
  auto yd = c.digits(j, "", "y_digit_logits");
  if (const auto* v = c.field(j, "", "key_token_probs", false)) {
    if (!v->is_array() || v->empty()) {
      c.fail("/key_token_probs", "expected a non-empty array of probabilities");
    } else {
      std::vector<double> probs;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string ptr = "/key_token_probs/" + std::to_string(i);
        if (auto n = c.number((*v)[i], ptr)) {
          if (!(*n > 0.0 && *n <= 1.0)) c.fail(ptr, "probability must lie in (0,1]");
          probs.push_back(*n);
        }
      }
      r.key_token_probs = std::move(probs);
    }
  }
  r.crop_window = c.crop_window(j, "", r.pass == Pass::Crop);

  if (const auto* v = c.field(j, "", "refined", false)) {
    if (!v->is_object()) {
      c.fail("/refined", "expected an object");
    } else {
      auto first = detail::provenance(c, *v, "/refined", "first_pass");
      auto second = detail::provenance(c, *v, "/refined", "second_pass");
      if (first && second) r.refined = RefinedFrom{*first, *second};
    }
    if (r.pass != Pass::Crop) c.fail("/refined", "only crop-pass records can be refined");
  }

  if (pred && r.raw_text) {
    try {
      const auto parsed = parse_coordinates(*r.raw_text, format);
      if (std::abs(parsed.x - pred->x) > 1e-9 || std::abs(parsed.y - pred->y) > 1e-9)
        c.fail("/pred", "does not match the coordinates in raw_text");
    } catch (const Error& e) {
      c.fail("/raw_text", e.what());
    }
  }

  if (c.issues.empty()) {
    r.pred = *pred;
    r.x_digit_logits = *xd;
    r.y_digit_logits = *yd;
    out.record = std::move(r);
  }
  out.issues = std::move(c.issues);
  return out;
}

inline ojson point_to_json(const Point& p) { return ojson{{"x", sig9(p.x)}, {"y", sig9(p.y)}}; }

inline ojson crop_window_to_json(const CropWindow& w) {
  return ojson{{"x_start", w.x_start}, {"y_start", w.y_start}, {"width", w.width},
               {"height", w.height},   {"parent_w", w.parent.width}, {"parent_h", w.parent.height}};
}

inline ojson digits_to_json(const DigitDistribution& d) {
  auto a = ojson::array();
  for (double v : d.values) a.push_back(sig9(v));
  return a;
}

inline ojson provenance_to_json(const PassProvenance& p) {
  ojson j;
  j["pred"] = point_to_json(p.pred);
  if (p.raw_text) j["raw_text"] = *p.raw_text;
  return j;
}

inline ojson prediction_to_json(const PredictionRecord& r) {
  ojson j;
  j["schema_version"] = kRecordSchemaVersion;
  j["scene_id"] = r.scene_id;
  j["model_id"] = r.model_id;
  j["instruction"] = r.instruction;
  j["pass"] = std::string(to_string(r.pass));
  if (r.split) j["split"] = *r.split;
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  if (r.raw_text) j["raw_text"] = *r.raw_text;
  j["pred"] = point_to_json(r.pred);
  j["x_digit_logits"] = digits_to_json(r.x_digit_logits);
  j["y_digit_logits"] = digits_to_json(r.y_digit_logits);
  if (r.key_token_probs) {
    auto a = ojson::array();
    for (double p : *r.key_token_probs) a.push_back(sig9(p));
    j["key_token_probs"] = std::move(a);
  }
  if (r.crop_window) j["crop_window"] = crop_window_to_json(*r.crop_window);
  if (r.refined)
    j["refined"] = ojson{{"first_pass", provenance_to_json(r.refined->first_pass)},
                         {"second_pass", provenance_to_json(r.refined->second_pass)}};
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  return j;
}

// ---------------------------------------------------------------------------
// Tasks

inline ojson task_to_json(const Task& t) {
  ojson j;
  j["scene_id"] = t.scene_id;
  j["image"] = t.image;
  j["instruction"] = t.instruction;
  j["pass"] = std::string(to_string(t.pass));
  if (t.model_id) j["model_id"] = *t.model_id;
  if (t.crop_window) j["crop_window"] = crop_window_to_json(*t.crop_window);
  if (t.first_pass) j["first_pass"] = provenance_to_json(*t.first_pass);
  return j;
}

struct TaskOutcome {
  std::optional<Task> task;
  std::vector<SchemaIssue> issues;
};

inline TaskOutcome parse_task(const nlohmann::json& j) {
  detail::Checker c(j);
  TaskOutcome out;
  if (!j.is_object()) {
    c.fail("", "expected a JSON object");
    out.issues = std::move(c.issues);
    return out;
  }
  Task t;
  t.scene_id = c.string(j, "", "scene_id", true).value_or("");
  t.image = c.string(j, "", "image", true).value_or("");
  t.instruction = c.string(j, "", "instruction", true).value_or("");
  t.model_id = c.string(j, "", "model_id", false);
  if (auto pass = c.string(j, "", "pass", false)) {
    if (auto p = parse_pass(*pass))
      t.pass = *p;
    else
      c.fail("/pass", "expected \"full\" or \"crop\"");
  }
  t.crop_window = c.crop_window(j, "", t.pass == Pass::Crop);
  if (j.contains("first_pass")) t.first_pass = detail::provenance(c, j, "", "first_pass");
  if (c.issues.empty()) out.task = std::move(t);
  out.issues = std::move(c.issues);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation records

inline ojson pss_result_to_json(const PssResult& r) {
  return ojson{{"score", sig9(r.score)},
               {"peak_index", r.peak_index},
               {"peak_value", sig9(r.peak_value)},
               {"branch", std::string(to_string(r.branch))}};
}

inline ojson eval_to_json(const EvalRecord& r) {
  ojson j;
  j["schema_version"] = kRecordSchemaVersion;
  j["scene_id"] = r.scene_id;
  j["model_id"] = r.model_id;
  j["split"] = r.split;
  j["pass"] = std::string(to_string(r.pass));
  j["category"] = std::string(to_string(r.category));
  j["distance_to_target"] = sig9(r.distance_to_target);
  j["pred"] = point_to_json(r.pred);
  if (r.nearest_distractor_id) j["nearest_distractor_id"] = *r.nearest_distractor_id;
  if (r.nearest_distractor_distance) j["nearest_distractor_distance"] = sig9(*r.nearest_distractor_distance);
  if (r.pss)
    j["pss"] = ojson{{"score", sig9(r.pss->score)}, {"x", pss_result_to_json(r.pss->x)}, {"y", pss_result_to_json(r.pss->y)}};
  if (r.perplexity) j["perplexity"] = sig9(*r.perplexity);
  return j;
}

struct EvalOutcome {
  std::optional<EvalRecord> record;
  std::vector<SchemaIssue> issues;
  bool is_error_entry = false;
};

inline EvalOutcome parse_eval(const nlohmann::json& j) {
  detail::Checker c(j);
  EvalOutcome out;
  if (!j.is_object()) {
    c.fail("", "expected a JSON object");
    out.issues = std::move(c.issues);
    return out;
  }
  if (j.contains("error")) {
    out.is_error_entry = true;
    return out;
  }
  EvalRecord r;
  if (const auto* v = c.field(j, "", "schema_version", true))
    if (!v->is_number_integer() || v->get<int>() != kRecordSchemaVersion)
      c.fail("/schema_version", "unsupported schema_version (expected 1)");
  r.scene_id = c.string(j, "", "scene_id", true).value_or("");
  r.model_id = c.string(j, "", "model_id", true).value_or("");
  r.split = c.string(j, "", "split", true).value_or("");
  if (auto pass = c.string(j, "", "pass", true)) {
    if (auto p = parse_pass(*pass))
      r.pass = *p;
    else
      c.fail("/pass", "expected \"full\" or \"crop\"");
  }
  if (auto cat = c.string(j, "", "category", true)) {
    if (auto k = parse_category(*cat))
      r.category = *k;
    else
      c.fail("/category", "unknown category");
  }
  if (const auto* v = c.field(j, "", "distance_to_target", true))
    if (auto d = c.number(*v, "/distance_to_target")) {
      if (*d < 0.0) c.fail("/distance_to_target", "must be non-negative");
      r.distance_to_target = *d;
    }
  if (auto p = c.point(j, "", "pred", true)) r.pred = *p;
  r.nearest_distractor_id = c.string(j, "", "nearest_distractor_id", false);
  if (const auto* v = c.field(j, "", "nearest_distractor_distance", false))
    r.nearest_distractor_distance = c.number(*v, "/nearest_distractor_distance");
  if (const auto* v = c.field(j, "", "perplexity", false)) r.perplexity = c.number(*v, "/perplexity");
  if (const auto* v = c.field(j, "", "pss", false)) {
    PssSummary s;
    bool ok = v->is_object();
    if (!ok) c.fail("/pss", "expected an object");
    if (ok) {
      if (const auto* sv = c.field(*v, "/pss", "score", true)) {
        if (auto n = c.number(*sv, "/pss/score")) s.score = *n;
      }
      for (const char* axis : {"x", "y"}) {
        const std::string ptr = std::string("/pss/") + axis;
        const auto* av = c.field(*v, "/pss", axis, true);
        if (!av || !av->is_object()) continue;
        PssResult pr;
        if (const auto* f = c.field(*av, ptr, "score", true))
          if (auto n = c.number(*f, ptr + "/score")) pr.score = *n;
        if (const auto* f = c.field(*av, ptr, "peak_value", true))
          if (auto n = c.number(*f, ptr + "/peak_value")) pr.peak_value = *n;
        if (auto pi = c.integer(*av, ptr, "peak_index")) pr.peak_index = static_cast<int>(*pi);
        if (auto b = c.string(*av, ptr, "branch", true)) pr.branch = *b == "Edge" ? PssBranch::Edge : PssBranch::Interior;
        (axis[0] == 'x' ? s.x : s.y) = pr;
      }
      r.pss = s;
    }
  }
  if (r.category == ResponseCategory::Correct && r.distance_to_target != 0.0)
    c.fail("/distance_to_target", "Correct records must have zero distance");
  if (c.issues.empty()) out.record = std::move(r);
  out.issues = std::move(c.issues);
  return out;
}

}  // namespace glens
