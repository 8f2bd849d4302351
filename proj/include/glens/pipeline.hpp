#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "glens/config.hpp"
#include "glens/cropgen.hpp"
#include "glens/error.hpp"
#include "glens/image.hpp"
#include "glens/mock.hpp"
#include "glens/pss.hpp"
#include "glens/records.hpp"
#include "glens/report.hpp"
#include "glens/rng.hpp"
#include "glens/scenegen.hpp"
#include "glens/taxonomy.hpp"

// Batch commands behind the `glens` CLI. Each returns a process exit code:
// 0 success, 1 usage or configuration error, 2 data errors (partial output
// is still written). Outputs are written in input order.
namespace glens::pipeline {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// ---------------------------------------------------------------------------
// JSONL plumbing

struct JsonLine {
  std::size_t line_no = 0;
  std::optional<nlohmann::json> value;
  std::string parse_error;
};

inline std::vector<JsonLine> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<JsonLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    JsonLine jl;
    jl.line_no = n;
    try {
      jl.value = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      jl.parse_error = e.what();
    }
    out.push_back(std::move(jl));
  }
  return out;
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
  void write(const ojson& j) { out_ << j.dump() << '\n'; }

 private:
  std::ofstream out_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

inline void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

inline std::string describe(const std::vector<SchemaIssue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "; ";
    out += (i.pointer.empty() ? std::string("/") : i.pointer) + ": " + i.message;
  }
  return out;
}

inline ojson error_entry(std::size_t line_no, const std::string& scene_id, const std::string& message) {
  ojson j;
  j["schema_version"] = kRecordSchemaVersion;
  j["line"] = line_no;
  if (!scene_id.empty()) j["scene_id"] = scene_id;
  j["error"] = message;
  return j;
}

inline std::string scene_id_of(const JsonLine& jl) {
  if (jl.value && jl.value->is_object() && jl.value->contains("scene_id") && (*jl.value)["scene_id"].is_string())
    return (*jl.value)["scene_id"].get<std::string>();
  return {};
}

// Manifests live next to each other as <scene_id>.json.
class SceneStore {
 public:
  explicit SceneStore(fs::path dir) : dir_(std::move(dir)) {}

  const SceneManifest* find(const std::string& scene_id) {
    if (auto it = cache_.find(scene_id); it != cache_.end()) return it->second ? &*it->second : nullptr;
    std::optional<SceneManifest> m;
    const fs::path p = dir_ / (scene_id + ".json");
    if (!scene_id.empty() && scene_id.find('/') == std::string::npos && fs::exists(p)) m = read_manifest(p);
    auto [it, _] = cache_.emplace(scene_id, std::move(m));
    return it->second ? &*it->second : nullptr;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, std::optional<SceneManifest>> cache_;
};

inline CoordinateFormat format_of(const RunConfig& cfg) {
  return cfg.strict_format ? CoordinateFormat::Strict : CoordinateFormat::Lenient;
}

// ---------------------------------------------------------------------------
// gen-scenes

struct GenScenesOptions {
  std::size_t count = 0;
  fs::path out_dir;
  std::optional<fs::path> icons_dir;
  std::optional<fs::path> backgrounds_dir;
  std::optional<std::string> split;
};

inline std::string scene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", i);
  return buf;
}

/// Writes <scene>.json + <scene>.png per scene and a tasks.jsonl index.
inline int gen_scenes(const RunConfig& cfg, const GenScenesOptions& opt, std::ostream& log) {
  fs::create_directories(opt.out_dir);
  const IconLibrary library = opt.icons_dir ? load_icon_library(*opt.icons_dir) : builtin_icon_library();

  std::vector<fs::path> backgrounds;
  if (opt.backgrounds_dir) {
    for (const auto& e : fs::directory_iterator(*opt.backgrounds_dir))
      if (e.is_regular_file() && e.path().extension() == ".png") backgrounds.push_back(e.path());
    std::sort(backgrounds.begin(), backgrounds.end());
    if (backgrounds.empty()) throw Error(ErrorCode::InvalidArgument, "no PNG backgrounds in " + opt.backgrounds_dir->string());
  }

  JsonlWriter tasks(opt.out_dir / "tasks.jsonl");
  for (std::size_t i = 0; i < opt.count; ++i) {
    SceneRequest req;
    req.scene_id = scene_name(i);
    req.seed = derive_seed(cfg.seed, i);
    req.icon_count = cfg.icons_per_scene;
    req.constraints = cfg.layout();
    req.instruction_template = cfg.instruction_template;

    Image background;
    if (backgrounds.empty()) {
      const std::uint64_t bg_seed = derive_seed(req.seed, "background");
      background = procedural_background({cfg.width, cfg.height}, bg_seed);
      req.background_ref = "procedural:" + std::to_string(bg_seed);
    } else {
      Rng pick(derive_seed(req.seed, "background"));
      const fs::path& bg = backgrounds[pick.below(backgrounds.size())];
      background = read_png(bg);
      req.background_ref = bg.filename().string();
    }
    req.background = &background;

    GeneratedScene scene;
    try {
      scene = generate_scene(req, library);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OverconstrainedLayout) throw;
      log << "error: " << e.what() << "\n";
      return kExitData;
    }
    scene.manifest.split = opt.split;
    write_text(opt.out_dir / (req.scene_id + ".json"), manifest_to_string(scene.manifest));
    write_png(opt.out_dir / scene.manifest.image, scene.image);
    tasks.write(task_to_json({scene.manifest.scene_id, scene.manifest.image, scene.manifest.instruction, Pass::Full,
                              std::nullopt, std::nullopt, std::nullopt}));
  }
  log << "generated " << opt.count << " scenes in " << opt.out_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

enum class RecordKind { Predictions, Tasks, Eval, Manifest };

inline std::optional<RecordKind> parse_record_kind(std::string_view s) {
  if (s == "predictions") return RecordKind::Predictions;
  if (s == "tasks") return RecordKind::Tasks;
  if (s == "eval") return RecordKind::Eval;
  if (s == "manifest") return RecordKind::Manifest;
  return std::nullopt;
}

/// Check files against their schema; every problem is reported as
/// file:line: /json/pointer: message.
inline int validate(const RunConfig& cfg, RecordKind kind, const std::vector<fs::path>& files, std::ostream& log) {
  std::size_t records = 0, errors = 0;
  for (const auto& file : files) {
    if (kind == RecordKind::Manifest) {
      ++records;
      try {
        (void)read_manifest(file);
      } catch (const Error& e) {
        ++errors;
        log << file.string() << ": " << e.what() << "\n";
      }
      continue;
    }
    for (const auto& jl : read_jsonl(file)) {
      ++records;
      std::vector<SchemaIssue> issues;
      if (!jl.value) {
        issues.push_back({"", "invalid JSON: " + jl.parse_error});
      } else if (kind == RecordKind::Predictions) {
        issues = parse_prediction(*jl.value, format_of(cfg)).issues;
      } else if (kind == RecordKind::Tasks) {
        issues = parse_task(*jl.value).issues;
      } else {
        issues = parse_eval(*jl.value).issues;
      }
      for (const auto& i : issues) {
        ++errors;
        log << file.string() << ":" << jl.line_no << ": " << (i.pointer.empty() ? "/" : i.pointer) << ": " << i.message
            << "\n";
      }
    }
  }
  log << records << " records checked, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyOptions {
  fs::path predictions;
  fs::path scenes_dir;
  fs::path out;
};

inline int classify(const RunConfig& cfg, const ClassifyOptions& opt, std::ostream& log) {
  ensure_parent(opt.out);
  SceneStore scenes(opt.scenes_dir);
  JsonlWriter out(opt.out);
  std::size_t errors = 0, written = 0;
  auto fail = [&](const JsonLine& jl, const std::string& msg) {
    ++errors;
    log << opt.predictions.string() << ":" << jl.line_no << ": " << msg << "\n";
    out.write(error_entry(jl.line_no, scene_id_of(jl), msg));
  };

  for (const auto& jl : read_jsonl(opt.predictions)) {
    if (!jl.value) {
      fail(jl, "invalid JSON: " + jl.parse_error);
      continue;
    }
    auto parsed = parse_prediction(*jl.value, format_of(cfg));
    if (!parsed.record) {
      fail(jl, "schema: " + describe(parsed.issues));
      continue;
    }
    const auto& rec = *parsed.record;
    if (rec.error) {
      fail(jl, "model failure: " + *rec.error);
      continue;
    }
    if (rec.pass == Pass::Crop && !rec.refined) {
      fail(jl, "crop-pass coordinates are relative to the crop window; run refine first");
      continue;
    }
    const SceneManifest* scene = scenes.find(rec.scene_id);
    if (!scene) {
      fail(jl, "unknown scene_id '" + rec.scene_id + "'");
      continue;
    }
    try {
      const auto distractors = scene->distractors();
      const auto result = glens::classify(rec.pred, scene->target().bbox, distractors, {cfg.tau});
      EvalRecord e;
      e.scene_id = rec.scene_id;
      e.model_id = rec.model_id;
      e.split = rec.split ? *rec.split : scene->split ? *scene->split : "synthetic";
      e.pass = rec.pass;
      e.category = result.category;
      e.distance_to_target = result.distance_to_target;
      e.pred = rec.pred;
      e.nearest_distractor_id = result.nearest_distractor_id;
      e.nearest_distractor_distance = result.nearest_distractor_distance;
      out.write(eval_to_json(e));
      ++written;
    } catch (const Error& e) {
      fail(jl, e.what());
    }
  }
  log << "classified " << written << " records, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// score

struct ScoreOptions {
  fs::path predictions;
  std::optional<fs::path> eval;  // join PSS onto these records when given
  fs::path out;
};

using RecordKey = std::tuple<std::string, std::string, Pass>;

struct ScoredPrediction {
  PssSummary pss;
  std::optional<double> perplexity;
};

inline ScoredPrediction score_prediction(const PredictionRecord& r, const RunConfig& cfg) {
  const PssConfig pc{cfg.c, cfg.normalize_input};
  const RecordPss rp = pss_record(r.x_digit_logits, r.y_digit_logits, pc);
  ScoredPrediction s{{rp.score, rp.x, rp.y}, std::nullopt};
  // Key-token probabilities: as reported, else the peak of each digit distribution.
  std::vector<double> probs = r.key_token_probs ? *r.key_token_probs
                                                : std::vector<double>{rp.x.peak_value, rp.y.peak_value};
  try {
    s.perplexity = perplexity(probs);
  } catch (const Error&) {
  }
  return s;
}

inline ojson pss_summary_to_json(const PssSummary& s) {
  return ojson{{"score", sig9(s.score)}, {"x", pss_result_to_json(s.x)}, {"y", pss_result_to_json(s.y)}};
}

inline int score(const RunConfig& cfg, const ScoreOptions& opt, std::ostream& log) {
  ensure_parent(opt.out);
  JsonlWriter out(opt.out);
  std::size_t errors = 0, written = 0;
  auto report = [&](const fs::path& file, std::size_t line, const std::string& msg) {
    ++errors;
    log << file.string() << ":" << line << ": " << msg << "\n";
  };

  std::map<RecordKey, ScoredPrediction> scored;
  for (const auto& jl : read_jsonl(opt.predictions)) {
    std::string msg;
    if (!jl.value) {
      msg = "invalid JSON: " + jl.parse_error;
    } else {
      auto parsed = parse_prediction(*jl.value, format_of(cfg));
      if (!parsed.record) {
        msg = "schema: " + describe(parsed.issues);
      } else if (parsed.record->error) {
        msg = "model failure: " + *parsed.record->error;
      } else {
        const auto& r = *parsed.record;
        const RecordKey key{r.scene_id, r.model_id, r.pass};
        if (scored.count(key)) {
          msg = "duplicate record for scene '" + r.scene_id + "'";
        } else {
          auto s = score_prediction(r, cfg);
          scored.emplace(key, s);
          if (!opt.eval) {
            ojson j;
            j["schema_version"] = kRecordSchemaVersion;
            j["scene_id"] = r.scene_id;
            j["model_id"] = r.model_id;
            j["pass"] = std::string(to_string(r.pass));
            j["pss"] = pss_summary_to_json(s.pss);
            if (s.perplexity) j["perplexity"] = sig9(*s.perplexity);
            out.write(j);
            ++written;
          }
        }
      }
    }
    if (!msg.empty()) {
      report(opt.predictions, jl.line_no, msg);
      if (!opt.eval) out.write(error_entry(jl.line_no, scene_id_of(jl), msg));
    }
  }

  if (opt.eval) {
    for (const auto& jl : read_jsonl(*opt.eval)) {
      if (!jl.value) {
        report(*opt.eval, jl.line_no, "invalid JSON: " + jl.parse_error);
        out.write(error_entry(jl.line_no, "", "invalid JSON: " + jl.parse_error));
        continue;
      }
      auto parsed = parse_eval(*jl.value);
      if (parsed.is_error_entry) {
        out.write(*jl.value);
        continue;
      }
      if (!parsed.record) {
        const std::string msg = "schema: " + describe(parsed.issues);
        report(*opt.eval, jl.line_no, msg);
        out.write(error_entry(jl.line_no, scene_id_of(jl), msg));
        continue;
      }
      EvalRecord e = *parsed.record;
      auto it = scored.find({e.scene_id, e.model_id, e.pass});
      if (it == scored.end()) {
        const std::string msg = "no scored prediction for scene '" + e.scene_id + "' model '" + e.model_id + "'";
        report(*opt.eval, jl.line_no, msg);
        out.write(error_entry(jl.line_no, e.scene_id, msg));
        continue;
      }
      e.pss = it->second.pss;
      e.perplexity = it->second.perplexity;
      out.write(eval_to_json(e));
      ++written;
    }
  }
  log << "scored " << written << " records, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// crop-plan

struct CropPlanOptions {
  fs::path predictions;
  fs::path scenes_dir;
  fs::path out_dir;
  bool write_images = true;
};

inline std::string alpha_dir_name(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "alpha_%g", alpha);
  return buf;
}

inline std::string file_safe(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return out;
}

/// For every full-pass prediction and every configured alpha, plan the crop
/// window and emit crop tasks (plus cropped PNGs) under <out>/alpha_<a>/.
inline int crop_plan(const RunConfig& cfg, const CropPlanOptions& opt, std::ostream& log) {
  SceneStore scenes(opt.scenes_dir);
  struct AlphaOut {
    double alpha;
    fs::path dir;
    std::unique_ptr<JsonlWriter> crops, tasks;
  };
  std::vector<AlphaOut> outs;
  for (double a : cfg.alphas) {
    AlphaOut ao{a, opt.out_dir / alpha_dir_name(a), nullptr, nullptr};
    fs::create_directories(ao.dir / "images");
    ao.crops = std::make_unique<JsonlWriter>(ao.dir / "crops.jsonl");
    ao.tasks = std::make_unique<JsonlWriter>(ao.dir / "tasks.jsonl");
    outs.push_back(std::move(ao));
  }

  std::size_t errors = 0, planned = 0;
  std::map<std::string, Image> image_cache;
  for (const auto& jl : read_jsonl(opt.predictions)) {
    auto fail = [&](const std::string& msg) {
      ++errors;
      log << opt.predictions.string() << ":" << jl.line_no << ": " << msg << "\n";
    };
    if (!jl.value) {
      fail("invalid JSON: " + jl.parse_error);
      continue;
    }
    auto parsed = parse_prediction(*jl.value, format_of(cfg));
    if (!parsed.record) {
      fail("schema: " + describe(parsed.issues));
      continue;
    }
    const auto& r = *parsed.record;
    if (r.error) {
      fail("model failure: " + *r.error);
      continue;
    }
    if (r.pass != Pass::Full) {
      fail("crop planning needs full-pass predictions");
      continue;
    }
    const SceneManifest* scene = scenes.find(r.scene_id);
    if (!scene) {
      fail("unknown scene_id '" + r.scene_id + "'");
      continue;
    }
    const Image* full = nullptr;
    if (opt.write_images) {
      auto it = image_cache.find(r.scene_id);
      if (it == image_cache.end()) {
        image_cache.clear();
        it = image_cache.emplace(r.scene_id, read_png(scenes.dir() / scene->image)).first;
      }
      full = &it->second;
    }
    for (auto& ao : outs) {
      try {
        const CropWindow w = plan_crop(r.pred, scene->dims, {ao.alpha});
        const std::string image_name = "images/" + file_safe(r.scene_id + "." + r.model_id) + ".png";
        if (full) write_png(ao.dir / image_name, crop_pixels(*full, w));
        ojson c;
        c["scene_id"] = r.scene_id;
        c["model_id"] = r.model_id;
        c["alpha"] = sig9(ao.alpha);
        c["pred"] = point_to_json(r.pred);
        c["crop_window"] = crop_window_to_json(w);
        ao.crops->write(c);
        Task t{r.scene_id, image_name, r.instruction, Pass::Crop, w, PassProvenance{r.pred, r.raw_text}, r.model_id};
        ao.tasks->write(task_to_json(t));
        ++planned;
      } catch (const Error& e) {
        fail(e.what());
      }
    }
  }
  log << "planned " << planned << " crops, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// mock-predict

struct MockOptions {
  fs::path tasks;
  fs::path scenes_dir;
  MockMode mode = MockMode::Mixed;
  std::optional<std::string> model_id;
  std::optional<std::string> split;
  fs::path out;
};

inline int mock_predict(const RunConfig& cfg, const MockOptions& opt, std::ostream& log) {
  ensure_parent(opt.out);
  SceneStore scenes(opt.scenes_dir);
  JsonlWriter out(opt.out);
  std::size_t errors = 0, written = 0;
  for (const auto& jl : read_jsonl(opt.tasks)) {
    auto fail = [&](const std::string& msg) {
      ++errors;
      log << opt.tasks.string() << ":" << jl.line_no << ": " << msg << "\n";
    };
    if (!jl.value) {
      fail("invalid JSON: " + jl.parse_error);
      continue;
    }
    auto parsed = parse_task(*jl.value);
    if (!parsed.task) {
      fail("schema: " + describe(parsed.issues));
      continue;
    }
    const Task& t = *parsed.task;
    const SceneManifest* scene = scenes.find(t.scene_id);
    if (!scene) {
      fail("unknown scene_id '" + t.scene_id + "'");
      continue;
    }
    const std::string model = opt.model_id ? *opt.model_id
                              : t.model_id ? *t.model_id
                                           : "mock-" + std::string(to_string(opt.mode));
    PredictionRecord r = glens::mock_predict(t, *scene, opt.mode, cfg.seed, model);
    if (opt.split) r.split = opt.split;
    out.write(prediction_to_json(r));
    ++written;
  }
  log << "emitted " << written << " mock predictions, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// refine

struct RefineOptions {
  fs::path full;
  fs::path crop;
  fs::path out;
};

/// Join full-pass and crop-pass predictions on (scene_id, model_id) and emit
/// the crop answer remapped into the full image, keeping both passes as
/// provenance. Unmatched records on either side are data errors.
inline int refine(const RunConfig& cfg, const RefineOptions& opt, std::ostream& log) {
  ensure_parent(opt.out);
  std::size_t errors = 0, written = 0;
  auto fail = [&](const fs::path& f, std::size_t line, const std::string& msg) {
    ++errors;
    log << f.string() << ":" << line << ": " << msg << "\n";
  };

  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::pair<std::size_t, PredictionRecord>> firsts;
  for (const auto& jl : read_jsonl(opt.full)) {
    if (!jl.value) {
      fail(opt.full, jl.line_no, "invalid JSON: " + jl.parse_error);
      continue;
    }
    auto parsed = parse_prediction(*jl.value, format_of(cfg));
    if (!parsed.record) {
      fail(opt.full, jl.line_no, "schema: " + describe(parsed.issues));
      continue;
    }
    auto& r = *parsed.record;
    if (r.error) {
      fail(opt.full, jl.line_no, "model failure: " + *r.error);
      continue;
    }
    if (r.pass != Pass::Full) {
      fail(opt.full, jl.line_no, "expected a full-pass record");
      continue;
    }
    firsts.emplace(Key{r.scene_id, r.model_id}, std::pair{jl.line_no, r});
  }

  JsonlWriter out(opt.out);
  std::set<Key> matched;
  for (const auto& jl : read_jsonl(opt.crop)) {
    if (!jl.value) {
      fail(opt.crop, jl.line_no, "invalid JSON: " + jl.parse_error);
      continue;
    }
    auto parsed = parse_prediction(*jl.value, format_of(cfg));
    if (!parsed.record) {
      fail(opt.crop, jl.line_no, "schema: " + describe(parsed.issues));
      continue;
    }
    const auto& second = *parsed.record;
    if (second.error) {
      fail(opt.crop, jl.line_no, "model failure: " + *second.error);
      continue;
    }
    if (second.pass != Pass::Crop || second.refined) {
      fail(opt.crop, jl.line_no, "expected an unrefined crop-pass record");
      continue;
    }
    const Key key{second.scene_id, second.model_id};
    auto it = firsts.find(key);
    if (it == firsts.end()) {
      fail(opt.crop, jl.line_no, "no full-pass counterpart for scene '" + second.scene_id + "'");
      continue;
    }
    matched.insert(key);
    const auto& first = it->second.second;
    const RefinedPoint rp = glens::refine(first.pred, second.pred, *second.crop_window);

    PredictionRecord r = second;
    r.raw_text.reset();
    r.pred = {std::clamp(rp.final_point.x, 0.0, 1.0), std::clamp(rp.final_point.y, 0.0, 1.0)};
    if (!r.split) r.split = first.split;
    r.refined = RefinedFrom{{first.pred, first.raw_text}, {second.pred, second.raw_text}};
    out.write(prediction_to_json(r));
    ++written;
  }
  for (const auto& [key, entry] : firsts)
    if (!matched.count(key)) fail(opt.full, entry.first, "no crop-pass counterpart for scene '" + key.first + "'");

  log << "refined " << written << " records, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// report

struct ReportCommandOptions {
  std::vector<fs::path> eval_files;
  fs::path out_dir;
  std::vector<std::string> splits;
};

inline int report(const RunConfig& cfg, const ReportCommandOptions& opt, std::ostream& log) {
  std::vector<EvalRecord> records;
  std::size_t errors = 0, skipped = 0;
  for (const auto& file : opt.eval_files) {
    for (const auto& jl : read_jsonl(file)) {
      if (!jl.value) {
        ++errors;
        log << file.string() << ":" << jl.line_no << ": invalid JSON: " << jl.parse_error << "\n";
        continue;
      }
      auto parsed = parse_eval(*jl.value);
      if (parsed.is_error_entry) {
        ++skipped;
        continue;
      }
      if (!parsed.record) {
        ++errors;
        log << file.string() << ":" << jl.line_no << ": schema: " << describe(parsed.issues) << "\n";
        continue;
      }
      records.push_back(std::move(*parsed.record));
    }
  }
  if (records.empty()) {
    log << "error: no evaluation records to report\n";
    return kExitData;
  }

  ReportOptions ro;
  ro.thresholds = cfg.thresholds;
  ro.ttest = cfg.ttest == "student" ? stats::TTestKind::StudentPooled : stats::TTestKind::Welch;
  ro.weighted_average = cfg.weighted_average;
  ro.splits = opt.splits;
  ReportBundle bundle = build_report(records, ro);
  bundle.skipped_error_entries = skipped;

  fs::create_directories(opt.out_dir / "plots");
  write_text(opt.out_dir / "report.json", render_json(bundle).dump(2) + "\n");
  write_text(opt.out_dir / "report.md", render_markdown(bundle));
  write_text(opt.out_dir / "plots" / "category_distribution.csv", render_category_csv(bundle));
  write_text(opt.out_dir / "plots" / "threshold_curve.csv", render_threshold_csv(bundle));
  write_text(opt.out_dir / "plots" / "pss_by_category.csv", render_pss_csv(bundle));
  if (bundle.accuracy_error) {
    ++errors;
    log << "error: " << *bundle.accuracy_error << "\n";
  }
  log << "report over " << records.size() << " records written to " << opt.out_dir.string() << "\n";
  return errors == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// import-screenspot

struct ImportScreenSpotOptions {
  fs::path annotations;  // ScreenSpot JSON list
  fs::path images_dir;
  std::string platform;  // "desktop", "mobile" or "web"; prefixes the split label
  fs::path out_dir;
};

/// Convert ScreenSpot annotations (img_filename, pixel bbox [x, y, w, h],
/// instruction, data_type) into target-only manifests and a tasks.jsonl.
/// Only the target box is known, so Misleading cannot occur on these scenes.
inline int import_screenspot(const ImportScreenSpotOptions& opt, std::ostream& log) {
  std::ifstream in(opt.annotations);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + opt.annotations.string());
  nlohmann::json list;
  try {
    in >> list;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, opt.annotations.string() + ": " + e.what());
  }
  if (!list.is_array()) throw Error(ErrorCode::InvalidArgument, "ScreenSpot annotations must be a JSON array");

  fs::create_directories(opt.out_dir);
  JsonlWriter tasks(opt.out_dir / "tasks.jsonl");
  std::size_t errors = 0, written = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      const auto& a = list[i];
      const fs::path image = opt.images_dir / a.at("img_filename").get<std::string>();
      const Image img = read_png(image);
      const auto& b = a.at("bbox");
      const double W = static_cast<double>(img.width), H = static_cast<double>(img.height);
      const BBox box{round6(b.at(0).get<double>() / W), round6(b.at(1).get<double>() / H),
                     round6((b.at(0).get<double>() + b.at(2).get<double>()) / W),
                     round6((b.at(1).get<double>() + b.at(3).get<double>()) / H)};
      if (!is_valid(box)) throw Error(ErrorCode::InvalidScene, "bbox outside the image");
      char id[32];
      std::snprintf(id, sizeof(id), "ss_%05zu", i);
      SceneManifest m;
      m.scene_id = id;
      m.background = image.string();
      m.image = fs::absolute(image).string();
      m.dims = img.dims();
      m.placements.push_back({"target", a.value("instruction", std::string{}), box});
      m.target_icon_id = "target";
      m.instruction = a.at("instruction").get<std::string>();
      m.split = opt.platform + " " + a.value("data_type", std::string("unknown"));
      write_text(opt.out_dir / (m.scene_id + ".json"), manifest_to_string(m));
      tasks.write(task_to_json({m.scene_id, m.image, m.instruction, Pass::Full, std::nullopt, std::nullopt, std::nullopt}));
      ++written;
    } catch (const std::exception& e) {
      ++errors;
      log << opt.annotations.string() << "[" << i << "]: " << e.what() << "\n";
    }
  }
  log << "imported " << written << " ScreenSpot samples, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitData;
}

}  // namespace glens::pipeline
