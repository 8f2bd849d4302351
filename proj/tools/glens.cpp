// glens: command-line front end for scene generation, response
// classification, confidence scoring, crop refinement and reporting.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glens/config.hpp"
#include "glens/error.hpp"
#include "glens/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
namespace pl = glens::pipeline;

struct SharedFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::vector<double> alphas;
  std::optional<double> c;
  bool strict_format = false;
  bool lenient_format = false;
  bool raw_logits = false;
  std::optional<std::string> out;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--seed", f.seed, "Seed for every random draw");
  cmd->add_option("--tau", f.tau, "Distance threshold for Biased/Misleading");
  cmd->add_option("--alpha", f.alphas, "Crop ratio; repeat to sweep several");
  cmd->add_option("--C", f.c, "PSS normalization constant");
  cmd->add_flag("--strict-format", f.strict_format, "Accept only \"[x, y]\" coordinate text");
  cmd->add_flag("--lenient-format", f.lenient_format, "Also accept \"(x, y)\" and bare \"x, y\"");
  cmd->add_flag("--raw-logits", f.raw_logits, "Score digit vectors as given, without softmax");
  cmd->add_option("--out", f.out, "Output file or directory");
}

glens::RunConfig resolve_config(const SharedFlags& f) {
  glens::RunConfig cfg = glens::load_run_config(f.config ? std::optional<fs::path>(*f.config) : std::nullopt);
  if (f.seed) cfg.seed = *f.seed;
  if (f.tau) cfg.tau = *f.tau;
  if (!f.alphas.empty()) cfg.alphas = f.alphas;
  if (f.c) cfg.c = *f.c;
  if (f.strict_format && f.lenient_format)
    throw glens::Error(glens::ErrorCode::InvalidArgument, "--strict-format and --lenient-format are exclusive");
  if (f.strict_format) cfg.strict_format = true;
  if (f.lenient_format) cfg.strict_format = false;
  if (f.raw_logits) cfg.normalize_input = false;
  cfg.validate();
  return cfg;
}

fs::path require_out(const SharedFlags& f) {
  if (!f.out) throw glens::Error(glens::ErrorCode::InvalidArgument, "--out is required");
  return *f.out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glens: localization hallucination analysis for GUI agents"};
  app.require_subcommand(1);
  SharedFlags flags;

  auto* gen = app.add_subcommand("gen-scenes", "Generate annotated synthetic icon scenes");
  add_shared(gen, flags);
  std::size_t count = 0;
  std::optional<std::string> icons_dir, backgrounds_dir, split;
  std::optional<std::size_t> icons_per_scene;
  std::optional<std::int64_t> width, height;
  gen->add_option("--count", count, "Number of scenes")->required();
  gen->add_option("--icons", icons_dir, "Icon directory with index.json (default: built-in icons)");
  gen->add_option("--backgrounds", backgrounds_dir, "Directory of PNG backgrounds (default: procedural)");
  gen->add_option("--icons-per-scene", icons_per_scene, "Icons placed per scene");
  gen->add_option("--width", width, "Procedural background width");
  gen->add_option("--height", height, "Procedural background height");
  gen->add_option("--split", split, "Split label stored in each manifest");

  auto* val = app.add_subcommand("validate", "Check record files against their schema");
  add_shared(val, flags);
  std::string kind_name = "predictions";
  std::vector<std::string> val_files;
  val->add_option("--kind", kind_name, "predictions | tasks | eval | manifest")
      ->check(CLI::IsMember({"predictions", "tasks", "eval", "manifest"}));
  val->add_option("files", val_files, "Files to check")->required();

  auto* cls = app.add_subcommand("classify", "Categorize predictions as Correct/Biased/Misleading/Confusion");
  add_shared(cls, flags);
  std::string predictions, scenes_dir;
  cls->add_option("--predictions", predictions, "PredictionRecord JSONL")->required();
  cls->add_option("--scenes", scenes_dir, "Scene manifest directory")->required();

  auto* scr = app.add_subcommand("score", "Attach Peak Sharpness Score and perplexity");
  add_shared(scr, flags);
  std::optional<std::string> eval_in;
  scr->add_option("--predictions", predictions, "PredictionRecord JSONL")->required();
  scr->add_option("--eval", eval_in, "EvalRecord JSONL to join scores onto");

  auto* plan = app.add_subcommand("crop-plan", "Plan context-aware crops around first-pass predictions");
  add_shared(plan, flags);
  bool no_images = false;
  plan->add_option("--predictions", predictions, "Full-pass PredictionRecord JSONL")->required();
  plan->add_option("--scenes", scenes_dir, "Scene manifest directory")->required();
  plan->add_flag("--no-images", no_images, "Only write crop plans and tasks");

  auto* mock = app.add_subcommand("mock-predict", "Emit predictions from a built-in synthetic model");
  add_shared(mock, flags);
  std::string tasks_in, mode_name = "mixed";
  std::optional<std::string> model_id;
  mock->add_option("--tasks", tasks_in, "tasks.jsonl from gen-scenes or crop-plan")->required();
  mock->add_option("--scenes", scenes_dir, "Scene manifest directory")->required();
  mock->add_option("--mode", mode_name, "center | target | offset | distractor | random | mixed")
      ->check(CLI::IsMember({"center", "target", "offset", "distractor", "random", "mixed"}));
  mock->add_option("--model-id", model_id, "model_id written to each record");
  mock->add_option("--split", split, "Split label written to each record");

  auto* ref = app.add_subcommand("refine", "Join full and crop passes, remap crop answers to the full image");
  add_shared(ref, flags);
  std::string full_in, crop_in;
  ref->add_option("--full", full_in, "Full-pass predictions")->required();
  ref->add_option("--crop", crop_in, "Crop-pass predictions")->required();

  auto* rep = app.add_subcommand("report", "Aggregate evaluation records into report tables");
  add_shared(rep, flags);
  std::vector<std::string> eval_files, splits;
  bool weighted = false, student = false;
  rep->add_option("--eval", eval_files, "EvalRecord JSONL (repeatable)")->required();
  rep->add_option("--splits", splits, "Split columns for the accuracy table");
  rep->add_flag("--weighted-avg", weighted, "Weight the accuracy average by split size");
  rep->add_flag("--student", student, "Pooled-variance Student t-test instead of Welch");

  auto* imp = app.add_subcommand("import-screenspot", "Convert ScreenSpot annotations to manifests");
  add_shared(imp, flags);
  std::string annotations, images_dir, platform;
  imp->add_option("--annotations", annotations, "ScreenSpot JSON file")->required();
  imp->add_option("--images", images_dir, "Directory holding the screenshots")->required();
  imp->add_option("--platform", platform, "desktop | mobile | web")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pl::kExitUsage;
  }

  glens::RunConfig cfg;
  try {
    cfg = resolve_config(flags);
    if (icons_per_scene) cfg.icons_per_scene = *icons_per_scene;
    if (width) cfg.width = *width;
    if (height) cfg.height = *height;
    if (weighted) cfg.weighted_average = true;
    if (student) cfg.ttest = "student";
    cfg.validate();
  } catch (const glens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pl::kExitUsage;
  }

  try {
    if (*gen) {
      pl::GenScenesOptions o;
      o.count = count;
      o.out_dir = require_out(flags);
      if (icons_dir) o.icons_dir = *icons_dir;
      if (backgrounds_dir) o.backgrounds_dir = *backgrounds_dir;
      o.split = split;
      return pl::gen_scenes(cfg, o, std::cerr);
    }
    if (*val) {
      std::vector<fs::path> files(val_files.begin(), val_files.end());
      return pl::validate(cfg, *pl::parse_record_kind(kind_name), files, std::cerr);
    }
    if (*cls) return pl::classify(cfg, {predictions, scenes_dir, require_out(flags)}, std::cerr);
    if (*scr) {
      pl::ScoreOptions o{predictions, std::nullopt, require_out(flags)};
      if (eval_in) o.eval = *eval_in;
      return pl::score(cfg, o, std::cerr);
    }
    if (*plan) return pl::crop_plan(cfg, {predictions, scenes_dir, require_out(flags), !no_images}, std::cerr);
    if (*mock) {
      pl::MockOptions o{tasks_in, scenes_dir, *glens::parse_mock_mode(mode_name), model_id, split, require_out(flags)};
      return pl::mock_predict(cfg, o, std::cerr);
    }
    if (*ref) return pl::refine(cfg, {full_in, crop_in, require_out(flags)}, std::cerr);
    if (*rep) {
      pl::ReportCommandOptions o;
      o.eval_files.assign(eval_files.begin(), eval_files.end());
      o.out_dir = require_out(flags);
      o.splits = splits;
      return pl::report(cfg, o, std::cerr);
    }
    if (*imp) return pl::import_screenspot({annotations, images_dir, platform, require_out(flags)}, std::cerr);
  } catch (const glens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == glens::ErrorCode::InvalidArgument ? pl::kExitUsage : pl::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pl::kExitData;
  }
  return pl::kExitUsage;
}
