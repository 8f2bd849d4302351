#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glens/error.hpp"
#include "glens/scenegen.hpp"

namespace glens {

// Settings shared by every command. Precedence when loading:
// command-line flag > GLENS_* environment variable > config file > default.
struct RunConfig {
  double tau = 0.05;
  std::vector<double> alphas{0.8};
  double c = 4.5;
  bool normalize_input = true;
  std::uint64_t seed = 0;
  std::string instruction_template = std::string(kDefaultInstructionTemplate);
  std::vector<double> thresholds{0.05, 0.10, 0.20, 0.30};
  bool strict_format = true;
  double margin = 0.02;
  double scale_min = 0.04;
  double scale_max = 0.10;
  std::size_t icons_per_scene = 6;
  std::int64_t width = 1280;
  std::int64_t height = 800;
  bool weighted_average = false;
  std::string ttest = "welch";

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, "config: " + m); };
    if (!(tau >= 0.0)) bad("tau must be >= 0");
    if (alphas.empty()) bad("at least one alpha is required");
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0)) bad("alpha must lie in (0,1)");
    if (!(c > 0.0)) bad("C must be > 0");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
      if (!(thresholds[i - 1] < thresholds[i])) bad("thresholds must be strictly ascending");
    if (instruction_template.find("{name}") == std::string::npos) bad("template must contain {name}");
    if (!(margin >= 0.0)) bad("margin must be >= 0");
    if (!(scale_min > 0.0 && scale_min <= scale_max && scale_max < 1.0)) bad("scale range must satisfy 0 < min <= max < 1");
    if (icons_per_scene < 1) bad("icons_per_scene must be >= 1");
    if (width < 1 || height < 1) bad("width and height must be >= 1");
    if (ttest != "welch" && ttest != "student") bad("ttest must be \"welch\" or \"student\"");
  }

  LayoutConstraints layout() const { return {margin, scale_min, scale_max, 1000}; }
};

inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "tau") cfg.tau = v.get<double>();
      else if (key == "alpha") {
        cfg.alphas = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      } else if (key == "C") cfg.c = v.get<double>();
      else if (key == "normalize_input") cfg.normalize_input = v.get<bool>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "template") cfg.instruction_template = v.get<std::string>();
      else if (key == "thresholds") cfg.thresholds = v.get<std::vector<double>>();
      else if (key == "strict_format") cfg.strict_format = v.get<bool>();
      else if (key == "margin") cfg.margin = v.get<double>();
      else if (key == "scale_min") cfg.scale_min = v.get<double>();
      else if (key == "scale_max") cfg.scale_max = v.get<double>();
      else if (key == "icons_per_scene") cfg.icons_per_scene = v.get<std::size_t>();
      else if (key == "width") cfg.width = v.get<std::int64_t>();
      else if (key == "height") cfg.height = v.get<std::int64_t>();
      else if (key == "weighted_average") cfg.weighted_average = v.get<bool>();
      else if (key == "ttest") cfg.ttest = v.get<std::string>();
      else throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  apply_config_json(cfg, j);
}

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
  if (const char* v = std::getenv(name)) return std::string(v);
  return std::nullopt;
}

namespace detail {

inline double parse_env_double(const char* name, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " is not a number: '" + v + "'");
  }
}

}  // namespace detail

// GLENS_SEED, GLENS_TAU, GLENS_ALPHA and GLENS_C override file values.
inline void apply_env(RunConfig& cfg, const EnvLookup& env) {
  if (auto v = env("GLENS_SEED")) {
    try {
      if (v->empty() || !std::isdigit(static_cast<unsigned char>((*v)[0]))) throw std::invalid_argument(*v);
      std::size_t used = 0;
      cfg.seed = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "GLENS_SEED is not an unsigned integer: '" + *v + "'");
    }
  }
  if (auto v = env("GLENS_TAU")) cfg.tau = detail::parse_env_double("GLENS_TAU", *v);
  if (auto v = env("GLENS_ALPHA")) cfg.alphas = {detail::parse_env_double("GLENS_ALPHA", *v)};
  if (auto v = env("GLENS_C")) cfg.c = detail::parse_env_double("GLENS_C", *v);
}

/// Defaults, then the config file (explicit path, else GLENS_CONFIG), then
/// the environment. Command-line overrides are applied by the caller.
inline RunConfig load_run_config(const std::optional<std::filesystem::path>& config_path,
                                 const EnvLookup& env = process_env) {
  RunConfig cfg;
  std::optional<std::filesystem::path> path = config_path;
  if (!path)
    if (auto v = env("GLENS_CONFIG")) path = *v;
  if (path) apply_config_file(cfg, *path);
  apply_env(cfg, env);
  return cfg;
}

}  // namespace glens
