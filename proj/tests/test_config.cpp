#include <gtest/gtest.h>

#include <map>

#include "glens/config.hpp"
#include "support.hpp"

using namespace glens;
using testing_support::TempDir;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const char* name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST(RunConfig, Defaults) {
  const RunConfig cfg = load_run_config(std::nullopt, fake_env({}));
  EXPECT_EQ(cfg.tau, 0.05);
  EXPECT_EQ(cfg.alphas, std::vector<double>{0.8});
  EXPECT_EQ(cfg.c, 4.5);
  EXPECT_TRUE(cfg.normalize_input);
  EXPECT_TRUE(cfg.strict_format);
  EXPECT_EQ(cfg.instruction_template, "Click the {name} icon.");
  EXPECT_EQ(cfg.thresholds, (std::vector<double>{0.05, 0.10, 0.20, 0.30}));
  EXPECT_NO_THROW(cfg.validate());
}

TEST(RunConfig, FileThenEnvironment) {
  TempDir dir;
  testing_support::spit(dir / "cfg.json", R"({"tau": 0.1, "alpha": [0.6, 0.9], "C": 3, "seed": 5, "template": "Find {name}"})");
  const RunConfig from_file = load_run_config(dir / "cfg.json", fake_env({}));
  EXPECT_EQ(from_file.tau, 0.1);
  EXPECT_EQ(from_file.alphas, (std::vector<double>{0.6, 0.9}));
  EXPECT_EQ(from_file.c, 3.0);
  EXPECT_EQ(from_file.seed, 5u);
  EXPECT_EQ(from_file.instruction_template, "Find {name}");

  const RunConfig with_env =
      load_run_config(dir / "cfg.json", fake_env({{"GLENS_TAU", "0.2"}, {"GLENS_SEED", "9"}, {"GLENS_ALPHA", "0.5"}}));
  EXPECT_EQ(with_env.tau, 0.2);
  EXPECT_EQ(with_env.seed, 9u);
  EXPECT_EQ(with_env.alphas, std::vector<double>{0.5});
  EXPECT_EQ(with_env.c, 3.0);
}

TEST(RunConfig, ConfigPathFromEnvironment) {
  TempDir dir;
  testing_support::spit(dir / "cfg.json", R"({"tau": 0.07})");
  const RunConfig cfg = load_run_config(std::nullopt, fake_env({{"GLENS_CONFIG", (dir / "cfg.json").string()}}));
  EXPECT_EQ(cfg.tau, 0.07);
}

TEST(RunConfig, Errors) {
  TempDir dir;
  testing_support::spit(dir / "unknown.json", R"({"tua": 0.1})");
  EXPECT_GLENS_ERROR(load_run_config(dir / "unknown.json", fake_env({})), ErrorCode::InvalidArgument);
  testing_support::spit(dir / "typed.json", R"({"tau": "wide"})");
  EXPECT_GLENS_ERROR(load_run_config(dir / "typed.json", fake_env({})), ErrorCode::InvalidArgument);
  testing_support::spit(dir / "broken.json", R"({"tau": )");
  EXPECT_GLENS_ERROR(load_run_config(dir / "broken.json", fake_env({})), ErrorCode::InvalidArgument);
  EXPECT_GLENS_ERROR(load_run_config(dir / "absent.json", fake_env({})), ErrorCode::InvalidArgument);
  EXPECT_GLENS_ERROR(load_run_config(std::nullopt, fake_env({{"GLENS_TAU", "x"}})), ErrorCode::InvalidArgument);
  EXPECT_GLENS_ERROR(load_run_config(std::nullopt, fake_env({{"GLENS_SEED", "-3"}})), ErrorCode::InvalidArgument);
}

TEST(RunConfig, Validation) {
  auto bad = [](auto mutate) {
    RunConfig cfg;
    mutate(cfg);
    EXPECT_GLENS_ERROR(cfg.validate(), ErrorCode::InvalidArgument);
  };
  bad([](RunConfig& c) { c.tau = -0.01; });
  bad([](RunConfig& c) { c.alphas = {1.0}; });
  bad([](RunConfig& c) { c.alphas = {}; });
  bad([](RunConfig& c) { c.c = 0.0; });
  bad([](RunConfig& c) { c.thresholds = {0.1, 0.1}; });
  bad([](RunConfig& c) { c.instruction_template = "Click it"; });
  bad([](RunConfig& c) { c.scale_min = 0.2; });
  bad([](RunConfig& c) { c.icons_per_scene = 0; });
  bad([](RunConfig& c) { c.ttest = "anova"; });
}
