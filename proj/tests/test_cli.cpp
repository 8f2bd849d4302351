#include <gtest/gtest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "support.hpp"

using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + GLENS_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("gen-scenes --count"), 1);
  EXPECT_EQ(run("classify --predictions x.jsonl"), 1);
  EXPECT_EQ(run("gen-scenes --count 1 --out /tmp/x --tau -1"), 1);
  EXPECT_EQ(run("gen-scenes --count 1 --out /tmp/x --alpha 1.5"), 1);
  EXPECT_EQ(run("score --predictions x --out y --strict-format --lenient-format"), 1);
}

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("classify --help"), 0);
}

TEST(Cli, BadConfigExitsOne) {
  TempDir dir;
  spit(dir / "cfg.json", R"({"not_a_key": 1})");
  EXPECT_EQ(run("gen-scenes --count 1 --out " + q(dir / "s") + " --config " + q(dir / "cfg.json")), 1);
  EXPECT_EQ(run("gen-scenes --count 1 --out " + q(dir / "s"), "GLENS_TAU=abc"), 1);
}

TEST(Cli, DataErrorsExitTwo) {
  TempDir dir;
  EXPECT_EQ(run("classify --predictions " + q(dir / "missing.jsonl") + " --scenes " + q(dir.path()) + " --out " +
                q(dir / "e.jsonl")),
            2);
  spit(dir / "bad.jsonl", "{\"schema_version\": 1}\n");
  EXPECT_EQ(run("validate --kind predictions " + q(dir / "bad.jsonl")), 2);
}

TEST(Cli, PipelineRuns) {
  TempDir dir;
  const std::string scenes = q(dir / "scenes");
  ASSERT_EQ(run("gen-scenes --count 3 --seed 4 --width 320 --height 200 --out " + scenes), 0);
  ASSERT_EQ(run("mock-predict --mode target --tasks " + q(dir / "scenes" / "tasks.jsonl") + " --scenes " + scenes +
                " --out " + q(dir / "p.jsonl")),
            0);
  ASSERT_EQ(run("validate --kind predictions " + q(dir / "p.jsonl")), 0);
  ASSERT_EQ(run("classify --predictions " + q(dir / "p.jsonl") + " --scenes " + scenes + " --out " + q(dir / "e.jsonl")),
            0);
  EXPECT_NE(slurp(dir / "e.jsonl").find("\"Correct\""), std::string::npos);
}

TEST(Cli, ConfigPrecedence) {
  TempDir dir;
  const std::string base = "gen-scenes --count 1 --width 320 --height 200 ";
  spit(dir / "cfg.json", R"({"seed": 1})");
  auto manifest = [&](const std::string& name) { return slurp(dir / name / "scene_00000.json"); };

  ASSERT_EQ(run(base + "--seed 1 --out " + q(dir / "s1")), 0);
  ASSERT_EQ(run(base + "--seed 2 --out " + q(dir / "s2")), 0);
  ASSERT_EQ(run(base + "--seed 3 --out " + q(dir / "s3")), 0);
  ASSERT_NE(manifest("s1"), manifest("s2"));

  ASSERT_EQ(run(base + "--config " + q(dir / "cfg.json") + " --out " + q(dir / "file")), 0);
  EXPECT_EQ(manifest("file"), manifest("s1"));
  ASSERT_EQ(run(base + "--config " + q(dir / "cfg.json") + " --out " + q(dir / "env"), "GLENS_SEED=2"), 0);
  EXPECT_EQ(manifest("env"), manifest("s2"));
  ASSERT_EQ(run(base + "--config " + q(dir / "cfg.json") + " --seed 3 --out " + q(dir / "flag"), "GLENS_SEED=2"), 0);
  EXPECT_EQ(manifest("flag"), manifest("s3"));
  ASSERT_EQ(run(base + "--out " + q(dir / "envcfg"), "GLENS_CONFIG=" + q(dir / "cfg.json")), 0);
  EXPECT_EQ(manifest("envcfg"), manifest("s1"));
}
