// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "glens/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
namespace pl = glens::pipeline;
using namespace glens;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.ok) ++failures;
  std::printf("[%s] %s: %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Coordinates on a coarse grid so equalities (d == tau, boundary clicks) occur.
double draw(std::mt19937_64& gen, bool grid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return grid ? static_cast<double>(gen() % 21) / 20.0 : u(gen);
}

BBox random_box(std::mt19937_64& gen, bool grid) {
  double a = draw(gen, grid), b = draw(gen, grid), c = draw(gen, grid), d = draw(gen, grid);
  if (a > c) std::swap(a, c);
  if (b > d) std::swap(b, d);
  if (a == c) c = std::min(1.0, a + 0.05), a = c - 0.05;
  if (b == d) d = std::min(1.0, b + 0.05), b = d - 0.05;
  return {a, b, c, d};
}

oracle::Box to_oracle(const BBox& b) { return {b.x1, b.y1, b.x2, b.y2}; }

ResponseCategory from_oracle(oracle::Branch b) {
  switch (b) {
    case oracle::Branch::Correct: return ResponseCategory::Correct;
    case oracle::Branch::Biased: return ResponseCategory::Biased;
    case oracle::Branch::Misleading: return ResponseCategory::Misleading;
    case oracle::Branch::Confusion: return ResponseCategory::Confusion;
  }
  return ResponseCategory::Confusion;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GLENS_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> category_column(const fs::path& eval) {
  std::vector<std::string> out;
  for (const auto& jl : pl::read_jsonl(eval)) out.push_back(jl.value->value("category", std::string("<error>")));
  return out;
}

}  // namespace

int main() {
  criterion("PSS identity", [] {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int p = 1; p <= 8; ++p) worst = std::max(worst, std::abs(pss(one_hot(p), {4.5, false}).score - 1.0));
    const double edge = pss(one_hot(9), {4.5, false}).score;
    DigitDistribution flat;
    flat.values.fill(0.1);
    const double uniform = pss(flat, {4.5, false}).score;
    const double secs = seconds_since(t0);
    const bool ok = worst <= 1e-12 && std::abs(edge - 2.0 / 9.0) <= 1e-12 && uniform == 0.0 && secs < 1.0;
    return Outcome{ok, "max |interior-1|=" + fmt("%.3g", worst) + ", edge=" + fmt("%.15f", edge) +
                           ", uniform=" + fmt("%g", uniform) + ", " + fmt("%.4f", secs) + " s"};
  });

  criterion("PSS oracle equivalence", [] {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int peak_mismatch = 0;
    for (int i = 0; i < 10000; ++i) {
      std::array<double, 10> v{};
      double total = 0.0;
      const double spike = u(gen) < 0.5 ? 8.0 * u(gen) : 0.0;
      for (auto& x : v) total += x = u(gen);
      v[gen() % 10] += spike;
      total += spike;
      for (auto& x : v) x /= total;
      const auto got = pss(make_digit_distribution(v), {4.5, false});
      const auto want = oracle::pss(v);
      worst = std::max(worst, std::abs(got.score - want.score));
      peak_mismatch += got.peak_index != want.peak;
    }
    return Outcome{worst <= 1e-12 && peak_mismatch == 0,
                   "10000 cases, max |diff|=" + fmt("%.3g", worst) + ", peak mismatches=" + std::to_string(peak_mismatch)};
  });

  criterion("Classification oracle equivalence", [] {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int disagreements = 0;
    double worst_distance = 0.0;
    std::array<int, 4> seen{};
    for (int i = 0; i < 10000; ++i) {
      const bool grid = i % 2 == 0;
      const BBox target = random_box(gen, grid);
      std::vector<Distractor> ds;
      std::vector<oracle::Box> obs;
      const std::size_t n = gen() % 9;
      for (std::size_t k = 0; k < n; ++k) {
        BBox b = random_box(gen, grid);
        if (b == target) continue;
        ds.push_back({"d" + std::to_string(k), b});
        obs.push_back(to_oracle(b));
      }
      const Point p{draw(gen, grid), draw(gen, grid)};
      const double tau = grid ? static_cast<double>(gen() % 6) / 20.0 : 0.2 * u(gen);
      const auto got = classify(p, target, ds, {tau});
      const auto want = oracle::classify(p.x, p.y, to_oracle(target), obs, tau);
      bool same = got.category == from_oracle(want.branch);
      if (want.nearest) same = same && got.nearest_distractor_id == ds[*want.nearest].id;
      else same = same && !got.nearest_distractor_id;
      disagreements += !same;
      // sqrt(dx*dx + dy*dy) against hypot: equal up to rounding
      worst_distance = std::max(worst_distance, std::abs(got.distance_to_target - want.target_distance));
      ++seen[static_cast<std::size_t>(got.category)];
    }
    return Outcome{disagreements == 0 && worst_distance <= 1e-15,
                   "10000 cases, disagreements=" + std::to_string(disagreements) + ", max distance diff=" +
                       fmt("%.3g", worst_distance) +
                                           ", mix C/B/M/X=" + std::to_string(seen[0]) + "/" + std::to_string(seen[1]) +
                                           "/" + std::to_string(seen[2]) + "/" + std::to_string(seen[3])};
  });

  criterion("Threshold-curve monotonicity", [] {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int s = 0; s < 1000; ++s) {
      std::vector<DistanceObservation> rs(1 + gen() % 200);
      for (auto& r : rs) {
        r.contained = u(gen) < 0.3;
        r.distance_to_target = r.contained ? 0.0 : (s % 3 == 0 ? static_cast<double>(gen() % 8) / 20.0 : 0.5 * u(gen));
      }
      std::vector<double> th(1 + gen() % 6);
      for (auto& t : th) t = s % 3 == 0 ? static_cast<double>(gen() % 8) / 20.0 : 0.5 * u(gen);
      std::sort(th.begin(), th.end());
      th.erase(std::unique(th.begin(), th.end()), th.end());
      const auto curve = threshold_curve(rs, th);
      for (std::size_t k = 1; k < curve.size(); ++k) violations += curve[k] < curve[k - 1];
      violations += curve.back() > 1.0 || curve.front() < 0.0;
    }
    return Outcome{violations == 0, "1000 random sets, violations=" + std::to_string(violations)};
  });

  criterion("Crop containment and centering", [] {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad_bounds = 0, bad_contain = 0, bad_center = 0, centered_cases = 0;
    double worst_roundtrip = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const PixelDims dims{1 + static_cast<std::int64_t>(gen() % 4000), 1 + static_cast<std::int64_t>(gen() % 4000)};
      const double alpha = std::max(0.01, u(gen) * 0.99);
      const Point p{u(gen), u(gen)};
      if (std::floor(alpha * static_cast<double>(std::min(dims.width, dims.height))) < 1) continue;
      const CropWindow w = plan_crop(p, dims, {alpha});
      bad_bounds += w.x_start < 0 || w.y_start < 0 || w.x_start + w.width > dims.width ||
                    w.y_start + w.height > dims.height;
      const auto px = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(p.x * dims.width)), dims.width - 1);
      const auto py = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(p.y * dims.height)), dims.height - 1);
      bad_contain += px < w.x_start || px >= w.x_start + w.width || py < w.y_start || py >= w.y_start + w.height;
      const double cx = std::floor(p.x * dims.width - w.width / 2.0), cy = std::floor(p.y * dims.height - w.height / 2.0);
      if (cx > 0 && cx < static_cast<double>(dims.width - w.width) && cy > 0 &&
          cy < static_cast<double>(dims.height - w.height)) {
        ++centered_cases;
        bad_center += std::abs(p.x * dims.width - (w.x_start + w.width / 2.0)) > 1.0 ||
                      std::abs(p.y * dims.height - (w.y_start + w.height / 2.0)) > 1.0;
      }
      const Point back = remap_to_full(to_crop(p, w), w);
      worst_roundtrip = std::max({worst_roundtrip, std::abs(back.x - p.x), std::abs(back.y - p.y)});
    }
    const bool ok = !bad_bounds && !bad_contain && !bad_center && worst_roundtrip < 1e-12;
    return Outcome{ok, "out-of-bounds=" + std::to_string(bad_bounds) + ", not containing p=" + std::to_string(bad_contain) +
                           ", off-center=" + std::to_string(bad_center) + "/" + std::to_string(centered_cases) +
                           ", max roundtrip=" + fmt("%.3g", worst_roundtrip)};
  });

  criterion("Scene self-consistency", [] {
    TempDir a, b;
    RunConfig cfg;
    cfg.seed = 20240601;
    std::ostringstream log;
    pl::GenScenesOptions o;
    o.count = 200;
    o.out_dir = a.path();
    if (pl::gen_scenes(cfg, o, log) != 0) return Outcome{false, log.str()};
    o.out_dir = b.path();
    if (pl::gen_scenes(cfg, o, log) != 0) return Outcome{false, log.str()};
    int not_correct = 0, margin = 0, differing = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      const auto name = pl::scene_name(i);
      const auto m = read_manifest(a.path() / (name + ".json"));
      if (classify(m.target().bbox.center(), m.target().bbox, m.distractors()).category != ResponseCategory::Correct)
        ++not_correct;
      for (std::size_t x = 0; x < m.placements.size(); ++x)
        for (std::size_t y = 0; y < x; ++y)
          margin += box_to_box_distance(m.placements[x].bbox, m.placements[y].bbox) < cfg.margin;
      for (const auto& f : {name + ".json", name + ".png"}) differing += slurp(a.path() / f) != slurp(b.path() / f);
    }
    differing += slurp(a.path() / "tasks.jsonl") != slurp(b.path() / "tasks.jsonl");
    return Outcome{!not_correct && !margin && !differing,
                   "200 scenes, target-center not Correct=" + std::to_string(not_correct) +
                       ", margin violations=" + std::to_string(margin) + ", differing files=" + std::to_string(differing)};
  });

  criterion("Perplexity", [] {
    const std::vector<double> tenth(6, 0.1), ones(4, 1.0);
    const double p10 = perplexity(tenth), p1 = perplexity(ones);
    return Outcome{std::abs(p10 - 10.0) <= 1e-12 && p1 == 1.0,
                   "uniform 0.1 -> " + fmt("%.15f", p10) + ", all-ones -> " + fmt("%.17g", p1)};
  });

  criterion("Welch test", [] {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> z(0.0, 1.0);
    double worst_t = 0.0, worst_p = 0.0;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> a(2 + gen() % 60), b(2 + gen() % 60);
      const double shift = 0.8 * z(gen), sa = 0.05 + std::abs(z(gen)), sb = 0.05 + std::abs(z(gen));
      for (auto& x : a) x = 0.5 + shift + sa * z(gen);
      for (auto& x : b) x = 0.5 + sb * z(gen);
      const auto got = stats::welch_t_test(a, b);
      const auto want = oracle::welch(a, b);
      worst_t = std::max(worst_t, std::abs(got.t - want.t) / std::max(1.0, std::abs(want.t)));
      worst_p = std::max(worst_p, std::abs(got.p - want.p));
    }
    const std::vector<double> same{0.3, 0.6, 0.45, 0.9};
    const double p_same = stats::welch_t_test(same, same).p;
    return Outcome{worst_t <= 1e-9 && worst_p <= 1e-9 && p_same == 1.0,
                   "100 pairs, max t err=" + fmt("%.3g", worst_t) + ", max p err=" + fmt("%.3g", worst_p) +
                       ", identical groups p=" + fmt("%g", p_same)};
  });

  criterion("End-to-end mock pipeline", [] {
    TempDir dir;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string seed = " --seed 7";
    const std::string scenes = q(dir / "scenes");
    const std::vector<std::string> steps{
        "gen-scenes --count 60" + seed + " --out " + scenes,
        "mock-predict --mode mixed --model-id mock-mixed" + seed + " --tasks " + q(dir / "scenes" / "tasks.jsonl") +
            " --scenes " + scenes + " --out " + q(dir / "pred.jsonl"),
        "classify --predictions " + q(dir / "pred.jsonl") + " --scenes " + scenes + " --out " + q(dir / "eval.jsonl"),
        "score --predictions " + q(dir / "pred.jsonl") + " --eval " + q(dir / "eval.jsonl") + " --out " +
            q(dir / "scored.jsonl"),
        "report --eval " + q(dir / "scored.jsonl") + " --out " + q(dir / "report"),
    };
    for (const auto& s : steps)
      if (int rc = run_cli(s); rc != 0) return Outcome{false, "step failed (exit " + std::to_string(rc) + "): " + s};
    const double secs = seconds_since(t0);
    const fs::path golden = fs::path(GLENS_GOLDEN_DIR) / "report.md";
    const std::string produced = slurp(dir / "report" / "report.md");
    if (const char* regen = std::getenv("GLENS_REGENERATE_GOLDEN"); regen && std::string(regen) == "1") {
      fs::create_directories(golden.parent_path());
      std::ofstream(golden, std::ios::binary) << produced;
    }
    const bool same = fs::exists(golden) && slurp(golden) == produced;
    return Outcome{same && secs < 30.0, std::string(same ? "report.md matches golden" : "report.md differs from golden") +
                                            ", " + fmt("%.2f", secs) + " s"};
  });

  criterion("Biased-repair property", [] {
    TempDir dir;
    RunConfig cfg;
    cfg.seed = 314;
    cfg.width = 800;
    cfg.height = 800;
    cfg.scale_min = 0.06;
    cfg.scale_max = 0.10;
    cfg.alphas = {0.8};
    std::ostringstream log;
    const fs::path scenes = dir / "scenes";
    pl::GenScenesOptions g;
    g.count = 100;
    g.out_dir = scenes;
    auto check = [&](int rc) {
      if (rc != 0) throw std::runtime_error(log.str());
    };
    check(pl::gen_scenes(cfg, g, log));
    check(pl::mock_predict(cfg, {scenes / "tasks.jsonl", scenes, MockMode::Offset, std::string("offset"), std::nullopt,
                                 dir / "full.jsonl"},
                           log));
    check(pl::classify(cfg, {dir / "full.jsonl", scenes, dir / "full_eval.jsonl"}, log));
    check(pl::crop_plan(cfg, {dir / "full.jsonl", scenes, dir / "crops", false}, log));
    check(pl::mock_predict(cfg, {dir / "crops" / "alpha_0.8" / "tasks.jsonl", scenes, MockMode::Target,
                                 std::string("offset"), std::nullopt, dir / "crop.jsonl"},
                           log));
    check(pl::refine(cfg, {dir / "full.jsonl", dir / "crop.jsonl", dir / "refined.jsonl"}, log));
    check(pl::classify(cfg, {dir / "refined.jsonl", scenes, dir / "refined_eval.jsonl"}, log));

    double min_side = 1.0;
    for (std::size_t i = 0; i < g.count; ++i) {
      const auto m = read_manifest(scenes / (pl::scene_name(i) + ".json"));
      for (const auto& p : m.placements) min_side = std::min({min_side, p.bbox.width(), p.bbox.height()});
    }
    const auto before = category_column(dir / "full_eval.jsonl");
    const auto after = category_column(dir / "refined_eval.jsonl");
    if (before.size() != after.size()) return Outcome{false, "record count changed through refine"};
    std::size_t biased = 0, repaired = 0;
    for (std::size_t i = 0; i < before.size(); ++i)
      if (before[i] == "Biased") {
        ++biased;
        repaired += after[i] == "Correct";
      }
    return Outcome{biased > 0 && repaired == biased && min_side > 0.05,
                   std::to_string(repaired) + "/" + std::to_string(biased) + " Biased records repaired to Correct" +
                       ", smallest icon side=" + fmt("%.4f", min_side)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
