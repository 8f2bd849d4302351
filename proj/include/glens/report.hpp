#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "glens/error.hpp"
#include "glens/records.hpp"
#include "glens/stats.hpp"
#include "glens/taxonomy.hpp"

namespace glens {

// Misleading and Confusion are reported together as "Other".
enum class ReportGroup { Correct, Biased, Other };

inline constexpr std::array<ReportGroup, 3> kAllGroups{ReportGroup::Correct, ReportGroup::Biased, ReportGroup::Other};

constexpr ReportGroup group_of(ResponseCategory c) {
  switch (c) {
    case ResponseCategory::Correct: return ReportGroup::Correct;
    case ResponseCategory::Biased: return ReportGroup::Biased;
    default: return ReportGroup::Other;
  }
}

constexpr std::string_view to_string(ReportGroup g) {
  switch (g) {
    case ReportGroup::Correct: return "Correct";
    case ReportGroup::Biased: return "Biased";
    case ReportGroup::Other: return "Other";
  }
  return "Unknown";
}

// Full-pass rows are labelled by model id; crop-pass rows get a " + Crop" suffix.
inline std::string model_label(const EvalRecord& r) {
  return r.pass == Pass::Crop ? r.model_id + " + Crop" : r.model_id;
}

using GroupStatsMap = std::map<ReportGroup, stats::GroupStats>;

/// PSS mean and sample std per report group. Records without a PSS are
/// skipped; groups with no records are absent from the result.
inline GroupStatsMap aggregate_pss(std::span<const EvalRecord> records) {
  std::map<ReportGroup, std::vector<double>> scores;
  for (const auto& r : records)
    if (r.pss) scores[group_of(r.category)].push_back(r.pss->score);
  GroupStatsMap out;
  for (auto& [g, xs] : scores) {
    // Sorting makes the compensated sums independent of input order.
    std::sort(xs.begin(), xs.end());
    out[g] = stats::group_stats(xs);
  }
  return out;
}

struct CategoryCounts {
  std::array<std::size_t, 4> counts{};
  std::size_t total = 0;

  double proportion(ResponseCategory c) const {
    return total == 0 ? 0.0 : static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(total);
  }
};

inline std::map<std::string, CategoryCounts> category_distribution(std::span<const EvalRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "category distribution of no records");
  std::map<std::string, CategoryCounts> out;
  for (const auto& r : records) {
    auto& c = out[model_label(r)];
    ++c.counts[static_cast<std::size_t>(r.category)];
    ++c.total;
  }
  return out;
}

/// Mean of per-split values; with weights, a weighted mean.
inline double split_average(std::span<const double> values, std::span<const double> weights = {}) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "average of no splits");
  if (weights.empty()) return stats::mean(values);
  if (weights.size() != values.size()) throw Error(ErrorCode::InvalidArgument, "one weight per split required");
  stats::CompensatedSum num, den;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num.add(values[i] * weights[i]);
    den.add(weights[i]);
  }
  return num.value() / den.value();
}

struct AccuracyRow {
  std::string label;
  std::vector<double> accuracy;  // fraction Correct, one per split
  std::vector<std::size_t> counts;
  double average = 0.0;
};

/// Accuracy per split for every model label. `weighted` switches the
/// average from a plain mean over splits to one weighted by record counts.
inline std::vector<AccuracyRow> accuracy_table(std::span<const EvalRecord> records,
                                               const std::vector<std::string>& splits, bool weighted = false) {
  if (splits.empty()) throw Error(ErrorCode::InvalidArgument, "accuracy table needs at least one split");
  std::map<std::string, std::map<std::string, std::pair<std::size_t, std::size_t>>> tally;  // label -> split -> (correct, n)
  for (const auto& r : records) {
    auto& t = tally[model_label(r)][r.split];
    if (r.category == ResponseCategory::Correct) ++t.first;
    ++t.second;
  }
  std::vector<AccuracyRow> rows;
  for (const auto& [label, by_split] : tally) {
    AccuracyRow row{label, {}, {}, 0.0};
    std::vector<double> weights;
    for (const auto& split : splits) {
      auto it = by_split.find(split);
      if (it == by_split.end() || it->second.second == 0)
        throw Error(ErrorCode::MissingSplit, "no records for split '" + split + "' under '" + label + "'");
      row.accuracy.push_back(static_cast<double>(it->second.first) / static_cast<double>(it->second.second));
      row.counts.push_back(it->second.second);
      weights.push_back(static_cast<double>(it->second.second));
    }
    row.average = weighted ? split_average(row.accuracy, weights) : split_average(row.accuracy);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report bundle

struct ReportOptions {
  std::vector<double> thresholds{0.05, 0.10, 0.20, 0.30};
  stats::TTestKind ttest = stats::TTestKind::Welch;
  bool weighted_average = false;
  std::vector<std::string> splits;  // empty: every split seen in the input
};

struct SignificanceCell {
  std::string name;  // e.g. "Biased vs. Correct"
  std::optional<stats::TTestResult> result;
  std::string unavailable_reason;
};

struct ModelReport {
  std::string label;
  CategoryCounts categories;
  std::vector<double> threshold_curve;
  GroupStatsMap pss;
  std::vector<SignificanceCell> significance;
  std::map<ResponseCategory, stats::GroupStats> perplexity;
};

struct ReportBundle {
  std::size_t record_count = 0;
  std::size_t skipped_error_entries = 0;
  ReportOptions options;
  std::vector<std::string> splits;
  std::vector<ModelReport> models;
  std::vector<AccuracyRow> accuracy;
  std::optional<std::string> accuracy_error;
};

namespace detail {

inline SignificanceCell compare_groups(std::string name, const std::vector<double>& a, const std::vector<double>& b,
                                       stats::TTestKind kind) {
  SignificanceCell cell{std::move(name), std::nullopt, {}};
  try {
    cell.result = stats::t_test(a, b, kind);
  } catch (const Error& e) {
    cell.unavailable_reason = e.what();
  }
  return cell;
}

}  // namespace detail

/// Aggregate evaluation records into every report table. Emitted numbers do
/// not depend on record order.
inline ReportBundle build_report(std::span<const EvalRecord> records, const ReportOptions& options = {}) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "report needs at least one evaluation record");
  ReportBundle bundle;
  bundle.record_count = records.size();
  bundle.options = options;

  std::map<std::pair<std::string, Pass>, std::vector<EvalRecord>> by_label;
  std::set<std::string> seen_splits;
  for (const auto& r : records) {
    by_label[{r.model_id, r.pass}].push_back(r);
    seen_splits.insert(r.split);
  }
  bundle.splits = options.splits.empty() ? std::vector<std::string>(seen_splits.begin(), seen_splits.end())
                                         : options.splits;

  for (auto& [key, recs] : by_label) {
    ModelReport m;
    m.label = model_label(recs.front());
    m.categories = category_distribution(recs).begin()->second;

    std::vector<DistanceObservation> obs;
    for (const auto& r : recs) obs.push_back({r.category == ResponseCategory::Correct, r.distance_to_target});
    m.threshold_curve = threshold_curve(obs, options.thresholds);

    m.pss = aggregate_pss(recs);
    std::map<ReportGroup, std::vector<double>> scores;
    for (const auto& r : recs)
      if (r.pss) scores[group_of(r.category)].push_back(r.pss->score);
    for (auto& [g, xs] : scores) std::sort(xs.begin(), xs.end());
    m.significance.push_back(detail::compare_groups("Biased vs. Correct", scores[ReportGroup::Biased],
                                                    scores[ReportGroup::Correct], options.ttest));
    m.significance.push_back(detail::compare_groups("Other vs. Correct", scores[ReportGroup::Other],
                                                    scores[ReportGroup::Correct], options.ttest));
    m.significance.push_back(detail::compare_groups("Biased vs. Other", scores[ReportGroup::Biased],
                                                    scores[ReportGroup::Other], options.ttest));

    std::map<ResponseCategory, std::vector<double>> ppl;
    for (const auto& r : recs)
      if (r.perplexity) ppl[r.category].push_back(*r.perplexity);
    for (auto& [c, xs] : ppl) {
      std::sort(xs.begin(), xs.end());
      m.perplexity[c] = stats::group_stats(xs);
    }
    bundle.models.push_back(std::move(m));
  }

  try {
    bundle.accuracy = accuracy_table(records, bundle.splits, options.weighted_average);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MissingSplit) throw;
    bundle.accuracy_error = e.what();
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// Fraction to a one-decimal percentage, e.g. 0.751 -> "75.1".
inline std::string format_percent(double fraction) { return format_fixed(fraction * 100.0, 1); }

inline std::string format_mean_std(const stats::GroupStats& g) {
  return format_fixed(g.mean, 2) + " ± " + (g.std ? format_fixed(*g.std, 2) : std::string("n/a"));
}

inline std::string format_significance(const stats::TTestResult& r) {
  std::string p = r.p < 0.001 ? "p<0.001" : "p=" + format_fixed(r.p, 3);
  return std::string(r.significant ? "✓" : "×") + " (" + p + ")";
}

inline std::string format_threshold(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", t);
  return buf;
}

inline std::string render_markdown(const ReportBundle& b) {
  std::ostringstream md;
  md << "# Localization hallucination report\n\n";
  md << "Records: " << b.record_count;
  if (b.skipped_error_entries) md << " (skipped error entries: " << b.skipped_error_entries << ")";
  md << "\n\n";

  md << "## Response categories (%)\n\n";
  md << "| Model | Correct | Biased | Misleading | Confusion | N |\n|---|---|---|---|---|---|\n";
  for (const auto& m : b.models) {
    md << "| " << m.label;
    for (auto c : kAllCategories) md << " | " << format_percent(m.categories.proportion(c));
    md << " | " << m.categories.total << " |\n";
  }

  md << "\n## Distance to target (%)\n\n| Model | Correct response";
  for (double t : b.options.thresholds) md << " | Relative distance < " << format_threshold(t);
  md << " |\n|---|---";
  for (std::size_t i = 0; i < b.options.thresholds.size(); ++i) md << "|---";
  md << "|\n";
  for (const auto& m : b.models) {
    md << "| " << m.label;
    for (double v : m.threshold_curve) md << " | " << format_percent(v);
    md << " |\n";
  }

  md << "\n## Peak Sharpness Score (mean ± std)\n\n";
  md << "| Model | Correct | Biased Hallucination | Other Response |\n|---|---|---|---|\n";
  for (const auto& m : b.models) {
    md << "| " << m.label;
    for (auto g : kAllGroups) {
      auto it = m.pss.find(g);
      md << " | " << (it == m.pss.end() ? std::string("–") : format_mean_std(it->second) + " (n=" + std::to_string(it->second.n) + ")");
    }
    md << " |\n";
  }

  md << "\n## PSS significance (" << (b.options.ttest == stats::TTestKind::Welch ? "Welch" : "Student")
     << " t-test, p < 0.05)\n\n";
  md << "| Model | Biased vs. Correct | Other vs. Correct | Biased vs. Other |\n|---|---|---|---|\n";
  for (const auto& m : b.models) {
    md << "| " << m.label;
    for (const auto& cell : m.significance) md << " | " << (cell.result ? format_significance(*cell.result) : std::string("n/a"));
    md << " |\n";
  }

  md << "\n## Accuracy by split (%)\n\n";
  if (b.accuracy_error) {
    md << "Unavailable: " << *b.accuracy_error << "\n";
  } else {
    md << "| Model";
    for (const auto& s : b.splits) md << " | " << s;
    md << " | Avg. |\n|---";
    for (std::size_t i = 0; i <= b.splits.size(); ++i) md << "|---";
    md << "|\n";
    for (const auto& row : b.accuracy) {
      md << "| " << row.label;
      for (double a : row.accuracy) md << " | " << format_percent(a);
      md << " | " << format_percent(row.average) << " |\n";
    }
  }

  md << "\n## Key-token perplexity\n\n";
  md << "| Model | Correct | Biased | Misleading | Confusion |\n|---|---|---|---|---|\n";
  for (const auto& m : b.models) {
    md << "| " << m.label;
    for (auto c : kAllCategories) {
      auto it = m.perplexity.find(c);
      md << " | " << (it == m.perplexity.end() ? std::string("–") : format_fixed(it->second.mean, 2));
    }
    md << " |\n";
  }
  return md.str();
}

inline ojson group_stats_to_json(const stats::GroupStats& g) {
  ojson j{{"n", g.n}, {"mean", sig9(g.mean)}};
  j["std"] = g.std ? ojson(sig9(*g.std)) : ojson(nullptr);
  return j;
}

inline ojson render_json(const ReportBundle& b) {
  ojson j;
  j["schema_version"] = kRecordSchemaVersion;
  j["record_count"] = b.record_count;
  j["skipped_error_entries"] = b.skipped_error_entries;
  auto th = ojson::array();
  for (double t : b.options.thresholds) th.push_back(sig9(t));
  j["thresholds"] = th;
  j["ttest"] = b.options.ttest == stats::TTestKind::Welch ? "welch" : "student";
  j["average"] = b.options.weighted_average ? "weighted" : "unweighted";
  j["splits"] = b.splits;

  auto models = ojson::array();
  for (const auto& m : b.models) {
    ojson mj;
    mj["label"] = m.label;
    mj["n"] = m.categories.total;
    ojson cats;
    for (auto c : kAllCategories)
      cats[std::string(to_string(c))] = ojson{{"count", m.categories.counts[static_cast<std::size_t>(c)]},
                                              {"proportion", sig9(m.categories.proportion(c))}};
    mj["categories"] = cats;
    auto curve = ojson::array();
    curve.push_back(ojson{{"condition", "correct"}, {"proportion", sig9(m.threshold_curve.at(0))}});
    for (std::size_t k = 0; k < b.options.thresholds.size(); ++k)
      curve.push_back(ojson{{"condition", "distance_lt"},
                            {"threshold", sig9(b.options.thresholds[k])},
                            {"proportion", sig9(m.threshold_curve.at(k + 1))}});
    mj["threshold_curve"] = curve;
    ojson pss = ojson::object();
    for (const auto& [g, s] : m.pss) pss[std::string(to_string(g))] = group_stats_to_json(s);
    mj["pss"] = pss;
    auto sig = ojson::array();
    for (const auto& cell : m.significance) {
      ojson cj{{"comparison", cell.name}};
      if (cell.result) {
        cj["t"] = sig9(cell.result->t);
        cj["dof"] = sig9(cell.result->dof);
        cj["p"] = sig9(cell.result->p);
        cj["significant"] = cell.result->significant;
      } else {
        cj["unavailable"] = cell.unavailable_reason;
      }
      sig.push_back(std::move(cj));
    }
    mj["significance"] = sig;
    ojson ppl = ojson::object();
    for (const auto& [c, s] : m.perplexity) ppl[std::string(to_string(c))] = group_stats_to_json(s);
    mj["perplexity"] = ppl;
    models.push_back(std::move(mj));
  }
  j["models"] = models;

  if (b.accuracy_error) {
    j["accuracy"] = ojson{{"unavailable", *b.accuracy_error}};
  } else {
    auto rows = ojson::array();
    for (const auto& row : b.accuracy) {
      ojson rj{{"label", row.label}};
      ojson per = ojson::object();
      for (std::size_t i = 0; i < b.splits.size(); ++i)
        per[b.splits[i]] = ojson{{"accuracy", sig9(row.accuracy[i])}, {"n", row.counts[i]}};
      rj["splits"] = per;
      rj["average"] = sig9(row.average);
      rows.push_back(std::move(rj));
    }
    j["accuracy"] = rows;
  }
  return j;
}

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string render_category_csv(const ReportBundle& b) {
  std::string out = "model,category,count,proportion\n";
  for (const auto& m : b.models)
    for (auto c : kAllCategories)
      out += csv_field(m.label) + "," + std::string(to_string(c)) + "," +
             std::to_string(m.categories.counts[static_cast<std::size_t>(c)]) + "," +
             csv_number(m.categories.proportion(c)) + "\n";
  return out;
}

inline std::string render_threshold_csv(const ReportBundle& b) {
  std::string out = "model,condition,threshold,proportion\n";
  for (const auto& m : b.models) {
    out += csv_field(m.label) + ",correct,," + csv_number(m.threshold_curve.at(0)) + "\n";
    for (std::size_t k = 0; k < b.options.thresholds.size(); ++k)
      out += csv_field(m.label) + ",distance_lt," + csv_number(b.options.thresholds[k]) + "," +
             csv_number(m.threshold_curve.at(k + 1)) + "\n";
  }
  return out;
}

inline std::string render_pss_csv(const ReportBundle& b) {
  std::string out = "model,group,n,mean,std\n";
  for (const auto& m : b.models)
    for (const auto& [g, s] : m.pss)
      out += csv_field(m.label) + "," + std::string(to_string(g)) + "," + std::to_string(s.n) + "," +
             csv_number(s.mean) + "," + (s.std ? csv_number(*s.std) : std::string()) + "\n";
  return out;
}

}  // namespace glens
