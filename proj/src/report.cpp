// Copyright 2026 The YieldTrace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include "text_util.hpp"
#include "yieldtrace/experiment.hpp"

namespace yieldtrace {

namespace fs = std::filesystem;
using internal::fixed;
using internal::num;

namespace {

constexpr const char* kNotRun = "_not run_\n";

struct Table {
  std::string markdown;
  std::string csv;
};

std::optional<double> gap(const std::optional<double>& b, const std::optional<double>& a) {
  if (!a || !b) return std::nullopt;
  return *b - *a;
}

std::string signed_opt(const std::optional<double>& v, int decimals) {
  return v ? internal::signed_fixed(*v, decimals) : "n/a";
}

std::vector<const RunManifest*> of_algorithm(const std::vector<RunManifest>& runs, Algorithm a) {
  std::vector<const RunManifest*> out;
  for (const RunManifest& m : runs) {
    if (m.complete() && m.algorithm == a) out.push_back(&m);
  }
  return out;
}

// The trace-prior run at beta 30 when present, else the largest beta.
const RunManifest* selected_run(const std::vector<RunManifest>& runs) {
  const RunManifest* best = nullptr;
  for (const RunManifest* m : of_algorithm(runs, Algorithm::kTracePrior)) {
    if (m->beta == 30.0) return m;
    if (!best || m->beta > best->beta) best = m;
  }
  return best;
}

std::optional<fs::path> find_diagnostic(const std::vector<RunManifest>& runs, const RunManifest* preferred,
                                        const char* file) {
  if (preferred) {
    const fs::path p = preferred->run_dir / "diagnostics" / file;
    if (fs::exists(p)) return p;
  }
  for (const RunManifest& m : runs) {
    const fs::path p = m.run_dir / "diagnostics" / file;
    if (m.complete() && fs::exists(p)) return p;
  }
  return std::nullopt;
}

std::string run_label(const RunManifest& m) {
  std::string label = algorithm_name(m.algorithm);
  if (m.algorithm == Algorithm::kTracePrior || m.algorithm == Algorithm::kActionBonus) {
    label += " beta=" + num(m.beta, 6);
  }
  return label;
}

bool all_contained(const RunManifest& m) {
  if (!m.intervals) return false;
  for (const MetricInterval& iv : *m.intervals) {
    if (!iv.contained) return false;
  }
  return true;
}

std::optional<bool> containment(const RunManifest& m) {
  if (!m.intervals) return std::nullopt;
  return all_contained(m);
}

Table reward_only_table(const std::vector<RunManifest>& runs) {
  Table t;
  t.csv = "run,algorithm,beta,revpar_a,occupancy_a,adr_a,rm_occupancy,rm_adr,a_lowest_price_share,"
          "b_lowest_price_share,l1,failure_signature\n";
  std::vector<const RunManifest*> rows;
  for (const RunManifest& m : runs) {
    if (!m.complete()) continue;
    const bool pg = m.algorithm == Algorithm::kTracePrior || m.algorithm == Algorithm::kActionBonus;
    if (is_dqn(m.algorithm) || (pg && m.beta == 0.0)) rows.push_back(&m);
  }
  if (rows.empty()) {
    t.markdown = kNotRun;
    return t;
  }
  t.markdown =
      "| Run | Method | A RevPAR | A Occ. | A ADR | RM Occ. | RM ADR | A lowest-price share | B lowest-price share "
      "| L1 | Failure signature |\n|---|---|---:|---:|---:|---:|---:|---:|---:|---:|:---:|\n";
  for (const RunManifest* m : rows) {
    const RunAggregate a = aggregate_run(*m);
    const bool occ_high = a.occupancy_a > m->reference.occupancy + 0.05;
    const bool adr_low = a.adr_a && m->reference.adr && *a.adr_a < *m->reference.adr - 5.0;
    const bool cheap = a.a_share[0] > 3.0 * a.b_share[0];
    const bool signature = occ_high || adr_low || cheap;
    t.csv += m->name + "," + algorithm_name(m->algorithm) + "," + num(m->beta) + "," + num(a.revpar_a) + "," +
             num(a.occupancy_a) + "," + num(a.adr_a) + "," + num(m->reference.occupancy) + "," +
             num(m->reference.adr) + "," + num(a.a_share[0]) + "," + num(a.b_share[0]) + "," + num(a.l1) + "," +
             (signature ? "yes" : "no") + "\n";
    t.markdown += "| " + m->name + " | " + run_label(*m) + " | " + fixed(a.revpar_a, 3) + " | " +
                  fixed(a.occupancy_a, 4) + " | " + fixed(a.adr_a, 2) + " | " + fixed(m->reference.occupancy, 4) +
                  " | " + fixed(m->reference.adr, 2) + " | " + fixed(100.0 * a.a_share[0], 2) + "% | " +
                  fixed(100.0 * a.b_share[0], 2) + "% | " + fixed(a.l1, 4) + " | " + (signature ? "yes" : "no") +
                  " |\n";
  }
  return t;
}

Table ambiguity_table(const std::optional<fs::path>& file) {
  Table t;
  t.csv = "metric,value\n";
  if (!file) {
    t.markdown = kNotRun;
    return t;
  }
  const AmbiguityReport r = ambiguity_from_json(internal::read_text(*file));
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"Visited steps", std::to_string(r.visited_steps)},
      {"Eligible cells", std::to_string(r.eligible_cells)},
      {"Eligible step share", fixed(100.0 * r.eligible_step_share, 2) + "%"},
      {"Cells with >=2 B actions", fixed(100.0 * r.cells_multi_action_share, 2) + "%"},
      {"Cells with >=2 B actions each >=5%", fixed(100.0 * r.cells_substantive_share, 2) + "%"},
      {"Eligible steps in substantive ambiguous cells", fixed(100.0 * r.substantive_step_share, 2) + "%"},
      {"Weighted normalized within-cell entropy", fixed(r.weighted_normalized_entropy, 4)},
      {"Weighted modal B-action share", fixed(100.0 * r.weighted_modal_share, 2) + "%"},
  };
  const std::vector<std::pair<std::string, double>> raw = {
      {"visited_steps", static_cast<double>(r.visited_steps)},
      {"eligible_cells", static_cast<double>(r.eligible_cells)},
      {"eligible_step_share", r.eligible_step_share},
      {"cells_multi_action_share", r.cells_multi_action_share},
      {"cells_substantive_share", r.cells_substantive_share},
      {"substantive_step_share", r.substantive_step_share},
      {"weighted_normalized_entropy", r.weighted_normalized_entropy},
      {"weighted_modal_share", r.weighted_modal_share},
  };
  t.markdown = "| Quantity | Value |\n|---|---:|\n";
  for (const auto& [k, v] : rows) t.markdown += "| " + k + " | " + v + " |\n";
  for (const auto& [k, v] : raw) t.csv += k + "," + num(v) + "\n";
  return t;
}

std::string calibration_cells(const CalibrationReport& r) {
  return fixed(r.nll, 4) + " | " + fixed(100.0 * r.accuracy, 2) + " | " + fixed(r.brier, 4) + " | " +
         fixed(r.true_prob, 4) + " | " + fixed(r.normalized_entropy, 4);
}

std::string calibration_csv_row(const std::string& label, const CalibrationReport& r) {
  return label + "," + num(r.nll) + "," + num(r.accuracy) + "," + num(r.brier) + "," + num(r.true_prob) + "," +
         num(r.normalized_entropy) + "," + num(r.ece) + "," + std::to_string(r.samples) + "\n";
}

const char* kCalibrationCsvHeader = "predictor,nll,accuracy,brier,true_prob,normalized_entropy,ece,samples\n";

Table oracle_table(const std::optional<fs::path>& file) {
  Table t;
  t.csv = kCalibrationCsvHeader;
  if (!file) {
    t.markdown = kNotRun;
    return t;
  }
  const OracleAblation r = oracle_from_json(internal::read_text(*file));
  t.markdown = "| Predictor | NLL | Acc. (%) | Brier | True prob. | Norm. ent. |\n|---|---:|---:|---:|---:|---:|\n";
  t.markdown += "| Observable | " + calibration_cells(r.observable) + " |\n";
  t.markdown += "| Oracle (+ B inventory) | " + calibration_cells(r.oracle) + " |\n";
  t.markdown += "\nTrained on " + std::to_string(r.train_samples) + " steps, scored on " +
                std::to_string(r.test_samples) + ".\n";
  t.csv += calibration_csv_row("observable", r.observable);
  t.csv += calibration_csv_row("oracle", r.oracle);
  return t;
}

Table prior_calibration_table(const std::optional<fs::path>& file) {
  Table t;
  t.csv = kCalibrationCsvHeader;
  if (!file) {
    t.markdown = kNotRun;
    return t;
  }
  const CalibrationReport r = calibration_from_json(internal::read_text(*file));
  t.markdown = "| NLL | Brier | ECE | True prob. | Argmax acc. (%) |\n|---:|---:|---:|---:|---:|\n";
  t.markdown += "| " + fixed(r.nll, 4) + " | " + fixed(r.brier, 4) + " | " + fixed(r.ece, 4) + " | " +
                fixed(r.true_prob, 4) + " | " + fixed(100.0 * r.accuracy, 2) + " |\n";
  t.csv += calibration_csv_row("market_prior", r);
  return t;
}

Table copy_table(const std::vector<RunManifest>& runs) {
  Table t;
  t.csv = "method,run,seed,accuracy,l1,js\n";
  std::vector<const RunManifest*> rows;
  for (Algorithm a : {Algorithm::kCopyArgmax, Algorithm::kCopyMatch}) {
    for (const RunManifest* m : of_algorithm(runs, a)) rows.push_back(m);
  }
  if (rows.empty()) {
    t.markdown = kNotRun;
    return t;
  }
  t.markdown = "| Method | Exact accuracy (%) | L1 | JS |\n|---|---:|---:|---:|\n";
  for (const RunManifest* m : rows) {
    const RunAggregate a = aggregate_run(*m);
    const std::string method = m->algorithm == Algorithm::kCopyArgmax ? "argmax copy" : "probability matching";
    t.markdown += "| " + method + " | " + fixed(100.0 * a.accuracy, 2) + " | " + fixed(a.l1, 4) + " | " +
                  fixed(a.js, 5) + " |\n";
    for (const SeedRecord& r : m->seeds) {
      t.csv += method + "," + m->name + "," + std::to_string(r.index) + "," + num(r.summary.eval.action_accuracy) +
               "," + num(r.summary.distances.l1) + "," + num(r.summary.distances.js) + "\n";
    }
    t.csv += method + "," + m->name + ",mean," + num(a.accuracy) + "," + num(a.l1) + "," + num(a.js) + "\n";
  }
  return t;
}

const char* kIntervalLabels[3] = {"RevPAR", "Occupancy", "ADR"};

Table business_table(const RunManifest* m) {
  Table t;
  t.csv = "metric,a_mean,a_low,a_high,b_mean,b_in_a_ci\n";
  if (!m || !m->intervals) {
    t.markdown = kNotRun;
    return t;
  }
  t.markdown = "Run `" + m->name + "` (" + run_label(*m) + ", " + std::to_string(m->seeds.size()) + " seeds).\n\n";
  t.markdown += "| Metric | Hotel A | Hotel B | B in A 95% CI? |\n|---|---:|---:|:---:|\n";
  for (int k = 0; k < 3; ++k) {
    const MetricInterval& iv = (*m->intervals)[k];
    const int d = k == 1 ? 4 : (k == 0 ? 3 : 2);
    t.markdown += std::string("| ") + kIntervalLabels[k] + " | " + fixed(iv.a.mean, d) + " [" + fixed(iv.a.low, d) +
                  ", " + fixed(iv.a.high, d) + "] | " + fixed(iv.b_mean, d) + " | " + (iv.contained ? "yes" : "no") +
                  " |\n";
    t.csv += std::string(kIntervalLabels[k]) + "," + num(iv.a.mean) + "," + num(iv.a.low) + "," + num(iv.a.high) +
             "," + num(iv.b_mean) + "," + (iv.contained ? "yes" : "no") + "\n";
  }
  const RunAggregate a = aggregate_run(*m);
  t.markdown += "\nDistribution distance: L1 " + fixed(a.l1, 4) + ", JS " + fixed(a.js, 5) + ".\n";
  return t;
}

Table bucket_table(const RunManifest* m) {
  Table t;
  std::array<double, kNumBuckets> prices{100, 120, 140, 160, 180, 200, 220};
  if (m) prices = load_run_config(*m).market.price_grid;
  t.csv = "hotel";
  for (double p : prices) t.csv += "," + num(p);
  t.csv += "\n";
  if (!m) {
    t.markdown = kNotRun;
    return t;
  }
  const RunAggregate a = aggregate_run(*m);
  t.markdown = "| Price | Hotel A share (%) | Hotel B share (%) |\n|---:|---:|---:|\n";
  for (int k = 0; k < kNumBuckets; ++k) {
    t.markdown += "| " + num(prices[k]) + " | " + fixed(100.0 * a.a_share[k], 2) + " | " +
                  fixed(100.0 * a.b_share[k], 2) + " |\n";
  }
  for (const auto& [label, share] : {std::pair{"A", a.a_share}, std::pair{"B", a.b_share}}) {
    t.csv += label;
    for (double s : share) t.csv += "," + fixed(100.0 * s, 4);
    t.csv += "\n";
  }
  return t;
}

struct BetaRow {
  double beta = 0.0;
  std::optional<double> revpar_gap, occ_gap, adr_gap;
  double l1 = 0.0, js = 0.0;
  std::string read;
};

std::vector<BetaRow> beta_rows(const std::vector<RunManifest>& runs) {
  std::vector<const RunManifest*> tp = of_algorithm(runs, Algorithm::kTracePrior);
  std::stable_sort(tp.begin(), tp.end(), [](const auto* x, const auto* y) { return x->beta < y->beta; });
  std::vector<BetaRow> rows;
  for (const RunManifest* m : tp) {
    if (!rows.empty() && rows.back().beta == m->beta) continue;
    const RunAggregate a = aggregate_run(*m);
    BetaRow r;
    r.beta = m->beta;
    r.revpar_gap = a.revpar_b - a.revpar_a;
    r.occ_gap = a.occupancy_b - a.occupancy_a;
    r.adr_gap = gap(a.adr_b, a.adr_a);
    r.l1 = a.l1;
    r.js = a.js;
    r.read = alignment_read(a.l1, containment(*m));
    rows.push_back(r);
  }
  return rows;
}

const char* kBetaHeader = "beta,revpar_gap,occupancy_gap,adr_gap,l1,js,read\n";

std::string beta_csv(const std::vector<BetaRow>& rows) {
  std::string csv = kBetaHeader;
  for (const BetaRow& r : rows) {
    csv += num(r.beta) + "," + num(r.revpar_gap) + "," + num(r.occ_gap) + "," + num(r.adr_gap) + "," + num(r.l1) +
           "," + num(r.js) + "," + r.read + "\n";
  }
  return csv;
}

Table beta_table(const std::vector<RunManifest>& runs) {
  Table t;
  const auto rows = beta_rows(runs);
  t.csv = beta_csv(rows);
  if (rows.empty()) {
    t.markdown = kNotRun;
    return t;
  }
  t.markdown = "| beta | RevPAR gap | Occ. gap | ADR gap | L1 | JS | Read |\n|---:|---:|---:|---:|---:|---:|---|\n";
  for (const BetaRow& r : rows) {
    t.markdown += "| " + num(r.beta, 6) + " | " + signed_opt(r.revpar_gap, 3) + " | " + signed_opt(r.occ_gap, 4) +
                  " | " + signed_opt(r.adr_gap, 2) + " | " + fixed(r.l1, 4) + " | " + fixed(r.js, 5) + " | " +
                  r.read + " |\n";
  }
  t.markdown += "\nGaps are Hotel B minus Hotel A.\n";
  return t;
}

Table bonus_table(const std::vector<RunManifest>& runs, const RunManifest* full_kl) {
  Table t;
  t.csv = "method,run,beta,revpar_gap,adr_gap,l1,policy_prior_kl\n";
  const RunManifest* best = nullptr;
  double best_l1 = 0.0;
  for (const RunManifest* m : of_algorithm(runs, Algorithm::kActionBonus)) {
    const double l1 = aggregate_run(*m).l1;
    if (!best || l1 < best_l1) {
      best = m;
      best_l1 = l1;
    }
  }
  if (!best || !full_kl) {
    t.markdown = kNotRun;
    return t;
  }
  t.markdown = "| Method | RevPAR gap | ADR gap | L1 | Policy-prior KL |\n|---|---:|---:|---:|---:|\n";
  for (const auto& [label, m] : {std::pair{"Full KL", full_kl}, std::pair{"Action bonus, best grid", best}}) {
    const RunAggregate a = aggregate_run(*m);
    const double rg = a.revpar_b - a.revpar_a;
    const auto ag = gap(a.adr_b, a.adr_a);
    t.markdown += std::string("| ") + label + ", beta=" + num(m->beta, 6) + " | " + internal::signed_fixed(rg, 3) +
                  " | " + signed_opt(ag, 2) + " | " + fixed(a.l1, 4) + " | " + fixed(a.policy_prior_kl, 4) + " |\n";
    t.csv += std::string(label) + "," + m->name + "," + num(m->beta) + "," + num(rg) + "," + num(ag) + "," +
             num(a.l1) + "," + num(a.policy_prior_kl) + "\n";
  }
  return t;
}

}  // namespace

std::string alignment_read(double l1, std::optional<bool> all_contained) {
  if (l1 <= 0.05 && all_contained.value_or(true)) return "aligned";
  if (l1 <= 0.10) return "partial repair";
  return "no discipline";
}

void write_beta_sensitivity_csv(const std::vector<RunManifest>& manifests, const fs::path& path) {
  internal::write_text(path, beta_csv(beta_rows(manifests)));
}

ReportBundle render_report(const std::vector<RunManifest>& manifests, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const RunManifest* selected = selected_run(manifests);

  struct Section {
    std::string title;
    std::string file;
    Table table;
  };
  const std::vector<Section> sections = {
      {"Reward-only runs", "reward_only.csv", reward_only_table(manifests)},
      {"Observable-state ambiguity", "ambiguity.csv",
       ambiguity_table(find_diagnostic(manifests, selected, "ambiguity.json"))},
      {"Hidden-inventory oracle ablation", "oracle_ablation.csv",
       oracle_table(find_diagnostic(manifests, selected, "oracle.json"))},
      {"Copy baselines: argmax versus probability matching", "copy_baselines.csv", copy_table(manifests)},
      {"Business metrics with seed-level CI check", "ci_check.csv", business_table(selected)},
      {"Final price-bucket distribution", "price_buckets.csv", bucket_table(selected)},
      {"KL strength sensitivity", "beta_sensitivity.csv", beta_table(manifests)},
      {"Full-distribution KL versus action bonus", "kl_vs_action_bonus.csv", bonus_table(manifests, selected)},
      {"Market prior calibration", "prior_calibration.csv",
       prior_calibration_table(find_diagnostic(manifests, selected, "calibration.json"))},
  };

  ReportBundle bundle;
  std::string md = "# YieldTrace report\n\n";
  std::size_t complete = 0;
  for (const RunManifest& m : manifests) complete += m.complete() ? 1 : 0;
  md += std::to_string(complete) + " complete run(s)";
  if (complete < manifests.size()) md += ", " + std::to_string(manifests.size() - complete) + " failed";
  md += ".\n\n";
  if (!manifests.empty()) {
    md += "| Run | Method | Seeds | Status |\n|---|---|---:|---|\n";
    for (const RunManifest& m : manifests) {
      md += "| " + m.name + " | " + run_label(m) + " | " + std::to_string(m.seeds.size()) + " | " + m.status + " |\n";
    }
    md += "\n";
  }
  for (const Section& s : sections) {
    md += "## " + s.title + "\n\n" + s.table.markdown + "\n";
    const fs::path csv = out_dir / s.file;
    internal::write_text(csv, s.table.csv);
    bundle.csv.push_back(csv);
  }
  bundle.markdown = out_dir / "report.md";
  internal::write_text(bundle.markdown, md);
  return bundle;
}

}  // namespace yieldtrace
