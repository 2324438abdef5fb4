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

#ifndef YIELDTRACE_EXPERIMENT_HPP_
#define YIELDTRACE_EXPERIMENT_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "yieldtrace/config.hpp"
#include "yieldtrace/diagnostics.hpp"
#include "yieldtrace/trainers.hpp"

namespace yieldtrace {

inline constexpr const char* kCodeVersion = "0.1.0";

// RM-vs-RM outcome of one market parameter set.
struct CandidateResult {
  double alpha = 0.0;
  double revpar = 0.0;
  double occupancy = 0.0;
  std::optional<double> adr;
  std::array<double, kNumBuckets> b_share{};
  int buckets_used = 0;
  bool passes = false;
  double distance = 0.0;  // to the (occupancy, ADR) anchor, relative units
};

struct CalibrationResult {
  MarketParams params;
  CandidateResult selected;
  std::vector<CandidateResult> candidates;
};

// Both hotels play the RM rule on their own state for `targets.episodes`.
CandidateResult evaluate_candidate(const MarketParams& params, const CalibrationTargets& targets,
                                   std::uint64_t seed);

// Tries every alpha in the grid over `base`. Among passing candidates the one
// nearest the anchor wins; with none, Error(kCalibration) lists the nearest.
CalibrationResult calibrate_environment(const MarketParams& base, const CalibrationTargets& targets,
                                        std::uint64_t seed);

// {"alpha", "selected", "candidates"} with each candidate's RM-vs-RM metrics.
std::string calibration_result_to_json(const CalibrationResult& result);

// Seed `index` of a run rooted at `root_seed`.
std::uint64_t run_seed(std::uint64_t root_seed, std::uint64_t index);

struct SeedSummary {
  BusinessMetrics a;
  BusinessMetrics b;
  BucketDistribution a_buckets;
  BucketDistribution b_buckets;
  Distances distances;
  EvalSummary eval;
  double final_lambda = 0.0;
  std::string prior_fingerprint_frozen;
  std::string prior_fingerprint_final;
};

SeedSummary summarize_result(const TrainingResult& result, const MarketParams& params);

struct SeedRecord {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  // Paths relative to the run directory.
  std::string dir;
  std::string traces;
  std::string train_stats;
  std::string metrics;
  std::map<std::string, std::string> checkpoints;  // role -> path
  SeedSummary summary;
  double wall_seconds = 0.0;
};

// Hotel A's seed-level interval and Hotel B's seed mean.
struct MetricInterval {
  SeedInterval a;
  double b_mean = 0.0;
  bool contained = false;
};

struct RunManifest {
  std::string status = "complete";  // or "failed"
  std::string error;
  std::string name;
  Algorithm algorithm = Algorithm::kTracePrior;
  double beta = 0.0;
  std::string code_version = kCodeVersion;
  std::string config_fingerprint;
  std::string params_fingerprint;
  double alpha = 0.0;
  std::filesystem::path run_dir;  // not serialized; set on load
  // Relative to run_dir.
  std::string config;
  std::string metrics_csv;
  std::string buckets_csv;
  std::string ci_csv;
  std::string summary_md;
  std::string calibration_csv;  // empty when the run was not calibrated
  CandidateResult reference;    // RM-vs-RM under the run's parameters
  std::vector<SeedRecord> seeds;
  // RevPAR, occupancy, ADR. Needs two or more seeds and defined ADRs.
  std::optional<std::array<MetricInterval, 3>> intervals;
  double wall_seconds = 0.0;

  bool complete() const { return status == "complete"; }
  std::filesystem::path path_of(const std::string& relative) const { return run_dir / relative; }
};

inline constexpr const char* kManifestFile = "manifest.json";

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text, const std::filesystem::path& run_dir);
// Accepts the manifest file or its run directory.
RunManifest load_manifest(const std::filesystem::path& path);

// Trains and evaluates every seed, then writes under
// <output_dir>/<name>/: config.ini (resolved), per-seed directories with
// eval_traces.jsonl, train_stats.csv, metrics.csv and checkpoints,
// aggregate metrics.csv, buckets.csv, ci.csv, summary.md and manifest.json.
// Everything except manifest.json is a deterministic function of the config.
// A failing seed still writes a manifest marked failed, then rethrows.
RunManifest run_experiment(const ExperimentConfig& config);

// One run per beta_sweep value (or a single run when the sweep is empty)
// under <output_dir>/<name>/beta-<b>/, plus beta_sensitivity.csv in
// <output_dir>/<name>/.
std::vector<RunManifest> run_sweep(const ExperimentConfig& config);

// Rebuilds eval policies from the stored checkpoints, re-runs evaluation and
// rewrites the per-seed traces and metrics plus the aggregates.
RunManifest evaluate_run(const std::filesystem::path& manifest_path);

// Evaluation traces of every seed, in seed order.
std::vector<EpisodeTrace> load_eval_traces(const RunManifest& manifest);
ExperimentConfig load_run_config(const RunManifest& manifest);

// Diagnostics over a finished run; each also writes
// <run_dir>/diagnostics/<kind>.json.
AmbiguityReport diagnose_ambiguity(const RunManifest& manifest, int min_cell_count = kDefaultMinCellCount);
OracleAblation diagnose_oracle(const RunManifest& manifest);
// Calibration of the frozen prior of every seed on its own eval rollouts,
// pooled. Throws Error(kState) when the run has no prior.
CalibrationReport diagnose_calibration(const RunManifest& manifest);

std::string ambiguity_to_json(const AmbiguityReport& report);
AmbiguityReport ambiguity_from_json(const std::string& text);
std::string calibration_to_json(const CalibrationReport& report);
CalibrationReport calibration_from_json(const std::string& text);
std::string oracle_to_json(const OracleAblation& report);
OracleAblation oracle_from_json(const std::string& text);

// Seed means of one run. Bucket shares are averaged per seed.
struct RunAggregate {
  double revpar_a = 0.0;
  double occupancy_a = 0.0;
  std::optional<double> adr_a;
  double revpar_b = 0.0;
  double occupancy_b = 0.0;
  std::optional<double> adr_b;
  double l1 = 0.0;
  double js = 0.0;
  double accuracy = 0.0;
  double policy_prior_kl = 0.0;
  double policy_entropy = 0.0;
  std::array<double, kNumBuckets> a_share{};
  std::array<double, kNumBuckets> b_share{};
};

RunAggregate aggregate_run(const RunManifest& manifest);

// One row per distinct beta of the trace-prior runs, ascending:
// beta, B-minus-A gaps for RevPAR, occupancy and ADR, L1, JS, read.
void write_beta_sensitivity_csv(const std::vector<RunManifest>& manifests, const std::filesystem::path& path);

// Label of a beta-sensitivity row from its L1 and CI containment.
std::string alignment_read(double l1, std::optional<bool> all_contained);

struct ReportBundle {
  std::filesystem::path markdown;
  std::vector<std::filesystem::path> csv;
};

// Summary tables over a set of finished runs. Tables without inputs get
// a "not run" placeholder.
ReportBundle render_report(const std::vector<RunManifest>& manifests, const std::filesystem::path& out_dir);

// Every manifest.json below `root`, sorted by path.
std::vector<RunManifest> discover_manifests(const std::filesystem::path& root);

}  // namespace yieldtrace

#endif  // YIELDTRACE_EXPERIMENT_HPP_
