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

#include "yieldtrace/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <limits>
#include <thread>

#include "json.hpp"
#include "text_util.hpp"
#include "yieldtrace/error.hpp"
#include "yieldtrace/trace_io.hpp"

namespace yieldtrace {

namespace fs = std::filesystem;
using internal::num;
using nlohmann::json;

namespace {

constexpr std::uint64_t kOracleSalt = 0x6f7261636c65ULL;

// Runs body(i) for i in [0, n) on up to hardware_concurrency workers.
// Exceptions are collected per index so that every other index still runs.
template <typename Body>
std::vector<std::exception_ptr> parallel_for(std::size_t n, Body body) {
  std::vector<std::exception_ptr> errors(n);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
    return errors;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return errors;
}

std::uint64_t calibration_seed(std::uint64_t root_seed) {
  return derive_stream({root_seed, static_cast<std::uint64_t>(StreamDomain::kCalibration)});
}

std::string describe(const CandidateResult& c) {
  return "alpha=" + num(c.alpha, 6) + " occupancy=" + num(c.occupancy, 4) + " ADR=" + num(c.adr, 5) +
         " buckets=" + std::to_string(c.buckets_used);
}

json metrics_json(const BusinessMetrics& m) {
  return json{{"revpar", m.revpar},
              {"occupancy", m.occupancy},
              {"adr", m.adr ? json(*m.adr) : json(nullptr)},
              {"revenue", m.revenue},
              {"rooms_sold", m.rooms_sold},
              {"episodes", m.episodes}};
}

BusinessMetrics metrics_from(const json& j) {
  BusinessMetrics m;
  m.revpar = j.at("revpar").get<double>();
  m.occupancy = j.at("occupancy").get<double>();
  if (!j.at("adr").is_null()) m.adr = j.at("adr").get<double>();
  m.revenue = j.at("revenue").get<double>();
  m.rooms_sold = j.at("rooms_sold").get<std::int64_t>();
  m.episodes = j.at("episodes").get<std::size_t>();
  return m;
}

json buckets_json(const BucketDistribution& d) { return json{{"share", d.share}, {"days", d.days}}; }

BucketDistribution buckets_from(const json& j) {
  BucketDistribution d;
  d.share = j.at("share").get<std::array<double, kNumBuckets>>();
  d.days = j.at("days").get<std::int64_t>();
  return d;
}

json candidate_json(const CandidateResult& c) {
  return json{{"alpha", c.alpha},
              {"revpar", c.revpar},
              {"occupancy", c.occupancy},
              {"adr", c.adr ? json(*c.adr) : json(nullptr)},
              {"b_share", c.b_share},
              {"buckets_used", c.buckets_used},
              {"passes", c.passes},
              {"distance", c.distance}};
}

CandidateResult candidate_from(const json& j) {
  CandidateResult c;
  c.alpha = j.at("alpha").get<double>();
  c.revpar = j.at("revpar").get<double>();
  c.occupancy = j.at("occupancy").get<double>();
  if (!j.at("adr").is_null()) c.adr = j.at("adr").get<double>();
  c.b_share = j.at("b_share").get<std::array<double, kNumBuckets>>();
  c.buckets_used = j.at("buckets_used").get<int>();
  c.passes = j.at("passes").get<bool>();
  c.distance = j.at("distance").get<double>();
  return c;
}

json summary_json(const SeedSummary& s) {
  return json{{"a", metrics_json(s.a)},
              {"b", metrics_json(s.b)},
              {"a_buckets", buckets_json(s.a_buckets)},
              {"b_buckets", buckets_json(s.b_buckets)},
              {"l1", s.distances.l1},
              {"js", s.distances.js},
              {"accuracy", s.eval.action_accuracy},
              {"policy_prior_kl", s.eval.mean_policy_prior_kl},
              {"policy_entropy", s.eval.mean_policy_entropy},
              {"final_lambda", s.final_lambda},
              {"prior_fingerprint_frozen", s.prior_fingerprint_frozen},
              {"prior_fingerprint_final", s.prior_fingerprint_final}};
}

SeedSummary summary_from(const json& j) {
  SeedSummary s;
  s.a = metrics_from(j.at("a"));
  s.b = metrics_from(j.at("b"));
  s.a_buckets = buckets_from(j.at("a_buckets"));
  s.b_buckets = buckets_from(j.at("b_buckets"));
  s.distances.l1 = j.at("l1").get<double>();
  s.distances.js = j.at("js").get<double>();
  s.eval.action_accuracy = j.at("accuracy").get<double>();
  s.eval.mean_policy_prior_kl = j.at("policy_prior_kl").get<double>();
  s.eval.mean_policy_entropy = j.at("policy_entropy").get<double>();
  s.final_lambda = j.at("final_lambda").get<double>();
  s.prior_fingerprint_frozen = j.at("prior_fingerprint_frozen").get<std::string>();
  s.prior_fingerprint_final = j.at("prior_fingerprint_final").get<std::string>();
  return s;
}

const char* kMetricsHeader =
    "row,seed,revpar_a,occupancy_a,adr_a,revpar_b,occupancy_b,adr_b,l1,js,accuracy,policy_prior_kl,"
    "policy_entropy,final_lambda\n";

std::string metrics_row(const std::string& label, const std::string& seed, const SeedSummary& s) {
  return label + "," + seed + "," + num(s.a.revpar) + "," + num(s.a.occupancy) + "," + num(s.a.adr) + "," +
         num(s.b.revpar) + "," + num(s.b.occupancy) + "," + num(s.b.adr) + "," + num(s.distances.l1) + "," +
         num(s.distances.js) + "," + num(s.eval.action_accuracy) + "," + num(s.eval.mean_policy_prior_kl) + "," +
         num(s.eval.mean_policy_entropy) + "," + num(s.final_lambda) + "\n";
}

std::string stats_csv(const std::vector<StatRow>& rows) {
  std::string out = "episode,loss,lambda,mean_kl,entropy,train_return,epsilon\n";
  for (const StatRow& r : rows) {
    out += std::to_string(r.episode) + "," + num(r.loss) + "," + num(r.lambda) + "," + num(r.mean_kl) + "," +
           num(r.entropy) + "," + num(r.train_return) + "," + num(r.epsilon) + "\n";
  }
  return out;
}

std::string percent_row(const std::array<double, kNumBuckets>& share) {
  std::string out;
  for (double s : share) out += "," + internal::fixed(100.0 * s, 4);
  return out;
}

std::string bucket_header(const MarketParams& params) {
  std::string out = "hotel,scope";
  for (double p : params.price_grid) out += "," + num(p);
  return out + "\n";
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) return std::nullopt;
    sum += *v;
  }
  if (values.empty()) return std::nullopt;
  return sum / static_cast<double>(values.size());
}

std::optional<std::array<MetricInterval, 3>> seed_intervals(const std::vector<SeedRecord>& seeds) {
  if (seeds.size() < 2) return std::nullopt;
  std::array<std::vector<double>, 3> a, b;
  for (const SeedRecord& r : seeds) {
    const SeedSummary& s = r.summary;
    if (!s.a.adr || !s.b.adr) return std::nullopt;
    a[0].push_back(s.a.revpar);
    a[1].push_back(s.a.occupancy);
    a[2].push_back(*s.a.adr);
    b[0].push_back(s.b.revpar);
    b[1].push_back(s.b.occupancy);
    b[2].push_back(*s.b.adr);
  }
  std::array<MetricInterval, 3> out;
  for (int k = 0; k < 3; ++k) {
    out[k].a = seed_ci(a[k]);
    double mean = 0.0;
    for (double v : b[k]) mean += v;
    out[k].b_mean = mean / static_cast<double>(b[k].size());
    out[k].contained = out[k].a.contains(out[k].b_mean);
  }
  return out;
}

const char* kIntervalNames[3] = {"revpar", "occupancy", "adr"};

void write_aggregates(RunManifest& m, const MarketParams& params) {
  std::string metrics = kMetricsHeader;
  for (const SeedRecord& r : m.seeds) metrics += metrics_row("seed", std::to_string(r.index), r.summary);
  const RunAggregate agg = aggregate_run(m);
  SeedSummary mean;
  mean.a.revpar = agg.revpar_a;
  mean.a.occupancy = agg.occupancy_a;
  mean.a.adr = agg.adr_a;
  mean.b.revpar = agg.revpar_b;
  mean.b.occupancy = agg.occupancy_b;
  mean.b.adr = agg.adr_b;
  mean.distances = {agg.l1, agg.js};
  mean.eval = {agg.accuracy, agg.policy_prior_kl, agg.policy_entropy};
  double lambda = 0.0;
  for (const SeedRecord& r : m.seeds) lambda += r.summary.final_lambda;
  mean.final_lambda = m.seeds.empty() ? 0.0 : lambda / static_cast<double>(m.seeds.size());
  metrics += metrics_row("mean", "all", mean);
  internal::write_text(m.path_of(m.metrics_csv), metrics);

  std::string buckets = bucket_header(params);
  for (const SeedRecord& r : m.seeds) {
    buckets += "A,seed-" + std::to_string(r.index) + percent_row(r.summary.a_buckets.share) + "\n";
    buckets += "B,seed-" + std::to_string(r.index) + percent_row(r.summary.b_buckets.share) + "\n";
  }
  buckets += "A,mean" + percent_row(agg.a_share) + "\n";
  buckets += "B,mean" + percent_row(agg.b_share) + "\n";
  internal::write_text(m.path_of(m.buckets_csv), buckets);

  m.intervals = seed_intervals(m.seeds);
  std::string ci = "metric,a_mean,a_low,a_high,b_mean,b_in_a_ci\n";
  if (m.intervals) {
    for (int k = 0; k < 3; ++k) {
      const MetricInterval& iv = (*m.intervals)[k];
      ci += std::string(kIntervalNames[k]) + "," + num(iv.a.mean) + "," + num(iv.a.low) + "," + num(iv.a.high) +
            "," + num(iv.b_mean) + "," + (iv.contained ? "yes" : "no") + "\n";
    }
  }
  internal::write_text(m.path_of(m.ci_csv), ci);

  std::string md = "# Run " + m.name + "\n\n";
  md += "Algorithm `" + algorithm_name(m.algorithm) + "`, beta " + num(m.beta, 6) + ", alpha " + num(m.alpha, 6) +
        ", " + std::to_string(m.seeds.size()) + " seed(s).\n\n";
  md += "RM-vs-RM reference: occupancy " + internal::fixed(m.reference.occupancy, 4) + ", ADR " +
        internal::fixed(m.reference.adr, 2) + ".\n\n";
  md += "| Seed | A RevPAR | B RevPAR | A Occ. | B Occ. | A ADR | B ADR | L1 | JS |\n";
  md += "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const SeedRecord& r : m.seeds) {
    const SeedSummary& s = r.summary;
    md += "| " + std::to_string(r.index) + " | " + internal::fixed(s.a.revpar, 3) + " | " +
          internal::fixed(s.b.revpar, 3) + " | " + internal::fixed(s.a.occupancy, 4) + " | " +
          internal::fixed(s.b.occupancy, 4) + " | " + internal::fixed(s.a.adr, 2) + " | " +
          internal::fixed(s.b.adr, 2) + " | " + internal::fixed(s.distances.l1, 4) + " | " +
          internal::fixed(s.distances.js, 5) + " |\n";
  }
  if (m.intervals) {
    md += "\n| Metric | A mean | A 95% CI | B mean | B in A CI? |\n|---|---:|---:|---:|:---:|\n";
    for (int k = 0; k < 3; ++k) {
      const MetricInterval& iv = (*m.intervals)[k];
      md += std::string("| ") + kIntervalNames[k] + " | " + num(iv.a.mean, 6) + " | [" + num(iv.a.low, 6) + ", " +
            num(iv.a.high, 6) + "] | " + num(iv.b_mean, 6) + " | " + (iv.contained ? "yes" : "no") + " |\n";
    }
  }
  internal::write_text(m.path_of(m.summary_md), md);
}

void write_manifest(const RunManifest& m) {
  internal::write_text(m.run_dir / kManifestFile, manifest_to_json(m));
}

std::map<std::string, const NetParams*> checkpoint_roles(const TrainingResult& r) {
  std::map<std::string, const NetParams*> out;
  if (r.q_network) out["q_network"] = &*r.q_network;
  if (r.forecast) out["forecast"] = &*r.forecast;
  if (r.prior) out["prior"] = &*r.prior;
  if (r.policy) out["policy"] = &*r.policy;
  if (r.value) out["value"] = &*r.value;
  return out;
}

// Writes a seed's traces, metrics and per-seed metrics row.
void persist_seed(const RunManifest& m, SeedRecord& rec, const TrainingResult& result,
                  const MarketParams& params) {
  rec.summary = summarize_result(result, params);
  write_traces_jsonl(m.path_of(rec.traces), result.eval_traces);
  internal::write_text(m.path_of(rec.metrics),
                       std::string(kMetricsHeader) + metrics_row("seed", std::to_string(rec.index), rec.summary));
}

std::string seed_dir(std::uint64_t index) { return "seed-" + std::to_string(index); }

}  // namespace

CandidateResult evaluate_candidate(const MarketParams& params, const CalibrationTargets& targets,
                                   std::uint64_t seed) {
  params.validate();
  require(targets.episodes > 0, "calibration needs at least one episode");
  const ActionSource rm = mirrored_rm_policy(params);
  std::vector<EpisodeTrace> traces;
  traces.reserve(static_cast<std::size_t>(targets.episodes));
  for (int e = 0; e < targets.episodes; ++e) {
    traces.push_back(run_episode(rm, params, seed, static_cast<std::uint64_t>(e), StreamDomain::kCalibration));
  }
  const BusinessMetrics b = business_metrics(traces, Hotel::kB, params.capacity);
  const BucketDistribution d = bucket_distribution(traces, Hotel::kB);
  CandidateResult c;
  c.alpha = params.alpha;
  c.revpar = b.revpar;
  c.occupancy = b.occupancy;
  c.adr = b.adr;
  c.b_share = d.share;
  for (double s : d.share) {
    if (s >= targets.bucket_use_share) ++c.buckets_used;
  }
  c.passes = c.adr && c.occupancy >= targets.occupancy_low && c.occupancy <= targets.occupancy_high &&
             *c.adr >= targets.adr_low && *c.adr <= targets.adr_high && c.buckets_used >= targets.min_buckets;
  c.distance = c.adr ? std::hypot((c.occupancy - targets.occupancy_anchor) / targets.occupancy_anchor,
                                  (*c.adr - targets.adr_anchor) / targets.adr_anchor)
                     : std::numeric_limits<double>::infinity();
  return c;
}

CalibrationResult calibrate_environment(const MarketParams& base, const CalibrationTargets& targets,
                                        std::uint64_t seed) {
  require(!targets.alpha_grid.empty(), "calibration grid must not be empty");
  CalibrationResult out;
  for (double alpha : targets.alpha_grid) {
    MarketParams p = base;
    p.alpha = alpha;
    out.candidates.push_back(evaluate_candidate(p, targets, seed));
  }
  const CandidateResult* best = nullptr;
  for (const CandidateResult& c : out.candidates) {
    if (c.passes && (!best || c.distance < best->distance)) best = &c;
  }
  if (!best) {
    std::vector<CandidateResult> sorted = out.candidates;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& x, const auto& y) { return x.distance < y.distance; });
    std::string msg = "no calibration candidate inside occupancy [" + num(targets.occupancy_low, 4) + ", " +
                      num(targets.occupancy_high, 4) + "], ADR [" + num(targets.adr_low, 5) + ", " +
                      num(targets.adr_high, 5) + "] with >= " + std::to_string(targets.min_buckets) +
                      " buckets; nearest:";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, sorted.size()); ++i) msg += " {" + describe(sorted[i]) + "}";
    fail(ErrorCode::kCalibration, msg);
  }
  out.selected = *best;
  out.params = base;
  out.params.alpha = best->alpha;
  return out;
}

std::string calibration_result_to_json(const CalibrationResult& result) {
  json candidates = json::array();
  for (const CandidateResult& c : result.candidates) candidates.push_back(candidate_json(c));
  return json{{"alpha", result.params.alpha},
              {"params_fingerprint", result.params.fingerprint()},
              {"selected", candidate_json(result.selected)},
              {"candidates", candidates}}
             .dump(2) +
         "\n";
}

std::uint64_t run_seed(std::uint64_t root_seed, std::uint64_t index) { return derive_stream({root_seed, index}); }

SeedSummary summarize_result(const TrainingResult& result, const MarketParams& params) {
  SeedSummary s;
  s.a = business_metrics(result.eval_traces, Hotel::kA, params.capacity);
  s.b = business_metrics(result.eval_traces, Hotel::kB, params.capacity);
  s.a_buckets = bucket_distribution(result.eval_traces, Hotel::kA);
  s.b_buckets = bucket_distribution(result.eval_traces, Hotel::kB);
  if (!s.a_buckets.empty() && !s.b_buckets.empty()) s.distances = distribution_distances(s.a_buckets, s.b_buckets);
  s.eval = result.eval;
  s.final_lambda = result.final_lambda;
  s.prior_fingerprint_frozen = result.prior_fingerprint_frozen;
  s.prior_fingerprint_final = result.prior_fingerprint_final;
  return s;
}

RunAggregate aggregate_run(const RunManifest& m) {
  RunAggregate a;
  if (m.seeds.empty()) return a;
  const double n = static_cast<double>(m.seeds.size());
  std::vector<std::optional<double>> adr_a, adr_b;
  for (const SeedRecord& r : m.seeds) {
    const SeedSummary& s = r.summary;
    a.revpar_a += s.a.revpar / n;
    a.occupancy_a += s.a.occupancy / n;
    a.revpar_b += s.b.revpar / n;
    a.occupancy_b += s.b.occupancy / n;
    a.l1 += s.distances.l1 / n;
    a.js += s.distances.js / n;
    a.accuracy += s.eval.action_accuracy / n;
    a.policy_prior_kl += s.eval.mean_policy_prior_kl / n;
    a.policy_entropy += s.eval.mean_policy_entropy / n;
    for (int k = 0; k < kNumBuckets; ++k) {
      a.a_share[k] += s.a_buckets.share[k] / n;
      a.b_share[k] += s.b_buckets.share[k] / n;
    }
    adr_a.push_back(s.a.adr);
    adr_b.push_back(s.b.adr);
  }
  a.adr_a = mean_defined(adr_a);
  a.adr_b = mean_defined(adr_b);
  return a;
}

std::string manifest_to_json(const RunManifest& m) {
  json seeds = json::array();
  for (const SeedRecord& r : m.seeds) {
    seeds.push_back(json{{"index", r.index},
                         {"seed", r.seed},
                         {"dir", r.dir},
                         {"traces", r.traces},
                         {"train_stats", r.train_stats},
                         {"metrics", r.metrics},
                         {"checkpoints", r.checkpoints},
                         {"summary", summary_json(r.summary)},
                         {"wall_seconds", r.wall_seconds}});
  }
  json intervals = nullptr;
  if (m.intervals) {
    intervals = json::object();
    for (int k = 0; k < 3; ++k) {
      const MetricInterval& iv = (*m.intervals)[k];
      intervals[kIntervalNames[k]] = json{{"a_mean", iv.a.mean},
                                          {"a_low", iv.a.low},
                                          {"a_high", iv.a.high},
                                          {"b_mean", iv.b_mean},
                                          {"contained", iv.contained}};
    }
  }
  const json j{{"format", "yieldtrace.manifest"},
               {"version", 1},
               {"status", m.status},
               {"error", m.error},
               {"name", m.name},
               {"algorithm", algorithm_name(m.algorithm)},
               {"beta", m.beta},
               {"code_version", m.code_version},
               {"config_fingerprint", m.config_fingerprint},
               {"params_fingerprint", m.params_fingerprint},
               {"alpha", m.alpha},
               {"config", m.config},
               {"metrics_csv", m.metrics_csv},
               {"buckets_csv", m.buckets_csv},
               {"ci_csv", m.ci_csv},
               {"summary_md", m.summary_md},
               {"calibration_csv", m.calibration_csv},
               {"reference", candidate_json(m.reference)},
               {"seeds", seeds},
               {"intervals", intervals},
               {"wall_seconds", m.wall_seconds}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text, const fs::path& run_dir) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "yieldtrace.manifest") {
      fail(ErrorCode::kParse, "not a yieldtrace manifest");
    }
    m.status = j.at("status").get<std::string>();
    m.error = j.at("error").get<std::string>();
    m.name = j.at("name").get<std::string>();
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.beta = j.at("beta").get<double>();
    m.code_version = j.at("code_version").get<std::string>();
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    m.params_fingerprint = j.at("params_fingerprint").get<std::string>();
    m.alpha = j.at("alpha").get<double>();
    m.config = j.at("config").get<std::string>();
    m.metrics_csv = j.at("metrics_csv").get<std::string>();
    m.buckets_csv = j.at("buckets_csv").get<std::string>();
    m.ci_csv = j.at("ci_csv").get<std::string>();
    m.summary_md = j.at("summary_md").get<std::string>();
    m.calibration_csv = j.at("calibration_csv").get<std::string>();
    m.reference = candidate_from(j.at("reference"));
    for (const json& s : j.at("seeds")) {
      SeedRecord r;
      r.index = s.at("index").get<std::uint64_t>();
      r.seed = s.at("seed").get<std::uint64_t>();
      r.dir = s.at("dir").get<std::string>();
      r.traces = s.at("traces").get<std::string>();
      r.train_stats = s.at("train_stats").get<std::string>();
      r.metrics = s.at("metrics").get<std::string>();
      r.checkpoints = s.at("checkpoints").get<std::map<std::string, std::string>>();
      r.summary = summary_from(s.at("summary"));
      r.wall_seconds = s.at("wall_seconds").get<double>();
      m.seeds.push_back(std::move(r));
    }
    const json& iv = j.at("intervals");
    if (!iv.is_null()) {
      std::array<MetricInterval, 3> out;
      for (int k = 0; k < 3; ++k) {
        const json& e = iv.at(kIntervalNames[k]);
        out[k].a = SeedInterval{e.at("a_mean").get<double>(), e.at("a_low").get<double>(), e.at("a_high").get<double>()};
        out[k].b_mean = e.at("b_mean").get<double>();
        out[k].contained = e.at("contained").get<bool>();
      }
      m.intervals = out;
    }
    m.wall_seconds = j.at("wall_seconds").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  m.run_dir = run_dir;
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / kManifestFile : path;
  return manifest_from_json(internal::read_text(file), fs::absolute(file).parent_path());
}

RunManifest run_experiment(const ExperimentConfig& input) {
  input.validate();
  const auto started = std::chrono::steady_clock::now();
  RunManifest m;
  m.name = input.name;
  m.algorithm = input.train.algorithm;
  m.beta = input.train.beta;
  m.run_dir = fs::absolute(fs::path(input.output_dir) / input.name);
  fs::create_directories(m.run_dir);

  ExperimentConfig config = input;
  const std::uint64_t cal_seed = calibration_seed(config.root_seed);
  if (config.calibrate) {
    const CalibrationResult cal = calibrate_environment(config.market, config.calibration, cal_seed);
    config.market = cal.params;
    config.calibrate = false;
    m.reference = cal.selected;
    m.calibration_csv = "calibration.csv";
    std::string csv = "alpha,revpar,occupancy,adr,buckets_used,passes,distance,selected\n";
    for (const CandidateResult& c : cal.candidates) {
      csv += num(c.alpha) + "," + num(c.revpar) + "," + num(c.occupancy) + "," + num(c.adr) + "," +
             std::to_string(c.buckets_used) + "," + (c.passes ? "yes" : "no") + "," + num(c.distance) + "," +
             (c.alpha == cal.selected.alpha ? "yes" : "no") + "\n";
    }
    internal::write_text(m.path_of(m.calibration_csv), csv);
  } else {
    m.reference = evaluate_candidate(config.market, config.calibration, cal_seed);
  }
  const MarketParams params = config.market;
  m.alpha = params.alpha;
  m.params_fingerprint = params.fingerprint();
  m.config = "config.ini";
  save_config(m.path_of(m.config), config);
  m.config_fingerprint = config_fingerprint(config);
  m.metrics_csv = "metrics.csv";
  m.buckets_csv = "buckets.csv";
  m.ci_csv = "ci.csv";
  m.summary_md = "summary.md";

  m.seeds.resize(config.seeds.size());
  const auto errors = parallel_for(config.seeds.size(), [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    SeedRecord& rec = m.seeds[i];
    rec.index = config.seeds[i];
    rec.seed = run_seed(config.root_seed, rec.index);
    rec.dir = seed_dir(rec.index);
    rec.traces = rec.dir + "/eval_traces.jsonl";
    rec.train_stats = rec.dir + "/train_stats.csv";
    rec.metrics = rec.dir + "/metrics.csv";
    const TrainingResult result = run_training(config.train, params, rec.seed);
    for (const auto& [role, net] : checkpoint_roles(result)) {
      rec.checkpoints[role] = rec.dir + "/checkpoints/" + role + ".json";
      fs::create_directories(m.path_of(rec.dir + "/checkpoints"));
      save_checkpoint(m.path_of(rec.checkpoints[role]), *net, role);
    }
    internal::write_text(m.path_of(rec.train_stats), stats_csv(result.stats));
    persist_seed(m, rec, result, params);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    m.status = "failed";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      m.error = "seed " + std::to_string(config.seeds[i]) + ": " + e.what();
    }
    // Only seeds that finished stay in the manifest.
    std::vector<SeedRecord> done;
    for (std::size_t k = 0; k < errors.size(); ++k) {
      if (!errors[k]) done.push_back(m.seeds[k]);
    }
    m.seeds = std::move(done);
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(m);
    std::rethrow_exception(errors[i]);
  }

  write_aggregates(m, params);
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(m);
  return m;
}

std::vector<RunManifest> run_sweep(const ExperimentConfig& config) {
  if (config.beta_sweep.empty()) return {run_experiment(config)};
  config.validate();
  std::vector<RunManifest> out;
  const fs::path root = fs::path(config.output_dir) / config.name;
  for (double beta : config.beta_sweep) {
    ExperimentConfig c = config;
    c.beta_sweep.clear();
    c.train.beta = beta;
    c.output_dir = root.string();
    c.name = "beta-" + num(beta, 6);
    out.push_back(run_experiment(c));
  }
  write_beta_sensitivity_csv(out, root / "beta_sensitivity.csv");
  return out;
}

ExperimentConfig load_run_config(const RunManifest& m) { return load_config(m.path_of(m.config)); }

std::vector<EpisodeTrace> load_eval_traces(const RunManifest& m) {
  std::vector<EpisodeTrace> all;
  for (const SeedRecord& r : m.seeds) {
    auto traces = read_traces_jsonl(m.path_of(r.traces));
    all.insert(all.end(), std::make_move_iterator(traces.begin()), std::make_move_iterator(traces.end()));
  }
  return all;
}

RunManifest evaluate_run(const fs::path& manifest_path) {
  RunManifest m = load_manifest(manifest_path);
  if (!m.complete()) fail(ErrorCode::kState, "cannot evaluate a failed run: " + m.error);
  const auto started = std::chrono::steady_clock::now();
  const ExperimentConfig config = load_run_config(m);
  const MarketParams& params = config.market;
  for (SeedRecord& rec : m.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    TrainingResult result;
    result.algorithm = m.algorithm;
    result.seed = rec.seed;
    auto load_role = [&](const char* role, std::optional<NetParams>& slot) {
      const auto it = rec.checkpoints.find(role);
      if (it != rec.checkpoints.end()) slot = load_checkpoint(m.path_of(it->second));
    };
    load_role("q_network", result.q_network);
    load_role("forecast", result.forecast);
    load_role("prior", result.prior);
    load_role("policy", result.policy);
    load_role("value", result.value);
    result.prior_fingerprint_frozen = rec.summary.prior_fingerprint_frozen;
    result.prior_fingerprint_final = rec.summary.prior_fingerprint_final;
    result.final_lambda = rec.summary.final_lambda;
    result.eval_traces = evaluate_policy(make_eval_policy(result, config.train), params, rec.seed,
                                         config.train.eval_episodes);
    result.eval = summarize_evaluation(result, params);
    persist_seed(m, rec, result, params);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  write_aggregates(m, params);
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(m);
  return m;
}

std::string ambiguity_to_json(const AmbiguityReport& r) {
  return json{{"visited_steps", r.visited_steps},
              {"eligible_cells", r.eligible_cells},
              {"eligible_step_share", r.eligible_step_share},
              {"cells_multi_action_share", r.cells_multi_action_share},
              {"cells_substantive_share", r.cells_substantive_share},
              {"substantive_step_share", r.substantive_step_share},
              {"weighted_normalized_entropy", r.weighted_normalized_entropy},
              {"weighted_modal_share", r.weighted_modal_share}}
             .dump(2) +
         "\n";
}

AmbiguityReport ambiguity_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    AmbiguityReport r;
    r.visited_steps = j.at("visited_steps").get<std::int64_t>();
    r.eligible_cells = j.at("eligible_cells").get<std::int64_t>();
    r.eligible_step_share = j.at("eligible_step_share").get<double>();
    r.cells_multi_action_share = j.at("cells_multi_action_share").get<double>();
    r.cells_substantive_share = j.at("cells_substantive_share").get<double>();
    r.substantive_step_share = j.at("substantive_step_share").get<double>();
    r.weighted_normalized_entropy = j.at("weighted_normalized_entropy").get<double>();
    r.weighted_modal_share = j.at("weighted_modal_share").get<double>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("ambiguity report: ") + e.what());
  }
}

namespace {

json calibration_json(const CalibrationReport& r) {
  return json{{"nll", r.nll},
              {"accuracy", r.accuracy},
              {"brier", r.brier},
              {"true_prob", r.true_prob},
              {"normalized_entropy", r.normalized_entropy},
              {"ece", r.ece},
              {"samples", r.samples}};
}

CalibrationReport calibration_of(const json& j) {
  CalibrationReport r;
  r.nll = j.at("nll").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.brier = j.at("brier").get<double>();
  r.true_prob = j.at("true_prob").get<double>();
  r.normalized_entropy = j.at("normalized_entropy").get<double>();
  r.ece = j.at("ece").get<double>();
  r.samples = j.at("samples").get<std::size_t>();
  return r;
}

}  // namespace

std::string calibration_to_json(const CalibrationReport& r) { return calibration_json(r).dump(2) + "\n"; }

CalibrationReport calibration_from_json(const std::string& text) {
  try {
    return calibration_of(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("calibration report: ") + e.what());
  }
}

std::string oracle_to_json(const OracleAblation& r) {
  return json{{"observable", calibration_json(r.observable)},
              {"oracle", calibration_json(r.oracle)},
              {"train_samples", r.train_samples},
              {"test_samples", r.test_samples}}
             .dump(2) +
         "\n";
}

OracleAblation oracle_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    OracleAblation r;
    r.observable = calibration_of(j.at("observable"));
    r.oracle = calibration_of(j.at("oracle"));
    r.train_samples = j.at("train_samples").get<std::size_t>();
    r.test_samples = j.at("test_samples").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("oracle report: ") + e.what());
  }
}

AmbiguityReport diagnose_ambiguity(const RunManifest& m, int min_cell_count) {
  const ExperimentConfig config = load_run_config(m);
  const auto traces = load_eval_traces(m);
  const AmbiguityReport r = ambiguity_report(traces, config.market, min_cell_count);
  internal::write_text(m.run_dir / "diagnostics" / "ambiguity.json", ambiguity_to_json(r));
  return r;
}

OracleAblation diagnose_oracle(const RunManifest& m) {
  const ExperimentConfig config = load_run_config(m);
  const auto traces = load_eval_traces(m);
  const auto samples = labeled_samples(traces, config.market);
  const ClassifierFitConfig fit{config.train.prior_epochs, config.train.prior_batch_size,
                                config.train.prior_learning_rate};
  const OracleAblation r = oracle_ablation(samples, config.train.hidden, fit,
                                           derive_stream({config.root_seed, kOracleSalt}));
  internal::write_text(m.run_dir / "diagnostics" / "oracle.json", oracle_to_json(r));
  return r;
}

CalibrationReport diagnose_calibration(const RunManifest& m) {
  const ExperimentConfig config = load_run_config(m);
  std::vector<ActionDistribution> predictions;
  std::vector<int> labels;
  for (const SeedRecord& rec : m.seeds) {
    const auto it = rec.checkpoints.find("prior");
    if (it == rec.checkpoints.end()) fail(ErrorCode::kState, "run " + m.name + " has no market prior");
    const NetParams prior = load_checkpoint(m.path_of(it->second));
    const auto traces = read_traces_jsonl(m.path_of(rec.traces));
    for (const LabeledSample& s : labeled_samples(traces, config.market)) {
      predictions.push_back(predict_distribution(prior, s.obs));
      labels.push_back(s.label);
    }
  }
  const CalibrationReport r = calibration_report(predictions, labels);
  internal::write_text(m.run_dir / "diagnostics" / "calibration.json", calibration_to_json(r));
  return r;
}

std::vector<RunManifest> discover_manifests(const fs::path& root) {
  std::vector<fs::path> files;
  if (fs::exists(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().filename() == kManifestFile) files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunManifest> out;
  for (const fs::path& f : files) out.push_back(load_manifest(f));
  return out;
}

}  // namespace yieldtrace
