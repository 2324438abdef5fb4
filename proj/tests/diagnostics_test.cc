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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "yieldtrace/diagnostics.hpp"
#include "yieldtrace/error.hpp"
#include "yieldtrace/trace_io.hpp"

namespace yieldtrace {
namespace {

MarketParams calibrated() {
  MarketParams p;
  p.alpha = 3.5;
  return p;
}

StepOutcome row(int day, int bucket_a, double price_a, int sales_a, int bucket_b = 1, int rooms_a = 100) {
  StepOutcome s;
  s.day = day;
  s.bucket_a = bucket_a;
  s.price_a = price_a;
  s.sales_a = sales_a;
  s.bucket_b = bucket_b;
  s.price_b = 120;
  s.rooms_a = rooms_a;
  s.rooms_b = 100;
  return s;
}

TEST_CASE("business metrics on hand-built traces") {
  EpisodeTrace one;
  one.rows.push_back(row(0, 0, 100, 1));
  const BusinessMetrics m = business_metrics(one, Hotel::kA, 100);
  CHECK(m.revpar == doctest::Approx(1.0));
  CHECK(m.occupancy == doctest::Approx(0.01));
  REQUIRE(m.adr.has_value());
  CHECK(*m.adr == doctest::Approx(100.0));

  EpisodeTrace empty;
  empty.rows.push_back(row(0, 3, 160, 0));
  const BusinessMetrics z = business_metrics(empty, Hotel::kA, 100);
  CHECK(z.revpar == 0.0);
  CHECK(z.occupancy == 0.0);
  CHECK(!z.adr.has_value());

  EpisodeTrace mixed;
  mixed.rows.push_back(row(0, 1, 120, 10));
  mixed.rows.push_back(row(1, 3, 160, 10));
  CHECK(*business_metrics(mixed, Hotel::kA, 100).adr == doctest::Approx(140.0));
}

TEST_CASE("revenue identity holds on simulated traces") {
  const MarketParams params = calibrated();
  const ActionSource random_play = [](const Observation&, Rng& rng) { return rng.uniform_int(kNumBuckets); };
  for (std::uint64_t e = 0; e < 200; ++e) {
    const EpisodeTrace tr = run_episode(random_play, params, 3, e);
    for (Hotel h : {Hotel::kA, Hotel::kB}) {
      const BusinessMetrics m = business_metrics(tr, h, params.capacity);
      CHECK(m.occupancy >= 0.0);
      CHECK(m.occupancy <= 1.0);
      if (m.adr) CHECK(*m.adr * static_cast<double>(m.rooms_sold) == doctest::Approx(m.revenue).epsilon(1e-12));
      // Grid prices are integers, so the revenue sum is exact.
      CHECK(m.revenue == std::round(m.revenue));
    }
  }
}

TEST_CASE("bucket distributions") {
  EpisodeTrace tr;
  for (int d = 0; d < 10; ++d) tr.rows.push_back(row(d, d % 2, 100, 0, 1));
  const std::vector<EpisodeTrace> traces{tr};
  const BucketDistribution a = bucket_distribution(traces, Hotel::kA);
  CHECK(a.share[0] == 0.5);
  CHECK(a.share[1] == 0.5);
  const BucketDistribution b = bucket_distribution(traces, Hotel::kB);
  CHECK(b.share[1] == 1.0);
  CHECK(bucket_distribution({}, Hotel::kA).empty());
}

TEST_CASE("Hotel B's modal bucket under calibrated parameters is 120") {
  const MarketParams params = calibrated();
  std::vector<EpisodeTrace> traces;
  for (std::uint64_t e = 0; e < 10000; ++e) traces.push_back(run_episode(mirrored_rm_policy(params), params, 9, e));
  const BucketDistribution b = bucket_distribution(traces, Hotel::kB);
  CHECK(argmax_action(std::span<const double>(b.share)) == 1);
}

TEST_CASE("distribution distances") {
  const std::array<double, 7> half_a{0.5, 0.5, 0, 0, 0, 0, 0};
  const std::array<double, 7> half_b{0, 0.5, 0.5, 0, 0, 0, 0};
  const Distances same = distribution_distances(half_a, half_a);
  CHECK(same.l1 == 0.0);
  CHECK(same.js == 0.0);

  const std::array<double, 7> hot0{1, 0, 0, 0, 0, 0, 0};
  const std::array<double, 7> hot5{0, 0, 0, 0, 0, 1, 0};
  const Distances far = distribution_distances(hot0, hot5);
  CHECK(far.l1 == 2.0);
  CHECK(far.js == doctest::Approx(std::numbers::ln2).epsilon(1e-12));

  const Distances shifted = distribution_distances(half_a, half_b);
  CHECK(shifted.l1 == doctest::Approx(1.0));
  CHECK(std::abs(shifted.js - 0.34657359027997264) < 1e-9);
}

TEST_CASE("seed-level intervals") {
  const std::vector<double> flat(5, 3.25);
  const SeedInterval f = seed_ci(flat);
  CHECK(f.low == 3.25);
  CHECK(f.high == 3.25);
  CHECK(f.contains(3.25));

  // Reference: scipy.stats.t.ppf(0.975, 4) = 2.7764451051977987.
  const std::vector<double> skew{0, 0, 0, 0, 10};
  const SeedInterval s = seed_ci(skew);
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(std::abs(s.low - -3.5528902103955975) < 1e-9);
  CHECK(std::abs(s.high - 7.5528902103955975) < 1e-9);
  CHECK(s.contains(s.high));
  CHECK(s.contains(s.low));
  CHECK(!s.contains(std::nextafter(s.high, 100.0)));

  CHECK_THROWS_AS(seed_ci(std::vector<double>{1.0}), Error);

  // Widening the spread never narrows the interval.
  double previous = 0.0;
  for (double spread = 0.0; spread < 5.0; spread += 0.25) {
    const std::vector<double> v{1.0 - spread, 1.0, 1.0 + spread, 1.0 + 0.5 * spread, 1.0};
    const SeedInterval i = seed_ci(v);
    CHECK(i.high - i.low >= previous);
    previous = i.high - i.low;
  }
}

// One-day traces whose only varying cell component is A's inventory bucket.
EpisodeTrace one_day(int rooms_a, int bucket_b) {
  EpisodeTrace tr;
  tr.rows.push_back(row(0, 1, 120, 0, bucket_b, rooms_a));
  return tr;
}

TEST_CASE("ambiguity report on a single unambiguous cell") {
  std::vector<EpisodeTrace> traces(50, one_day(100, 2));
  const AmbiguityReport r = ambiguity_report(traces, MarketParams{});
  CHECK(r.eligible_cells == 1);
  CHECK(r.cells_multi_action_share == 0.0);
  CHECK(r.weighted_normalized_entropy == 0.0);
  CHECK(r.weighted_modal_share == 1.0);
}

TEST_CASE("ambiguity report on an even two-way cell") {
  std::vector<EpisodeTrace> traces;
  for (int i = 0; i < 40; ++i) traces.push_back(one_day(100, 1 + i % 2));
  const AmbiguityReport r = ambiguity_report(traces, MarketParams{});
  CHECK(r.cells_multi_action_share == 1.0);
  CHECK(r.weighted_normalized_entropy == doctest::Approx(0.3562071871080222).epsilon(1e-12));
  CHECK(r.weighted_modal_share == 0.5);
}

TEST_CASE("ambiguity report recovers a constructed prevalence") {
  // Inventory buckets 0..4 get equal traffic. Buckets 0 and 1 mix two B
  // actions evenly; bucket 2 mixes in a 2% minority; 3 and 4 are pure.
  std::mt19937_64 gen(17);
  std::vector<EpisodeTrace> traces;
  for (int i = 0; i < 20000; ++i) {
    const int cell = i % 5;
    const int rooms = cell * 20 + 5;
    int b = 3;
    if (cell <= 1) b = gen() % 2 ? 1 : 2;
    if (cell == 2) b = gen() % 50 == 0 ? 4 : 3;
    traces.push_back(one_day(rooms, b));
  }
  const AmbiguityReport r = ambiguity_report(traces, MarketParams{});
  CHECK(r.eligible_cells == 5);
  CHECK(std::abs(r.substantive_step_share - 0.4) < 0.02);
  CHECK(r.cells_multi_action_share == doctest::Approx(0.6));
  CHECK(r.cells_substantive_share == doctest::Approx(0.4));

  std::shuffle(traces.begin(), traces.end(), gen);
  const AmbiguityReport s = ambiguity_report(traces, MarketParams{});
  CHECK(s.substantive_step_share == r.substantive_step_share);
  CHECK(s.weighted_normalized_entropy == doctest::Approx(r.weighted_normalized_entropy).epsilon(1e-12));
}

TEST_CASE("ambiguity shares are bounded and order-free on simulated traces") {
  const MarketParams params = calibrated();
  std::vector<EpisodeTrace> traces;
  for (std::uint64_t e = 0; e < 500; ++e) traces.push_back(run_episode(mirrored_rm_policy(params), params, 1, e));
  const AmbiguityReport r = ambiguity_report(traces, params);
  for (double v : {r.eligible_step_share, r.cells_multi_action_share, r.cells_substantive_share,
                   r.substantive_step_share, r.weighted_normalized_entropy, r.weighted_modal_share}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  std::reverse(traces.begin(), traces.end());
  const AmbiguityReport s = ambiguity_report(traces, params);
  CHECK(s.cells_multi_action_share == r.cells_multi_action_share);
  CHECK(s.substantive_step_share == r.substantive_step_share);
  CHECK(s.weighted_normalized_entropy == doctest::Approx(r.weighted_normalized_entropy).epsilon(1e-12));
}

TEST_CASE("cell keys are bounded") {
  const MarketParams params = calibrated();
  std::vector<EpisodeTrace> traces;
  for (std::uint64_t e = 0; e < 100; ++e) traces.push_back(run_episode(mirrored_rm_policy(params), params, 2, e));
  const auto cuts = market_quartile_cuts(traces);
  CHECK(cuts[0] <= cuts[1]);
  CHECK(cuts[1] <= cuts[2]);
  for (const EpisodeTrace& tr : traces) {
    for (int t = 0; t < params.horizon; ++t) {
      const CellKey k = cell_key(tr, t, cuts, params.capacity);
      CHECK(k.time_band == t / 3);
      CHECK(k.inventory_bucket >= 0);
      CHECK(k.inventory_bucket <= 4);
      CHECK(k.market_quartile >= 0);
      CHECK(k.market_quartile <= 3);
      CHECK(k.previous_sales_bin >= 0);
      CHECK(k.previous_sales_bin <= 3);
    }
  }
}

TEST_CASE("calibration report on degenerate predictors") {
  std::vector<ActionDistribution> exact;
  std::vector<int> labels;
  for (int i = 0; i < 70; ++i) {
    labels.push_back(i % 7);
    exact.push_back(ActionDistribution::one_hot(i % 7));
  }
  const CalibrationReport p = calibration_report(exact, labels);
  CHECK(p.nll == 0.0);
  CHECK(p.brier == 0.0);
  CHECK(p.accuracy == 1.0);
  CHECK(p.ece == 0.0);

  const std::vector<ActionDistribution> flat(70, ActionDistribution::uniform());
  const CalibrationReport u = calibration_report(flat, labels);
  CHECK(u.nll == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(u.brier == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(u.normalized_entropy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.true_prob == doctest::Approx(1.0 / 7.0));

  CHECK_THROWS_AS(calibration_report({}, {}), Error);
}

TEST_CASE("a self-consistent predictor has small ECE") {
  Rng rng(23);
  std::vector<ActionDistribution> preds;
  std::vector<int> labels;
  for (int i = 0; i < 100000; ++i) {
    ActionDistribution d;
    double total = 0.0;
    for (double& v : d.p) total += (v = std::pow(rng.uniform(), 3.0));
    for (double& v : d.p) v /= total;
    preds.push_back(d);
    labels.push_back(sample_categorical(d, rng));
  }
  const CalibrationReport r = calibration_report(preds, labels);
  CHECK(r.ece < 0.02);
  CHECK(r.ece >= 0.0);
}

std::vector<LabeledSample> synthetic_samples(bool hidden_decides, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledSample> out;
  for (int i = 0; i < n; ++i) {
    LabeledSample s;
    for (double& f : s.obs.features) f = rng.uniform();
    s.hidden_rooms = rng.uniform();
    s.label = hidden_decides ? 1 + static_cast<int>(4.0 * s.hidden_rooms) : 1 + rng.uniform_int(4);
    out.push_back(s);
  }
  return out;
}

TEST_CASE("oracle ablation when labels follow the hidden inventory") {
  const auto samples = synthetic_samples(true, 6000, 31);
  const OracleAblation r = oracle_ablation(samples, {32, 32}, {40, 64, 3e-3}, 5);
  CHECK(r.train_samples == 4800);
  CHECK(r.test_samples == 1200);
  CHECK(r.oracle.accuracy > 0.95);
  CHECK(r.observable.accuracy < 0.35);
}

TEST_CASE("oracle ablation without a hidden signal") {
  const auto samples = synthetic_samples(false, 6000, 32);
  const OracleAblation r = oracle_ablation(samples, {16}, {10, 64, 3e-3}, 6);
  CHECK(std::abs(r.oracle.nll - r.observable.nll) < 0.05);
}

TEST_CASE("distribution metrics match a naive pass over raw JSONL") {
  const MarketParams params = calibrated();
  const ActionSource random_play = [](const Observation&, Rng& rng) { return rng.uniform_int(kNumBuckets); };
  std::vector<EpisodeTrace> traces;
  for (std::uint64_t e = 0; e < 300; ++e) traces.push_back(run_episode(random_play, params, 4, e));
  const auto path = std::filesystem::temp_directory_path() / "yieldtrace_diagnostics_test.jsonl";
  write_traces_jsonl(path, traces);

  std::array<double, 7> ca{}, cb{};
  double days = 0.0;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (int a : j["a_A"]) ca[static_cast<std::size_t>(a)] += 1.0;
    for (int b : j["a_B"]) cb[static_cast<std::size_t>(b)] += 1.0;
    days += static_cast<double>(j["a_A"].size());
  }
  std::filesystem::remove(path);
  double l1 = 0.0, js = 0.0;
  for (int k = 0; k < 7; ++k) {
    const double a = ca[k] / days, b = cb[k] / days, m = 0.5 * (a + b);
    l1 += std::abs(a - b);
    if (a > 0) js += 0.5 * a * std::log(a / m);
    if (b > 0) js += 0.5 * b * std::log(b / m);
  }
  const Distances d = distribution_distances(bucket_distribution(traces, Hotel::kA),
                                             bucket_distribution(traces, Hotel::kB));
  CHECK(std::abs(d.l1 - l1) < 1e-9);
  CHECK(std::abs(d.js - js) < 1e-9);
}

}  // namespace
}  // namespace yieldtrace
