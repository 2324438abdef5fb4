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

#ifndef YIELDTRACE_DIAGNOSTICS_HPP_
#define YIELDTRACE_DIAGNOSTICS_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "yieldtrace/market.hpp"
#include "yieldtrace/policies.hpp"
#include "yieldtrace/simulator.hpp"
#include "yieldtrace/trainers.hpp"

namespace yieldtrace {

// Per-episode averages of RevPAR = sum(p y)/Q and Occ = sum(y)/Q, and
// ADR = sum(p y) / sum(y) over all episodes (nullopt when nothing sold).
struct BusinessMetrics {
  double revpar = 0.0;
  double occupancy = 0.0;
  std::optional<double> adr;
  double revenue = 0.0;          // total over episodes
  std::int64_t rooms_sold = 0;   // total over episodes
  std::size_t episodes = 0;
};

BusinessMetrics business_metrics(std::span<const EpisodeTrace> traces, Hotel hotel, int capacity);
BusinessMetrics business_metrics(const EpisodeTrace& trace, Hotel hotel, int capacity);

// Share of posted-price days per bucket, sold or not.
struct BucketDistribution {
  std::array<double, kNumBuckets> share{};
  std::int64_t days = 0;
  bool empty() const { return days == 0; }
};

BucketDistribution bucket_distribution(std::span<const EpisodeTrace> traces, Hotel hotel);

struct Distances {
  double l1 = 0.0;
  double js = 0.0;
};

// L1 = sum |a - b|; JS = (KL(a||m) + KL(b||m)) / 2 with m = (a + b) / 2, natural log.
Distances distribution_distances(std::span<const double> a, std::span<const double> b);
Distances distribution_distances(const BucketDistribution& a, const BucketDistribution& b);

// Student-t interval over per-seed means: mean +/- t_{(1+c)/2, n-1} s / sqrt(n).
struct SeedInterval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
  // Closed interval.
  bool contains(double v) const { return v >= low && v <= high; }
};

// Throws Error(kInvalidArgument) for fewer than two seeds.
SeedInterval seed_ci(std::span<const double> seed_means, double confidence = 0.95);

// Coarse Hotel A-visible cell: 3-day band, floor(5 q_A/Q) capped at 4,
// market quartile, previous-day own sales capped at 3, and the exact last
// three Hotel B buckets.
struct CellKey {
  int time_band = 0;
  int inventory_bucket = 0;
  int market_quartile = 0;
  int previous_sales_bin = 0;
  std::array<int, kLagCount> lagged_b{};
  auto operator<=>(const CellKey&) const = default;
};

// Empirical quartile cut points of every visited market value.
std::array<double, 3> market_quartile_cuts(std::span<const EpisodeTrace> traces);
CellKey cell_key(const EpisodeTrace& trace, int day, const std::array<double, 3>& cuts, int capacity);

struct AmbiguityReport {
  std::int64_t visited_steps = 0;
  std::int64_t eligible_cells = 0;
  double eligible_step_share = 0.0;
  double cells_multi_action_share = 0.0;        // >= 2 distinct B actions
  double cells_substantive_share = 0.0;         // >= 2 actions each >= 5%
  double substantive_step_share = 0.0;          // of eligible steps
  double weighted_normalized_entropy = 0.0;     // entropy / ln 7, visit weighted
  double weighted_modal_share = 0.0;
};

inline constexpr int kDefaultMinCellCount = 20;
inline constexpr double kSubstantiveActionShare = 0.05;

AmbiguityReport ambiguity_report(std::span<const EpisodeTrace> traces, const MarketParams& params,
                                 int min_cell_count = kDefaultMinCellCount);

struct CalibrationReport {
  double nll = 0.0;
  double accuracy = 0.0;
  double brier = 0.0;
  double true_prob = 0.0;
  double normalized_entropy = 0.0;
  double ece = 0.0;
  std::size_t samples = 0;
};

// NLL uses -ln max(p_true, 1e-6); ECE uses 10 equal-width bins on the top
// probability, weighted by bin counts. Throws on an empty set.
CalibrationReport calibration_report(std::span<const ActionDistribution> predictions,
                                     std::span<const int> labels);

// One step of supervised Hotel B price prediction data.
struct LabeledSample {
  Observation obs;
  double hidden_rooms = 0.0;  // q_B / Q, never visible to Hotel A
  int label = 0;              // a_B
};

std::vector<LabeledSample> labeled_samples(std::span<const EpisodeTrace> traces, const MarketParams& params);

struct OracleAblation {
  CalibrationReport observable;
  CalibrationReport oracle;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
};

// Trains an observable (7-feature) and an oracle (7 + q_B/Q) predictor on
// the first `train_fraction` of the samples and scores both on the rest.
OracleAblation oracle_ablation(std::span<const LabeledSample> samples, const std::vector<int>& hidden,
                               const ClassifierFitConfig& fit, std::uint64_t seed,
                               double train_fraction = 0.8);

// Calibration of a predictor on every step of a trace corpus.
CalibrationReport predictor_calibration(const NetParams& predictor, std::span<const EpisodeTrace> traces,
                                        const MarketParams& params);

}  // namespace yieldtrace

#endif  // YIELDTRACE_DIAGNOSTICS_HPP_
