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

#include "yieldtrace/diagnostics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "yieldtrace/error.hpp"

namespace yieldtrace {

namespace {

double kl_to_mixture(std::span<const double> p, std::span<const double> m) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / m[i]);
  }
  return kl;
}

}  // namespace

BusinessMetrics business_metrics(std::span<const EpisodeTrace> traces, Hotel hotel, int capacity) {
  require(capacity > 0, "capacity must be positive");
  BusinessMetrics out;
  for (const EpisodeTrace& tr : traces) {
    double revenue = 0.0;
    std::int64_t sold = 0;
    for (const StepOutcome& row : tr.rows) {
      revenue += row.price(hotel) * row.sales(hotel);
      sold += row.sales(hotel);
    }
    out.revpar += revenue / capacity;
    out.occupancy += static_cast<double>(sold) / capacity;
    out.revenue += revenue;
    out.rooms_sold += sold;
  }
  out.episodes = traces.size();
  if (out.episodes > 0) {
    out.revpar /= static_cast<double>(out.episodes);
    out.occupancy /= static_cast<double>(out.episodes);
  }
  if (out.rooms_sold > 0) out.adr = out.revenue / static_cast<double>(out.rooms_sold);
  return out;
}

BusinessMetrics business_metrics(const EpisodeTrace& trace, Hotel hotel, int capacity) {
  return business_metrics(std::span<const EpisodeTrace>(&trace, 1), hotel, capacity);
}

BucketDistribution bucket_distribution(std::span<const EpisodeTrace> traces, Hotel hotel) {
  BucketDistribution d;
  std::array<std::int64_t, kNumBuckets> counts{};
  for (const EpisodeTrace& tr : traces) {
    for (const StepOutcome& row : tr.rows) ++counts[static_cast<std::size_t>(row.bucket(hotel))];
  }
  for (auto c : counts) d.days += c;
  if (d.days > 0) {
    for (int i = 0; i < kNumBuckets; ++i) d.share[i] = static_cast<double>(counts[i]) / static_cast<double>(d.days);
  }
  return d;
}

Distances distribution_distances(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), "distribution_distances: size mismatch");
  Distances out;
  std::vector<double> mix(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.l1 += std::abs(a[i] - b[i]);
    mix[i] = 0.5 * (a[i] + b[i]);
  }
  out.js = 0.5 * kl_to_mixture(a, mix) + 0.5 * kl_to_mixture(b, mix);
  out.js = std::max(0.0, out.js);
  return out;
}

Distances distribution_distances(const BucketDistribution& a, const BucketDistribution& b) {
  return distribution_distances(a.share, b.share);
}

SeedInterval seed_ci(std::span<const double> seed_means, double confidence) {
  const std::size_t n = seed_means.size();
  require(n >= 2, "seed_ci needs at least two seeds");
  require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
  double mean = 0.0;
  for (double v : seed_means) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : seed_means) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.5 + 0.5 * confidence);
  const double half = t * sd / std::sqrt(static_cast<double>(n));
  return SeedInterval{mean, mean - half, mean + half};
}

std::array<double, 3> market_quartile_cuts(std::span<const EpisodeTrace> traces) {
  std::vector<double> values;
  for (const EpisodeTrace& tr : traces) {
    for (const StepOutcome& row : tr.rows) values.push_back(row.market);
  }
  std::array<double, 3> cuts{0.0, 0.0, 0.0};
  if (values.empty()) return cuts;
  std::sort(values.begin(), values.end());
  for (int k = 1; k <= 3; ++k) {
    cuts[k - 1] = values[std::min(values.size() - 1, k * values.size() / 4)];
  }
  return cuts;
}

CellKey cell_key(const EpisodeTrace& trace, int day, const std::array<double, 3>& cuts, int capacity) {
  const StepOutcome& row = trace.rows.at(static_cast<std::size_t>(day));
  CellKey key;
  key.time_band = day / 3;
  key.inventory_bucket = std::min(4, (5 * row.rooms_a) / capacity);
  key.market_quartile = 0;
  for (double c : cuts) {
    if (row.market >= c) ++key.market_quartile;
  }
  key.previous_sales_bin = day > 0 ? std::min(3, trace.rows[static_cast<std::size_t>(day - 1)].sales_a) : 0;
  for (int i = 0; i < kLagCount; ++i) {
    const int d = day - 1 - i;
    key.lagged_b[i] = d >= 0 ? trace.rows[static_cast<std::size_t>(d)].bucket_b : kLagPadBucket;
  }
  return key;
}

AmbiguityReport ambiguity_report(std::span<const EpisodeTrace> traces, const MarketParams& params,
                                 int min_cell_count) {
  require(min_cell_count >= 1, "min_cell_count must be >= 1");
  const auto cuts = market_quartile_cuts(traces);
  std::map<CellKey, std::array<std::int64_t, kNumBuckets>> cells;
  AmbiguityReport r;
  for (const EpisodeTrace& tr : traces) {
    for (int t = 0; t < static_cast<int>(tr.rows.size()); ++t) {
      ++cells[cell_key(tr, t, cuts, params.capacity)][static_cast<std::size_t>(tr.rows[t].bucket_b)];
      ++r.visited_steps;
    }
  }
  std::int64_t eligible_steps = 0, multi = 0, substantive = 0, substantive_steps = 0;
  double entropy_sum = 0.0, modal_sum = 0.0;
  for (const auto& [key, counts] : cells) {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    if (n < min_cell_count) continue;
    ++r.eligible_cells;
    eligible_steps += n;
    int distinct = 0, large = 0;
    double h = 0.0;
    std::int64_t top = 0;
    for (auto c : counts) {
      if (c == 0) continue;
      ++distinct;
      const double share = static_cast<double>(c) / static_cast<double>(n);
      if (share >= kSubstantiveActionShare) ++large;
      h -= share * std::log(share);
      top = std::max(top, c);
    }
    if (distinct >= 2) ++multi;
    if (large >= 2) {
      ++substantive;
      substantive_steps += n;
    }
    entropy_sum += static_cast<double>(n) * h / std::log(static_cast<double>(kNumBuckets));
    modal_sum += static_cast<double>(top);
  }
  if (r.visited_steps > 0) r.eligible_step_share = static_cast<double>(eligible_steps) / static_cast<double>(r.visited_steps);
  if (r.eligible_cells > 0) {
    r.cells_multi_action_share = static_cast<double>(multi) / static_cast<double>(r.eligible_cells);
    r.cells_substantive_share = static_cast<double>(substantive) / static_cast<double>(r.eligible_cells);
  }
  if (eligible_steps > 0) {
    const double e = static_cast<double>(eligible_steps);
    r.substantive_step_share = static_cast<double>(substantive_steps) / e;
    r.weighted_normalized_entropy = entropy_sum / e;
    r.weighted_modal_share = modal_sum / e;
  }
  return r;
}

CalibrationReport calibration_report(std::span<const ActionDistribution> predictions,
                                     std::span<const int> labels) {
  require(!predictions.empty(), "calibration_report: empty prediction set");
  require(predictions.size() == labels.size(), "calibration_report: label count mismatch");
  constexpr int kBins = 10;
  std::array<double, kBins> bin_conf{}, bin_correct{};
  std::array<std::int64_t, kBins> bin_count{};
  CalibrationReport r;
  r.samples = predictions.size();
  const double log_k = std::log(static_cast<double>(kNumBuckets));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const ActionDistribution& p = predictions[i];
    const int y = labels[i];
    require(y >= 0 && y < kNumBuckets, "calibration_report: label out of range");
    r.nll -= std::log(std::max(p[y], kProbabilityFloor));
    const int top = argmax_action(p);
    const bool correct = top == y;
    r.accuracy += correct ? 1.0 : 0.0;
    for (int k = 0; k < kNumBuckets; ++k) {
      const double diff = p[k] - (k == y ? 1.0 : 0.0);
      r.brier += diff * diff;
    }
    r.true_prob += p[y];
    r.normalized_entropy += entropy(p) / log_k;
    const double conf = p[top];
    const int bin = std::clamp(static_cast<int>(conf * kBins), 0, kBins - 1);
    bin_conf[bin] += conf;
    bin_correct[bin] += correct ? 1.0 : 0.0;
    ++bin_count[bin];
  }
  const double n = static_cast<double>(r.samples);
  r.nll /= n;
  r.accuracy /= n;
  r.brier /= n;
  r.true_prob /= n;
  r.normalized_entropy /= n;
  for (int b = 0; b < kBins; ++b) {
    if (bin_count[b] == 0) continue;
    const double c = static_cast<double>(bin_count[b]);
    r.ece += (c / n) * std::abs(bin_correct[b] / c - bin_conf[b] / c);
  }
  return r;
}

std::vector<LabeledSample> labeled_samples(std::span<const EpisodeTrace> traces, const MarketParams& params) {
  std::vector<LabeledSample> out;
  for (const EpisodeTrace& tr : traces) {
    for (int t = 0; t < static_cast<int>(tr.rows.size()); ++t) {
      const StepOutcome& row = tr.rows[static_cast<std::size_t>(t)];
      out.push_back({observation_at(tr, t, params), static_cast<double>(row.rooms_b) / params.capacity, row.bucket_b});
    }
  }
  return out;
}

namespace {

Eigen::MatrixXd sample_inputs(std::span<const LabeledSample> samples, bool with_hidden) {
  const int width = kObservationWidth + (with_hidden ? 1 : 0);
  Eigen::MatrixXd m(width, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    for (int f = 0; f < kObservationWidth; ++f) m(f, c) = samples[i].obs.features[f];
    if (with_hidden) m(kObservationWidth, c) = samples[i].hidden_rooms;
  }
  return m;
}

CalibrationReport score(const NetParams& net, const Eigen::MatrixXd& inputs, std::span<const int> labels) {
  const Eigen::MatrixXd probs = forward_batch(net, inputs);
  std::vector<ActionDistribution> preds(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    preds[static_cast<std::size_t>(c)] = ActionDistribution::from(std::span<const double>(probs.col(c).data(), kNumBuckets));
  }
  return calibration_report(preds, labels);
}

}  // namespace

OracleAblation oracle_ablation(std::span<const LabeledSample> samples, const std::vector<int>& hidden,
                               const ClassifierFitConfig& fit, std::uint64_t seed, double train_fraction) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
  const auto split = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(samples.size())));
  require(split > 0 && split < samples.size(), "oracle_ablation: not enough samples to split");
  const auto train = samples.first(split);
  const auto test = samples.subspan(split);
  std::vector<int> train_labels, test_labels;
  for (const auto& s : train) train_labels.push_back(s.label);
  for (const auto& s : test) test_labels.push_back(s.label);

  OracleAblation out;
  out.train_samples = train.size();
  out.test_samples = test.size();
  for (bool oracle : {false, true}) {
    const int width = kObservationWidth + (oracle ? 1 : 0);
    NetParams init = init_params(NetSpec{width, hidden, kNumBuckets, OutputHead::kSoftmax},
                                 derive_stream({seed, static_cast<std::uint64_t>(StreamDomain::kInit), 100}));
    const NetParams net = fit_classifier(sample_inputs(train, oracle), train_labels, std::move(init), fit,
                                         derive_stream({seed, static_cast<std::uint64_t>(StreamDomain::kTrainer), 100}));
    (oracle ? out.oracle : out.observable) = score(net, sample_inputs(test, oracle), test_labels);
  }
  return out;
}

CalibrationReport predictor_calibration(const NetParams& predictor, std::span<const EpisodeTrace> traces,
                                        const MarketParams& params) {
  const auto samples = labeled_samples(traces, params);
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  return score(predictor, sample_inputs(samples, false), labels);
}

}  // namespace yieldtrace
