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

#include "yieldtrace/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "yieldtrace/error.hpp"

namespace yieldtrace {

Episode::Episode(const MarketParams& params, std::uint64_t env_stream)
    : params_(params), rng_(env_stream) {
  params_.validate();
  market_path_ = sample_market_path(params_, rng_);
  rooms_a_ = rooms_b_ = params_.capacity;
  lagged_b_.fill(kLagPadBucket);
  rows_.reserve(static_cast<std::size_t>(params_.horizon));
}

Episode::Episode(const MarketParams& params, std::vector<double> market_path,
                 std::uint64_t env_stream)
    : params_(params), rng_(env_stream), market_path_(std::move(market_path)) {
  params_.validate();
  require(static_cast<int>(market_path_.size()) == params_.horizon,
          "market path length must equal the horizon");
  rooms_a_ = rooms_b_ = params_.capacity;
  lagged_b_.fill(kLagPadBucket);
  rows_.reserve(static_cast<std::size_t>(params_.horizon));
}

double Episode::market() const {
  return market_path_[static_cast<std::size_t>(std::min(day_, params_.horizon - 1))];
}

Observation Episode::observe() const {
  return build_observation(day_, rooms_a_, market(), lagged_b_, params_);
}

const StepOutcome& Episode::step(int bucket_a) {
  if (done()) fail(ErrorCode::kState, "step called on a finished episode");
  return advance(bucket_a, rm_rule(day_, rooms_b_, market(), params_));
}

const StepOutcome& Episode::step(int bucket_a, int bucket_b) {
  if (done()) fail(ErrorCode::kState, "step called on a finished episode");
  require(bucket_b >= 0 && bucket_b < kNumBuckets, "bucket_b out of range");
  return advance(bucket_a, bucket_b);
}

const StepOutcome& Episode::advance(int bucket_a, int bucket_b) {
  require(bucket_a >= 0 && bucket_a < kNumBuckets, "bucket_a out of range");
  StepOutcome out;
  out.day = day_;
  out.bucket_a = bucket_a;
  out.bucket_b = bucket_b;
  out.price_a = params_.price(bucket_a);
  out.price_b = params_.price(bucket_b);
  out.market = market();
  out.rooms_a = rooms_a_;
  out.rooms_b = rooms_b_;

  const ChoiceProbabilities probs = choice_probabilities(out.price_a, out.price_b, out.market, params_);
  out.arrivals = sample_arrivals(out.market, params_, rng_);
  const DemandDraw demand = sample_demand(out.arrivals, probs, rng_);
  out.demand_a = demand.hotel_a;
  out.demand_b = demand.hotel_b;
  out.demand_none = demand.none;
  out.sales_a = std::min(rooms_a_, demand.hotel_a);
  out.sales_b = std::min(rooms_b_, demand.hotel_b);

  rooms_a_ -= out.sales_a;
  rooms_b_ -= out.sales_b;
  sold_a_ += out.sales_a;
  last_sales_a_ = out.sales_a;
  for (int i = kLagCount - 1; i > 0; --i) lagged_b_[i] = lagged_b_[i - 1];
  lagged_b_[0] = bucket_b;
  ++day_;
  rows_.push_back(out);
  return rows_.back();
}

EpisodeTrace Episode::finish(std::uint64_t seed, std::uint64_t episode) const {
  EpisodeTrace trace;
  trace.seed = seed;
  trace.episode = episode;
  trace.params_fingerprint = params_.fingerprint();
  trace.rows = rows_;
  trace.final_rooms_a = rooms_a_;
  trace.final_rooms_b = rooms_b_;
  return trace;
}

Observation build_observation(int day, int rooms_a, double market,
                              const std::array<int, kLagCount>& lagged_b,
                              const MarketParams& params) {
  const double q = params.capacity;
  const double elapsed = static_cast<double>(day) / params.horizon;
  Observation o;
  o.features[0] = elapsed;
  o.features[1] = rooms_a / q;
  o.features[2] = market;
  o.features[3] = (params.capacity - rooms_a) / q - elapsed;
  for (int i = 0; i < kLagCount; ++i) {
    o.features[4 + i] = lagged_b[i] / static_cast<double>(kNumBuckets - 1);
  }
  return o;
}

Observation observation_at(const EpisodeTrace& trace, int day, const MarketParams& params) {
  require(day >= 0 && day < static_cast<int>(trace.rows.size()), "observation_at: day out of range");
  std::array<int, kLagCount> lags;
  for (int i = 0; i < kLagCount; ++i) {
    const int d = day - 1 - i;
    lags[i] = d >= 0 ? trace.rows[d].bucket_b : kLagPadBucket;
  }
  const StepOutcome& row = trace.rows[day];
  return build_observation(day, row.rooms_a, row.market, lags, params);
}

std::uint64_t env_stream_seed(std::uint64_t seed, StreamDomain domain, std::uint64_t episode) {
  return derive_stream({seed, static_cast<std::uint64_t>(domain), episode, 0});
}

std::uint64_t policy_stream_seed(std::uint64_t seed, StreamDomain domain, std::uint64_t episode) {
  return derive_stream({seed, static_cast<std::uint64_t>(domain), episode, 1});
}

EpisodeTrace run_episode(const ActionSource& policy_a, const MarketParams& params,
                         std::uint64_t seed, std::uint64_t episode, StreamDomain domain) {
  Episode ep(params, env_stream_seed(seed, domain, episode));
  Rng policy_rng(policy_stream_seed(seed, domain, episode));
  while (!ep.done()) ep.step(policy_a(ep.observe(), policy_rng));
  return ep.finish(seed, episode);
}

ActionSource mirrored_rm_policy(const MarketParams& params) {
  return [params](const Observation& o, Rng&) {
    const int day = static_cast<int>(std::lround(o.features[0] * params.horizon));
    const int rooms = static_cast<int>(std::lround(o.features[1] * params.capacity));
    return rm_rule(day, rooms, o.features[2], params);
  };
}

}  // namespace yieldtrace
