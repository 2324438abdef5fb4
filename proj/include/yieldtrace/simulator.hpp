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

#ifndef YIELDTRACE_SIMULATOR_HPP_
#define YIELDTRACE_SIMULATOR_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "yieldtrace/market.hpp"
#include "yieldtrace/rng.hpp"

namespace yieldtrace {

inline constexpr int kObservationWidth = 7;
inline constexpr int kLagCount = 3;
// Bucket used for lag slots before day 0.
inline constexpr int kLagPadBucket = 1;

// Hotel A's deployable features:
//   [t/H, q_A/Q, m_t, pace_A, lagB_1/6, lagB_2/6, lagB_3/6]
// with pace_A = (rooms A sold so far)/Q - t/H and lags most recent first.
struct Observation {
  std::array<double, kObservationWidth> features{};
};

enum class Hotel { kA, kB };

struct StepOutcome {
  int day = 0;
  int bucket_a = 0;
  int bucket_b = 0;
  double price_a = 0.0;
  double price_b = 0.0;
  int arrivals = 0;
  int demand_a = 0;
  int demand_b = 0;
  int demand_none = 0;
  int sales_a = 0;
  int sales_b = 0;
  double market = 0.0;
  // Inventories at the start of the day (what the pricing decision saw).
  int rooms_a = 0;
  int rooms_b = 0;

  int bucket(Hotel h) const { return h == Hotel::kA ? bucket_a : bucket_b; }
  double price(Hotel h) const { return h == Hotel::kA ? price_a : price_b; }
  int sales(Hotel h) const { return h == Hotel::kA ? sales_a : sales_b; }
  bool operator==(const StepOutcome&) const = default;
};

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  std::string params_fingerprint;
  std::vector<StepOutcome> rows;
  int final_rooms_a = 0;
  int final_rooms_b = 0;

  bool operator==(const EpisodeTrace&) const = default;
};

// Mutable state of one episode. Owned by a single runner.
class Episode {
 public:
  // The market path is drawn first from `env_rng`, then all daily draws.
  Episode(const MarketParams& params, std::uint64_t env_stream);
  // Deterministic market path, mostly for tests.
  Episode(const MarketParams& params, std::vector<double> market_path, std::uint64_t env_stream);

  Observation observe() const;
  // Throws Error(kState) once the horizon is reached.
  const StepOutcome& step(int bucket_a);
  // Same, but with Hotel B's bucket forced instead of taken from the rule.
  const StepOutcome& step(int bucket_a, int bucket_b);

  bool done() const { return day_ >= params_.horizon; }
  int day() const { return day_; }
  int rooms_a() const { return rooms_a_; }
  int rooms_b() const { return rooms_b_; }
  int last_sales_a() const { return last_sales_a_; }
  double market() const;
  const std::array<int, kLagCount>& lagged_b() const { return lagged_b_; }
  const std::vector<double>& market_path() const { return market_path_; }
  const std::vector<StepOutcome>& rows() const { return rows_; }
  const MarketParams& params() const { return params_; }

  EpisodeTrace finish(std::uint64_t seed, std::uint64_t episode) const;

 private:
  const StepOutcome& advance(int bucket_a, int bucket_b);

  MarketParams params_;
  Rng rng_;
  std::vector<double> market_path_;
  int day_ = 0;
  int rooms_a_ = 0;
  int rooms_b_ = 0;
  int sold_a_ = 0;
  int last_sales_a_ = 0;
  std::array<int, kLagCount> lagged_b_{};
  std::vector<StepOutcome> rows_;
};

// Builds the observation from raw state values.
Observation build_observation(int day, int rooms_a, double market,
                              const std::array<int, kLagCount>& lagged_b,
                              const MarketParams& params);

// Rebuilds the observation Hotel A saw on `day` from a stored trace.
Observation observation_at(const EpisodeTrace& trace, int day, const MarketParams& params);

// Maps an observation to a bucket. Stochastic sources draw from `policy_rng`,
// which is separate from the environment stream.
using ActionSource = std::function<int(const Observation&, Rng& policy_rng)>;

// Seeds for one episode's environment and policy streams.
std::uint64_t env_stream_seed(std::uint64_t seed, StreamDomain domain, std::uint64_t episode);
std::uint64_t policy_stream_seed(std::uint64_t seed, StreamDomain domain, std::uint64_t episode);

EpisodeTrace run_episode(const ActionSource& policy_a, const MarketParams& params,
                         std::uint64_t seed, std::uint64_t episode,
                         StreamDomain domain = StreamDomain::kEval);

// Hotel A mirrors Hotel B's rule on its own inventory.
ActionSource mirrored_rm_policy(const MarketParams& params);

}  // namespace yieldtrace

#endif  // YIELDTRACE_SIMULATOR_HPP_
