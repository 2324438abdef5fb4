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

#ifndef YIELDTRACE_MARKET_HPP_
#define YIELDTRACE_MARKET_HPP_

#include <array>
#include <string>
#include <vector>

#include "yieldtrace/rng.hpp"

namespace yieldtrace {

inline constexpr int kNumBuckets = 7;

// Constants of Hotel B's fixed revenue-management rule:
//
//   bucket = clamp(base + floor(market_gain * max(0, m))
//                       + floor(pace_gain * max(0, sold - pace_reference * t/H))
//                       + [t/H > late_fraction and q/Q < tight_fraction], 0, 6)
//
// where sold = 1 - q/Q. `literal()` is the unscaled rule (pace measured
// against selling out exactly at the horizon). The defaults measure pace
// against a 60% booking curve with a steeper gain; with two hotels splitting
// seven arrivals a day the literal rule almost never leaves bucket 1.
struct RmRuleParams {
  int base_bucket = 1;
  double market_gain = 2.0;
  double pace_gain = 12.0;
  double pace_reference = 0.6;
  double late_fraction = 2.0 / 3.0;
  double tight_fraction = 0.25;

  static RmRuleParams literal() {
    RmRuleParams p;
    p.pace_gain = 3.0;
    p.pace_reference = 1.0;
    return p;
  }
};

struct MarketParams {
  int capacity = 100;
  int horizon = 30;
  std::array<double, kNumBuckets> price_grid{100, 120, 140, 160, 180, 200, 220};
  double lambda0 = 7.0;
  double eta_lambda = 0.3;
  double alpha = 4.0;
  double rho = 0.02;
  double eta_m = 0.5;
  double mu = 0.5;
  double market_persistence = 0.9;
  double market_noise = 0.1;
  RmRuleParams rm;

  // Throws Error(kInvalidArgument) on a violated invariant.
  void validate() const;

  // Canonical text of every field; stable across runs.
  std::string canonical() const;
  // 16-hex-digit FNV-1a hash of canonical().
  std::string fingerprint() const;

  double price(int bucket) const { return price_grid.at(static_cast<std::size_t>(bucket)); }
};

struct ChoiceProbabilities {
  double hotel_a = 0.0;
  double hotel_b = 0.0;
  double none = 0.0;
};

struct DemandDraw {
  int hotel_a = 0;
  int hotel_b = 0;
  int none = 0;
};

// Bounded AR(1): m_0 ~ U(-1, 1), m_{t+1} = clip(persistence * m_t + noise * eps, -1, 1).
std::vector<double> sample_market_path(const MarketParams& params, Rng& rng);
// Same process with a given starting value.
std::vector<double> sample_market_path(const MarketParams& params, double start, Rng& rng);

// Lambda_0 * exp(eta_lambda * m).
double arrival_rate(double market, const MarketParams& params);
int sample_arrivals(double market, const MarketParams& params, Rng& rng);

// Nested logit with the two hotels in one nest and the outside option alone.
ChoiceProbabilities choice_probabilities(double price_a, double price_b, double market,
                                         const MarketParams& params);

// Multinomial via `arrivals` sequential categorical draws.
DemandDraw sample_demand(int arrivals, const ChoiceProbabilities& probs, Rng& rng);

// Hotel B's posted bucket on `day` with `rooms_left` unsold.
int rm_rule(int day, int rooms_left, double market, const MarketParams& params);

}  // namespace yieldtrace

#endif  // YIELDTRACE_MARKET_HPP_
