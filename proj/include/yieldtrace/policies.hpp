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

#ifndef YIELDTRACE_POLICIES_HPP_
#define YIELDTRACE_POLICIES_HPP_

#include <array>
#include <span>

#include "yieldtrace/market.hpp"
#include "yieldtrace/rng.hpp"

namespace yieldtrace {

inline constexpr double kProbabilityFloor = 1e-6;

// Probabilities over the seven price buckets.
struct ActionDistribution {
  std::array<double, kNumBuckets> p{};

  static ActionDistribution uniform();
  static ActionDistribution one_hot(int bucket);
  // Copies the first kNumBuckets entries; throws if the span is shorter.
  static ActionDistribution from(std::span<const double> values);

  double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return p[static_cast<std::size_t>(i)]; }
  bool is_valid(double tolerance = 1e-9) const;
};

// With probability epsilon a uniform bucket, otherwise the argmax of q_values
// (lowest index on ties). Draws one uniform, plus one more when exploring.
int epsilon_greedy(std::span<const double> q_values, double epsilon, Rng& rng);

int sample_categorical(const ActionDistribution& d, Rng& rng);

// Lowest index on ties.
int argmax_action(const ActionDistribution& d);
int argmax_action(std::span<const double> values);

// max(d_i, floor) renormalized; returned unchanged when no entry is below floor.
ActionDistribution floor_and_normalize(const ActionDistribution& d, double floor = kProbabilityFloor);

// d_i^(1/T) renormalized after flooring. Throws when T <= 0.
ActionDistribution temperature_scale(const ActionDistribution& d, double temperature);

// sum_i p_i ln(p_i / q_i) with 0 ln 0 = 0; q is floored first.
double kl_divergence(const ActionDistribution& p, const ActionDistribution& q);

// -sum_i p_i ln p_i.
double entropy(const ActionDistribution& d);

}  // namespace yieldtrace

#endif  // YIELDTRACE_POLICIES_HPP_
