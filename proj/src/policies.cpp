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

#include "yieldtrace/policies.hpp"

#include <algorithm>
#include <cmath>

#include "yieldtrace/error.hpp"

namespace yieldtrace {

ActionDistribution ActionDistribution::uniform() {
  ActionDistribution d;
  d.p.fill(1.0 / kNumBuckets);
  return d;
}

ActionDistribution ActionDistribution::one_hot(int bucket) {
  require(bucket >= 0 && bucket < kNumBuckets, "one_hot: bucket out of range");
  ActionDistribution d;
  d[bucket] = 1.0;
  return d;
}

ActionDistribution ActionDistribution::from(std::span<const double> values) {
  require(values.size() >= kNumBuckets, "ActionDistribution::from: too few values");
  ActionDistribution d;
  std::copy_n(values.begin(), kNumBuckets, d.p.begin());
  return d;
}

bool ActionDistribution::is_valid(double tolerance) const {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

int argmax_action(std::span<const double> values) {
  require(!values.empty(), "argmax of empty span");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int argmax_action(const ActionDistribution& d) { return argmax_action(std::span<const double>(d.p)); }

int epsilon_greedy(std::span<const double> q_values, double epsilon, Rng& rng) {
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  if (rng.uniform() < epsilon) return rng.uniform_int(static_cast<int>(q_values.size()));
  return argmax_action(q_values);
}

int sample_categorical(const ActionDistribution& d, Rng& rng) { return rng.categorical(d.p); }

ActionDistribution floor_and_normalize(const ActionDistribution& d, double floor) {
  if (std::all_of(d.p.begin(), d.p.end(), [floor](double v) { return v >= floor; })) return d;
  ActionDistribution out;
  double sum = 0.0;
  for (int i = 0; i < kNumBuckets; ++i) {
    out[i] = std::max(d[i], floor);
    sum += out[i];
  }
  for (double& v : out.p) v /= sum;
  return out;
}

ActionDistribution temperature_scale(const ActionDistribution& d, double temperature) {
  require(temperature > 0.0, "temperature must be positive");
  const ActionDistribution floored = floor_and_normalize(d);
  std::array<double, kNumBuckets> logits;
  for (int i = 0; i < kNumBuckets; ++i) logits[i] = std::log(floored[i]) / temperature;
  const double top = *std::max_element(logits.begin(), logits.end());
  ActionDistribution out;
  double sum = 0.0;
  for (int i = 0; i < kNumBuckets; ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& v : out.p) v /= sum;
  return out;
}

double kl_divergence(const ActionDistribution& p, const ActionDistribution& q) {
  // Flooring q would otherwise leave KL(p, p) > 0 when p has sub-floor mass.
  if (p.p == q.p) return 0.0;
  const ActionDistribution qf = floor_and_normalize(q);
  double kl = 0.0;
  for (int i = 0; i < kNumBuckets; ++i) {
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(qf[i]));
  }
  // Floored q can push tiny negative round-off when p == q.
  return std::max(0.0, kl);
}

double entropy(const ActionDistribution& d) {
  double h = 0.0;
  for (double v : d.p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace yieldtrace
