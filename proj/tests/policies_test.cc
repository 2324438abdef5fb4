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


#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "yieldtrace/diagnostics.hpp"
#include "yieldtrace/error.hpp"
#include "yieldtrace/policies.hpp"

namespace yieldtrace {
namespace {

ActionDistribution random_distribution(Rng& rng) {
  ActionDistribution d;
  double total = 0.0;
  for (double& v : d.p) total += (v = -std::log(1.0 - rng.uniform()));
  for (double& v : d.p) v /= total;
  return d;
}

// Each frequency within 3 sigma of 1/7.
void check_uniform_frequencies(const std::array<int, kNumBuckets>& counts, int draws) {
  const double p = 1.0 / kNumBuckets;
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (int c : counts) CHECK(std::abs(c - draws * p) < 3.0 * sigma);
}

TEST_CASE("epsilon greedy") {
  Rng rng(1);
  const std::array<double, 7> q{0, 0, 0, 0, 0, 0, 1};
  CHECK(epsilon_greedy(q, 0.0, rng) == 6);
  const std::array<double, 7> flat{};
  CHECK(epsilon_greedy(flat, 0.0, rng) == 0);
  CHECK_THROWS_AS(epsilon_greedy(q, 1.5, rng), Error);

  std::array<int, kNumBuckets> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(epsilon_greedy(q, 1.0, rng))];
  check_uniform_frequencies(counts, draws);
}

TEST_CASE("categorical sampling") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) CHECK(sample_categorical(ActionDistribution::one_hot(4), rng) == 4);

  ActionDistribution half;
  half[0] = half[1] = 0.5;
  for (int i = 0; i < 10000; ++i) CHECK(sample_categorical(half, rng) <= 1);

  std::array<int, kNumBuckets> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    ++counts[static_cast<std::size_t>(sample_categorical(ActionDistribution::uniform(), rng))];
  }
  check_uniform_frequencies(counts, draws);
}

TEST_CASE("argmax uses the lowest index on ties") {
  CHECK(argmax_action(ActionDistribution::uniform()) == 0);
  CHECK(argmax_action(ActionDistribution::one_hot(4)) == 4);
  const ActionDistribution b_like = ActionDistribution::from(
      std::array<double, 7>{0.0, 0.4258, 0.35, 0.15, 0.05, 0.0242, 0.0});
  CHECK(argmax_action(b_like) == 1);
}

TEST_CASE("temperature scaling") {
  ActionDistribution d;
  d[0] = 0.8;
  d[1] = 0.2;
  const ActionDistribution sharp = temperature_scale(d, 0.5);
  CHECK(std::abs(sharp[0] - 0.9411764705882353) < 1e-6);
  CHECK(std::abs(sharp[1] - 0.058823529411764705) < 1e-6);

  const ActionDistribution cold = temperature_scale(d, 0.01);
  CHECK(std::abs(cold[0] - 1.0) < 1e-6);
  CHECK_THROWS_AS(temperature_scale(d, 0.0), Error);

  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const ActionDistribution p = random_distribution(rng);
    const ActionDistribution t1 = temperature_scale(p, 1.0);
    for (int k = 0; k < kNumBuckets; ++k) CHECK(std::abs(t1[k] - p[k]) < 1e-12);
    for (double temp : {0.05, 0.5, 0.95, 2.0, 50.0}) {
      const ActionDistribution s = temperature_scale(p, temp);
      CHECK(s.is_valid());
      CHECK(argmax_action(s) == argmax_action(p));
    }
  }
}

TEST_CASE("kl divergence") {
  CHECK(kl_divergence(ActionDistribution::one_hot(2), ActionDistribution::uniform()) ==
        doctest::Approx(std::log(7.0)).epsilon(1e-12));
  ActionDistribution half;
  half[0] = half[1] = 0.5;
  CHECK(std::abs(kl_divergence(ActionDistribution::one_hot(0), half) - std::numbers::ln2) < 1e-5);

  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const ActionDistribution p = random_distribution(rng);
    const ActionDistribution q = random_distribution(rng);
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(p, q) >= 0.0);
  }
  CHECK(kl_divergence(ActionDistribution::one_hot(4), ActionDistribution::one_hot(4)) == 0.0);
  ActionDistribution tiny = half;
  tiny[0] -= 1e-12;
  tiny[2] = 1e-12;
  CHECK(kl_divergence(tiny, tiny) == 0.0);
}

TEST_CASE("Jensen-Shannon agrees with the KL definition") {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const ActionDistribution p = random_distribution(rng);
    const ActionDistribution q = random_distribution(rng);
    ActionDistribution m;
    for (int k = 0; k < kNumBuckets; ++k) m[k] = 0.5 * (p[k] + q[k]);
    const double js = 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m);
    const Distances d = distribution_distances(p.p, q.p);
    const Distances r = distribution_distances(q.p, p.p);
    CHECK(std::abs(d.js - js) < 1e-9);
    CHECK(d.js == doctest::Approx(r.js).epsilon(1e-14));
    CHECK(d.js <= std::numbers::ln2);
  }
}

}  // namespace
}  // namespace yieldtrace
