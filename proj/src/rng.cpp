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

#include "yieldtrace/rng.hpp"

#include <cmath>
#include <numbers>

#include "yieldtrace/error.hpp"

namespace yieldtrace {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int n) {
  require(n > 0, "uniform_int: n must be positive");
  const int k = static_cast<int>(uniform() * n);
  return k < n ? k : n - 1;
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::poisson(double rate) {
  require(rate >= 0.0 && std::isfinite(rate), "poisson: invalid rate");
  if (rate == 0.0) return 0;
  constexpr double kChunk = 30.0;
  const int chunks = rate > kChunk ? static_cast<int>(std::ceil(rate / kChunk)) : 1;
  const double chunk_rate = rate / chunks;
  const double limit = std::exp(-chunk_rate);
  int total = 0;
  for (int c = 0; c < chunks; ++c) {
    int k = 0;
    double product = uniform();
    while (product > limit) {
      ++k;
      product *= uniform();
    }
    total += k;
  }
  return total;
}

int Rng::categorical(std::span<const double> probabilities) {
  require(!probabilities.empty(), "categorical: empty distribution");
  const double u = uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    cumulative += probabilities[i];
    last_positive = static_cast<int>(i);
    if (u < cumulative) return last_positive;
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

}  // namespace yieldtrace
