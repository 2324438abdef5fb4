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

#ifndef YIELDTRACE_RNG_HPP_
#define YIELDTRACE_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace yieldtrace {

// Random stream with a fixed engine (mt19937_64) and hand-written
// distributions. The standard library distributions are implementation
// defined, so they are not used: every draw below consumes a documented
// number of engine outputs and replays identically across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits. One engine output.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). One engine output.
  int uniform_int(int n);

  // Box-Muller; always consumes two uniforms, no cached second variate.
  double normal();

  // Knuth's product method. Rates above 30 are split into equal chunks whose
  // counts are summed, which keeps exp(-rate) away from underflow.
  int poisson(double rate);

  // Inverse CDF over indices in ascending order. One uniform.
  int categorical(std::span<const double> probabilities);

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Hash an ordered list of words into a stream seed.
std::uint64_t derive_stream(std::initializer_list<std::uint64_t> words);

// Stream domains used when deriving per-episode seeds.
enum class StreamDomain : std::uint64_t {
  kTrain = 1,
  kEval = 2,
  kPriorData = 3,
  kCalibration = 4,
  kTrainer = 5,
  kInit = 6,
};

}  // namespace yieldtrace

#endif  // YIELDTRACE_RNG_HPP_
