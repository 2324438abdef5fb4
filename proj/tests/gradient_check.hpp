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


// Central finite-difference check of loss_and_grad on random small nets.

#ifndef YIELDTRACE_TESTS_GRADIENT_CHECK_HPP_
#define YIELDTRACE_TESTS_GRADIENT_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "yieldtrace/net.hpp"
#include "yieldtrace/rng.hpp"

namespace yieldtrace::testing {

struct GradientCheck {
  int trials = 0;
  int skipped = 0;           // draws discarded because a ReLU sat on its kink
  double max_relative = 0.0;  // over every parameter of every kept trial
};

inline constexpr double kFiniteDifferenceStep = 1e-5;
// Relative error denominator floor; keeps round-off on near-zero entries honest.
inline constexpr double kRelativeFloor = 1e-6;
// A hidden pre-activation this close to zero can flip sign under the step.
inline constexpr double kKinkMargin = 1e-3;

inline double smallest_hidden_preactivation(const NetParams& p, const Eigen::MatrixXd& x) {
  double smallest = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd act = x;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) {
    Eigen::MatrixXd z = p.layers[l].weight * act;
    z.colwise() += p.layers[l].bias;
    smallest = std::min(smallest, z.cwiseAbs().minCoeff());
    act = z.cwiseMax(0.0);
  }
  return smallest;
}

inline Batch random_batch(const NetSpec& spec, LossKind kind, int n, Rng& rng) {
  Batch b;
  b.inputs.resize(spec.inputs, n);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < spec.inputs; ++f) b.inputs(f, i) = rng.uniform(-1.0, 1.0);
    b.actions.push_back(rng.uniform_int(spec.outputs));
    b.targets.push_back(rng.uniform(-2.0, 2.0));
    b.advantages.push_back(rng.uniform(-2.0, 2.0));
  }
  if (kind == LossKind::kPolicyGradient) {
    b.reference.resize(spec.outputs, n);
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (int a = 0; a < spec.outputs; ++a) total += (b.reference(a, i) = rng.uniform(0.05, 1.0));
      b.reference.col(i) /= total;
    }
    b.kl_weight = rng.uniform(0.0, 3.0);
    b.entropy_weight = rng.uniform(0.0, 0.5);
  }
  return b;
}

inline GradientCheck check_gradients(LossKind kind, int trials, std::uint64_t seed) {
  GradientCheck out;
  Rng rng(seed);
  while (out.trials < trials) {
    NetSpec spec;
    spec.inputs = 2 + rng.uniform_int(5);
    spec.hidden = {2 + rng.uniform_int(6), 2 + rng.uniform_int(6)};
    spec.outputs = kind == LossKind::kTd ? 1 + rng.uniform_int(7) : 2 + rng.uniform_int(6);
    spec.head = kind == LossKind::kTd ? OutputHead::kLinear : OutputHead::kSoftmax;
    NetParams p = init_params(spec, rng.next_u64());
    // Nonzero biases so kinks are not concentrated at the origin.
    std::vector<double> flat = p.flatten();
    for (double& v : flat) v += rng.uniform(-0.3, 0.3);
    p.assign(flat);
    const Batch batch = random_batch(spec, kind, 1 + rng.uniform_int(6), rng);
    if (smallest_hidden_preactivation(p, batch.inputs) < kKinkMargin) {
      ++out.skipped;
      continue;
    }
    const std::vector<double> analytic = loss_and_grad(p, batch, kind).grad.flatten();
    for (std::size_t k = 0; k < flat.size(); ++k) {
      std::vector<double> probe = flat;
      probe[k] = flat[k] + kFiniteDifferenceStep;
      p.assign(probe);
      const double up = loss_value(p, batch, kind);
      probe[k] = flat[k] - kFiniteDifferenceStep;
      p.assign(probe);
      const double down = loss_value(p, batch, kind);
      const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
      const double scale = std::max({std::abs(analytic[k]), std::abs(numeric), kRelativeFloor});
      out.max_relative = std::max(out.max_relative, std::abs(analytic[k] - numeric) / scale);
    }
    ++out.trials;
  }
  return out;
}

}  // namespace yieldtrace::testing

#endif  // YIELDTRACE_TESTS_GRADIENT_CHECK_HPP_
