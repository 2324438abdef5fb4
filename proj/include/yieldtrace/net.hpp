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

#ifndef YIELDTRACE_NET_HPP_
#define YIELDTRACE_NET_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace yieldtrace {

enum class OutputHead { kLinear, kSoftmax };

struct NetSpec {
  int inputs = 0;
  std::vector<int> hidden{64, 64};
  int outputs = 0;
  OutputHead head = OutputHead::kLinear;

  void validate() const;
  bool operator==(const NetSpec&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // rows = fan-out, cols = fan-in
  Eigen::VectorXd bias;
};

// Rectifier MLP. Copying a NetParams yields an independent parameter set,
// which is how target networks and frozen priors are taken.
struct NetParams {
  NetSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  // Hash of every weight's bit pattern.
  std::string fingerprint() const;
};

// Same layout as NetParams::layers.
struct Gradient {
  std::vector<DenseLayer> layers;

  std::vector<double> flatten() const;
  bool all_finite() const;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
NetParams init_params(const NetSpec& spec, std::uint64_t seed);
// All weights and biases zero.
NetParams zero_params(const NetSpec& spec);

// Softmax heads return probabilities; linear heads return raw outputs.
// Throws Error(kInvalidArgument) on an input width mismatch.
Eigen::VectorXd forward(const NetParams& params, std::span<const double> x);
Eigen::VectorXd forward(const NetParams& params, const Eigen::VectorXd& x);
// Column-per-sample version of forward().
Eigen::MatrixXd forward_batch(const NetParams& params, const Eigen::MatrixXd& inputs);

enum class LossKind {
  // Mean of -log p(actions[i] | x_i). Softmax head.
  kNll,
  // Mean of 0.5 * (out(x_i)[actions[i]] - targets[i])^2. Linear head.
  kTd,
  // Mean over samples of
  //   -advantages[i] * log p(actions[i] | x_i)
  //   + kl_weight * KL(p(.|x_i) || reference_i) - entropy_weight * H(p(.|x_i)).
  // Softmax head. The reference columns must already be floored and normalized.
  kPolicyGradient,
};

struct Batch {
  Eigen::MatrixXd inputs;  // features x N
  std::vector<int> actions;
  std::vector<double> targets;
  std::vector<double> advantages;
  Eigen::MatrixXd reference;  // outputs x N; may be empty when kl_weight == 0
  double kl_weight = 0.0;
  double entropy_weight = 0.0;

  int size() const { return static_cast<int>(inputs.cols()); }
};

struct LossAndGrad {
  double loss = 0.0;
  Gradient grad;
};

LossAndGrad loss_and_grad(const NetParams& params, const Batch& batch, LossKind kind);
double loss_value(const NetParams& params, const Batch& batch, LossKind kind);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  Gradient first_moment;
  Gradient second_moment;
};

// Bias-corrected adaptive-moment update. A non-finite gradient raises
// Error(kNumeric) and leaves both params and state untouched.
void adam_step(NetParams& params, const Gradient& grad, AdamState& state);

// JSON checkpoint:
//   {"format": "yieldtrace.net", "version": 1, "role": ...,
//    "spec": {"inputs", "hidden", "outputs", "head"},
//    "layers": [{"rows", "cols", "weight": row-major, "bias"}]}
// Doubles are written with round-trip precision, so save/load is exact.
std::string checkpoint_to_json(const NetParams& params, const std::string& role);
NetParams checkpoint_from_json(const std::string& text, std::string* role = nullptr);
void save_checkpoint(const std::filesystem::path& path, const NetParams& params, const std::string& role);
NetParams load_checkpoint(const std::filesystem::path& path, std::string* role = nullptr);

}  // namespace yieldtrace

#endif  // YIELDTRACE_NET_HPP_
