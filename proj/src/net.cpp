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

#include "yieldtrace/net.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "yieldtrace/error.hpp"
#include "yieldtrace/rng.hpp"

namespace yieldtrace {

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
  std::vector<Eigen::MatrixXd> post;  // post[0] = input, post[l+1] = relu(pre[l])
};

void check_input_width(const NetParams& params, Eigen::Index rows) {
  if (rows != params.spec.inputs) {
    fail(ErrorCode::kInvalidArgument, "input width " + std::to_string(rows) +
                                          " does not match network width " +
                                          std::to_string(params.spec.inputs));
  }
}

// Returns logits (outputs x N); fills the cache when requested.
Eigen::MatrixXd run_layers(const NetParams& params, const Eigen::MatrixXd& inputs,
                           ForwardCache* cache) {
  check_input_width(params, inputs.rows());
  Eigen::MatrixXd act = inputs;
  if (cache) cache->post.push_back(act);
  const std::size_t n_layers = params.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = params.layers[l];
    Eigen::MatrixXd z = layer.weight * act;
    z.colwise() += layer.bias;
    if (l + 1 == n_layers) {
      if (cache) cache->pre.push_back(z);
      return z;
    }
    act = z.cwiseMax(0.0);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(act);
    }
  }
  return act;
}

// Column-wise log-softmax with max subtraction.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double top = logits.col(c).maxCoeff();
    const double lse = top + std::log((logits.col(c).array() - top).exp().sum());
    out.col(c) = logits.col(c).array() - lse;
  }
  return out;
}

void check_batch(const NetParams& params, const Batch& batch, LossKind kind) {
  const int n = batch.size();
  require(n > 0, "loss_and_grad: empty batch");
  require(static_cast<int>(batch.actions.size()) == n, "batch actions size mismatch");
  for (int a : batch.actions) require(a >= 0 && a < params.spec.outputs, "batch action out of range");
  switch (kind) {
    case LossKind::kNll:
      require(params.spec.head == OutputHead::kSoftmax, "NLL loss needs a softmax head");
      break;
    case LossKind::kTd:
      require(params.spec.head == OutputHead::kLinear, "TD loss needs a linear head");
      require(static_cast<int>(batch.targets.size()) == n, "batch targets size mismatch");
      break;
    case LossKind::kPolicyGradient:
      require(params.spec.head == OutputHead::kSoftmax, "policy-gradient loss needs a softmax head");
      require(static_cast<int>(batch.advantages.size()) == n, "batch advantages size mismatch");
      if (batch.kl_weight != 0.0) {
        require(batch.reference.rows() == params.spec.outputs && batch.reference.cols() == n,
                "batch reference shape mismatch");
      }
      break;
  }
}

// Loss and its derivative with respect to the final-layer pre-activations.
double output_loss(const Eigen::MatrixXd& logits, const Batch& batch, LossKind kind,
                   Eigen::MatrixXd* d_logits) {
  const int n = batch.size();
  const double inv_n = 1.0 / n;
  double total = 0.0;
  if (d_logits) d_logits->setZero(logits.rows(), logits.cols());

  if (kind == LossKind::kTd) {
    for (int i = 0; i < n; ++i) {
      const double err = logits(batch.actions[i], i) - batch.targets[i];
      total += 0.5 * err * err;
      if (d_logits) (*d_logits)(batch.actions[i], i) = err * inv_n;
    }
    return total * inv_n;
  }

  const Eigen::MatrixXd logp = log_softmax(logits);
  const Eigen::MatrixXd prob = logp.array().exp().matrix();
  for (int i = 0; i < n; ++i) {
    const int a = batch.actions[i];
    if (kind == LossKind::kNll) {
      total -= logp(a, i);
      if (d_logits) {
        d_logits->col(i) = prob.col(i) * inv_n;
        (*d_logits)(a, i) -= inv_n;
      }
      continue;
    }
    const double adv = batch.advantages[i];
    double sample = -adv * logp(a, i);
    Eigen::VectorXd g = adv * prob.col(i);
    g(a) -= adv;
    if (batch.kl_weight != 0.0) {
      const Eigen::VectorXd f = logp.col(i).array() - batch.reference.col(i).array().log();
      const double mean_f = prob.col(i).dot(f);
      sample += batch.kl_weight * mean_f;
      g += batch.kl_weight * (prob.col(i).array() * (f.array() - mean_f)).matrix();
    }
    if (batch.entropy_weight != 0.0) {
      const double neg_entropy = prob.col(i).dot(logp.col(i));
      sample += batch.entropy_weight * neg_entropy;
      g += batch.entropy_weight *
           (prob.col(i).array() * (logp.col(i).array() - neg_entropy)).matrix();
    }
    total += sample;
    if (d_logits) d_logits->col(i) = g * inv_n;
  }
  return total * inv_n;
}

Gradient zeros_like(const std::vector<DenseLayer>& layers) {
  Gradient g;
  g.layers.reserve(layers.size());
  for (const DenseLayer& l : layers) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

std::vector<double> flatten_layers(const std::vector<DenseLayer>& layers) {
  std::vector<double> flat;
  for (const DenseLayer& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  return flat;
}

}  // namespace

void NetSpec::validate() const {
  require(inputs > 0, "net inputs must be positive");
  require(outputs > 0, "net outputs must be positive");
  for (int h : hidden) require(h > 0, "hidden widths must be positive");
}

std::size_t NetParams::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<double> NetParams::flatten() const { return flatten_layers(layers); }

void NetParams::assign(std::span<const double> flat) {
  require(flat.size() == parameter_count(), "assign: parameter count mismatch");
  std::size_t k = 0;
  for (DenseLayer& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[k++];
  }
}

std::string NetParams::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : flatten()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h = mix64(h ^ bits);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::vector<double> Gradient::flatten() const { return flatten_layers(layers); }

bool Gradient::all_finite() const {
  for (const DenseLayer& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

NetParams zero_params(const NetSpec& spec) {
  spec.validate();
  NetParams p;
  p.spec = spec;
  int fan_in = spec.inputs;
  std::vector<int> widths = spec.hidden;
  widths.push_back(spec.outputs);
  for (int w : widths) {
    p.layers.push_back({Eigen::MatrixXd::Zero(w, fan_in), Eigen::VectorXd::Zero(w)});
    fan_in = w;
  }
  return p;
}

NetParams init_params(const NetSpec& spec, std::uint64_t seed) {
  NetParams p = zero_params(spec);
  Rng rng(seed);
  for (DenseLayer& l : p.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.weight.cols()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = rng.uniform(-bound, bound);
  }
  return p;
}

Eigen::VectorXd forward(const NetParams& params, std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
  return forward_batch(params, in).col(0);
}

Eigen::VectorXd forward(const NetParams& params, const Eigen::VectorXd& x) {
  return forward(params, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Eigen::MatrixXd forward_batch(const NetParams& params, const Eigen::MatrixXd& inputs) {
  Eigen::MatrixXd logits = run_layers(params, inputs, nullptr);
  if (params.spec.head == OutputHead::kLinear) return logits;
  return log_softmax(logits).array().exp().matrix();
}

double loss_value(const NetParams& params, const Batch& batch, LossKind kind) {
  check_batch(params, batch, kind);
  return output_loss(run_layers(params, batch.inputs, nullptr), batch, kind, nullptr);
}

LossAndGrad loss_and_grad(const NetParams& params, const Batch& batch, LossKind kind) {
  check_batch(params, batch, kind);
  ForwardCache cache;
  const Eigen::MatrixXd logits = run_layers(params, batch.inputs, &cache);
  Eigen::MatrixXd delta;
  LossAndGrad out;
  out.loss = output_loss(logits, batch, kind, &delta);
  out.grad = zeros_like(params.layers);
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    out.grad.layers[l].weight = delta * cache.post[l].transpose();
    out.grad.layers[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = params.layers[l].weight.transpose() * delta;
    delta = back.array() * (cache.pre[l - 1].array() > 0.0).cast<double>();
  }
  return out;
}

void adam_step(NetParams& params, const Gradient& grad, AdamState& state) {
  require(grad.layers.size() == params.layers.size(), "adam_step: gradient shape mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    require(grad.layers[l].weight.rows() == params.layers[l].weight.rows() &&
                grad.layers[l].weight.cols() == params.layers[l].weight.cols() &&
                grad.layers[l].bias.size() == params.layers[l].bias.size(),
            "adam_step: gradient shape mismatch");
  }
  if (!grad.all_finite()) fail(ErrorCode::kNumeric, "adam_step: non-finite gradient");
  if (state.first_moment.layers.empty()) {
    state.first_moment = zeros_like(params.layers);
    state.second_moment = zeros_like(params.layers);
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](auto& value, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    value.array() -= state.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grad.layers[l].weight, state.first_moment.layers[l].weight,
           state.second_moment.layers[l].weight);
    update(params.layers[l].bias, grad.layers[l].bias, state.first_moment.layers[l].bias,
           state.second_moment.layers[l].bias);
  }
}

std::string checkpoint_to_json(const NetParams& params, const std::string& role) {
  using nlohmann::json;
  json j;
  j["format"] = "yieldtrace.net";
  j["version"] = 1;
  j["role"] = role;
  j["spec"] = {{"inputs", params.spec.inputs},
               {"hidden", params.spec.hidden},
               {"outputs", params.spec.outputs},
               {"head", params.spec.head == OutputHead::kSoftmax ? "softmax" : "linear"}};
  json layers = json::array();
  for (const DenseLayer& l : params.layers) {
    json w = json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    json b = json::array();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) b.push_back(l.bias(r));
    layers.push_back({{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"weight", w}, {"bias", b}});
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

NetParams checkpoint_from_json(const std::string& text, std::string* role) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    if (j.at("format") != "yieldtrace.net" || j.at("version") != 1) {
      fail(ErrorCode::kParse, "unsupported checkpoint format");
    }
    NetSpec spec;
    spec.inputs = j.at("spec").at("inputs").get<int>();
    spec.hidden = j.at("spec").at("hidden").get<std::vector<int>>();
    spec.outputs = j.at("spec").at("outputs").get<int>();
    const std::string head = j.at("spec").at("head").get<std::string>();
    if (head != "softmax" && head != "linear") fail(ErrorCode::kParse, "unknown head: " + head);
    spec.head = head == "softmax" ? OutputHead::kSoftmax : OutputHead::kLinear;
    NetParams p = zero_params(spec);
    const json& layers = j.at("layers");
    if (layers.size() != p.layers.size()) fail(ErrorCode::kParse, "checkpoint layer count mismatch");
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      DenseLayer& dst = p.layers[l];
      const json& src = layers[l];
      const auto w = src.at("weight").get<std::vector<double>>();
      const auto b = src.at("bias").get<std::vector<double>>();
      if (src.at("rows").get<Eigen::Index>() != dst.weight.rows() ||
          src.at("cols").get<Eigen::Index>() != dst.weight.cols() ||
          static_cast<Eigen::Index>(w.size()) != dst.weight.size() ||
          static_cast<Eigen::Index>(b.size()) != dst.bias.size()) {
        fail(ErrorCode::kParse, "checkpoint layer shape mismatch");
      }
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < dst.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < dst.weight.cols(); ++c) dst.weight(r, c) = w[k++];
      for (Eigen::Index r = 0; r < dst.bias.size(); ++r) dst.bias(r) = b[static_cast<std::size_t>(r)];
    }
    if (role) *role = j.value("role", "");
    return p;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const NetParams& params, const std::string& role) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out << checkpoint_to_json(params, role) << '\n';
}

NetParams load_checkpoint(const std::filesystem::path& path, std::string* role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str(), role);
}

}  // namespace yieldtrace
