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

#include "yieldtrace/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "yieldtrace/error.hpp"

namespace yieldtrace {

namespace {

enum class NetRole : std::uint64_t { kQ = 1, kForecast = 2, kPrior = 3, kPolicy = 4, kValue = 5 };

std::uint64_t init_seed(std::uint64_t seed, NetRole role) {
  return derive_stream({seed, static_cast<std::uint64_t>(StreamDomain::kInit),
                        static_cast<std::uint64_t>(role)});
}

std::uint64_t trainer_seed(std::uint64_t seed, std::uint64_t salt) {
  return derive_stream({seed, static_cast<std::uint64_t>(StreamDomain::kTrainer), salt});
}

NetSpec softmax_spec(int inputs, const std::vector<int>& hidden) {
  return NetSpec{inputs, hidden, kNumBuckets, OutputHead::kSoftmax};
}

double epsilon_at(const TrainConfig& c, int episode) {
  const double decay = std::max(1.0, c.epsilon_decay_fraction * c.episodes);
  const double frac = std::min(1.0, episode / decay);
  return c.epsilon_start + (c.epsilon_end - c.epsilon_start) * frac;
}

Eigen::MatrixXd q_inputs(const DqnLearner& learner, std::span<const Observation> obs) {
  const Eigen::MatrixXd base = observation_matrix(obs);
  if (!learner.forecast) return base;
  Eigen::MatrixXd stacked(base.rows() + kNumBuckets, base.cols());
  stacked.topRows(base.rows()) = base;
  stacked.bottomRows(kNumBuckets) = forward_batch(*learner.forecast, base);
  return stacked;
}

void check_finite(double value, const char* what) {
  if (!std::isfinite(value)) fail(ErrorCode::kNumeric, std::string(what) + " is not finite");
}

}  // namespace

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDqn: return "dqn";
    case Algorithm::kDqnCmdp: return "dqn-cmdp";
    case Algorithm::kDqnForecast: return "dqn-forecast";
    case Algorithm::kCopyArgmax: return "copy-argmax";
    case Algorithm::kCopyMatch: return "copy-match";
    case Algorithm::kTracePrior: return "trace-prior";
    case Algorithm::kActionBonus: return "action-bonus";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& tag) {
  for (Algorithm a : {Algorithm::kDqn, Algorithm::kDqnCmdp, Algorithm::kDqnForecast,
                      Algorithm::kCopyArgmax, Algorithm::kCopyMatch, Algorithm::kTracePrior,
                      Algorithm::kActionBonus}) {
    if (algorithm_name(a) == tag) return a;
  }
  fail(ErrorCode::kInvalidArgument, "unknown algorithm tag: " + tag);
}

bool is_dqn(Algorithm a) {
  return a == Algorithm::kDqn || a == Algorithm::kDqnCmdp || a == Algorithm::kDqnForecast;
}

bool uses_prior(Algorithm a) { return !is_dqn(a); }

void TrainConfig::validate() const {
  require(episodes >= 0, "episodes must be >= 0");
  require(eval_episodes >= 0, "eval_episodes must be >= 0");
  require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  require(nstep >= 1, "nstep must be >= 1");
  require(beta >= 0.0, "beta must be >= 0");
  require(entropy_coef >= 0.0, "entropy_coef must be >= 0");
  require(temperature > 0.0, "temperature must be positive");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0,
          "epsilon schedule must lie in [0, 1]");
  require(replay_capacity >= 1 && batch_size >= 1, "replay capacity and batch size must be positive");
  require(target_period >= 0, "target_period must be >= 0");
  require(dual_period >= 1, "dual_period must be >= 1");
  require(dual_learning_rate >= 0.0 && lambda_init >= 0.0, "dual settings must be non-negative");
  require(prior_episodes >= 2, "prior_episodes must be >= 2");
  require(prior_epochs >= 1 && prior_batch_size >= 1, "prior fit settings must be positive");
  require(pg_batch_episodes >= 1, "pg_batch_episodes must be >= 1");
  require(value_steps >= 0, "value_steps must be >= 0");
  for (int h : hidden) require(h > 0, "hidden widths must be positive");
}

std::vector<Transition> build_transitions(std::span<const Observation> obs,
                                          std::span<const StepOutcome> rows,
                                          std::span<const double> train_rewards,
                                          std::span<const int> reference_buckets, int nstep,
                                          int capacity) {
  const std::size_t steps = rows.size();
  require(obs.size() == steps && train_rewards.size() == steps && reference_buckets.size() == steps,
          "build_transitions: length mismatch");
  require(nstep >= 1, "build_transitions: nstep must be >= 1");
  std::vector<Transition> out(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Transition& tr = out[t];
    const StepOutcome& row = rows[t];
    tr.obs = obs[t];
    tr.action = row.bucket_a;
    tr.reward_gross = row.price_a * row.sales_a;
    tr.reward_revpar = tr.reward_gross / capacity;
    tr.reward_shaped = train_rewards[t];
    const std::size_t end = std::min(steps, t + static_cast<std::size_t>(nstep));
    tr.reward_window.assign(train_rewards.begin() + static_cast<std::ptrdiff_t>(t),
                            train_rewards.begin() + static_cast<std::ptrdiff_t>(end));
    tr.terminal = t + static_cast<std::size_t>(nstep) >= steps;
    if (!tr.terminal) tr.bootstrap_obs = obs[t + static_cast<std::size_t>(nstep)];
    tr.bucket_b = row.bucket_b;
    tr.sales_a = row.sales_a;
    tr.price_gap = row.bucket_a - reference_buckets[t];
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  require(!items_.empty(), "sample from an empty replay buffer");
  std::vector<const Transition*> out(count);
  for (auto& p : out) p = &items_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(items_.size())))];
  return out;
}

double nstep_return(std::span<const double> rewards, double bootstrap, int n, double gamma) {
  require(n >= 1, "nstep_return: n must be >= 1");
  const std::size_t k_max = std::min(rewards.size(), static_cast<std::size_t>(n));
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t k = 0; k < k_max; ++k) {
    total += discount * rewards[k];
    discount *= gamma;
  }
  return total + std::pow(gamma, n) * bootstrap;
}

double undercut_cost(int bucket_a, int bucket_ref, int sales_a) {
  require(bucket_a >= 0 && bucket_a < kNumBuckets && bucket_ref >= 0 && bucket_ref < kNumBuckets,
          "undercut_cost: bucket out of range");
  const int under = std::max(0, bucket_ref - bucket_a);
  return static_cast<double>(under * under) * sales_a;
}

double cmdp_shaped_reward(double reward_revpar, double cost, double lambda) {
  return reward_revpar - lambda * cost;
}

DualState dual_update(DualState state, double mean_cost) {
  state.mean_cost = mean_cost;
  state.lambda = std::max(0.0, state.lambda + state.step_size * (mean_cost - state.cost_target));
  return state;
}

double trace_prior_step_reward(double price_a, int sales_a, const ActionDistribution& policy,
                               const ActionDistribution& prior, double beta, int capacity) {
  return price_a * sales_a / capacity - beta * kl_divergence(policy, prior);
}

double action_bonus_reward(double price_a, int sales_a, double prior_prob_of_action, double beta,
                           int capacity) {
  return price_a * sales_a / capacity +
         beta * std::log(std::max(prior_prob_of_action, kProbabilityFloor));
}

Eigen::MatrixXd observation_matrix(std::span<const Observation> obs) {
  Eigen::MatrixXd m(kObservationWidth, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (int f = 0; f < kObservationWidth; ++f) m(f, static_cast<Eigen::Index>(i)) = obs[i].features[f];
  }
  return m;
}

ActionDistribution predict_distribution(const NetParams& net, const Observation& obs) {
  const Eigen::VectorXd out = forward(net, obs.features);
  return ActionDistribution::from(std::span<const double>(out.data(), static_cast<std::size_t>(out.size())));
}

NetParams fit_classifier(const Eigen::MatrixXd& inputs, std::span<const int> labels, NetParams init,
                         const ClassifierFitConfig& config, std::uint64_t seed) {
  const int n = static_cast<int>(inputs.cols());
  require(n > 0, "fit_classifier: empty dataset");
  require(static_cast<int>(labels.size()) == n, "fit_classifier: label count mismatch");
  Rng rng(seed);
  AdamState opt;
  opt.learning_rate = config.learning_rate;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, std::min(config.batch_size, n));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
    for (int start = 0; start < n; start += batch) {
      const int len = std::min(batch, n - start);
      Batch b;
      b.inputs.resize(inputs.rows(), len);
      b.actions.resize(static_cast<std::size_t>(len));
      for (int k = 0; k < len; ++k) {
        const int idx = order[static_cast<std::size_t>(start + k)];
        b.inputs.col(k) = inputs.col(idx);
        b.actions[static_cast<std::size_t>(k)] = labels[static_cast<std::size_t>(idx)];
      }
      const LossAndGrad lg = loss_and_grad(init, b, LossKind::kNll);
      check_finite(lg.loss, "classifier loss");
      adam_step(init, lg.grad, opt);
    }
  }
  return init;
}

NetParams fit_market_prior(std::span<const EpisodeTrace> traces, const MarketParams& params,
                           NetParams init, const ClassifierFitConfig& config, std::uint64_t seed) {
  std::vector<Observation> obs;
  std::vector<int> labels;
  for (const EpisodeTrace& tr : traces) {
    for (int t = 0; t < static_cast<int>(tr.rows.size()); ++t) {
      obs.push_back(observation_at(tr, t, params));
      labels.push_back(tr.rows[static_cast<std::size_t>(t)].bucket_b);
    }
  }
  require(!obs.empty(), "fit_market_prior: empty dataset");
  return fit_classifier(observation_matrix(obs), labels, std::move(init), config, seed);
}

PriorFit train_market_prior(const MarketParams& params, const TrainConfig& config, std::uint64_t seed) {
  const ClassifierFitConfig fit{config.prior_epochs, config.prior_batch_size, config.prior_learning_rate};
  const int first = config.prior_episodes / 2;
  const int second = config.prior_episodes - first;

  const ActionSource uniform_play = [](const Observation&, Rng& rng) { return rng.uniform_int(kNumBuckets); };
  std::vector<EpisodeTrace> round1;
  for (int ep = 0; ep < first; ++ep) {
    round1.push_back(run_episode(uniform_play, params, seed, static_cast<std::uint64_t>(ep), StreamDomain::kPriorData));
  }
  PriorFit out{init_params(softmax_spec(kObservationWidth, config.hidden), init_seed(seed, NetRole::kPrior)), {}};
  out.round1 = fit_market_prior(round1, params, out.round1, fit, trainer_seed(seed, 31));

  const auto round1_net = std::make_shared<const NetParams>(out.round1);
  const ActionSource prior_play = [round1_net](const Observation& o, Rng& rng) {
    return sample_categorical(predict_distribution(*round1_net, o), rng);
  };
  std::vector<EpisodeTrace> round2;
  for (int ep = first; ep < first + second; ++ep) {
    round2.push_back(run_episode(prior_play, params, seed, static_cast<std::uint64_t>(ep), StreamDomain::kPriorData));
  }
  out.prior = fit_market_prior(round2, params, out.round1, fit, trainer_seed(seed, 32));
  return out;
}

PgStats reinforce_update(std::span<const PgEpisode> batch, PgLearner& learner, double kl_weight,
                         double entropy_coef, int value_steps) {
  std::size_t total = 0;
  for (const PgEpisode& ep : batch) total += ep.size();
  require(total > 0, "reinforce_update: empty batch");
  const auto n = static_cast<Eigen::Index>(total);

  Batch pg;
  pg.inputs.resize(kObservationWidth, n);
  pg.actions.resize(total);
  pg.advantages.resize(total);
  pg.reference.resize(kNumBuckets, n);
  pg.kl_weight = kl_weight;
  pg.entropy_weight = entropy_coef;
  std::vector<double> returns(total);

  PgStats stats;
  Eigen::Index col = 0;
  for (const PgEpisode& ep : batch) {
    double to_go = 0.0;
    std::vector<double> g(ep.size());
    for (std::size_t t = ep.size(); t-- > 0;) {
      to_go += ep[t].reward;
      g[t] = to_go;
    }
    stats.mean_return += to_go;
    for (std::size_t t = 0; t < ep.size(); ++t, ++col) {
      for (int f = 0; f < kObservationWidth; ++f) pg.inputs(f, col) = ep[t].obs.features[f];
      for (int a = 0; a < kNumBuckets; ++a) pg.reference(a, col) = ep[t].prior[a];
      pg.actions[static_cast<std::size_t>(col)] = ep[t].action;
      returns[static_cast<std::size_t>(col)] = g[t];
    }
  }
  stats.mean_return /= static_cast<double>(batch.size());

  const Eigen::MatrixXd baseline = forward_batch(learner.value, pg.inputs);
  const Eigen::MatrixXd probs = forward_batch(learner.policy, pg.inputs);
  for (Eigen::Index i = 0; i < n; ++i) {
    pg.advantages[static_cast<std::size_t>(i)] =
        returns[static_cast<std::size_t>(i)] - learner.return_scale * baseline(0, i);
    const ActionDistribution pi = ActionDistribution::from(std::span<const double>(probs.col(i).data(), kNumBuckets));
    const ActionDistribution ref = ActionDistribution::from(std::span<const double>(pg.reference.col(i).data(), kNumBuckets));
    stats.mean_kl += kl_divergence(pi, ref);
    stats.mean_entropy += entropy(pi);
  }
  stats.mean_kl /= static_cast<double>(n);
  stats.mean_entropy /= static_cast<double>(n);

  const LossAndGrad lg = loss_and_grad(learner.policy, pg, LossKind::kPolicyGradient);
  check_finite(lg.loss, "policy-gradient loss");
  adam_step(learner.policy, lg.grad, learner.policy_opt);
  stats.policy_loss = lg.loss;

  Batch vb;
  vb.inputs = pg.inputs;
  vb.actions.assign(total, 0);
  vb.targets.resize(total);
  for (std::size_t i = 0; i < total; ++i) vb.targets[i] = returns[i] / learner.return_scale;
  for (int s = 0; s < value_steps; ++s) {
    const LossAndGrad vg = loss_and_grad(learner.value, vb, LossKind::kTd);
    check_finite(vg.loss, "value loss");
    adam_step(learner.value, vg.grad, learner.value_opt);
    stats.value_loss = vg.loss;
  }
  return stats;
}

Eigen::VectorXd q_input(const DqnLearner& learner, const Observation& obs) {
  return q_inputs(learner, std::span<const Observation>(&obs, 1)).col(0);
}

double dqn_update(const ReplayBuffer& buffer, DqnLearner& learner, int batch_size, Rng& rng) {
  require(buffer.size() >= static_cast<std::size_t>(batch_size), "dqn_update: buffer smaller than batch");
  const auto picks = buffer.sample(static_cast<std::size_t>(batch_size), rng);
  std::vector<Observation> obs, boot;
  obs.reserve(picks.size());
  for (const Transition* t : picks) {
    obs.push_back(t->obs);
    if (!t->terminal) boot.push_back(t->bootstrap_obs);
  }
  Eigen::MatrixXd boot_q;
  if (!boot.empty()) boot_q = forward_batch(learner.target, q_inputs(learner, boot));

  Batch b;
  b.inputs = q_inputs(learner, obs);
  b.actions.resize(picks.size());
  b.targets.resize(picks.size());
  Eigen::Index bi = 0;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const Transition& t = *picks[i];
    const double bootstrap = t.terminal ? 0.0 : boot_q.col(bi++).maxCoeff();
    b.actions[i] = t.action;
    b.targets[i] = nstep_return(t.reward_window, bootstrap, learner.nstep, learner.gamma);
  }
  const LossAndGrad lg = loss_and_grad(learner.live, b, LossKind::kTd);
  check_finite(lg.loss, "TD loss");
  adam_step(learner.live, lg.grad, learner.opt);
  ++learner.updates;
  if (learner.target_period > 0 && learner.updates % learner.target_period == 0) {
    learner.target = learner.live;
  }
  return lg.loss;
}

namespace {

void train_dqn(const TrainConfig& config, const MarketParams& params, std::uint64_t seed,
               TrainingResult& result) {
  const bool with_forecast = config.algorithm == Algorithm::kDqnForecast;
  const bool with_cmdp = config.algorithm == Algorithm::kDqnCmdp;
  const int q_width = kObservationWidth + (with_forecast ? kNumBuckets : 0);

  DqnLearner learner{init_params(NetSpec{q_width, config.hidden, kNumBuckets, OutputHead::kLinear},
                                 init_seed(seed, NetRole::kQ)),
                     {}, {}, std::nullopt, 0, config.target_period, config.gamma, config.nstep};
  learner.target = learner.live;
  learner.opt.learning_rate = config.q_learning_rate;
  AdamState forecast_opt;
  forecast_opt.learning_rate = config.forecast_learning_rate;
  if (with_forecast) {
    learner.forecast = init_params(softmax_spec(kObservationWidth, config.hidden), init_seed(seed, NetRole::kForecast));
  }

  ReplayBuffer buffer(static_cast<std::size_t>(config.replay_capacity));
  Rng trainer_rng(trainer_seed(seed, 1));
  DualState dual{config.lambda_init, config.dual_learning_rate, config.cost_target, 0.0};
  double period_cost = 0.0;
  int period_steps = 0;
  const std::size_t ready = static_cast<std::size_t>(std::max(config.batch_size, config.warmup_transitions));

  for (int ep = 0; ep < config.episodes; ++ep) {
    const double eps = epsilon_at(config, ep);
    Episode env(params, env_stream_seed(seed, StreamDomain::kTrain, static_cast<std::uint64_t>(ep)));
    Rng policy_rng(policy_stream_seed(seed, StreamDomain::kTrain, static_cast<std::uint64_t>(ep)));
    std::vector<Observation> obs;
    std::vector<double> rewards;
    std::vector<int> refs;
    double loss_sum = 0.0;
    int loss_count = 0;
    double episode_return = 0.0;
    while (!env.done()) {
      const Observation o = env.observe();
      const Eigen::VectorXd q = forward(learner.live, q_input(learner, o));
      const int a = epsilon_greedy(std::span<const double>(q.data(), kNumBuckets), eps, policy_rng);
      const int ref = env.lagged_b()[0];
      const StepOutcome& s = env.step(a);
      const double gross = s.price_a * s.sales_a;
      const double revpar = gross / params.capacity;
      double reward = config.reward_unit == RewardUnit::kGross ? gross : revpar;
      if (with_cmdp) {
        const double cost = undercut_cost(a, ref, s.sales_a);
        reward = cmdp_shaped_reward(revpar, cost, dual.lambda);
        period_cost += cost;
        ++period_steps;
      }
      obs.push_back(o);
      rewards.push_back(reward);
      refs.push_back(ref);
      episode_return += reward;

      if (buffer.size() >= ready) {
        loss_sum += dqn_update(buffer, learner, config.batch_size, trainer_rng);
        ++loss_count;
        if (with_forecast) {
          const auto picks = buffer.sample(static_cast<std::size_t>(config.batch_size), trainer_rng);
          std::vector<Observation> fo;
          Batch fb;
          for (const Transition* t : picks) {
            fo.push_back(t->obs);
            fb.actions.push_back(t->bucket_b);
          }
          fb.inputs = observation_matrix(fo);
          const LossAndGrad lg = loss_and_grad(*learner.forecast, fb, LossKind::kNll);
          adam_step(*learner.forecast, lg.grad, forecast_opt);
        }
      }
    }
    for (Transition& t : build_transitions(obs, env.rows(), rewards, refs, config.nstep, params.capacity)) {
      buffer.push(std::move(t));
    }
    if (with_cmdp && (ep + 1) % config.dual_period == 0 && period_steps > 0) {
      dual = dual_update(dual, period_cost / period_steps);
      period_cost = 0.0;
      period_steps = 0;
    }
    StatRow row;
    row.episode = ep;
    row.loss = loss_count ? loss_sum / loss_count : 0.0;
    row.lambda = dual.lambda;
    row.train_return = episode_return;
    row.epsilon = eps;
    result.stats.push_back(row);
  }
  result.final_lambda = dual.lambda;
  result.q_network = std::move(learner.live);
  if (learner.forecast) result.forecast = std::move(learner.forecast);
}

void train_policy_gradient(const TrainConfig& config, const MarketParams& params, std::uint64_t seed,
                           TrainingResult& result) {
  const bool full_kl = config.algorithm == Algorithm::kTracePrior;
  PgLearner learner;
  learner.value = init_params(NetSpec{kObservationWidth, config.hidden, 1, OutputHead::kLinear},
                              init_seed(seed, NetRole::kValue));
  learner.policy_opt.learning_rate = config.policy_learning_rate;
  learner.value_opt.learning_rate = config.value_learning_rate;
  learner.return_scale = params.horizon * params.lambda0 * params.price_grid[kNumBuckets / 2] / params.capacity;

  const NetParams& prior = *result.prior;
  learner.policy = config.warm_start_policy
                       ? prior
                       : init_params(softmax_spec(kObservationWidth, config.hidden), init_seed(seed, NetRole::kPolicy));

  for (int start = 0; start < config.episodes; start += config.pg_batch_episodes) {
    const int count = std::min(config.pg_batch_episodes, config.episodes - start);
    std::vector<PgEpisode> batch(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const auto ep = static_cast<std::uint64_t>(start + k);
      Episode env(params, env_stream_seed(seed, StreamDomain::kTrain, ep));
      Rng policy_rng(policy_stream_seed(seed, StreamDomain::kTrain, ep));
      PgEpisode& steps = batch[static_cast<std::size_t>(k)];
      while (!env.done()) {
        PgStep st;
        st.obs = env.observe();
        const ActionDistribution pi = predict_distribution(learner.policy, st.obs);
        st.prior = floor_and_normalize(predict_distribution(prior, st.obs));
        st.action = sample_categorical(pi, policy_rng);
        const StepOutcome& s = env.step(st.action);
        st.revenue = s.price_a * s.sales_a / params.capacity;
        st.reward = full_kl ? trace_prior_step_reward(s.price_a, s.sales_a, pi, st.prior, config.beta, params.capacity)
                            : action_bonus_reward(s.price_a, s.sales_a, st.prior[st.action], config.beta, params.capacity);
        st.penalty = st.revenue - st.reward;
        steps.push_back(st);
      }
    }
    const PgStats stats = reinforce_update(batch, learner, full_kl ? config.beta : 0.0,
                                           config.entropy_coef, config.value_steps);
    StatRow row;
    row.episode = start + count - 1;
    row.loss = stats.policy_loss;
    row.mean_kl = stats.mean_kl;
    row.entropy = stats.mean_entropy;
    row.train_return = stats.mean_return;
    result.stats.push_back(row);
  }
  result.policy = std::move(learner.policy);
  result.value = std::move(learner.value);
}

}  // namespace

ActionSource make_eval_policy(const TrainingResult& result, const TrainConfig& config) {
  switch (result.algorithm) {
    case Algorithm::kDqn:
    case Algorithm::kDqnCmdp:
    case Algorithm::kDqnForecast: {
      DqnLearner view;
      view.live = *result.q_network;
      view.forecast = result.forecast;
      auto learner = std::make_shared<const DqnLearner>(std::move(view));
      return [learner](const Observation& o, Rng&) {
        const Eigen::VectorXd q = forward(learner->live, q_input(*learner, o));
        return argmax_action(std::span<const double>(q.data(), kNumBuckets));
      };
    }
    case Algorithm::kCopyArgmax: {
      auto prior = std::make_shared<const NetParams>(*result.prior);
      return [prior](const Observation& o, Rng&) { return argmax_action(predict_distribution(*prior, o)); };
    }
    case Algorithm::kCopyMatch: {
      auto prior = std::make_shared<const NetParams>(*result.prior);
      const double temperature = config.temperature;
      return [prior, temperature](const Observation& o, Rng& rng) {
        return sample_categorical(temperature_scale(predict_distribution(*prior, o), temperature), rng);
      };
    }
    case Algorithm::kTracePrior:
    case Algorithm::kActionBonus: {
      auto policy = std::make_shared<const NetParams>(*result.policy);
      return [policy](const Observation& o, Rng& rng) {
        return sample_categorical(predict_distribution(*policy, o), rng);
      };
    }
  }
  fail(ErrorCode::kInternal, "make_eval_policy: unhandled algorithm");
}

std::vector<EpisodeTrace> evaluate_policy(const ActionSource& policy, const MarketParams& params,
                                          std::uint64_t seed, int episodes) {
  std::vector<EpisodeTrace> traces;
  traces.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    traces.push_back(run_episode(policy, params, seed, static_cast<std::uint64_t>(ep), StreamDomain::kEval));
  }
  return traces;
}

EvalSummary summarize_evaluation(const TrainingResult& result, const MarketParams& params) {
  EvalSummary summary;
  std::size_t steps = 0, agree = 0;
  double kl = 0.0, ent = 0.0;
  for (const EpisodeTrace& tr : result.eval_traces) {
    for (int t = 0; t < static_cast<int>(tr.rows.size()); ++t) {
      const StepOutcome& row = tr.rows[static_cast<std::size_t>(t)];
      ++steps;
      if (row.bucket_a == row.bucket_b) ++agree;
      if (result.policy) {
        const Observation o = observation_at(tr, t, params);
        const ActionDistribution pi = predict_distribution(*result.policy, o);
        kl += kl_divergence(pi, predict_distribution(*result.prior, o));
        ent += entropy(pi);
      }
    }
  }
  if (steps > 0) {
    summary.action_accuracy = static_cast<double>(agree) / static_cast<double>(steps);
    summary.mean_policy_prior_kl = kl / static_cast<double>(steps);
    summary.mean_policy_entropy = ent / static_cast<double>(steps);
  }
  return summary;
}

TrainingResult run_training(const TrainConfig& config, const MarketParams& params, std::uint64_t seed) {
  config.validate();
  params.validate();
  TrainingResult result;
  result.algorithm = config.algorithm;
  result.seed = seed;

  if (is_dqn(config.algorithm)) {
    train_dqn(config, params, seed, result);
  } else {
    if (config.episodes > 0) {
      result.prior = train_market_prior(params, config, seed).prior;
    } else {
      result.prior = init_params(softmax_spec(kObservationWidth, config.hidden), init_seed(seed, NetRole::kPrior));
    }
    result.prior_fingerprint_frozen = result.prior->fingerprint();
    if (config.algorithm == Algorithm::kTracePrior || config.algorithm == Algorithm::kActionBonus) {
      train_policy_gradient(config, params, seed, result);
    }
    result.prior_fingerprint_final = result.prior->fingerprint();
  }

  result.eval_traces = evaluate_policy(make_eval_policy(result, config), params, seed, config.eval_episodes);
  result.eval = summarize_evaluation(result, params);
  return result;
}

}  // namespace yieldtrace
