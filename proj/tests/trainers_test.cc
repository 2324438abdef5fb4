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


#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "yieldtrace/error.hpp"
#include "yieldtrace/trainers.hpp"

namespace yieldtrace {
namespace {

MarketParams calibrated() {
  MarketParams p;
  p.alpha = 3.5;
  return p;
}

TEST_CASE("n-step returns") {
  CHECK(nstep_return(std::vector<double>{1.4}, 10.0, 1, 1.0) == doctest::Approx(11.4));
  CHECK(nstep_return(std::vector<double>{2.5}, 0.0, 5, 1.0) == 2.5);
  CHECK(nstep_return(std::vector<double>{1, 2, 3}, 4.0, 3, 0.9) == doctest::Approx(8.146).epsilon(1e-12));
}

TEST_CASE("undercut cost and CMDP shaping") {
  CHECK(undercut_cost(3, 2, 4) == 0.0);
  CHECK(undercut_cost(1, 3, 3) == 12.0);
  CHECK(undercut_cost(0, 6, 0) == 0.0);
  CHECK(cmdp_shaped_reward(1.2, 5.0, 0.0) == 1.2);
  CHECK(cmdp_shaped_reward(1.2, 2.0, 0.1) == doctest::Approx(1.0));
}

TEST_CASE("dual update projects onto non-negative multipliers") {
  DualState s{0.0, 0.1, 0.1, 0.0};
  CHECK(dual_update(s, 0.05).lambda == 0.0);
  s.lambda = 0.5;
  CHECK(dual_update(s, 0.2).lambda == doctest::Approx(0.51).epsilon(1e-12));
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    s = dual_update(s, rng.uniform(0.0, 0.2));
    CHECK(s.lambda >= 0.0);
  }
}

TEST_CASE("composite rewards") {
  const ActionDistribution u = ActionDistribution::uniform();
  CHECK(trace_prior_step_reward(140, 1, u, u, 30.0, 100) == doctest::Approx(1.4));
  ActionDistribution skew = u;
  skew[0] += 0.1;
  skew[1] -= 0.1;
  CHECK(trace_prior_step_reward(140, 1, skew, u, 0.0, 100) == doctest::Approx(1.4));
  const double kl = kl_divergence(skew, u);
  CHECK(std::abs(trace_prior_step_reward(160, 2, skew, u, 30.0, 100) - (3.2 - 30.0 * kl)) < 1e-9);

  CHECK(action_bonus_reward(140, 1, 1.0, 5.0, 100) == doctest::Approx(1.4));
  CHECK(action_bonus_reward(140, 1, 0.3, 0.0, 100) == doctest::Approx(1.4));
  CHECK(action_bonus_reward(140, 1, std::exp(-1.0), 0.1, 100) == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("transitions keep reward bookkeeping and truncate at the horizon") {
  const MarketParams params = calibrated();
  Episode env(params, 5);
  Rng rng(2);
  std::vector<Observation> obs;
  std::vector<double> rewards;
  std::vector<int> refs;
  while (!env.done()) {
    obs.push_back(env.observe());
    refs.push_back(env.lagged_b()[0]);
    const StepOutcome& s = env.step(rng.uniform_int(kNumBuckets));
    rewards.push_back(0.5 * s.sales_a);
  }
  const int n = 5;
  const auto ts = build_transitions(obs, env.rows(), rewards, refs, n, params.capacity);
  REQUIRE(ts.size() == static_cast<std::size_t>(params.horizon));
  for (int t = 0; t < params.horizon; ++t) {
    const Transition& tr = ts[static_cast<std::size_t>(t)];
    const StepOutcome& row = env.rows()[static_cast<std::size_t>(t)];
    CHECK(tr.reward_gross == row.price_a * row.sales_a);
    CHECK(tr.reward_revpar == tr.reward_gross / params.capacity);
    CHECK(tr.reward_window.size() == static_cast<std::size_t>(std::min(n, params.horizon - t)));
    CHECK(tr.terminal == (t + n >= params.horizon));
    if (!tr.terminal) CHECK(tr.bootstrap_obs.features == obs[static_cast<std::size_t>(t + n)].features);
    CHECK(tr.price_gap == row.bucket_a - refs[static_cast<std::size_t>(t)]);
  }
}

TEST_CASE("replay buffer is a bounded FIFO") {
  ReplayBuffer buffer(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.action = i;
    buffer.push(t);
    CHECK(buffer.size() <= 3);
  }
  std::vector<int> kept;
  for (std::size_t i = 0; i < buffer.size(); ++i) kept.push_back(buffer.at(i).action);
  std::sort(kept.begin(), kept.end());
  CHECK(kept == std::vector<int>{2, 3, 4});
  Rng a(7), b(7);
  const auto sa = buffer.sample(10, a);
  const auto sb = buffer.sample(10, b);
  CHECK(sa == sb);
}

Eigen::MatrixXd toy_inputs(const std::vector<double>& feature) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(kObservationWidth, static_cast<Eigen::Index>(feature.size()));
  for (std::size_t i = 0; i < feature.size(); ++i) x(2, static_cast<Eigen::Index>(i)) = feature[i];
  return x;
}

NetParams fresh_classifier(std::uint64_t seed) {
  return init_params(NetSpec{kObservationWidth, {16, 16}, kNumBuckets, OutputHead::kSoftmax}, seed);
}

TEST_CASE("classifier separates two deterministic contexts") {
  std::vector<double> feature;
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) {
    feature.push_back(i % 2 ? 0.8 : -0.8);
    labels.push_back(i % 2 ? 4 : 1);
  }
  const Eigen::MatrixXd x = toy_inputs(feature);
  const NetParams net = fit_classifier(x, labels, fresh_classifier(1), {60, 32, 1e-2}, 2);
  const Eigen::MatrixXd p = forward_batch(net, x);
  double true_prob = 0.0;
  for (int i = 0; i < 400; ++i) true_prob += p(labels[static_cast<std::size_t>(i)], i);
  CHECK(true_prob / 400 > 0.95);
}

TEST_CASE("classifier recovers empirical frequencies") {
  std::vector<int> labels;
  for (int i = 0; i < 2000; ++i) labels.push_back(i % 2 ? 2 : 1);
  const Eigen::MatrixXd x = toy_inputs(std::vector<double>(2000, 0.3));
  const NetParams net = fit_classifier(x, labels, fresh_classifier(3), {30, 64, 1e-2}, 4);
  const Eigen::VectorXd p = forward_batch(net, x.col(0));
  CHECK(std::abs(p(1) - 0.5) < 0.05);
  CHECK(std::abs(p(2) - 0.5) < 0.05);
}

TEST_CASE("classifier fits a constant label") {
  const std::vector<int> labels(500, 3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(kObservationWidth, 500);
  const NetParams net = fit_classifier(x, labels, fresh_classifier(5), {30, 50, 1e-2}, 6);
  Batch b;
  b.inputs = x;
  b.actions = labels;
  CHECK(loss_value(net, b, LossKind::kNll) < 0.05);
  CHECK_THROWS_AS(fit_classifier(Eigen::MatrixXd(kObservationWidth, 0), {}, fresh_classifier(5), {}, 1), Error);
}

PgLearner bandit_learner(double lr) {
  PgLearner l;
  l.policy = init_params(NetSpec{kObservationWidth, {16}, kNumBuckets, OutputHead::kSoftmax}, 11);
  l.value = zero_params(NetSpec{kObservationWidth, {16}, 1, OutputHead::kLinear});
  l.policy_opt.learning_rate = lr;
  l.value_opt.learning_rate = lr;
  return l;
}

TEST_CASE("zero advantages leave the policy unchanged") {
  PgLearner l = bandit_learner(0.01);
  const std::string before = l.policy.fingerprint();
  std::vector<PgEpisode> batch(4, PgEpisode(3));
  for (auto& ep : batch) {
    for (auto& st : ep) st.prior = ActionDistribution::uniform();
  }
  reinforce_update(batch, l, 0.0, 0.0, 0);
  CHECK(l.policy.fingerprint() == before);
}

TEST_CASE("policy gradient solves a one-step bandit") {
  PgLearner l = bandit_learner(3e-3);
  Observation o;
  o.features = {0.1, 0.5, -0.2, 0.0, 0.3, 0.3, 0.3};
  Rng rng(12);
  for (int update = 0; update < 2000; ++update) {
    const ActionDistribution pi = predict_distribution(l.policy, o);
    std::vector<PgEpisode> batch(8);
    for (auto& ep : batch) {
      PgStep st;
      st.obs = o;
      st.prior = ActionDistribution::uniform();
      st.action = sample_categorical(pi, rng);
      st.revenue = st.reward = st.action == 0 ? 1.0 : 0.0;
      ep.push_back(st);
    }
    reinforce_update(batch, l, 0.0, 0.0, 4);
  }
  CHECK(predict_distribution(l.policy, o)[0] > 0.95);
}

Transition chain_step(double state, int action, double reward, bool terminal) {
  Transition t;
  t.obs.features.fill(0.0);
  t.obs.features[0] = state;
  t.action = action;
  t.reward_window = {reward};
  t.terminal = terminal;
  t.bootstrap_obs.features.fill(0.0);
  t.bootstrap_obs.features[0] = 1.0;
  return t;
}

TEST_CASE("DQN step with targets at the prediction changes nothing") {
  DqnLearner l;
  l.live = init_params(NetSpec{kObservationWidth, {8}, kNumBuckets, OutputHead::kLinear}, 21);
  l.target = l.live;
  const Transition probe = chain_step(0.0, 2, 0.0, true);
  const double q = forward(l.live, q_input(l, probe.obs))(2);
  ReplayBuffer buffer(16);
  for (int i = 0; i < 16; ++i) buffer.push(chain_step(0.0, 2, q, true));
  Rng rng(1);
  const std::vector<double> before = l.live.flatten();
  // Batched and single-column products may differ in the last bit.
  CHECK(dqn_update(buffer, l, 8, rng) < 1e-24);
  const std::vector<double> after = l.live.flatten();
  for (std::size_t i = 0; i < after.size(); ++i) CHECK(std::abs(after[i] - before[i]) < 1e-9);
}

// Two states, every action listed. From state 0 the reward is 0.1 * a and the
// chain moves to state 1; from state 1 the reward is 0.2 * (6 - a) and it ends.
ReplayBuffer two_state_chain() {
  ReplayBuffer buffer(64);
  for (int a = 0; a < kNumBuckets; ++a) {
    buffer.push(chain_step(0.0, a, 0.1 * a, false));
    buffer.push(chain_step(1.0, a, 0.2 * (6 - a), true));
  }
  return buffer;
}

DqnLearner chain_learner(int target_period) {
  DqnLearner l;
  l.live = init_params(NetSpec{kObservationWidth, {32, 32}, kNumBuckets, OutputHead::kLinear}, 22);
  l.target = l.live;
  l.opt.learning_rate = 1e-3;
  l.gamma = 0.9;
  l.nstep = 1;
  l.target_period = target_period;
  return l;
}

TEST_CASE("DQN converges to the Bellman fixed point of a two-state chain") {
  const ReplayBuffer buffer = two_state_chain();
  DqnLearner l = chain_learner(100);
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) dqn_update(buffer, l, 14, rng);
  Observation s0, s1;
  s1.features[0] = 1.0;
  const Eigen::VectorXd q0 = forward(l.live, q_input(l, s0));
  const Eigen::VectorXd q1 = forward(l.live, q_input(l, s1));
  for (int a = 0; a < kNumBuckets; ++a) {
    CHECK(std::abs(q1(a) - 0.2 * (6 - a)) < 0.05);
    CHECK(std::abs(q0(a) - (0.1 * a + 0.9 * 1.2)) < 0.05);
  }
  CHECK(l.updates == 5000);
}

TEST_CASE("the target refresh period changes the trajectory") {
  const ReplayBuffer buffer = two_state_chain();
  DqnLearner every = chain_learner(1);
  DqnLearner never = chain_learner(0);
  Rng ra(4), rb(4);
  for (int i = 0; i < 50; ++i) {
    dqn_update(buffer, every, 14, ra);
    dqn_update(buffer, never, 14, rb);
  }
  CHECK(every.live.fingerprint() != never.live.fingerprint());
  CHECK(never.target.fingerprint() == chain_learner(0).live.fingerprint());
}

TEST_CASE("algorithm tags") {
  for (const char* tag : {"dqn", "dqn-cmdp", "dqn-forecast", "copy-argmax", "copy-match", "trace-prior", "action-bonus"}) {
    CHECK(algorithm_name(parse_algorithm(tag)) == tag);
  }
  CHECK_THROWS_AS(parse_algorithm("ppo"), Error);
}

TEST_CASE("zero training episodes return untrained artifacts") {
  TrainConfig config;
  config.episodes = 0;
  config.eval_episodes = 3;
  for (Algorithm a : {Algorithm::kDqn, Algorithm::kCopyMatch, Algorithm::kTracePrior}) {
    config.algorithm = a;
    const TrainingResult r = run_training(config, calibrated(), 1);
    CHECK(r.stats.empty());
    CHECK(r.eval_traces.size() == 3);
  }
}

TEST_CASE("the market prior stays frozen through policy training") {
  TrainConfig config;
  config.algorithm = Algorithm::kTracePrior;
  config.episodes = 32;
  config.eval_episodes = 20;
  config.prior_episodes = 40;
  config.prior_epochs = 2;
  config.warm_start_policy = false;
  config.beta = 1000.0;
  const TrainingResult r = run_training(config, calibrated(), 2);
  CHECK(!r.prior_fingerprint_frozen.empty());
  CHECK(r.prior_fingerprint_frozen == r.prior_fingerprint_final);
  CHECK(r.stats.size() == 2);
  for (const StatRow& row : r.stats) CHECK(std::isfinite(row.loss));
}

TEST_CASE("a very large KL weight pins the policy to the prior") {
  TrainConfig config;
  config.algorithm = Algorithm::kTracePrior;
  config.episodes = 64;
  config.eval_episodes = 20;
  config.prior_episodes = 100;
  config.prior_epochs = 5;
  config.beta = 1000.0;
  const TrainingResult r = run_training(config, calibrated(), 3);
  CHECK(r.eval.mean_policy_prior_kl < 0.02);
}

TEST_CASE("the CMDP multiplier never goes negative during training") {
  TrainConfig config;
  config.algorithm = Algorithm::kDqnCmdp;
  config.episodes = 60;
  config.eval_episodes = 2;
  config.warmup_transitions = 200;
  config.dual_learning_rate = 0.5;
  const TrainingResult r = run_training(config, calibrated(), 4);
  for (const StatRow& row : r.stats) CHECK(row.lambda >= 0.0);
  CHECK(r.final_lambda >= 0.0);
}

TEST_CASE("invalid training configs are rejected") {
  TrainConfig config;
  config.gamma = 0.0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = TrainConfig{};
  config.nstep = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = TrainConfig{};
  config.beta = -1.0;
  CHECK_THROWS_AS(config.validate(), Error);
}

}  // namespace
}  // namespace yieldtrace
