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

#ifndef YIELDTRACE_TRAINERS_HPP_
#define YIELDTRACE_TRAINERS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "yieldtrace/market.hpp"
#include "yieldtrace/net.hpp"
#include "yieldtrace/policies.hpp"
#include "yieldtrace/simulator.hpp"

namespace yieldtrace {

enum class Algorithm {
  kDqn,
  kDqnCmdp,
  kDqnForecast,
  kCopyArgmax,
  kCopyMatch,
  kTracePrior,
  kActionBonus,
};

// Tags: dqn | dqn-cmdp | dqn-forecast | copy-argmax | copy-match | trace-prior | action-bonus
std::string algorithm_name(Algorithm algorithm);
// Throws Error(kInvalidArgument) for an unknown tag.
Algorithm parse_algorithm(const std::string& tag);
bool is_dqn(Algorithm algorithm);
bool uses_prior(Algorithm algorithm);

enum class RewardUnit { kGross, kRevpar };

struct TrainConfig {
  Algorithm algorithm = Algorithm::kTracePrior;
  int episodes = 500;
  int eval_episodes = 2000;
  std::vector<int> hidden{64, 64};

  // DQN family.
  double gamma = 1.0;
  int nstep = 5;
  RewardUnit reward_unit = RewardUnit::kRevpar;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;  // share of training spent decaying
  int replay_capacity = 50000;
  int batch_size = 64;
  int target_period = 500;  // updates between target refreshes; 0 = never
  int warmup_transitions = 1000;
  double q_learning_rate = 1e-3;
  double forecast_learning_rate = 1e-3;

  // CMDP undercut penalty.
  double lambda_init = 0.0;
  double cost_target = 0.05;
  double dual_learning_rate = 0.01;
  int dual_period = 10;  // episodes per dual update

  // Market prior (copy baselines and Trace-Prior RL).
  int prior_episodes = 1000;  // split evenly between the two collection rounds
  int prior_epochs = 20;
  int prior_batch_size = 256;
  double prior_learning_rate = 1e-3;

  // Policy gradient.
  double beta = 30.0;
  double entropy_coef = 0.0;
  int pg_batch_episodes = 16;
  double policy_learning_rate = 3e-3;
  double value_learning_rate = 1e-3;
  int value_steps = 8;
  bool warm_start_policy = true;

  // Probability matching temperature for copy-match.
  double temperature = 0.95;

  void validate() const;
};

struct Transition {
  Observation obs;
  int action = 0;
  double reward_gross = 0.0;   // p_A * y_A
  double reward_revpar = 0.0;  // reward_gross / Q
  double reward_shaped = 0.0;  // reward used for training
  // Training rewards r_t .. r_{t+k-1}, k = min(n, steps to the horizon).
  std::vector<double> reward_window;
  Observation bootstrap_obs;  // o_{t+n}; unused when terminal
  bool terminal = false;      // horizon reached inside the window
  int bucket_b = 0;
  int sales_a = 0;
  int price_gap = 0;  // z_t = a_A - a_ref
};

// Transitions of one finished episode. `train_rewards[t]` is the reward the
// learner optimizes on day t; `reference_buckets[t]` is a_ref for the
// undercut gap.
std::vector<Transition> build_transitions(std::span<const Observation> obs,
                                          std::span<const StepOutcome> rows,
                                          std::span<const double> train_rewards,
                                          std::span<const int> reference_buckets, int nstep,
                                          int capacity);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  // Uniform with replacement.
  std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

struct DualState {
  double lambda = 0.0;
  double step_size = 0.01;
  double cost_target = 0.05;
  double mean_cost = 0.0;  // last batch mean
};

// sum_{k < min(n, |rewards|)} gamma^k r_k + gamma^n * bootstrap.
// Pass bootstrap = 0 when the episode ends inside the window.
double nstep_return(std::span<const double> rewards, double bootstrap, int n, double gamma);

// max(0, -(a_A - a_ref))^2 * y_A.
double undercut_cost(int bucket_a, int bucket_ref, int sales_a);

double cmdp_shaped_reward(double reward_revpar, double cost, double lambda);
// lambda' = max(0, lambda + step * (mean_cost - target)).
DualState dual_update(DualState state, double mean_cost);

double trace_prior_step_reward(double price_a, int sales_a, const ActionDistribution& policy,
                               const ActionDistribution& prior, double beta, int capacity);
double action_bonus_reward(double price_a, int sales_a, double prior_prob_of_action, double beta,
                           int capacity);

// Columns are observations.
Eigen::MatrixXd observation_matrix(std::span<const Observation> obs);
ActionDistribution predict_distribution(const NetParams& net, const Observation& obs);

struct ClassifierFitConfig {
  int epochs = 20;
  int batch_size = 256;
  double learning_rate = 1e-3;
};

// Minibatch NLL training of a softmax net on (inputs column, label) pairs.
// Starts from `init`. Throws on an empty dataset.
NetParams fit_classifier(const Eigen::MatrixXd& inputs, std::span<const int> labels, NetParams init,
                         const ClassifierFitConfig& config, std::uint64_t seed);

// Supervised Hotel B price predictor over Hotel A's observation.
NetParams fit_market_prior(std::span<const EpisodeTrace> traces, const MarketParams& params,
                           NetParams init, const ClassifierFitConfig& config, std::uint64_t seed);

struct PriorFit {
  NetParams round1;
  NetParams prior;  // frozen
};

// Round 1: A plays uniformly at random for half the budget, fit.
// Round 2: A samples from the round-1 prior for the other half, fine-tune
// on round-2 data. The round-2 net is the frozen prior.
PriorFit train_market_prior(const MarketParams& params, const TrainConfig& config, std::uint64_t seed);

struct PgStep {
  Observation obs;
  int action = 0;
  ActionDistribution prior;  // floored
  double revenue = 0.0;      // p_A y_A / Q
  double penalty = 0.0;      // beta * KL for trace-prior, -beta log pi_M(a) for action-bonus
  double reward = 0.0;       // revenue - penalty
};
using PgEpisode = std::vector<PgStep>;

struct PgStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_return = 0.0;
  double mean_kl = 0.0;
  double mean_entropy = 0.0;
};

struct PgLearner {
  NetParams policy;
  NetParams value;
  AdamState policy_opt;
  AdamState value_opt;
  double return_scale = 1.0;  // value net predicts return / return_scale
};

// One REINFORCE step on sum_t (G_t - b(o_t)) grad log pi(a_t|o_t), with
// undiscounted returns-to-go of the composite reward. `kl_weight` adds the
// analytic gradient of -kl_weight * KL(pi || prior) at every visited state,
// so the update is the exact gradient of the KL-penalized objective. The
// value baseline is then regressed on the returns.
PgStats reinforce_update(std::span<const PgEpisode> batch, PgLearner& learner, double kl_weight,
                         double entropy_coef, int value_steps);

struct DqnLearner {
  NetParams live;
  NetParams target;
  AdamState opt;
  std::optional<NetParams> forecast;  // inputs are obs ++ forecast(obs) when present
  std::int64_t updates = 0;
  int target_period = 500;  // 0 = never refresh
  double gamma = 1.0;
  int nstep = 1;
};

// Q-network input for one observation.
Eigen::VectorXd q_input(const DqnLearner& learner, const Observation& obs);

// One minibatch regression step to the n-step target under the target
// network, followed by a target refresh on the configured period. Returns
// the TD loss.
double dqn_update(const ReplayBuffer& buffer, DqnLearner& learner, int batch_size, Rng& rng);

struct StatRow {
  int episode = 0;
  double loss = 0.0;
  double lambda = 0.0;
  double mean_kl = 0.0;
  double entropy = 0.0;
  double train_return = 0.0;
  double epsilon = 0.0;
};

struct EvalSummary {
  double action_accuracy = 0.0;  // share of eval days with a_A == a_B
  double mean_policy_prior_kl = 0.0;
  double mean_policy_entropy = 0.0;
};

struct TrainingResult {
  Algorithm algorithm = Algorithm::kTracePrior;
  std::uint64_t seed = 0;
  std::optional<NetParams> q_network;
  std::optional<NetParams> forecast;
  std::optional<NetParams> prior;
  std::optional<NetParams> policy;
  std::optional<NetParams> value;
  std::string prior_fingerprint_frozen;
  std::string prior_fingerprint_final;
  double final_lambda = 0.0;
  std::vector<StatRow> stats;
  std::vector<EpisodeTrace> eval_traces;
  EvalSummary eval;
};

// Evaluation-time decision rule of a trained result: greedy for DQN
// variants, argmax or tempered sampling for the copy baselines, sampling
// from the policy for Trace-Prior RL and the action-bonus ablation.
ActionSource make_eval_policy(const TrainingResult& result, const TrainConfig& config);

std::vector<EpisodeTrace> evaluate_policy(const ActionSource& policy, const MarketParams& params,
                                          std::uint64_t seed, int episodes);

// Agreement with B, and policy-prior KL and entropy when a policy exists,
// over every day of result.eval_traces.
EvalSummary summarize_evaluation(const TrainingResult& result, const MarketParams& params);

TrainingResult run_training(const TrainConfig& config, const MarketParams& params, std::uint64_t seed);

}  // namespace yieldtrace

#endif  // YIELDTRACE_TRAINERS_HPP_
