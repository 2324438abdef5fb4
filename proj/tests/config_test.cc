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


#include <filesystem>
#include <functional>
#include <string>

#include "doctest.h"
#include "yieldtrace/config.hpp"
#include "yieldtrace/error.hpp"

namespace yieldtrace {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

ExperimentConfig unusual_config() {
  ExperimentConfig c;
  c.name = "sweep";
  c.seeds = {4, 7, 9};
  c.root_seed = 18446744073709551615ULL;
  c.beta_sweep = {0.0, 1.0, 30.0};
  c.calibrate = false;
  c.market.alpha = 3.5;
  c.market.market_noise = 0.1;  // not exactly representable
  c.market.rm = RmRuleParams::literal();
  c.train.algorithm = Algorithm::kActionBonus;
  c.train.hidden = {32, 16, 8};
  c.train.policy_learning_rate = 1.0 / 3.0;
  c.train.reward_unit = RewardUnit::kGross;
  c.train.warm_start_policy = false;
  c.calibration.alpha_grid = {2.75, 3.125};
  return c;
}

TEST_CASE("config text round-trips losslessly") {
  const ExperimentConfig c = unusual_config();
  const std::string text = config_to_text(c);
  const ExperimentConfig back = config_from_text(text);
  CHECK(config_to_text(back) == text);
  CHECK(config_fingerprint(back) == config_fingerprint(c));
  CHECK(back.train.policy_learning_rate == c.train.policy_learning_rate);
  CHECK(back.market.market_noise == c.market.market_noise);
  CHECK(back.root_seed == c.root_seed);
  CHECK(back.train.hidden == c.train.hidden);
  CHECK(back.market.fingerprint() == c.market.fingerprint());

  const auto path = std::filesystem::temp_directory_path() / "yieldtrace_config_test.ini";
  save_config(path, c);
  CHECK(config_to_text(load_config(path)) == text);
  std::filesystem::remove(path);
}

TEST_CASE("default config round-trips") {
  const ExperimentConfig c;
  CHECK(config_to_text(config_from_text(config_to_text(c))) == config_to_text(c));
  CHECK(config_from_text("").seeds == c.seeds);
}

TEST_CASE("every key can be read and written back") {
  ExperimentConfig c = unusual_config();
  for (const std::string& key : config_keys()) {
    const std::string value = get_config_value(c, key);
    set_config_value(c, key, value);
    CHECK(get_config_value(c, key) == value);
  }
  CHECK(config_to_text(c) == config_to_text(unusual_config()));
}

TEST_CASE("unknown keys and bad values are parse errors") {
  CHECK(code_of([] { config_from_text("[train]\nepisodez = 4\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { config_from_text("[nowhere]\nx = 1\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { config_from_text("[train]\nepisodes = many\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { config_from_text("[train]\nalgorithm = sarsa\n"); }) != ErrorCode::kInternal);
  ExperimentConfig c;
  CHECK(code_of([&] { set_config_value(c, "train.nope", "1"); }) == ErrorCode::kParse);
  CHECK(code_of([&] { set_config_value(c, "episodes", "1"); }) == ErrorCode::kParse);
  CHECK(code_of([] { load_config("/nonexistent/config.ini"); }) == ErrorCode::kIo);
}

TEST_CASE("overrides") {
  ExperimentConfig c;
  set_config_value(c, "train.episodes", "12");
  set_config_value(c, "market.alpha", "3.75");
  set_config_value(c, "train.algorithm", "copy-match");
  set_config_value(c, "experiment.seeds", "0-4");
  CHECK(c.train.episodes == 12);
  CHECK(c.market.alpha == 3.75);
  CHECK(c.train.algorithm == Algorithm::kCopyMatch);
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
  CHECK(config_fingerprint(c) != config_fingerprint(ExperimentConfig{}));
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seed_list("0,2,5-7") == std::vector<std::uint64_t>{0, 2, 5, 6, 7});
  CHECK_THROWS_AS(parse_seed_list("4-2"), Error);
  CHECK_THROWS_AS(parse_seed_list(""), Error);
  CHECK_THROWS_AS(parse_seed_list("a"), Error);
}

TEST_CASE("validation") {
  ExperimentConfig c;
  c.name = "a/b";
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.beta_sweep = {-1.0};
  CHECK_THROWS_AS(c.validate(), Error);
  ExperimentConfig{}.validate();
}

}  // namespace
}  // namespace yieldtrace
