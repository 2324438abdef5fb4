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

#ifndef YIELDTRACE_CONFIG_HPP_
#define YIELDTRACE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "yieldtrace/market.hpp"
#include "yieldtrace/trainers.hpp"

namespace yieldtrace {

// Calibration search grid and acceptance box. Candidates are alpha values
// over `base` market parameters.
struct CalibrationTargets {
  std::vector<double> alpha_grid{3.0, 3.5, 4.0, 4.5, 5.0};
  int episodes = 5000;
  double occupancy_low = 0.72;
  double occupancy_high = 0.82;
  double adr_low = 130.0;
  double adr_high = 150.0;
  double occupancy_anchor = 0.768;
  double adr_anchor = 140.7;
  int min_buckets = 5;
  double bucket_use_share = 0.005;  // a bucket counts as used at or above this share
};

struct ExperimentConfig {
  std::string name = "run";
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::uint64_t root_seed = 20260101;
  std::string output_dir = "runs";
  // Trace-Prior RL or action-bonus runs repeat per value; empty = train.beta only.
  std::vector<double> beta_sweep;
  // When set, alpha is chosen by calibration before training.
  bool calibrate = true;
  MarketParams market;
  TrainConfig train;
  CalibrationTargets calibration;

  void validate() const;
};

// Flat INI text with [experiment], [market], [rm], [train] and
// [calibration] sections. Doubles use round-trip precision, so
// parse(to_text(c)) reproduces c exactly.
std::string config_to_text(const ExperimentConfig& config);
// Unknown sections or keys and malformed values raise Error(kParse).
ExperimentConfig config_from_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

// "section.key" access with the same value syntax as the file.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& config, const std::string& key);
std::vector<std::string> config_keys();

// FNV-1a of config_to_text.
std::string config_fingerprint(const ExperimentConfig& config);

// Comma separated lists, e.g. "0,1,2" or "0-4".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace yieldtrace

#endif  // YIELDTRACE_CONFIG_HPP_
