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

#include "yieldtrace/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>

#include "yieldtrace/error.hpp"

namespace yieldtrace {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  const std::string t = trim(text);
  if (t.empty()) return out;
  std::stringstream in(t);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::kParse, "config: bad value '" + value + "' for " + key);
}

// Shortest text that parses back to the same double.
std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
std::string format(int v) { return std::to_string(v); }
std::string format(std::uint64_t v) { return std::to_string(v); }
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(const std::string& v) { return v; }
std::string format(Algorithm v) { return algorithm_name(v); }
std::string format(RewardUnit v) { return v == RewardUnit::kGross ? "gross" : "revpar"; }

template <typename Range>
std::string format_list(const Range& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ',';
    out += format(v);
  }
  return out;
}
std::string format(const std::vector<double>& v) { return format_list(v); }
std::string format(const std::vector<int>& v) { return format_list(v); }
std::string format(const std::vector<std::uint64_t>& v) { return format_list(v); }
std::string format(const std::array<double, kNumBuckets>& v) { return format_list(v); }

template <typename T>
void parse_number(const std::string& text, const std::string& key, T& out) {
  const std::string t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) bad_value(key, text);
}

void parse(const std::string& t, const std::string& k, double& out) { parse_number(t, k, out); }
void parse(const std::string& t, const std::string& k, int& out) { parse_number(t, k, out); }
void parse(const std::string& t, const std::string& k, std::uint64_t& out) { parse_number(t, k, out); }
void parse(const std::string& t, const std::string& k, bool& out) {
  const std::string v = trim(t);
  if (v == "true" || v == "1") {
    out = true;
  } else if (v == "false" || v == "0") {
    out = false;
  } else {
    bad_value(k, t);
  }
}
void parse(const std::string& t, const std::string&, std::string& out) { out = trim(t); }
void parse(const std::string& t, const std::string& k, Algorithm& out) {
  try {
    out = parse_algorithm(trim(t));
  } catch (const Error&) {
    bad_value(k, t);
  }
}
void parse(const std::string& t, const std::string& k, RewardUnit& out) {
  const std::string v = trim(t);
  if (v == "gross") {
    out = RewardUnit::kGross;
  } else if (v == "revpar") {
    out = RewardUnit::kRevpar;
  } else {
    bad_value(k, t);
  }
}
template <typename T>
void parse(const std::string& t, const std::string& k, std::vector<T>& out) {
  out.clear();
  for (const std::string& item : split_list(t)) {
    T v{};
    parse(item, k, v);
    out.push_back(v);
  }
}
// Seed lists also accept inclusive ranges such as "0-4".
void parse(const std::string& t, const std::string& k, std::vector<std::uint64_t>& out) {
  out.clear();
  for (const std::string& item : split_list(t)) {
    const auto dash = item.find('-');
    std::uint64_t lo = 0, hi = 0;
    if (dash == std::string::npos) {
      parse(item, k, lo);
      hi = lo;
    } else {
      parse(item.substr(0, dash), k, lo);
      parse(item.substr(dash + 1), k, hi);
    }
    if (hi < lo || hi - lo > 100000) bad_value(k, item);
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
}

void parse(const std::string& t, const std::string& k, std::array<double, kNumBuckets>& out) {
  std::vector<double> v;
  parse(t, k, v);
  if (v.size() != out.size()) bad_value(k, t);
  std::copy(v.begin(), v.end(), out.begin());
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <typename Access>
Field bind(const char* section, const char* key, Access access) {
  const std::string full = std::string(section) + "." + key;
  return Field{section, key,
               [access](const ExperimentConfig& c) {
                 return format(access(const_cast<ExperimentConfig&>(c)));
               },
               [access, full](ExperimentConfig& c, const std::string& v) { parse(v, full, access(c)); }};
}

#define YT_FIELD(section, key, expr) \
  bind(section, #key, [](ExperimentConfig& c) -> auto& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      YT_FIELD("experiment", name, c.name),
      YT_FIELD("experiment", seeds, c.seeds),
      YT_FIELD("experiment", root_seed, c.root_seed),
      YT_FIELD("experiment", output_dir, c.output_dir),
      YT_FIELD("experiment", beta_sweep, c.beta_sweep),
      YT_FIELD("experiment", calibrate, c.calibrate),

      YT_FIELD("market", capacity, c.market.capacity),
      YT_FIELD("market", horizon, c.market.horizon),
      YT_FIELD("market", price_grid, c.market.price_grid),
      YT_FIELD("market", lambda0, c.market.lambda0),
      YT_FIELD("market", eta_lambda, c.market.eta_lambda),
      YT_FIELD("market", alpha, c.market.alpha),
      YT_FIELD("market", rho, c.market.rho),
      YT_FIELD("market", eta_m, c.market.eta_m),
      YT_FIELD("market", mu, c.market.mu),
      YT_FIELD("market", market_persistence, c.market.market_persistence),
      YT_FIELD("market", market_noise, c.market.market_noise),

      YT_FIELD("rm", base_bucket, c.market.rm.base_bucket),
      YT_FIELD("rm", market_gain, c.market.rm.market_gain),
      YT_FIELD("rm", pace_gain, c.market.rm.pace_gain),
      YT_FIELD("rm", pace_reference, c.market.rm.pace_reference),
      YT_FIELD("rm", late_fraction, c.market.rm.late_fraction),
      YT_FIELD("rm", tight_fraction, c.market.rm.tight_fraction),

      YT_FIELD("train", algorithm, c.train.algorithm),
      YT_FIELD("train", episodes, c.train.episodes),
      YT_FIELD("train", eval_episodes, c.train.eval_episodes),
      YT_FIELD("train", hidden, c.train.hidden),
      YT_FIELD("train", gamma, c.train.gamma),
      YT_FIELD("train", nstep, c.train.nstep),
      YT_FIELD("train", reward_unit, c.train.reward_unit),
      YT_FIELD("train", epsilon_start, c.train.epsilon_start),
      YT_FIELD("train", epsilon_end, c.train.epsilon_end),
      YT_FIELD("train", epsilon_decay_fraction, c.train.epsilon_decay_fraction),
      YT_FIELD("train", replay_capacity, c.train.replay_capacity),
      YT_FIELD("train", batch_size, c.train.batch_size),
      YT_FIELD("train", target_period, c.train.target_period),
      YT_FIELD("train", warmup_transitions, c.train.warmup_transitions),
      YT_FIELD("train", q_learning_rate, c.train.q_learning_rate),
      YT_FIELD("train", forecast_learning_rate, c.train.forecast_learning_rate),
      YT_FIELD("train", lambda_init, c.train.lambda_init),
      YT_FIELD("train", cost_target, c.train.cost_target),
      YT_FIELD("train", dual_learning_rate, c.train.dual_learning_rate),
      YT_FIELD("train", dual_period, c.train.dual_period),
      YT_FIELD("train", prior_episodes, c.train.prior_episodes),
      YT_FIELD("train", prior_epochs, c.train.prior_epochs),
      YT_FIELD("train", prior_batch_size, c.train.prior_batch_size),
      YT_FIELD("train", prior_learning_rate, c.train.prior_learning_rate),
      YT_FIELD("train", beta, c.train.beta),
      YT_FIELD("train", entropy_coef, c.train.entropy_coef),
      YT_FIELD("train", pg_batch_episodes, c.train.pg_batch_episodes),
      YT_FIELD("train", policy_learning_rate, c.train.policy_learning_rate),
      YT_FIELD("train", value_learning_rate, c.train.value_learning_rate),
      YT_FIELD("train", value_steps, c.train.value_steps),
      YT_FIELD("train", warm_start_policy, c.train.warm_start_policy),
      YT_FIELD("train", temperature, c.train.temperature),

      YT_FIELD("calibration", alpha_grid, c.calibration.alpha_grid),
      YT_FIELD("calibration", episodes, c.calibration.episodes),
      YT_FIELD("calibration", occupancy_low, c.calibration.occupancy_low),
      YT_FIELD("calibration", occupancy_high, c.calibration.occupancy_high),
      YT_FIELD("calibration", adr_low, c.calibration.adr_low),
      YT_FIELD("calibration", adr_high, c.calibration.adr_high),
      YT_FIELD("calibration", occupancy_anchor, c.calibration.occupancy_anchor),
      YT_FIELD("calibration", adr_anchor, c.calibration.adr_anchor),
      YT_FIELD("calibration", min_buckets, c.calibration.min_buckets),
      YT_FIELD("calibration", bucket_use_share, c.calibration.bucket_use_share),
  };
  return table;
}

#undef YT_FIELD

const Field& find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (f.section == section && f.key == key) return f;
  }
  fail(ErrorCode::kParse, "config: unknown key " + section + "." + key);
}

std::pair<std::string, std::string> split_key(const std::string& dotted) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) fail(ErrorCode::kParse, "config: key must look like section.key: " + dotted);
  return {dotted.substr(0, dot), dotted.substr(dot + 1)};
}

}  // namespace

void ExperimentConfig::validate() const {
  require(!name.empty(), "experiment name must not be empty");
  require(name.find_first_of("/\\") == std::string::npos, "experiment name must not contain path separators");
  require(!seeds.empty(), "at least one seed is required");
  market.validate();
  train.validate();
  for (double b : beta_sweep) require(b >= 0.0, "beta values must be non-negative");
  require(!calibration.alpha_grid.empty(), "calibration grid must not be empty");
  require(calibration.episodes > 0, "calibration episodes must be positive");
}

std::string config_to_text(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

ExperimentConfig config_from_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorCode::kParse, "config: key outside a section: " + section);
    for (const auto& [key, value] : body) find_field(section, key).set(config, value.data());
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_text(text.str());
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write config " + path.string());
  out << config_to_text(config);
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto [section, name] = split_key(key);
  find_field(section, name).set(config, value);
}

std::string get_config_value(const ExperimentConfig& config, const std::string& key) {
  const auto [section, name] = split_key(key);
  return find_field(section, name).get(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.section + "." + f.key);
  return keys;
}

std::string config_fingerprint(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_text(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  parse(text, "seeds", seeds);
  if (seeds.empty()) fail(ErrorCode::kParse, "empty seed list");
  return seeds;
}

}  // namespace yieldtrace
