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

#include "yieldtrace/market.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "yieldtrace/error.hpp"

namespace yieldtrace {

void MarketParams::validate() const {
  require(capacity >= 1, "capacity must be >= 1");
  require(horizon >= 1, "horizon must be >= 1");
  for (int i = 1; i < kNumBuckets; ++i) {
    require(price_grid[i] > price_grid[i - 1], "price grid must be strictly increasing");
  }
  require(lambda0 > 0.0, "lambda0 must be positive");
  require(rho > 0.0, "rho must be positive");
  require(mu > 0.0 && mu <= 1.0, "mu must lie in (0, 1]");
  require(market_noise >= 0.0, "market noise must be non-negative");
  require(std::isfinite(alpha) && std::isfinite(eta_m) && std::isfinite(eta_lambda),
          "utility coefficients must be finite");
  require(rm.pace_gain >= 0.0 && rm.market_gain >= 0.0, "rm gains must be non-negative");
  require(rm.base_bucket >= 0 && rm.base_bucket < kNumBuckets, "rm base bucket out of range");
}

std::string MarketParams::canonical() const {
  std::ostringstream out;
  out.precision(17);
  out << "capacity=" << capacity << ";horizon=" << horizon << ";prices=";
  for (double p : price_grid) out << p << ',';
  out << ";lambda0=" << lambda0 << ";eta_lambda=" << eta_lambda << ";alpha=" << alpha
      << ";rho=" << rho << ";eta_m=" << eta_m << ";mu=" << mu
      << ";market_persistence=" << market_persistence << ";market_noise=" << market_noise
      << ";rm.base=" << rm.base_bucket << ";rm.market_gain=" << rm.market_gain
      << ";rm.pace_gain=" << rm.pace_gain << ";rm.pace_reference=" << rm.pace_reference
      << ";rm.late=" << rm.late_fraction << ";rm.tight=" << rm.tight_fraction;
  return out.str();
}

std::string MarketParams::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::vector<double> sample_market_path(const MarketParams& params, Rng& rng) {
  const double start = rng.uniform(-1.0, 1.0);
  return sample_market_path(params, start, rng);
}

std::vector<double> sample_market_path(const MarketParams& params, double start, Rng& rng) {
  std::vector<double> path(static_cast<std::size_t>(params.horizon));
  double m = std::clamp(start, -1.0, 1.0);
  for (auto& value : path) {
    value = m;
    m = std::clamp(params.market_persistence * m + params.market_noise * rng.normal(), -1.0, 1.0);
  }
  return path;
}

double arrival_rate(double market, const MarketParams& params) {
  return params.lambda0 * std::exp(params.eta_lambda * market);
}

int sample_arrivals(double market, const MarketParams& params, Rng& rng) {
  return rng.poisson(arrival_rate(market, params));
}

ChoiceProbabilities choice_probabilities(double price_a, double price_b, double market,
                                         const MarketParams& params) {
  const double mu = params.mu;
  const double va = params.alpha - params.rho * price_a + params.eta_m * market;
  const double vb = params.alpha - params.rho * price_b + params.eta_m * market;
  const double sa = va / mu;
  const double sb = vb / mu;
  const double top = std::max(sa, sb);
  const double log_sum = top + std::log(std::exp(sa - top) + std::exp(sb - top));
  const double inclusive = mu * log_sum;
  // Logistic of the inclusive value, evaluated on the non-overflowing side.
  const double p_hotel = inclusive >= 0.0 ? 1.0 / (1.0 + std::exp(-inclusive))
                                          : std::exp(inclusive) / (1.0 + std::exp(inclusive));
  const double share_a = std::exp(sa - log_sum);
  const double share_b = std::exp(sb - log_sum);
  ChoiceProbabilities p;
  p.hotel_a = p_hotel * share_a;
  p.hotel_b = p_hotel * share_b;
  p.none = 1.0 - p.hotel_a - p.hotel_b;
  return p;
}

DemandDraw sample_demand(int arrivals, const ChoiceProbabilities& probs, Rng& rng) {
  require(arrivals >= 0, "sample_demand: negative arrivals");
  const std::array<double, 3> weights{probs.hotel_a, probs.hotel_b, probs.none};
  DemandDraw d;
  for (int i = 0; i < arrivals; ++i) {
    switch (rng.categorical(weights)) {
      case 0: ++d.hotel_a; break;
      case 1: ++d.hotel_b; break;
      default: ++d.none; break;
    }
  }
  return d;
}

int rm_rule(int day, int rooms_left, double market, const MarketParams& params) {
  require(day >= 0 && day < params.horizon, "rm_rule: day out of range");
  require(rooms_left >= 0 && rooms_left <= params.capacity, "rm_rule: rooms out of range");
  const RmRuleParams& rm = params.rm;
  const double elapsed = static_cast<double>(day) / params.horizon;
  const double remaining = static_cast<double>(rooms_left) / params.capacity;
  const double ahead = (1.0 - remaining) - rm.pace_reference * elapsed;
  int bucket = rm.base_bucket;
  bucket += static_cast<int>(std::floor(rm.market_gain * std::max(0.0, market)));
  bucket += static_cast<int>(std::floor(rm.pace_gain * std::max(0.0, ahead)));
  if (elapsed > rm.late_fraction && remaining < rm.tight_fraction) bucket += 1;
  return std::clamp(bucket, 0, kNumBuckets - 1);
}

}  // namespace yieldtrace
