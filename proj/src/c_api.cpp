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

#include "yieldtrace/yieldtrace.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "yieldtrace/config.hpp"
#include "yieldtrace/error.hpp"
#include "yieldtrace/experiment.hpp"
#include "yieldtrace/trace_io.hpp"

struct yt_config {
  yieldtrace::ExperimentConfig value;
};

struct yt_simulator {
  std::unique_ptr<yieldtrace::Episode> episode;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

namespace {

using yieldtrace::ErrorCode;

thread_local std::string last_error;

template <typename Body>
yt_status guarded(Body body) {
  try {
    body();
    last_error.clear();
    return YT_OK;
  } catch (const yieldtrace::Error& e) {
    last_error = e.what();
    return static_cast<yt_status>(static_cast<int>(e.code()));
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return YT_IO_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return YT_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return YT_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return YT_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* what) {
  if (!p) yieldtrace::fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* yt_version(void) { return yieldtrace::kCodeVersion; }

const char* yt_status_name(yt_status status) {
  if (status == YT_OK) return "ok";
  return yieldtrace::error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char* yt_last_error(void) { return last_error.c_str(); }

void yt_string_free(char* s) { std::free(s); }

yt_status yt_config_new(yt_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new yt_config{};
  });
}

yt_status yt_config_load(const char* path, yt_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new yt_config{yieldtrace::load_config(path)};
  });
}

yt_status yt_config_parse(const char* text, yt_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new yt_config{yieldtrace::config_from_text(text)};
  });
}

yt_status yt_config_set(yt_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    yieldtrace::set_config_value(config->value, key, value);
  });
}

yt_status yt_config_get(const yt_config* config, const char* key, char** out) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(out, "out");
    *out = nullptr;
    *out = copy_out(yieldtrace::get_config_value(config->value, key));
  });
}

yt_status yt_config_to_string(const yt_config* config, char** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    *out = copy_out(yieldtrace::config_to_text(config->value));
  });
}

void yt_config_free(yt_config* config) { delete config; }

yt_status yt_simulator_new(const yt_config* config, uint64_t seed, uint64_t episode, yt_simulator** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    auto sim = std::make_unique<yt_simulator>();
    sim->episode = std::make_unique<yieldtrace::Episode>(
        config->value.market, yieldtrace::env_stream_seed(seed, yieldtrace::StreamDomain::kEval, episode));
    sim->seed = seed;
    sim->index = episode;
    *out = sim.release();
  });
}

yt_status yt_simulator_observe(const yt_simulator* sim, double* features, size_t capacity) {
  return guarded([&] {
    need(sim, "sim");
    need(features, "features");
    yieldtrace::require(capacity >= static_cast<size_t>(yieldtrace::kObservationWidth),
                        "feature buffer shorter than the observation width");
    const auto obs = sim->episode->observe();
    std::memcpy(features, obs.features.data(), sizeof(double) * obs.features.size());
  });
}

yt_status yt_simulator_step(yt_simulator* sim, int bucket_a, yt_step_outcome* out) {
  return guarded([&] {
    need(sim, "sim");
    const yieldtrace::StepOutcome& s = sim->episode->step(bucket_a);
    if (out) {
      *out = yt_step_outcome{s.day,     s.bucket_a, s.bucket_b, s.price_a,     s.price_b,
                             s.arrivals, s.demand_a, s.demand_b, s.demand_none, s.sales_a,
                             s.sales_b,  s.market,   s.rooms_a,  s.rooms_b};
    }
  });
}

int yt_simulator_done(const yt_simulator* sim) {
  if (!sim) return -1;
  return sim->episode->done() ? 1 : 0;
}

yt_status yt_simulator_trace_json(const yt_simulator* sim, char** out) {
  return guarded([&] {
    need(sim, "sim");
    need(out, "out");
    *out = nullptr;
    *out = copy_out(yieldtrace::trace_to_json_line(sim->episode->finish(sim->seed, sim->index)));
  });
}

void yt_simulator_free(yt_simulator* sim) { delete sim; }

yt_status yt_rm_rule(const yt_config* config, int day, int rooms_left, double market, int* out_bucket) {
  return guarded([&] {
    need(config, "config");
    need(out_bucket, "out_bucket");
    *out_bucket = yieldtrace::rm_rule(day, rooms_left, market, config->value.market);
  });
}

yt_status yt_choice_probabilities(const yt_config* config, double price_a, double price_b, double market,
                                  double out[3]) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    const auto p = yieldtrace::choice_probabilities(price_a, price_b, market, config->value.market);
    out[0] = p.hotel_a;
    out[1] = p.hotel_b;
    out[2] = p.none;
  });
}

yt_status yt_calibrate(const yt_config* config, char** out_json) {
  return guarded([&] {
    need(config, "config");
    need(out_json, "out_json");
    const auto& c = config->value;
    const auto result = yieldtrace::calibrate_environment(
        c.market, c.calibration,
        yieldtrace::derive_stream({c.root_seed, static_cast<std::uint64_t>(yieldtrace::StreamDomain::kCalibration)}));
    *out_json = copy_out(yieldtrace::calibration_result_to_json(result));
  });
}

yt_status yt_train(const yt_config* config, char** out_json) {
  return guarded([&] {
    need(config, "config");
    need(out_json, "out_json");
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& m : yieldtrace::run_sweep(config->value)) {
      paths.push_back((m.run_dir / yieldtrace::kManifestFile).string());
    }
    *out_json = copy_out(paths.dump());
  });
}

yt_status yt_eval(const char* manifest_path, char** out_json) {
  return guarded([&] {
    need(manifest_path, "manifest_path");
    need(out_json, "out_json");
    *out_json = copy_out(yieldtrace::manifest_to_json(yieldtrace::evaluate_run(manifest_path)));
  });
}

yt_status yt_diagnose(const char* manifest_path, const char* kind, char** out_json) {
  return guarded([&] {
    need(manifest_path, "manifest_path");
    need(kind, "kind");
    need(out_json, "out_json");
    const auto manifest = yieldtrace::load_manifest(manifest_path);
    if (!manifest.complete()) yieldtrace::fail(ErrorCode::kState, "run did not complete: " + manifest.error);
    const std::string k = kind;
    if (k == "ambiguity") {
      *out_json = copy_out(yieldtrace::ambiguity_to_json(yieldtrace::diagnose_ambiguity(manifest)));
    } else if (k == "oracle") {
      *out_json = copy_out(yieldtrace::oracle_to_json(yieldtrace::diagnose_oracle(manifest)));
    } else if (k == "calibration") {
      *out_json = copy_out(yieldtrace::calibration_to_json(yieldtrace::diagnose_calibration(manifest)));
    } else {
      yieldtrace::fail(ErrorCode::kInvalidArgument, "unknown diagnostic '" + k + "'");
    }
  });
}

yt_status yt_report(const char* const* manifest_paths, size_t count, const char* out_dir, char** out_path) {
  return guarded([&] {
    need(out_dir, "out_dir");
    need(out_path, "out_path");
    if (count > 0) need(manifest_paths, "manifest_paths");
    std::vector<yieldtrace::RunManifest> manifests;
    for (size_t i = 0; i < count; ++i) {
      need(manifest_paths[i], "manifest path");
      manifests.push_back(yieldtrace::load_manifest(manifest_paths[i]));
    }
    *out_path = copy_out(yieldtrace::render_report(manifests, out_dir).markdown.string());
  });
}

yt_status yt_report_discover(const char* root, const char* out_dir, char** out_path) {
  return guarded([&] {
    need(root, "root");
    need(out_dir, "out_dir");
    need(out_path, "out_path");
    *out_path = copy_out(yieldtrace::render_report(yieldtrace::discover_manifests(root), out_dir).markdown.string());
  });
}

}  // extern "C"
