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

// C interface of the yieldtrace library.
//
// Objects are opaque handles created by *_new/*_load and released by the
// matching *_free. Every fallible call returns a yt_status; on failure the
// message is available from yt_last_error() on the same thread until the
// next call, and pointer outputs are set to NULL. Strings returned through
// char** are heap allocated and must be released with yt_string_free().

#ifndef YIELDTRACE_YIELDTRACE_H_
#define YIELDTRACE_YIELDTRACE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(YT_BUILDING_LIBRARY)
#define YT_API __declspec(dllexport)
#else
#define YT_API __declspec(dllimport)
#endif
#else
#define YT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum yt_status {
  YT_OK = 0,
  YT_INVALID_ARGUMENT = 1,
  YT_INVALID_STATE = 2,
  YT_IO_ERROR = 3,
  YT_PARSE_ERROR = 4,
  YT_NUMERIC_ERROR = 5,
  YT_CALIBRATION_ERROR = 6,
  YT_INTERNAL_ERROR = 99
} yt_status;

#define YT_NUM_BUCKETS 7
#define YT_OBSERVATION_WIDTH 7

typedef struct yt_config yt_config;
typedef struct yt_simulator yt_simulator;

// One simulated day. Inventories are at the start of the day.
typedef struct yt_step_outcome {
  int day;
  int bucket_a;
  int bucket_b;
  double price_a;
  double price_b;
  int arrivals;
  int demand_a;
  int demand_b;
  int demand_none;
  int sales_a;
  int sales_b;
  double market;
  int rooms_a;
  int rooms_b;
} yt_step_outcome;

YT_API const char* yt_version(void);
YT_API const char* yt_status_name(yt_status status);
// Empty string when the last call on this thread succeeded.
YT_API const char* yt_last_error(void);
YT_API void yt_string_free(char* s);

// Experiment configuration. Keys are "section.key" as in the INI file.
YT_API yt_status yt_config_new(yt_config** out);
YT_API yt_status yt_config_load(const char* path, yt_config** out);
YT_API yt_status yt_config_parse(const char* text, yt_config** out);
YT_API yt_status yt_config_set(yt_config* config, const char* key, const char* value);
YT_API yt_status yt_config_get(const yt_config* config, const char* key, char** out);
YT_API yt_status yt_config_to_string(const yt_config* config, char** out);
YT_API void yt_config_free(yt_config* config);

// One episode under the config's market parameters (no calibration).
// Hotel B follows its RM rule; the caller prices Hotel A.
YT_API yt_status yt_simulator_new(const yt_config* config, uint64_t seed, uint64_t episode, yt_simulator** out);
// Writes YT_OBSERVATION_WIDTH features; `capacity` is the buffer length.
YT_API yt_status yt_simulator_observe(const yt_simulator* sim, double* features, size_t capacity);
// YT_INVALID_STATE once the horizon is reached. `out` may be NULL.
YT_API yt_status yt_simulator_step(yt_simulator* sim, int bucket_a, yt_step_outcome* out);
// 1 when finished, 0 when not, -1 for a NULL handle.
YT_API int yt_simulator_done(const yt_simulator* sim);
// The episode so far as one JSON line.
YT_API yt_status yt_simulator_trace_json(const yt_simulator* sim, char** out);
YT_API void yt_simulator_free(yt_simulator* sim);

YT_API yt_status yt_rm_rule(const yt_config* config, int day, int rooms_left, double market, int* out_bucket);
// out = {P(A), P(B), P(no purchase)}.
YT_API yt_status yt_choice_probabilities(const yt_config* config, double price_a, double price_b, double market,
                                         double out[3]);

// Calibration over the config's alpha grid; JSON result.
YT_API yt_status yt_calibrate(const yt_config* config, char** out_json);
// Trains and evaluates every seed (one run per beta of a sweep). Returns a
// JSON array of manifest paths.
YT_API yt_status yt_train(const yt_config* config, char** out_json);
// Re-evaluates a finished run from its checkpoints; returns the manifest JSON.
YT_API yt_status yt_eval(const char* manifest_path, char** out_json);
// kind: "ambiguity", "oracle" or "calibration". Returns the report JSON.
YT_API yt_status yt_diagnose(const char* manifest_path, const char* kind, char** out_json);
// Renders a report over the given manifests (count may be 0). Returns the
// markdown path.
YT_API yt_status yt_report(const char* const* manifest_paths, size_t count, const char* out_dir, char** out_path);
// Same, over every manifest found below `root`.
YT_API yt_status yt_report_discover(const char* root, const char* out_dir, char** out_path);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // YIELDTRACE_YIELDTRACE_H_
