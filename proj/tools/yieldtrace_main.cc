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

// Command-line front end. Talks to the library only through its C API.
//
//   yieldtrace calibrate [--config FILE] [--set section.key=value ...]
//   yieldtrace train --algo TAG [--config FILE] [--seeds LIST] [--output DIR]
//   yieldtrace eval --manifest FILE
//   yieldtrace diagnose ambiguity|oracle|calibration --manifest FILE
//   yieldtrace report --out DIR [--manifest FILE ...] [--root DIR]
//
// Results go to stdout as JSON. Failures print {"error": {...}} to stderr and
// exit with the status code. YIELDTRACE_OUTPUT_ROOT, when set, replaces the
// configured output directory.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "yieldtrace/yieldtrace.h"

namespace {

constexpr const char* kOutputRootVar = "YIELDTRACE_OUTPUT_ROOT";

struct Failure {
  yt_status status;
  std::string message;
};

void check(yt_status status) {
  if (status != YT_OK) throw Failure{status, yt_last_error()};
}

// Owns a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  yt_string_free(s);
  return out;
}

int report_failure(yt_status status, const std::string& message) {
  const nlohmann::json j = {
      {"error", {{"code", static_cast<int>(status)}, {"name", yt_status_name(status)}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
  return static_cast<int>(status);
}

class Config {
 public:
  explicit Config(const std::string& path) {
    check(path.empty() ? yt_config_new(&handle_) : yt_config_load(path.c_str(), &handle_));
  }
  ~Config() { yt_config_free(handle_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;

  void set(const std::string& key, const std::string& value) {
    check(yt_config_set(handle_, key.c_str(), value.c_str()));
  }
  void apply(const std::vector<std::string>& assignments) {
    for (const std::string& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw Failure{YT_INVALID_ARGUMENT, "--set expects section.key=value: " + a};
      set(a.substr(0, eq), a.substr(eq + 1));
    }
  }
  const yt_config* get() const { return handle_; }

 private:
  yt_config* handle_ = nullptr;
};

std::string output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv(kOutputRootVar);
  return env && *env ? env : "";
}

void print_json(const std::string& text) { std::cout << nlohmann::json::parse(text).dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-hotel pricing simulator, trainers and trace diagnostics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(yt_version()));

  std::string config_path;
  std::vector<std::string> assignments;

  auto* calibrate = app.add_subcommand("calibrate", "Pick market parameters from RM-vs-RM runs");
  calibrate->add_option("--config", config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
  calibrate->add_option("--set", assignments, "Override section.key=value");

  std::string algo, seeds, output;
  auto* train = app.add_subcommand("train", "Train, evaluate and persist every seed");
  train->add_option("--algo", algo, "dqn | dqn-cmdp | dqn-forecast | copy-argmax | copy-match | trace-prior | action-bonus")
      ->required();
  train->add_option("--config", config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
  train->add_option("--seeds", seeds, "Seed indices, e.g. 0,1,2 or 0-4");
  train->add_option("--output", output, "Output directory (default: $YIELDTRACE_OUTPUT_ROOT or the config)");
  train->add_option("--set", assignments, "Override section.key=value");

  std::string manifest;
  auto* eval = app.add_subcommand("eval", "Re-run evaluation from stored checkpoints");
  eval->add_option("--manifest", manifest, "Run manifest or run directory")->required();

  std::string kind;
  auto* diagnose = app.add_subcommand("diagnose", "Trace diagnostics over a finished run");
  diagnose->add_option("kind", kind, "ambiguity | oracle | calibration")
      ->required()
      ->check(CLI::IsMember({"ambiguity", "oracle", "calibration"}));
  diagnose->add_option("--manifest", manifest, "Run manifest or run directory")->required();

  std::string out_dir, root;
  std::vector<std::string> manifests;
  auto* report = app.add_subcommand("report", "Render markdown tables and plot CSVs");
  report->add_option("--out", out_dir, "Report directory")->required();
  report->add_option("--manifest", manifests, "Manifests to include (default: discover under --root)");
  report->add_option("--root", root, "Directory searched for manifests (default: $YIELDTRACE_OUTPUT_ROOT or runs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_failure(YT_INVALID_ARGUMENT, e.what());
  }

  try {
    if (*calibrate) {
      Config config(config_path);
      config.apply(assignments);
      char* out = nullptr;
      check(yt_calibrate(config.get(), &out));
      print_json(take(out));
    } else if (*train) {
      Config config(config_path);
      config.set("train.algorithm", algo);
      if (!seeds.empty()) config.set("experiment.seeds", seeds);
      const std::string dir = output_root(output);
      if (!dir.empty()) config.set("experiment.output_dir", dir);
      config.apply(assignments);
      char* out = nullptr;
      check(yt_train(config.get(), &out));
      print_json(take(out));
    } else if (*eval) {
      char* out = nullptr;
      check(yt_eval(manifest.c_str(), &out));
      print_json(take(out));
    } else if (*diagnose) {
      char* out = nullptr;
      check(yt_diagnose(manifest.c_str(), kind.c_str(), &out));
      print_json(take(out));
    } else if (*report) {
      char* out = nullptr;
      if (manifests.empty()) {
        std::string dir = root.empty() ? output_root("") : root;
        if (dir.empty()) dir = "runs";
        check(yt_report_discover(dir.c_str(), out_dir.c_str(), &out));
      } else {
        std::vector<const char*> paths;
        for (const std::string& m : manifests) paths.push_back(m.c_str());
        check(yt_report(paths.data(), paths.size(), out_dir.c_str(), &out));
      }
      std::cout << nlohmann::json{{"report", take(out)}}.dump(2) << "\n";
    }
  } catch (const Failure& f) {
    return report_failure(f.status, f.message);
  }
  return 0;
}
