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

#include "yieldtrace/trace_io.hpp"

#include <fstream>

#include "json.hpp"
#include "yieldtrace/error.hpp"

namespace yieldtrace {

using nlohmann::json;

std::string trace_to_json_line(const EpisodeTrace& trace) {
  json j;
  j["seed"] = trace.seed;
  j["episode"] = trace.episode;
  j["fingerprint"] = trace.params_fingerprint;
  j["final_q_A"] = trace.final_rooms_a;
  j["final_q_B"] = trace.final_rooms_b;
  auto column = [&](const char* key, auto field) {
    json arr = json::array();
    for (const StepOutcome& r : trace.rows) arr.push_back(r.*field);
    j[key] = std::move(arr);
  };
  column("a_A", &StepOutcome::bucket_a);
  column("a_B", &StepOutcome::bucket_b);
  column("p_A", &StepOutcome::price_a);
  column("p_B", &StepOutcome::price_b);
  column("M", &StepOutcome::arrivals);
  column("D_A", &StepOutcome::demand_a);
  column("D_B", &StepOutcome::demand_b);
  column("D_0", &StepOutcome::demand_none);
  column("y_A", &StepOutcome::sales_a);
  column("y_B", &StepOutcome::sales_b);
  column("m", &StepOutcome::market);
  column("q_A", &StepOutcome::rooms_a);
  column("q_B", &StepOutcome::rooms_b);
  return j.dump();
}

EpisodeTrace trace_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("trace line is not valid JSON: ") + e.what());
  }
  try {
    EpisodeTrace trace;
    trace.seed = j.at("seed").get<std::uint64_t>();
    trace.episode = j.at("episode").get<std::uint64_t>();
    trace.params_fingerprint = j.at("fingerprint").get<std::string>();
    trace.final_rooms_a = j.at("final_q_A").get<int>();
    trace.final_rooms_b = j.at("final_q_B").get<int>();
    const std::size_t days = j.at("a_A").size();
    trace.rows.resize(days);
    auto column = [&](const char* key, auto field) {
      const json& arr = j.at(key);
      if (arr.size() != days) fail(ErrorCode::kParse, std::string("trace column length mismatch: ") + key);
      for (std::size_t t = 0; t < days; ++t) {
        using T = std::remove_reference_t<decltype(trace.rows[t].*field)>;
        trace.rows[t].*field = arr[t].get<T>();
      }
    };
    column("a_A", &StepOutcome::bucket_a);
    column("a_B", &StepOutcome::bucket_b);
    column("p_A", &StepOutcome::price_a);
    column("p_B", &StepOutcome::price_b);
    column("M", &StepOutcome::arrivals);
    column("D_A", &StepOutcome::demand_a);
    column("D_B", &StepOutcome::demand_b);
    column("D_0", &StepOutcome::demand_none);
    column("y_A", &StepOutcome::sales_a);
    column("y_B", &StepOutcome::sales_b);
    column("m", &StepOutcome::market);
    column("q_A", &StepOutcome::rooms_a);
    column("q_B", &StepOutcome::rooms_b);
    for (std::size_t t = 0; t < days; ++t) trace.rows[t].day = static_cast<int>(t);
    return trace;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed trace record: ") + e.what());
  }
}

void write_traces_jsonl(const std::filesystem::path& path, std::span<const EpisodeTrace> traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  for (const EpisodeTrace& t : traces) out << trace_to_json_line(t) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<EpisodeTrace> read_traces_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::vector<EpisodeTrace> traces;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    traces.push_back(trace_from_json_line(line));
  }
  return traces;
}

}  // namespace yieldtrace
