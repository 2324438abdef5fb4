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

#ifndef YIELDTRACE_TRACE_IO_HPP_
#define YIELDTRACE_TRACE_IO_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "yieldtrace/simulator.hpp"

namespace yieldtrace {

// One EpisodeTrace per JSON line. Keys:
//   seed, episode, fingerprint, final_q_A, final_q_B, and per-day arrays
//   a_A, a_B, p_A, p_B, M, D_A, D_B, D_0, y_A, y_B, m, q_A, q_B
// where q_A/q_B are the inventories at the start of each day.
std::string trace_to_json_line(const EpisodeTrace& trace);
EpisodeTrace trace_from_json_line(const std::string& line);

void write_traces_jsonl(const std::filesystem::path& path, std::span<const EpisodeTrace> traces);
std::vector<EpisodeTrace> read_traces_jsonl(const std::filesystem::path& path);

}  // namespace yieldtrace

#endif  // YIELDTRACE_TRACE_IO_HPP_
