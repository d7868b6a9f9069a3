// Copyright 2026 The recipefuzz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RECIPEFUZZ_ARTIFACTS_H_
#define RECIPEFUZZ_ARTIFACTS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace recipefuzz {

// The per-run key set of a fuzzer_stats file. Times are seconds since the
// campaign started.
struct FuzzerStats {
  double run_time = 0.0;
  uint64_t execs_done = 0;
  double execs_per_sec = 0.0;
  uint64_t cycles_done = 0;
  uint64_t corpus_count = 0;
  uint64_t edges_found = 0;
  double bitmap_cvg = 0.0;  // percent
  double last_find = 0.0;
  double stability = 100.0;  // percent
};

// "key : value" lines, keys padded to a common width.
std::string FormatFuzzerStats(const FuzzerStats& stats);
// Parses "key : value" lines; tolerant of padding and extra keys.
std::map<std::string, std::string> ParseKeyValueLines(std::string_view text);
// Throws IoError when a required key is missing or not numeric.
FuzzerStats FuzzerStatsFromText(std::string_view text);

struct CoveragePoint {
  double t_sec = 0.0;
  uint64_t edges_found = 0;
};

std::string FormatCoverageCsv(const std::vector<CoveragePoint>& series);
// Expects the "t_sec,edges_found" header. Throws IoError on bad rows.
std::vector<CoveragePoint> ParseCoverageCsv(std::string_view text);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view content);

inline constexpr std::string_view kFuzzerStatsFile = "fuzzer_stats";
inline constexpr std::string_view kCoverageFile = "coverage.csv";
inline constexpr std::string_view kEventsFile = "events.jsonl";
inline constexpr std::string_view kMetadataFile = "run_metadata.json";

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_ARTIFACTS_H_
