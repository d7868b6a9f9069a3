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

#ifndef RECIPEFUZZ_MICROBENCH_H_
#define RECIPEFUZZ_MICROBENCH_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "recipefuzz/mutator.h"

namespace recipefuzz {

enum class BenchConfig : uint8_t { kVanilla, kFpEmpty, kFpActive };

std::string_view BenchConfigName(BenchConfig config);
std::optional<BenchConfig> BenchConfigFromName(std::string_view name);

struct BenchReport {
  BenchConfig config = BenchConfig::kVanilla;
  uint64_t calls = 0;
  uint64_t elapsed_ns = 0;
  double calls_per_sec = 0.0;
  double ns_per_call = 0.0;
};

// Deterministic corpus of small JSON documents.
std::vector<SeedEntry> GenerateJsonCorpus(size_t count, uint64_t seed);

// Times `calls` mutator calls through the configuration's call surface.
// Only the call loop is timed. Throws ZeroCalls, and ConfigInvalid on an
// empty corpus.
BenchReport BenchDispatch(BenchConfig config, uint64_t calls, CorpusView corpus,
                          uint64_t seed);

struct ProtocolResult {
  std::vector<BenchReport> runs;  // reps per configuration, config-major
  double median_ns_vanilla = 0.0;
  double median_ns_fp_empty = 0.0;
  double median_ns_fp_active = 0.0;
  // fp-empty over vanilla, per call cost. The sanity gate is <= 5.
  double slowdown_fp_empty = 0.0;
  double slowdown_fp_active = 0.0;
  // Throughput ratio (fp-empty calls/s over vanilla calls/s), informative.
  double throughput_ratio_fp_empty = 0.0;
  bool gate_passed = false;
};

inline constexpr double kSlowdownGate = 5.0;

// Runs all three configurations `reps` times each, interleaved so drift in
// machine state hits every configuration alike.
ProtocolResult RunBenchProtocol(uint64_t calls, int reps, CorpusView corpus,
                                uint64_t seed);

// Flat key=value lines.
std::string FormatBenchReport(const BenchReport& report);
std::string FormatProtocol(const ProtocolResult& result);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_MICROBENCH_H_
