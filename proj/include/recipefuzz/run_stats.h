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

#ifndef RECIPEFUZZ_RUN_STATS_H_
#define RECIPEFUZZ_RUN_STATS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recipefuzz/artifacts.h"

namespace recipefuzz {

struct MannWhitneyResult {
  double u = 0.0;  // min(U_x, U_y), ties credited one half
  double p_two_sided = 1.0;
  bool exact = false;
};

// Exact p (full enumeration of rank arrangements, ties kept as midranks)
// when min(|x|, |y|) <= kExactLimit; otherwise the normal approximation
// with tie and continuity corrections. Throws EmptySample.
inline constexpr size_t kExactLimit = 8;
MannWhitneyResult MannWhitney(std::span<const double> x, std::span<const double> y);

// P(X > Y) + 0.5 P(X = Y). Throws EmptySample.
double VarghaDelaneyA12(std::span<const double> x, std::span<const double> y);

double Median(std::span<const double> x);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the median. Resample r draws from its own stream
// seeded by (seed, r), so the parallel and serial versions agree exactly.
ConfidenceInterval BootstrapMedianCi(std::span<const double> x, uint64_t resamples,
                                     uint64_t seed, double level = 0.95);
ConfidenceInterval BootstrapMedianCiSerial(std::span<const double> x, uint64_t resamples,
                                           uint64_t seed, double level = 0.95);

// Two one-sided Welch tests on log values against +-log(1 + band); returns
// the larger one-sided p. Throws DegenerateVariance, ValidationError for
// non-positive values.
double TostEquivalence(std::span<const double> x, std::span<const double> y, double band);

// First t with edges_found >= n. Throws NonMonotonicSeries when t decreases.
std::optional<double> TimeToNEdges(const std::vector<CoveragePoint>& series, uint64_t n);

struct RunRow {
  std::string mode;
  std::string run_id;
  double run_time = 0.0;
  double last_find = 0.0;
  uint64_t execs_done = 0;
  double execs_per_sec = 0.0;
  uint64_t cycles_done = 0;
  uint64_t corpus_count = 0;
  uint64_t edges_found = 0;
  double plateau_sec = 0.0;
  size_t coverage_rows = 0;
  std::optional<double> time_to_n;
  bool gates_passed = false;
};

inline constexpr double kGateRunTime = 14000.0;
inline constexpr uint64_t kGateExecs = 1000000;
inline constexpr size_t kGateCoverageRows = 200;

// Reads one run directory. Throws MissingArtifact.
RunRow ParseRunDir(const std::filesystem::path& dir, std::optional<uint64_t> time_to_n = {});

// Every run directory below root, sorted by (mode, run_id). The parallel
// version parses runs concurrently.
std::vector<std::filesystem::path> FindRunDirs(const std::filesystem::path& root);
std::vector<RunRow> ParseRuns(const std::filesystem::path& root,
                              std::optional<uint64_t> time_to_n = {});
std::vector<RunRow> ParseRunsSerial(const std::filesystem::path& root,
                                    std::optional<uint64_t> time_to_n = {});

struct ModeSummary {
  std::string mode;
  size_t runs = 0;
  size_t gates_passed = 0;
  double median_plateau = 0.0;
  ConfidenceInterval plateau_ci;
  double median_last_find = 0.0;
  double median_edges = 0.0;
  // Against the baseline mode (absent for the baseline itself).
  std::optional<MannWhitneyResult> vs_baseline;
  std::optional<double> a12_vs_baseline;  // A12(baseline, mode)
  // Time to N edges over the runs that reached N.
  size_t reached_n = 0;
  std::optional<double> median_time_to_n;
};

struct StatsOptions {
  std::string baseline_mode = "baseline";
  uint64_t resamples = 10000;
  uint64_t seed = 1;
  std::optional<uint64_t> time_to_n;
};

struct Aggregate {
  std::vector<RunRow> rows;
  std::vector<ModeSummary> modes;  // baseline first, then by name
  StatsOptions options;
};

Aggregate AggregateRuns(const std::filesystem::path& root, const StatsOptions& options);
Aggregate Summarize(std::vector<RunRow> rows, const StatsOptions& options);

std::string RunsCsv(const Aggregate& aggregate);
std::string SummaryCsv(const Aggregate& aggregate);
std::string TextReport(const Aggregate& aggregate);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_RUN_STATS_H_
