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

#ifndef RECIPEFUZZ_MICRO_CAMPAIGN_H_
#define RECIPEFUZZ_MICRO_CAMPAIGN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recipefuzz/audit.h"
#include "recipefuzz/coverage_loop.h"
#include "recipefuzz/recipe.h"
#include "recipefuzz/sim_target.h"

namespace recipefuzz {

enum class Intervention : uint8_t { kDefault, kDictionary, kSeedFocus, kPerSeedRecipe };
inline constexpr std::array<Intervention, 4> kAllInterventions = {
    Intervention::kDefault, Intervention::kDictionary, Intervention::kSeedFocus,
    Intervention::kPerSeedRecipe};

std::string_view InterventionName(Intervention i);
std::optional<Intervention> InterventionFromName(std::string_view name);

struct Candidate {
  MutationRecipe recipe;
  Intervention intervention = Intervention::kDefault;
  std::string candidate_id;
};

struct RewardWeights {
  double alpha = 1.0;     // per new edge
  double beta = 0.5;      // per new path, only without a coverage map
  double gamma = 10.0;    // per new unique crash
  double delta_h = 1e-3;  // per hit
  double delta_m = 5e-4;  // per miss
};

struct MicroResult {
  std::string candidate_id;
  uint64_t delta_edges = 0;
  uint64_t delta_paths = 0;
  uint64_t delta_crashes = 0;
  // Reward inputs: executions that produced new coverage from a recipe hit
  // (h) and from the havoc fallback after a miss (m).
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t execs = 0;
  double reward = 0.0;
  bool bitmap_available = true;
  // Per-call recipe accounting, kept for the audit trail.
  uint64_t calls_hit = 0;
  uint64_t calls_miss = 0;
  uint64_t baseline_edges = 0;
  double elapsed_sec = 0.0;
};

// alpha*edges (or beta*paths without a coverage map) + gamma*crashes +
// delta_h*h - delta_m*m, evaluated exactly and rounded once.
double ComputeReward(uint64_t delta_edges, uint64_t delta_paths, uint64_t delta_crashes,
                     uint64_t hits, uint64_t misses, const RewardWeights& w,
                     bool bitmap_available);

struct Snapshot {
  std::filesystem::path dir;
  // Entry file name -> sha256 of its content, in name order.
  std::vector<std::pair<std::string, std::string>> manifest;
};

inline constexpr std::string_view kManifestName = "MANIFEST";

// Copies every regular file of `queue_dir` into `dest_dir` (created) and
// writes a manifest. Throws EmptyQueue or IoError.
Snapshot SnapshotCorpus(const std::filesystem::path& queue_dir,
                        const std::filesystem::path& dest_dir);

// Reads a snapshot back, checking each entry against the manifest.
Snapshot OpenSnapshot(const std::filesystem::path& dir);
std::vector<SeedEntry> LoadSnapshot(const Snapshot& snapshot);

struct MicroBudget {
  double seconds = 20.0;
  std::optional<uint64_t> execs;  // when set, overrides seconds
};

// Replays the snapshot into a fresh coverage map to get the baseline, then
// fuzzes with the candidate installed until the budget is spent. Throws
// BudgetZero, EmptyQueue for an empty snapshot, ExecutorFailure.
MicroResult EvaluateCandidate(const Candidate& candidate, const std::vector<SeedEntry>& snapshot,
                              const MicroBudget& budget, const Executor& executor,
                              const RewardWeights& weights, uint64_t seed,
                              const ClockConfig& clock = {}, size_t max_size = 4096);

enum class PromotionStatus : uint8_t { kPromoted, kNoSignificance };

struct PromotionDecision {
  std::optional<size_t> winner;  // index into the results
  std::string winner_id;
  double winner_reward = 0.0;
  PromotionStatus status = PromotionStatus::kNoSignificance;
};

// Argmax by reward, ties to the earliest. Promotes only when the top reward
// is strictly positive. Appends winner_decided and then recipe_promoted or
// promotion_skipped to `log` when given. Throws EmptyResults.
PromotionDecision DecideWinner(const std::vector<MicroResult>& results, EventLog* log = nullptr,
                               double t = 0.0);

AuditEvent MicroResultEvent(const MicroResult& result, const Candidate& candidate, double t);

// Recovers a MicroResult from its event payload and recomputes the reward.
MicroResult MicroResultFromEvent(const AuditEvent& event, const RewardWeights& weights);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_MICRO_CAMPAIGN_H_
