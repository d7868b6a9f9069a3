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

#ifndef RECIPEFUZZ_CONTROLLER_H_
#define RECIPEFUZZ_CONTROLLER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recipefuzz/artifacts.h"
#include "recipefuzz/audit.h"
#include "recipefuzz/coverage_loop.h"
#include "recipefuzz/micro_campaign.h"
#include "recipefuzz/plateau.h"
#include "recipefuzz/providers.h"
#include "recipefuzz/sim_target.h"

namespace recipefuzz {

enum class Ablation : uint8_t {
  kBaseline,          // havoc only, no detector
  kRuleOnly,          // recipe mutator, rule proposals only
  kNoMutator,         // havoc main loop; the gate runs but winners are not installed
  kControllerOnly,    // detector and snapshots, no proposals, no recipe mutator
  kNoStaticAnalysis,  // full, with static context marked unavailable
  kFull,
};

std::string_view AblationName(Ablation a);
std::optional<Ablation> AblationFromName(std::string_view name);

struct CampaignConfig {
  std::string target = "json";
  // Overrides `target` when set (external command executors, tests).
  std::shared_ptr<const Executor> executor;
  std::vector<Bytes> seeds;  // empty: the target's default seeds
  Ablation ablation = Ablation::kFull;
  double budget_sec = 14400.0;
  std::optional<uint64_t> budget_execs;
  DetectorConfig detector;
  double poll_sec = 1.0;
  MicroBudget micro;
  size_t k_cand = 4;
  RewardWeights weights;
  // Consulted before the built-in static-context and rule providers.
  std::vector<std::shared_ptr<ProposalProvider>> providers;
  // ELF whose .rodata feeds the static context; when empty the executor's
  // literal list is used.
  std::string binary_path;
  uint64_t seed = 1;
  std::filesystem::path output_dir;
  ClockConfig clock;
  size_t max_size = 4096;
  std::string run_id;      // default: output directory name
  std::string mode_label;  // default: ablation name
};

struct RunArtifacts {
  FuzzerStats stats;
  std::vector<CoveragePoint> coverage;
  std::vector<AuditEvent> events;
  std::string active_recipe_id;  // empty when the main loop runs havoc
  int plateau_cycles = 0;
  int promotions = 0;
  int promotions_installed = 0;
};

std::string ConfigDigest(const CampaignConfig& config);

// Runs the main loop to budget, handling each plateau with
// snapshot -> propose -> micro-campaign gate -> promote or skip, and writes
// queue/, plateau_NN/, main_recipes/, fuzzer_stats, coverage.csv,
// events.jsonl, run_metadata.json and report.md under output_dir.
RunArtifacts RunCampaign(const CampaignConfig& config);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_CONTROLLER_H_
