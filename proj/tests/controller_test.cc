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


#include <gtest/gtest.h>

#include <atomic>

#include "recipefuzz/artifacts.h"
#include "recipefuzz/controller.h"
#include "recipefuzz/errors.h"
#include "test_util.h"

namespace recipefuzz {
namespace {

namespace fs = std::filesystem;

CampaignConfig Config(const std::string& target, Ablation a, double budget, const fs::path& out) {
  CampaignConfig c;
  c.target = target;
  c.ablation = a;
  c.budget_sec = budget;
  c.output_dir = out;
  return c;
}

std::vector<std::string> Messages(const std::vector<AuditEvent>& events, EventKind kind) {
  std::vector<std::string> out;
  for (const auto& e : events) {
    if (e.kind == kind) out.push_back(EventMessage(e));
  }
  return out;
}

TEST(Ablation, Names) {
  for (Ablation a : {Ablation::kBaseline, Ablation::kRuleOnly, Ablation::kNoMutator,
                     Ablation::kControllerOnly, Ablation::kNoStaticAnalysis, Ablation::kFull}) {
    EXPECT_EQ(AblationFromName(AblationName(a)), a);
  }
  EXPECT_FALSE(AblationFromName("everything"));
}

TEST(RunCampaign, SaturatedTargetSkipsPromotion) {
  testing::TempDir dir;
  const auto art = RunCampaign(Config("saturated", Ablation::kFull, 60, dir / "run"));
  EXPECT_EQ(art.plateau_cycles, 1);
  EXPECT_EQ(art.promotions, 0);
  EXPECT_EQ(art.active_recipe_id, kDefaultRecipeId);
  EXPECT_EQ(Messages(art.events, EventKind::kMicroResult).size(), 4u);
  EXPECT_EQ(Messages(art.events, EventKind::kWinnerDecided),
            std::vector<std::string>{"winner_decided:status=no_significance,winner_reward=0.0"});
  EXPECT_EQ(Messages(art.events, EventKind::kPromotionSkipped),
            std::vector<std::string>{"promotion_skipped:reason=no_successful_micro_campaign"});
  EXPECT_TRUE(CheckEventGrammar(art.events).empty());
  EXPECT_EQ(art.stats.edges_found, 3u);
  // The gate's cost lands on the main clock.
  EXPECT_GT(art.stats.run_time, 60.0);
}

TEST(RunCampaign, ZeroBudgetCompletesCleanly) {
  testing::TempDir dir;
  const auto art = RunCampaign(Config("json", Ablation::kFull, 0, dir / "run"));
  EXPECT_EQ(art.plateau_cycles, 0);
  ASSERT_EQ(art.events.size(), 1u);
  EXPECT_EQ(art.events[0].kind, EventKind::kRunCompleted);
  EXPECT_EQ(art.stats.run_time, 0.0);
  EXPECT_TRUE(fs::exists(dir / "run" / kFuzzerStatsFile));
}

TEST(RunCampaign, InvalidConfig) {
  testing::TempDir dir;
  auto c = Config("json", Ablation::kFull, 10, dir / "run");
  c.k_cand = 0;
  EXPECT_THROW(RunCampaign(c), ConfigInvalid);
  c = Config("nonsense", Ablation::kFull, 10, dir / "run");
  EXPECT_THROW(RunCampaign(c), ConfigInvalid);
  c = Config("json", Ablation::kFull, 10, {});
  EXPECT_THROW(RunCampaign(c), ConfigInvalid);
}

TEST(RunCampaign, StaircasePromotesGateDictionary) {
  testing::TempDir dir;
  const auto full = RunCampaign(Config("staircase", Ablation::kFull, 200, dir / "full"));
  const auto ctrl = RunCampaign(Config("staircase", Ablation::kRuleOnly, 200, dir / "ctrl"));
  ASSERT_GE(full.promotions, 1);
  EXPECT_EQ(full.active_recipe_id, "static_dictionary");
  EXPECT_EQ(ctrl.promotions, 0);
  EXPECT_GT(full.stats.edges_found, ctrl.stats.edges_found);
  EXPECT_TRUE(CheckEventGrammar(full.events).empty());
  EXPECT_TRUE(fs::exists(dir / "full" / "main_recipes" / "static_dictionary.json"));
}

TEST(RunCampaign, NoMutatorLogsButDoesNotInstall) {
  testing::TempDir dir;
  const auto art = RunCampaign(Config("staircase", Ablation::kNoMutator, 200, dir / "run"));
  EXPECT_GE(art.promotions, 1);
  EXPECT_EQ(art.promotions_installed, 0);
  EXPECT_TRUE(art.active_recipe_id.empty());
}

TEST(RunCampaign, ControllerOnlyNeverProposes) {
  testing::TempDir dir;
  const auto art = RunCampaign(Config("staircase", Ablation::kControllerOnly, 100, dir / "run"));
  EXPECT_EQ(art.plateau_cycles, 1);
  EXPECT_TRUE(Messages(art.events, EventKind::kProposalRecorded).empty());
  EXPECT_EQ(Messages(art.events, EventKind::kPromotionSkipped),
            std::vector<std::string>{"promotion_skipped:reason=controller_only"});
  EXPECT_TRUE(CheckEventGrammar(art.events, false).empty());
}

TEST(RunCampaign, BaselineNeverDetects) {
  testing::TempDir dir;
  const auto art = RunCampaign(Config("staircase", Ablation::kBaseline, 100, dir / "run"));
  EXPECT_EQ(art.plateau_cycles, 0);
  EXPECT_EQ(art.events.size(), 1u);
  EXPECT_TRUE(art.active_recipe_id.empty());
}

TEST(RunCampaign, Deterministic) {
  testing::TempDir dir;
  const auto a = RunCampaign(Config("json", Ablation::kFull, 120, dir / "a"));
  const auto b = RunCampaign(Config("json", Ablation::kFull, 120, dir / "b"));
  EXPECT_EQ(ReadTextFile(dir / "a" / kEventsFile), ReadTextFile(dir / "b" / kEventsFile));
  EXPECT_EQ(ReadTextFile(dir / "a" / kCoverageFile), ReadTextFile(dir / "b" / kCoverageFile));
  EXPECT_EQ(a.stats.execs_done, b.stats.execs_done);
}

TEST(RunCampaign, ArtifactsAndReplay) {
  testing::TempDir dir;
  const fs::path out = dir / "run";
  const auto art = RunCampaign(Config("staircase", Ablation::kFull, 100, out));
  for (const char* f : {"fuzzer_stats", "coverage.csv", "events.jsonl", "run_metadata.json",
                        "report.md", "plateau_01/blackboard.json", "plateau_01/snapshot/MANIFEST"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto stats = FuzzerStatsFromText(ReadTextFile(out / kFuzzerStatsFile));
  EXPECT_EQ(stats.execs_done, art.stats.execs_done);
  const auto coverage = ParseCoverageCsv(ReadTextFile(out / kCoverageFile));
  ASSERT_FALSE(coverage.empty());
  for (size_t i = 1; i < coverage.size(); ++i) {
    EXPECT_LE(coverage[i - 1].t_sec, coverage[i].t_sec);
    EXPECT_LE(coverage[i - 1].edges_found, coverage[i].edges_found);
  }

  // The decision can be recomputed from the log alone.
  const auto events = ReadEventLog((out / kEventsFile).string());
  std::vector<MicroResult> results;
  for (const auto& e : events) {
    if (e.kind == EventKind::kMicroResult) results.push_back(MicroResultFromEvent(e, {}));
  }
  ASSERT_EQ(results.size(), 4u);
  EventLog replay;
  DecideWinner(results, &replay);
  const auto logged = Messages(events, EventKind::kWinnerDecided);
  ASSERT_EQ(logged.size(), 1u);
  EXPECT_EQ(EventMessage(replay.events()[0]), logged[0]);
}

class AbortingProvider : public ProposalProvider {
 public:
  std::string Name() const override { return "aborting"; }
  std::optional<std::string> Propose(const Blackboard&, Intervention) override {
    ++calls;
    throw std::runtime_error("provider must not be consulted");
  }
  std::atomic<int> calls{0};
};

TEST(RunCampaign, ProviderUntouchedWithoutPlateau) {
  testing::TempDir dir;
  auto provider = std::make_shared<AbortingProvider>();
  auto c = Config("saturated", Ablation::kFull, 9, dir / "run");
  c.providers = {provider};
  const auto art = RunCampaign(c);
  EXPECT_EQ(provider->calls, 0);
  EXPECT_EQ(art.plateau_cycles, 0);
  EXPECT_EQ(art.events.back().kind, EventKind::kRunCompleted);
}

class OneRecipeProvider : public ProposalProvider {
 public:
  explicit OneRecipeProvider(std::string doc) : doc_(std::move(doc)) {}
  std::string Name() const override { return "one"; }
  std::optional<std::string> Propose(const Blackboard&, Intervention iv) override {
    if (iv != Intervention::kDefault) return std::nullopt;
    return doc_;
  }

 private:
  std::string doc_;
};

TEST(RunCampaign, ExpiredRecipeRevertsToDefault) {
  testing::TempDir dir;
  MutationRecipe short_lived = DefaultRuleRecipe();
  short_lived.id = "short_lived";
  short_lived.ttl_sec = 30;
  short_lived.dictionary_tokens = {testing::B("XKEY1"), testing::B("XKEY2")};
  short_lived.operator_weights = {{OperatorKind::kInsertToken, 1.0}};
  auto c = Config("staircase", Ablation::kNoStaticAnalysis, 300, dir / "run");
  c.providers = {std::make_shared<OneRecipeProvider>(SerializeRecipe(short_lived))};
  const auto art = RunCampaign(c);
  ASSERT_GE(art.promotions, 1);
  EXPECT_TRUE(fs::exists(dir / "run" / "main_recipes" / "short_lived.json"));
  EXPECT_EQ(art.active_recipe_id, kDefaultRecipeId);
}

}  // namespace
}  // namespace recipefuzz
