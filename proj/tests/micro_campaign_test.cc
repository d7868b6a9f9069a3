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

#include <fstream>

#include "recipefuzz/artifacts.h"
#include "recipefuzz/digest.h"
#include "recipefuzz/errors.h"
#include "recipefuzz/micro_campaign.h"
#include "recipefuzz/providers.h"
#include "recipefuzz/rng.h"
#include "recipefuzz/sim_target.h"
#include "reward_oracle.h"
#include "test_util.h"

namespace recipefuzz {
namespace {

using testing::B;
namespace fs = std::filesystem;

TEST(Reward, Examples) {
  const RewardWeights w;
  EXPECT_DOUBLE_EQ(ComputeReward(3, 99, 0, 100, 40, w, true), 3.08);
  EXPECT_EQ(ComputeReward(0, 0, 0, 0, 0, w, true), 0.0);
  EXPECT_EQ(FormatReal(ComputeReward(0, 0, 0, 0, 0, w, true)), "0.0");
  EXPECT_DOUBLE_EQ(ComputeReward(7, 4, 0, 0, 0, w, false), 2.0);
  EXPECT_DOUBLE_EQ(ComputeReward(0, 3, 1, 0, 0, w, true), 10.0);
}

TEST(Reward, AffineInEachCount) {
  const RewardWeights w;
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const uint64_t e = rng.Below(500), p = rng.Below(500), c = rng.Below(5), h = rng.Below(10000),
                   m = rng.Below(10000);
    const bool bm = rng.Coin();
    const double base = ComputeReward(e, p, c, h, m, w, bm);
    EXPECT_NEAR(ComputeReward(e + 1, p, c, h, m, w, bm) - base, bm ? 1.0 : 0.0, 1e-9);
    EXPECT_NEAR(ComputeReward(e, p + 1, c, h, m, w, bm) - base, bm ? 0.0 : 0.5, 1e-9);
    EXPECT_NEAR(ComputeReward(e, p, c + 1, h, m, w, bm) - base, 10.0, 1e-9);
    EXPECT_NEAR(ComputeReward(e, p, c, h + 1, m, w, bm) - base, 1e-3, 1e-9);
    EXPECT_NEAR(ComputeReward(e, p, c, h, m + 1, w, bm) - base, -5e-4, 1e-9);
  }
}

TEST(Reward, MatchesExactOracle) {
  Rng rng(4242);
  RewardWeights odd;
  odd.alpha = 0.1;
  odd.delta_h = 3e-7;
  odd.delta_m = 1.0 / 3.0;
  for (int i = 0; i < 3000; ++i) {
    const uint64_t e = rng.Below(2000), p = rng.Below(2000), c = rng.Below(4),
                   h = rng.Below(1000000), m = rng.Below(1000000);
    const bool bm = rng.Coin();
    for (const RewardWeights& w : {RewardWeights{}, odd}) {
      EXPECT_EQ(ComputeReward(e, p, c, h, m, w, bm), testing::OracleReward(e, p, c, h, m, w, bm));
    }
  }
}

class SnapshotTest : public ::testing::Test {
 protected:
  void SetUp() override {
    fs::create_directories(dir_ / "queue");
    WriteTextFile(dir_ / "queue" / "id:000000", "first");
    WriteTextFile(dir_ / "queue" / "id:000001", std::string("\0\x01\x02", 3));
    WriteTextFile(dir_ / "queue" / "id:000002", "third entry");
  }
  testing::TempDir dir_;
};

TEST_F(SnapshotTest, CopiesEveryEntry) {
  const Snapshot snap = SnapshotCorpus(dir_ / "queue", dir_ / "snap");
  ASSERT_EQ(snap.manifest.size(), 3u);
  for (const auto& [name, digest] : snap.manifest) {
    EXPECT_EQ(ReadTextFile(dir_ / "snap" / name), ReadTextFile(dir_ / "queue" / name));
    EXPECT_EQ(digest, Sha256Hex(ReadTextFile(dir_ / "queue" / name)));
  }
  EXPECT_TRUE(fs::exists(dir_ / "snap" / kManifestName));
}

TEST_F(SnapshotTest, ImmuneToLaterQueueChanges) {
  SnapshotCorpus(dir_ / "queue", dir_ / "snap");
  WriteTextFile(dir_ / "queue" / "id:000000", "rewritten");
  WriteTextFile(dir_ / "queue" / "id:000003", "added later");
  const auto seeds = LoadSnapshot(OpenSnapshot(dir_ / "snap"));
  ASSERT_EQ(seeds.size(), 3u);
  EXPECT_EQ(testing::S(seeds[0].bytes), "first");
}

TEST_F(SnapshotTest, DetectsTampering) {
  SnapshotCorpus(dir_ / "queue", dir_ / "snap");
  fs::permissions(dir_ / "snap" / "id:000002", fs::perms::owner_write, fs::perm_options::add);
  WriteTextFile(dir_ / "snap" / "id:000002", "tampered");
  EXPECT_THROW(LoadSnapshot(OpenSnapshot(dir_ / "snap")), IoError);
}

TEST_F(SnapshotTest, EmptyQueue) {
  fs::create_directories(dir_ / "empty");
  EXPECT_THROW(SnapshotCorpus(dir_ / "empty", dir_ / "snap2"), EmptyQueue);
  EXPECT_THROW(SnapshotCorpus(dir_ / "missing", dir_ / "snap3"), IoError);
}

std::vector<SeedEntry> StairSnapshot() {
  std::vector<SeedEntry> seeds;
  for (auto& s : DefaultSeeds("staircase")) seeds.push_back(MakeSeed("s", s));
  return seeds;
}

Candidate DictCandidate(std::vector<std::string> tokens) {
  Candidate c;
  c.recipe = DefaultRuleRecipe();
  c.recipe.id = "dict";
  c.recipe.dictionary_tokens.clear();
  for (auto& t : tokens) c.recipe.dictionary_tokens.push_back(B(t));
  c.intervention = Intervention::kDictionary;
  c.candidate_id = "c_" + tokens.front();
  return c;
}

TEST(EvaluateCandidate, SaturatedTargetScoresZero) {
  const auto target = MakeTarget("saturated");
  const auto r = EvaluateCandidate(DictCandidate({"FUZZ", "MAGIC", "TOKEN"}), StairSnapshot(),
                                   MicroBudget{}, *target, RewardWeights{}, 1);
  EXPECT_EQ(r.delta_edges, 0u);
  EXPECT_EQ(r.delta_paths, 0u);
  EXPECT_EQ(r.delta_crashes, 0u);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(r.execs, 80u);  // 20 s at the default 4 execs per virtual second
  EXPECT_EQ(r.baseline_edges, 3u);
}

TEST(EvaluateCandidate, GateTokenEarnsReward) {
  StaircaseTarget target;
  const auto good = EvaluateCandidate(DictCandidate({"XKEY1", "XKEY2"}), StairSnapshot(),
                                      MicroBudget{}, target, RewardWeights{}, 3);
  EXPECT_GT(good.delta_edges, 0u);
  EXPECT_GT(good.reward, 0.0);
  EXPECT_GT(good.hits, 0u);
  const auto garbage = EvaluateCandidate(DictCandidate({"QQQQQ", "ZZZZZ"}), StairSnapshot(),
                                         MicroBudget{}, target, RewardWeights{}, 3);
  EXPECT_EQ(garbage.delta_edges, 0u);
  EXPECT_GT(good.reward, garbage.reward);
}

TEST(EvaluateCandidate, ExecBudgetAndDeterminism) {
  StaircaseTarget target;
  const auto a = EvaluateCandidate(DictCandidate({"XKEY1"}), StairSnapshot(), {1, 123}, target,
                                   RewardWeights{}, 9);
  const auto b = EvaluateCandidate(DictCandidate({"XKEY1"}), StairSnapshot(), {1, 123}, target,
                                   RewardWeights{}, 9);
  EXPECT_EQ(a.execs, 123u);
  EXPECT_EQ(a.reward, b.reward);
  EXPECT_EQ(a.calls_hit, b.calls_hit);
  EXPECT_EQ(a.calls_hit + a.calls_miss, 123u);
}

TEST(EvaluateCandidate, ZeroBudget) {
  StaircaseTarget target;
  EXPECT_THROW(EvaluateCandidate(DictCandidate({"x"}), StairSnapshot(), {0.0, std::nullopt},
                                 target, RewardWeights{}, 1),
               BudgetZero);
  EXPECT_THROW(
      EvaluateCandidate(DictCandidate({"x"}), StairSnapshot(), {20, 0}, target, RewardWeights{}, 1),
      BudgetZero);
  EXPECT_THROW(EvaluateCandidate(DictCandidate({"x"}), {}, {}, target, RewardWeights{}, 1),
               EmptyQueue);
}

MicroResult WithReward(std::string id, double r) {
  MicroResult m;
  m.candidate_id = std::move(id);
  m.reward = r;
  return m;
}

TEST(DecideWinner, NoPositiveReward) {
  EventLog log;
  const auto d = DecideWinner({WithReward("a", 0), WithReward("b", 0), WithReward("c", 0),
                               WithReward("d", 0)},
                              &log, 42);
  EXPECT_FALSE(d.winner);
  EXPECT_EQ(d.status, PromotionStatus::kNoSignificance);
  ASSERT_EQ(log.events().size(), 2u);
  EXPECT_EQ(EventMessage(log.events()[0]), "winner_decided:status=no_significance,winner_reward=0.0");
  EXPECT_EQ(EventMessage(log.events()[1]), "promotion_skipped:reason=no_successful_micro_campaign");
  EXPECT_EQ(log.events()[1].t, 42.0);
}

TEST(DecideWinner, ArgmaxAndTies) {
  EventLog log;
  auto d = DecideWinner({WithReward("a", 0.5), WithReward("b", 3.08), WithReward("c", 0),
                         WithReward("d", 1.0)},
                        &log);
  ASSERT_TRUE(d.winner);
  EXPECT_EQ(*d.winner, 1u);
  EXPECT_EQ(d.winner_id, "b");
  EXPECT_EQ(d.status, PromotionStatus::kPromoted);
  EXPECT_EQ(EventMessage(log.events()[0]), "winner_decided:status=promoted,winner=b,winner_reward=3.08");
  EXPECT_EQ(EventMessage(log.events()[1]), "recipe_promoted:candidate_id=b,reward=3.08");
  d = DecideWinner({WithReward("x", 2.0), WithReward("y", 2.0)});
  EXPECT_EQ(d.winner_id, "x");
  EXPECT_THROW(DecideWinner({}), EmptyResults);
  // Negative rewards never promote.
  EXPECT_FALSE(DecideWinner({WithReward("n", -0.01)}).winner);
}

TEST(MicroResultEvent, ReplaysReward) {
  StaircaseTarget target;
  const Candidate c = DictCandidate({"XKEY2"});
  const auto r = EvaluateCandidate(c, StairSnapshot(), {}, target, RewardWeights{}, 5);
  const AuditEvent e = MicroResultEvent(r, c, 30.0);
  const AuditEvent back = EventFromJson(EventToJson(e));
  const MicroResult again = MicroResultFromEvent(back, RewardWeights{});
  EXPECT_EQ(again.reward, r.reward);
  EXPECT_EQ(again.delta_edges, r.delta_edges);
  EXPECT_EQ(again.candidate_id, c.candidate_id);
  EXPECT_EQ(back.Get("intervention"), "dictionary");
}

}  // namespace
}  // namespace recipefuzz
