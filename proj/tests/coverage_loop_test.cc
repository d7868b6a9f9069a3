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

#include "recipefuzz/coverage_loop.h"
#include "recipefuzz/errors.h"
#include "recipefuzz/sim_target.h"
#include "test_util.h"

namespace recipefuzz {
namespace {

using testing::B;

void ImportDefaults(CoverageLoop& loop, std::string_view target) {
  int i = 0;
  for (auto& s : DefaultSeeds(target)) loop.Import(MakeSeed("seed" + std::to_string(i++), s), 0);
}

TEST(CoverageLoop, EmptyQueueThrows) {
  JsonTarget t;
  VanillaHavocMutator m;
  CoverageLoop loop(t, m, 1);
  EXPECT_THROW(loop.Step(0), EmptyQueue);
}

TEST(CoverageLoop, ImportQueuesEvenWithoutNewEdges) {
  JsonTarget t;
  VanillaHavocMutator m;
  CoverageLoop loop(t, m, 1);
  EXPECT_GT(loop.Import(MakeSeed("a", B("{}")), 0), 0u);
  EXPECT_EQ(loop.Import(MakeSeed("b", B("{}")), 0), 0u);
  EXPECT_EQ(loop.paths_total(), 2u);
  EXPECT_TRUE(loop.queue()[1].from_seed);
  EXPECT_EQ(loop.counters().execs, 2u);
}

TEST(CoverageLoop, CrashingSeedsAreNotQueued) {
  JsonTarget t(2);
  VanillaHavocMutator m;
  CoverageLoop loop(t, m, 1);
  loop.Import(MakeSeed("deep", B("[[[[1]]]]")), 0);
  EXPECT_EQ(loop.paths_total(), 0u);
  EXPECT_EQ(loop.counters().unique_crashes, 1u);
}

TEST(CoverageLoop, DeterministicForSeed) {
  JsonTarget t;
  VanillaHavocMutator m1, m2;
  CoverageLoop a(t, m1, 9), b(t, m2, 9);
  ImportDefaults(a, "json");
  ImportDefaults(b, "json");
  for (int i = 0; i < 5000; ++i) {
    a.Step(i);
    b.Step(i);
  }
  ASSERT_EQ(a.paths_total(), b.paths_total());
  for (size_t i = 0; i < a.paths_total(); ++i) EXPECT_EQ(a.corpus()[i].bytes, b.corpus()[i].bytes);
  EXPECT_EQ(a.counters().cycles_done, b.counters().cycles_done);
}

TEST(CoverageLoop, NewEntriesCarryCoverageAndNames) {
  JsonTarget t;
  VanillaHavocMutator m;
  CoverageLoop loop(t, m, 3);
  size_t hooked = 0;
  loop.on_new_entry = [&](const SeedEntry& e, size_t index) {
    EXPECT_EQ(index, hooked++);
    EXPECT_EQ(e.seed_hash.size(), 64u);
  };
  ImportDefaults(loop, "json");
  EdgeBitmap replay;
  for (int i = 0; i < 3000; ++i) loop.Step(i);
  EXPECT_EQ(hooked, loop.paths_total());
  for (size_t i = 0; i < loop.paths_total(); ++i) {
    replay.Merge(t.Execute(loop.corpus()[i].bytes).edges_hit);
    if (!loop.queue()[i].from_seed) {
      char name[16];
      std::snprintf(name, sizeof name, "id:%06zu", i);
      EXPECT_EQ(loop.corpus()[i].seed_id, name);
    }
  }
  // Every edge the loop counts is reproducible from its queue alone.
  EXPECT_EQ(replay.count(), loop.edges_found());
  EXPECT_GT(loop.favored_count(), 0u);
}

TEST(CoverageLoop, JsonTargetSaturates) {
  JsonTarget t;
  VanillaHavocMutator m;
  CoverageLoop loop(t, m, 5);
  ImportDefaults(loop, "json");
  for (int i = 0; i < 400000; ++i) loop.Step(i);
  const size_t ceiling = loop.edges_found();
  for (int i = 400000; i < 800000; ++i) loop.Step(i);
  EXPECT_EQ(loop.edges_found(), ceiling);
  EXPECT_GT(ceiling, 40u);
  EXPECT_LE(ceiling, static_cast<size_t>(JsonTarget::kNumEdges));
}

TEST(CoverageLoop, SourceAccounting) {
  StaircaseTarget t;
  RecipeDispatchMutator m;
  MutationRecipe r;
  r.id = "gate";
  r.operator_weights[OperatorKind::kInsertToken] = 0.5;
  r.operator_weights[OperatorKind::kSplice] = 0.5;
  r.dictionary_tokens = {B("XKEY1"), B("XKEY2")};
  m.Install(LowerRecipe(r));
  CoverageLoop loop(t, m, 2);
  ImportDefaults(loop, "staircase");
  const size_t imported = loop.paths_total();
  const uint64_t import_execs = loop.counters().execs;
  for (int i = 0; i < 2000; ++i) loop.Step(i);
  const auto& c = loop.counters();
  EXPECT_EQ(c.calls_hit + c.calls_miss, c.execs - import_execs);
  EXPECT_EQ(c.new_cov_from_hit + c.new_cov_from_fallback + c.new_cov_from_havoc,
            loop.paths_total() - imported);
  EXPECT_EQ(loop.edges_found(), 11u);
  EXPECT_GT(c.new_cov_from_hit, 0u);
}

TEST(CoverageLoop, RespectsMaxSize) {
  JsonTarget t;
  VanillaHavocMutator m;
  CoverageLoop loop(t, m, 4, 16);
  loop.Import(MakeSeed("big", Bytes(100, '1')), 0);
  EXPECT_EQ(loop.corpus()[0].bytes.size(), 16u);
  for (int i = 0; i < 3000; ++i) loop.Step(i);
  for (const auto& e : loop.corpus()) EXPECT_LE(e.bytes.size(), 16u);
}

}  // namespace
}  // namespace recipefuzz
