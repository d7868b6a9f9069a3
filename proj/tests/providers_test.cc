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
#include <set>

#include "recipefuzz/providers.h"
#include "recipefuzz/recipe.h"
#include "test_util.h"

namespace recipefuzz {
namespace {

Blackboard Board() {
  Blackboard bb;
  bb.snapshot_dir = "/tmp/snap";
  bb.snapshot_manifest = {{"id:000000", std::string(64, '1')}, {"id:000001", std::string(64, '2')}};
  bb.recent_stats = {{0, 0, 1, 3}, {10, 40, 1, 3}};
  bb.config_digest = "cfg";
  return bb;
}

class FixedProvider : public ProposalProvider {
 public:
  explicit FixedProvider(std::string doc) : doc_(std::move(doc)) {}
  std::string Name() const override { return "fixed"; }
  std::optional<std::string> Propose(const Blackboard&, Intervention) override { return doc_; }

 private:
  std::string doc_;
};

TEST(RuleProvider, DefaultRecipe) {
  const MutationRecipe r = DefaultRuleRecipe();
  EXPECT_EQ(r.id, kDefaultRecipeId);
  ASSERT_EQ(r.dictionary_tokens.size(), kDefaultRuleTokens.size());
  for (size_t i = 0; i < r.dictionary_tokens.size(); ++i) {
    EXPECT_EQ(testing::S(r.dictionary_tokens[i]), kDefaultRuleTokens[i]);
  }
  EXPECT_TRUE(ValidateRecipe(r).empty());
}

TEST(RuleProvider, OneRecipePerIntervention) {
  RuleProvider rule;
  const Blackboard bb = Board();
  std::set<std::string> ids;
  for (Intervention iv : kAllInterventions) {
    const auto doc = rule.Propose(bb, iv);
    ASSERT_TRUE(doc);
    const MutationRecipe r = ParseRecipe(*doc);
    ids.insert(r.id);
    EXPECT_EQ(*doc, *rule.Propose(bb, iv));
    if (iv == Intervention::kSeedFocus) {
      EXPECT_EQ(r.selector.mode, SelectorMode::kSeedId);
      EXPECT_EQ(r.selector.key, "id:000001");
    }
    if (iv == Intervention::kPerSeedRecipe) {
      EXPECT_EQ(r.selector.mode, SelectorMode::kSeedHash);
      EXPECT_EQ(r.selector.key, std::string(64, '1'));
    }
  }
  EXPECT_EQ(ids.size(), 4u);
}

TEST(StaticContextProvider, UsesTokensOnlyWhenAvailable) {
  StaticContextProvider sc;
  Blackboard bb = Board();
  EXPECT_FALSE(sc.Propose(bb, Intervention::kDictionary));
  bb.static_tokens = std::vector<std::string>{"usage", "usage", "", std::string(65, 'x'), "null"};
  EXPECT_FALSE(sc.Propose(bb, Intervention::kDefault));
  const auto doc = sc.Propose(bb, Intervention::kDictionary);
  ASSERT_TRUE(doc);
  const MutationRecipe r = ParseRecipe(*doc);
  ASSERT_EQ(r.dictionary_tokens.size(), 2u);
  EXPECT_EQ(testing::S(r.dictionary_tokens[0]), "usage");
  EXPECT_EQ(testing::S(r.dictionary_tokens[1]), "null");
}

TEST(FileProposalProvider, ReplaysInOrder) {
  testing::TempDir dir;
  const auto path = (dir / "p.jsonl").string();
  {
    std::ofstream out(path);
    out << R"({"intervention": "dictionary", "document": "first"})" << "\n\n"
        << R"({"intervention": "dictionary", "document": {"id": "second"}})" << "\n";
  }
  FileProposalProvider fp(path);
  const Blackboard bb = Board();
  EXPECT_FALSE(fp.Propose(bb, Intervention::kDefault));
  EXPECT_EQ(fp.Propose(bb, Intervention::kDictionary), "first");
  EXPECT_EQ(fp.Propose(bb, Intervention::kDictionary), R"({"id":"second"})");
  EXPECT_FALSE(fp.Propose(bb, Intervention::kDictionary));
  EXPECT_THROW(FileProposalProvider((dir / "missing").string()), IoError);
  {
    std::ofstream out(path);
    out << R"({"intervention": "sideways", "document": "x"})" << "\n";
  }
  EXPECT_THROW(FileProposalProvider{path}, ConfigInvalid);
}

TEST(ProposeCandidates, FillsKSlotsCyclingInterventions) {
  EventLog log;
  const auto cands = ProposeCandidates(Board(), {}, 6, 1, &log, 10.0);
  ASSERT_EQ(cands.size(), 6u);
  EXPECT_EQ(cands[0].candidate_id, "p01_c00_default");
  EXPECT_EQ(cands[4].intervention, Intervention::kDefault);
  EXPECT_EQ(cands[5].candidate_id, "p01_c05_dictionary");
  EXPECT_EQ(log.Count(EventKind::kProposalRecorded), 6u);
  for (const auto& e : log.events()) {
    EXPECT_EQ(e.Get("provider"), "rule");
    EXPECT_EQ(e.context_hash.size(), 64u);
    EXPECT_EQ(e.response_hash.size(), 64u);
  }
  EXPECT_THROW(ProposeCandidates(Board(), {}, 0, 1), ConfigInvalid);
}

TEST(ProposeCandidates, InvalidDocumentsAreDroppedAndRecorded) {
  FixedProvider bad(R"({"id": "x", "operator_weights": {"BitFlip": 2.0}})");
  EventLog log;
  const auto cands = ProposeCandidates(Board(), {&bad}, 4, 2, &log);
  ASSERT_EQ(cands.size(), 4u);
  EXPECT_EQ(log.Count(EventKind::kProposalRecorded), 8u);
  size_t dropped = 0;
  for (const auto& e : log.events()) {
    if (e.Get("status") == "dropped") {
      ++dropped;
      EXPECT_EQ(e.Get("error_kind"), "schema_invalid");
      EXPECT_EQ(e.Get("fallback_used"), "false");
      EXPECT_EQ(e.Get("provider"), "fixed");
    }
  }
  EXPECT_EQ(dropped, 4u);
  for (const auto& c : cands) EXPECT_EQ(c.recipe.id.rfind("rule_", 0), 0u) << c.recipe.id;
}

TEST(ProposeCandidates, FirstValidProviderWins) {
  MutationRecipe mine = DefaultRuleRecipe();
  mine.id = "mine";
  FixedProvider good(SerializeRecipe(mine));
  RuleProvider rule;
  const auto cands = ProposeCandidates(Board(), {&good, &rule}, 4, 1);
  for (const auto& c : cands) EXPECT_EQ(c.recipe.id, "mine");
}

TEST(HashContext, StableAndSensitive) {
  const Blackboard a = Board();
  Blackboard b = Board();
  EXPECT_EQ(HashContext(a), HashContext(b));
  EXPECT_EQ(HashContext(a).size(), 64u);
  EXPECT_EQ(HashContext(a).find_first_not_of("0123456789abcdef"), std::string::npos);
  b.recent_stats.push_back({20, 80, 1, 3});
  EXPECT_NE(HashContext(a), HashContext(b));
  Blackboard c = Board();
  c.static_tokens = std::vector<std::string>{};
  EXPECT_NE(HashContext(a), HashContext(c));
}

}  // namespace
}  // namespace recipefuzz
