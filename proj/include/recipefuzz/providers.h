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

#ifndef RECIPEFUZZ_PROVIDERS_H_
#define RECIPEFUZZ_PROVIDERS_H_

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recipefuzz/audit.h"
#include "recipefuzz/micro_campaign.h"
#include "recipefuzz/plateau.h"

namespace recipefuzz {

// Everything a proposal provider may see about the campaign.
struct Blackboard {
  std::string snapshot_dir;
  // Snapshot entry name -> digest, in name order (oldest entry first).
  std::vector<std::pair<std::string, std::string>> snapshot_manifest;
  std::vector<TelemetryFrame> recent_stats;
  // nullopt means static analysis is unavailable for this campaign.
  std::optional<std::vector<std::string>> static_tokens;
  std::string config_digest;

  // Canonical serialization; the context hash is computed over this.
  std::string ToJson() const;
};

std::string HashContext(const Blackboard& blackboard);
std::string HashResponse(std::string_view document);

// Returns a recipe document for the requested intervention, or nullopt to
// decline. Only the plateau handler ever calls a provider.
class ProposalProvider {
 public:
  virtual ~ProposalProvider() = default;
  virtual std::string Name() const = 0;
  virtual std::optional<std::string> Propose(const Blackboard& blackboard,
                                             Intervention intervention) = 0;
};

inline const std::vector<std::string> kDefaultRuleTokens = {"FUZZ", "MAGIC", "TOKEN"};
inline constexpr std::string_view kDefaultRecipeId = "rule_default";

// Deterministic built-in proposals, one per intervention type.
class RuleProvider final : public ProposalProvider {
 public:
  std::string Name() const override { return "rule"; }
  std::optional<std::string> Propose(const Blackboard& blackboard,
                                     Intervention intervention) override;
};

// A dictionary recipe built from the blackboard's static tokens.
class StaticContextProvider final : public ProposalProvider {
 public:
  std::string Name() const override { return "static_context"; }
  std::optional<std::string> Propose(const Blackboard& blackboard,
                                     Intervention intervention) override;
};

// Replays canned proposals from a JSONL file. Each line is
// {"intervention": "...", "document": <object or raw string>}; lines are
// consumed in order per intervention.
class FileProposalProvider final : public ProposalProvider {
 public:
  explicit FileProposalProvider(const std::string& path);
  std::string Name() const override { return "file:" + path_; }
  std::optional<std::string> Propose(const Blackboard& blackboard,
                                     Intervention intervention) override;

 private:
  std::string path_;
  std::map<Intervention, std::deque<std::string>> pending_;
};

// The default rule recipe, parsed.
MutationRecipe DefaultRuleRecipe();

// Fills exactly k slots, cycling through the four intervention types.
// Each slot asks the providers in order; the first schema-valid document
// wins. Invalid documents are dropped and recorded with
// error_kind=schema_invalid. Unfilled slots go to the rule provider.
// Every proposal is logged as proposal_recorded when `log` is given.
std::vector<Candidate> ProposeCandidates(const Blackboard& blackboard,
                                         const std::vector<ProposalProvider*>& providers,
                                         size_t k, int cycle, EventLog* log = nullptr,
                                         double t = 0.0);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_PROVIDERS_H_
