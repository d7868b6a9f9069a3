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

#include "recipefuzz/providers.h"

#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "recipefuzz/digest.h"
#include "recipefuzz/errors.h"

namespace recipefuzz {
namespace {

using ojson = nlohmann::ordered_json;

std::vector<Bytes> AsBytes(const std::vector<std::string>& tokens) {
  std::vector<Bytes> out;
  for (const auto& t : tokens) out.emplace_back(t.begin(), t.end());
  return out;
}

std::map<OperatorKind, double> DictionaryWeights() {
  return {{OperatorKind::kInsertToken, 0.45},
          {OperatorKind::kDictionaryOverwrite, 0.45},
          {OperatorKind::kSplice, 0.05},
          {OperatorKind::kBitFlip, 0.05}};
}

}  // namespace

std::string Blackboard::ToJson() const {
  ojson j;
  j["snapshot_dir"] = snapshot_dir;
  ojson manifest = ojson::array();
  for (const auto& [name, digest] : snapshot_manifest) manifest.push_back({name, digest});
  j["snapshot_manifest"] = manifest;
  ojson frames = ojson::array();
  for (const auto& f : recent_stats) {
    frames.push_back({f.t, f.execs_done, f.paths_total, f.edges_found});
  }
  j["recent_stats"] = frames;
  if (static_tokens) {
    j["static_context"] = *static_tokens;
  } else {
    j["static_context"] = "unavailable";
  }
  j["config_digest"] = config_digest;
  return j.dump();
}

std::string HashContext(const Blackboard& blackboard) { return Sha256Hex(blackboard.ToJson()); }

std::string HashResponse(std::string_view document) { return Sha256Hex(document); }

MutationRecipe DefaultRuleRecipe() { return ParseRecipe(*BuiltinRecipeDocument("default")); }

std::optional<std::string> RuleProvider::Propose(const Blackboard& bb, Intervention iv) {
  MutationRecipe r = DefaultRuleRecipe();
  switch (iv) {
    case Intervention::kDefault:
      break;
    case Intervention::kDictionary:
      r.id = "rule_dictionary";
      r.operator_weights = DictionaryWeights();
      r.expected_signal = "dictionary-heavy insertion of default tokens";
      break;
    case Intervention::kSeedFocus:
      r.id = "rule_seed_focus";
      r.expected_signal = "concentrate on the newest queue entry";
      if (!bb.snapshot_manifest.empty()) {
        r.selector = {SelectorMode::kSeedId, bb.snapshot_manifest.back().first};
      }
      break;
    case Intervention::kPerSeedRecipe:
      r.id = "rule_per_seed";
      r.expected_signal = "recipe bound to the oldest queue entry";
      if (!bb.snapshot_manifest.empty()) {
        r.selector = {SelectorMode::kSeedHash, bb.snapshot_manifest.front().second};
      }
      break;
  }
  return SerializeRecipe(r);
}

std::optional<std::string> StaticContextProvider::Propose(const Blackboard& bb, Intervention iv) {
  if (iv != Intervention::kDictionary || !bb.static_tokens) return std::nullopt;
  std::vector<std::string> tokens;
  std::set<std::string> seen;
  for (const auto& t : *bb.static_tokens) {
    if (t.empty() || t.size() > kMaxTokenLength || !seen.insert(t).second) continue;
    tokens.push_back(t);
    if (tokens.size() == kMaxTokenCount) break;
  }
  if (tokens.empty()) return std::nullopt;
  MutationRecipe r = DefaultRuleRecipe();
  r.id = "static_dictionary";
  r.operator_weights = DictionaryWeights();
  r.dictionary_tokens = AsBytes(tokens);
  r.expected_signal = "insert constants from read-only data";
  return SerializeRecipe(r);
}

FileProposalProvider::FileProposalProvider(const std::string& path) : path_(path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read proposals file " + path);
  size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto iv = InterventionFromName(j.at("intervention").get<std::string>());
      if (!iv) throw ConfigInvalid("unknown intervention");
      const auto& doc = j.at("document");
      pending_[*iv].push_back(doc.is_string() ? doc.get<std::string>() : doc.dump());
    } catch (const std::exception& e) {
      throw ConfigInvalid(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<std::string> FileProposalProvider::Propose(const Blackboard&, Intervention iv) {
  auto it = pending_.find(iv);
  if (it == pending_.end() || it->second.empty()) return std::nullopt;
  std::string doc = std::move(it->second.front());
  it->second.pop_front();
  return doc;
}

std::vector<Candidate> ProposeCandidates(const Blackboard& bb,
                                         const std::vector<ProposalProvider*>& providers,
                                         size_t k, int cycle, EventLog* log, double t) {
  if (k < 1) throw ConfigInvalid("k_cand must be >= 1");
  const std::string context_hash = HashContext(bb);
  RuleProvider rule;
  std::vector<Candidate> out;
  auto record = [&](const std::string& provider, const Candidate& c, const std::string& doc,
                    Payload extra) {
    if (!log) return;
    AuditEvent e;
    e.t = t;
    e.kind = EventKind::kProposalRecorded;
    e.payload = {{"provider", provider},
                 {"intervention", std::string(InterventionName(c.intervention))},
                 {"candidate_id", c.candidate_id}};
    e.payload.insert(e.payload.end(), extra.begin(), extra.end());
    e.context_hash = context_hash;
    e.response_hash = HashResponse(doc);
    log->Append(std::move(e));
  };

  for (size_t slot = 0; slot < k; ++slot) {
    Candidate c;
    c.intervention = kAllInterventions[slot % kAllInterventions.size()];
    char id[64];
    std::snprintf(id, sizeof id, "p%02d_c%02zu_%s", cycle, slot,
                  std::string(InterventionName(c.intervention)).c_str());
    c.candidate_id = id;
    bool filled = false;
    for (ProposalProvider* p : providers) {
      auto doc = p->Propose(bb, c.intervention);
      if (!doc) continue;
      try {
        c.recipe = ParseRecipe(*doc);
      } catch (const SchemaViolation& e) {
        record(p->Name(), c, *doc,
               {{"status", "dropped"},
                {"error_kind", "schema_invalid"},
                {"violations", std::to_string(e.violations().size())},
                {"fallback_used", "false"}});
        continue;
      }
      record(p->Name(), c, *doc,
             {{"status", "accepted"}, {"recipe_id", c.recipe.id}, {"fallback_used", "false"}});
      filled = true;
      break;
    }
    if (!filled) {
      const std::string doc = *rule.Propose(bb, c.intervention);
      c.recipe = ParseRecipe(doc);
      record(rule.Name(), c, doc,
             {{"status", "accepted"}, {"recipe_id", c.recipe.id}, {"fallback_used", "false"}});
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace recipefuzz
