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

#ifndef RECIPEFUZZ_AUDIT_H_
#define RECIPEFUZZ_AUDIT_H_

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace recipefuzz {

enum class EventKind : uint8_t {
  kPlateauDetected,
  kCorpusSnapshot,
  kProposalRecorded,
  kMicroResult,
  kWinnerDecided,
  kRecipePromoted,
  kPromotionSkipped,
  kRunCompleted,
};

std::string_view EventKindName(EventKind kind);
std::optional<EventKind> EventKindFromName(std::string_view name);

using Payload = std::vector<std::pair<std::string, std::string>>;

struct AuditEvent {
  double t = 0.0;
  EventKind kind = EventKind::kRunCompleted;
  Payload payload;  // insertion order is kept
  std::string context_hash;
  std::string response_hash;

  // Returns the value for `key`, or nullopt.
  std::optional<std::string> Get(std::string_view key) const;
};

// Shortest round-trip decimal form, always with a fractional part ("0.0",
// "3.08", "1e-05" stays as is).
std::string FormatReal(double v);

// "kind:key=value,key=value" in payload order.
std::string EventMessage(const AuditEvent& event);

// One self-contained JSON object per event.
std::string EventToJson(const AuditEvent& event);
// Throws IoError on a malformed line.
AuditEvent EventFromJson(std::string_view line);

// Append-only. When a path is given every event is also written (and
// flushed) as one line as soon as it is appended.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::string& path);

  const AuditEvent& Append(AuditEvent event);
  const std::vector<AuditEvent>& events() const { return events_; }
  size_t Count(EventKind kind) const;

 private:
  std::vector<AuditEvent> events_;
  std::ofstream out_;
};

std::vector<AuditEvent> ReadEventLog(const std::string& path);

// Checks that every plateau_detected is followed, in order, by
// corpus_snapshot, at least one micro_result (unless micro results are not
// expected), winner_decided, and exactly one of recipe_promoted or
// promotion_skipped. Returns human-readable problems; empty means valid.
std::vector<std::string> CheckEventGrammar(const std::vector<AuditEvent>& events,
                                           bool expect_micro_results = true);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_AUDIT_H_
