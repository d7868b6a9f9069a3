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

#include "recipefuzz/audit.h"

#include <array>
#include <charconv>

#include "json.hpp"
#include "recipefuzz/errors.h"

namespace recipefuzz {
namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "plateau_detected", "corpus_snapshot",  "proposal_recorded", "micro_result",
    "winner_decided",   "recipe_promoted",  "promotion_skipped", "run_completed"};

}  // namespace

std::string_view EventKindName(EventKind kind) {
  return kKindNames[static_cast<size_t>(kind)];
}

std::optional<EventKind> EventKindFromName(std::string_view name) {
  for (size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::optional<std::string> AuditEvent::Get(std::string_view key) const {
  for (const auto& [k, v] : payload) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string FormatReal(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string EventMessage(const AuditEvent& e) {
  std::string msg(EventKindName(e.kind));
  msg += ':';
  for (size_t i = 0; i < e.payload.size(); ++i) {
    if (i) msg += ',';
    msg += e.payload[i].first + "=" + e.payload[i].second;
  }
  return msg;
}

std::string EventToJson(const AuditEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.t;
  j["kind"] = EventKindName(e.kind);
  j["message"] = EventMessage(e);
  nlohmann::ordered_json payload = nlohmann::ordered_json::object();
  for (const auto& [k, v] : e.payload) payload[k] = v;
  j["payload"] = payload;
  if (!e.context_hash.empty()) j["context_hash"] = e.context_hash;
  if (!e.response_hash.empty()) j["response_hash"] = e.response_hash;
  return j.dump();
}

AuditEvent EventFromJson(std::string_view line) {
  try {
    const auto j = nlohmann::ordered_json::parse(line);
    AuditEvent e;
    e.t = j.at("t").get<double>();
    auto kind = EventKindFromName(j.at("kind").get<std::string>());
    if (!kind) throw IoError("unknown event kind in: " + std::string(line));
    e.kind = *kind;
    for (const auto& [k, v] : j.at("payload").items()) {
      e.payload.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    if (j.contains("context_hash")) e.context_hash = j["context_hash"].get<std::string>();
    if (j.contains("response_hash")) e.response_hash = j["response_hash"].get<std::string>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("malformed event line: ") + ex.what());
  }
}

EventLog::EventLog(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw IoError("cannot open event log " + path);
}

const AuditEvent& EventLog::Append(AuditEvent event) {
  events_.push_back(std::move(event));
  if (out_.is_open()) {
    out_ << EventToJson(events_.back()) << '\n';
    out_.flush();
    if (!out_) throw IoError("event log write failed");
  }
  return events_.back();
}

size_t EventLog::Count(EventKind kind) const {
  size_t n = 0;
  for (const auto& e : events_) n += e.kind == kind;
  return n;
}

std::vector<AuditEvent> ReadEventLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<AuditEvent> events;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) events.push_back(EventFromJson(line));
  }
  return events;
}

std::vector<std::string> CheckEventGrammar(const std::vector<AuditEvent>& events,
                                           bool expect_micro_results) {
  std::vector<std::string> problems;
  enum class State { kIdle, kDetected, kSnapshot, kDecided };
  State state = State::kIdle;
  size_t micro = 0;
  size_t cycle = 0;
  auto fail = [&](size_t i, const std::string& what) {
    problems.push_back("event " + std::to_string(i) + " (" +
                       std::string(EventKindName(events[i].kind)) + "): " + what);
  };
  for (size_t i = 0; i < events.size(); ++i) {
    const EventKind k = events[i].kind;
    switch (k) {
      case EventKind::kPlateauDetected:
        if (state != State::kIdle) fail(i, "plateau inside an open cycle");
        state = State::kDetected;
        micro = 0;
        ++cycle;
        break;
      case EventKind::kCorpusSnapshot:
        if (state != State::kDetected) fail(i, "snapshot without plateau");
        state = State::kSnapshot;
        break;
      case EventKind::kProposalRecorded:
        if (state != State::kSnapshot) fail(i, "proposal outside a cycle");
        break;
      case EventKind::kMicroResult:
        if (state != State::kSnapshot) fail(i, "micro_result outside a cycle");
        ++micro;
        break;
      case EventKind::kWinnerDecided:
        if (state != State::kSnapshot) fail(i, "decision without snapshot");
        if (expect_micro_results && micro == 0) fail(i, "decision with no micro_result");
        state = State::kDecided;
        break;
      case EventKind::kRecipePromoted:
      case EventKind::kPromotionSkipped:
        if (state != State::kDecided) fail(i, "outcome without decision");
        state = State::kIdle;
        break;
      case EventKind::kRunCompleted:
        if (state != State::kIdle) fail(i, "run ended inside cycle " + std::to_string(cycle));
        if (i + 1 != events.size()) fail(i, "events after run_completed");
        break;
    }
  }
  if (state != State::kIdle) problems.push_back("log ends inside an open cycle");
  return problems;
}

}  // namespace recipefuzz
