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

#include "recipefuzz/recipe.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace recipefuzz {
namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, kNumOperators> kOperatorNames = {
    "BitFlip", "OverwriteRange", "InsertToken", "Arith",
    "Splice",  "DeleteBlock",    "DictionaryOverwrite"};

constexpr std::array<std::string_view, 4> kSelectorModeNames = {
    "mode", "seed_id", "seed_hash", "family"};

constexpr std::array<std::string_view, 10> kKnownFields = {
    "id",           "selector",       "priority",          "ttl_sec",
    "operator_weights", "focus_ranges", "protect_ranges", "dictionary_tokens",
    "expected_signal",  "fields"};

constexpr std::string_view kJsonNesting = R"({
  "id": "p1_e1b_r03_plateau_07",
  "selector": {"mode": "seed_hash", "key": "9c4f...a7b1"},
  "priority": 3,
  "ttl_sec": 1800,
  "operator_weights": {
    "InsertToken":         0.35,
    "DictionaryOverwrite": 0.25,
    "Splice":              0.15,
    "OverwriteRange":      0.10,
    "BitFlip":             0.10,
    "Arith":               0.03,
    "DeleteBlock":         0.02
  },
  "focus_ranges":   [[0, 1], [42, 64]],
  "protect_ranges": [[16, 20]],
  "dictionary_tokens": ["{", "}", "[", "]", "\"", "true", "null"],
  "expected_signal": "exercise object/array nesting boundary"
})";

constexpr std::string_view kDefaultRule = R"({
  "id": "rule_default",
  "selector": {"mode": "mode", "key": "default"},
  "priority": 1,
  "ttl_sec": 14400,
  "operator_weights": {
    "InsertToken":         0.35,
    "DictionaryOverwrite": 0.25,
    "Splice":              0.15,
    "OverwriteRange":      0.10,
    "BitFlip":             0.10,
    "Arith":               0.03,
    "DeleteBlock":         0.02
  },
  "focus_ranges":   [[0, 4096]],
  "protect_ranges": [],
  "dictionary_tokens": ["FUZZ", "MAGIC", "TOKEN"],
  "expected_signal": "default dictionary recipe"
})";

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Rejects duplicate object keys, which nlohmann::json would otherwise
// silently resolve last-wins.
class DuplicateKeyTracker {
 public:
  bool operator()(int /*depth*/, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        frames_.push_back({});
        break;
      case json::parse_event_t::object_end:
        if (!frames_.empty()) frames_.pop_back();
        break;
      case json::parse_event_t::key: {
        auto key = parsed.get<std::string>();
        auto& frame = frames_.back();
        if (!frame.seen.insert(key).second) {
          std::string path;
          for (const auto& f : frames_) {
            if (&f == &frame) break;
            if (!path.empty()) path += ".";
            path += f.current;
          }
          if (!path.empty()) path += ".";
          violations_->push_back({path + key, "duplicate key"});
        }
        frame.current = std::move(key);
        break;
      }
      default:
        break;
    }
    return true;
  }

  explicit DuplicateKeyTracker(std::vector<Violation>* violations)
      : violations_(violations) {}

 private:
  struct Frame {
    std::set<std::string> seen;
    std::string current;
  };
  std::vector<Frame> frames_;
  std::vector<Violation>* violations_;
};

std::optional<uint64_t> AsUnsigned(const json& v) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0) {
    return static_cast<uint64_t>(v.get<int64_t>());
  }
  return std::nullopt;
}

void ParseRanges(const json& doc, const char* field,
                 std::vector<ByteRange>* out, std::vector<Violation>* errs) {
  auto it = doc.find(field);
  if (it == doc.end()) return;
  if (!it->is_array()) {
    errs->push_back({field, "must be an array of [start, end] pairs"});
    return;
  }
  for (size_t i = 0; i < it->size(); ++i) {
    const json& r = (*it)[i];
    const std::string path = std::string(field) + "[" + std::to_string(i) + "]";
    if (!r.is_array() || r.size() != 2) {
      errs->push_back({path, "must be a [start, end] pair"});
      continue;
    }
    auto a = AsUnsigned(r[0]);
    auto b = AsUnsigned(r[1]);
    if (!a || !b) {
      errs->push_back({path, "bounds must be non-negative integers"});
      continue;
    }
    out->push_back({*a, *b});
  }
}

void CheckRanges(const std::vector<ByteRange>& ranges, const char* field,
                 std::vector<Violation>* errs) {
  for (size_t i = 0; i < ranges.size(); ++i) {
    const std::string path = std::string(field) + "[" + std::to_string(i) + "]";
    if (ranges[i].start >= ranges[i].end) {
      errs->push_back({path, "start must be < end"});
    }
    if (ranges[i].end > kMaxRangeEnd) {
      errs->push_back({path, "end exceeds 2^32"});
    }
  }
}

}  // namespace

std::string_view OperatorName(OperatorKind op) {
  return kOperatorNames[static_cast<size_t>(op)];
}

std::optional<OperatorKind> OperatorFromName(std::string_view name) {
  for (size_t i = 0; i < kNumOperators; ++i) {
    if (kOperatorNames[i] == name) return static_cast<OperatorKind>(i);
  }
  return std::nullopt;
}

std::string_view SelectorModeName(SelectorMode mode) {
  return kSelectorModeNames[static_cast<size_t>(mode)];
}

std::optional<SelectorMode> SelectorModeFromName(std::string_view name) {
  for (size_t i = 0; i < kSelectorModeNames.size(); ++i) {
    if (kSelectorModeNames[i] == name) return static_cast<SelectorMode>(i);
  }
  return std::nullopt;
}

std::string EscapeBytes(std::span<const uint8_t> bytes, bool escape_quote) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size());
  for (uint8_t b : bytes) {
    if (b < 0x20 || b > 0x7e || b == '\\' || (escape_quote && b == '"')) {
      out += "\\x";
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0xf]);
    } else {
      out.push_back(static_cast<char>(b));
    }
  }
  return out;
}

std::optional<Bytes> UnescapeBytes(std::string_view text) {
  Bytes out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '\\') {
      out.push_back(static_cast<uint8_t>(c));
      continue;
    }
    if (i + 1 >= text.size()) return std::nullopt;
    const char n = text[i + 1];
    if (n == '\\' || n == '"') {
      out.push_back(static_cast<uint8_t>(n));
      i += 1;
    } else if (n == 'x' && i + 3 < text.size() && HexValue(text[i + 2]) >= 0 &&
               HexValue(text[i + 3]) >= 0) {
      out.push_back(static_cast<uint8_t>(HexValue(text[i + 2]) * 16 +
                                         HexValue(text[i + 3])));
      i += 3;
    } else {
      return std::nullopt;
    }
  }
  return out;
}

std::vector<Violation> ValidateRecipe(const MutationRecipe& r) {
  std::vector<Violation> errs;
  if (r.id.empty()) errs.push_back({"id", "must be a non-empty string"});
  if (r.selector.key.empty()) errs.push_back({"selector.key", "must be non-empty"});
  if (r.priority < 1) errs.push_back({"priority", "must be >= 1"});
  if (r.ttl_sec < 1) errs.push_back({"ttl_sec", "must be >= 1"});

  double sum = 0.0;
  for (const auto& [op, w] : r.operator_weights) {
    const std::string path = "operator_weights." + std::string(OperatorName(op));
    if (!(w >= 0.0)) errs.push_back({path, "weight must be >= 0"});
    if (w > 1.0) errs.push_back({path, "weight must be <= 1"});
    if (w > 0.0) sum += w;
  }
  if (!(sum > 0.0)) errs.push_back({"operator_weights", "weights must sum to > 0"});

  CheckRanges(r.focus_ranges, "focus_ranges", &errs);
  CheckRanges(r.protect_ranges, "protect_ranges", &errs);

  if (r.dictionary_tokens.size() > kMaxTokenCount) {
    errs.push_back({"dictionary_tokens", "more than 256 tokens"});
  }
  for (size_t i = 0; i < r.dictionary_tokens.size(); ++i) {
    const size_t n = r.dictionary_tokens[i].size();
    if (n < 1 || n > kMaxTokenLength) {
      errs.push_back({"dictionary_tokens[" + std::to_string(i) + "]",
                      "token length must be 1..64 bytes"});
    }
  }
  auto weight_of = [&](OperatorKind op) {
    auto it = r.operator_weights.find(op);
    return it == r.operator_weights.end() ? 0.0 : it->second;
  };
  if (r.dictionary_tokens.empty() &&
      (weight_of(OperatorKind::kInsertToken) > 0.0 ||
       weight_of(OperatorKind::kDictionaryOverwrite) > 0.0)) {
    errs.push_back({"dictionary_tokens",
                    "required when InsertToken or DictionaryOverwrite has weight"});
  }
  return errs;
}

MutationRecipe ParseRecipe(std::string_view text) {
  std::vector<Violation> errs;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), DuplicateKeyTracker(&errs));
  } catch (const json::exception& e) {
    throw SchemaViolation(std::vector<Violation>{{"$", std::string("malformed document: ") + e.what()}});
  }
  if (!doc.is_object()) throw SchemaViolation(std::vector<Violation>{{"$", "document must be an object"}});

  for (const auto& [key, _] : doc.items()) {
    if (std::find(kKnownFields.begin(), kKnownFields.end(), key) == kKnownFields.end()) {
      errs.push_back({key, "unknown field"});
    }
  }

  MutationRecipe r;
  r.selector = {};

  if (auto it = doc.find("id"); it == doc.end()) {
    errs.push_back({"id", "required"});
  } else if (!it->is_string()) {
    errs.push_back({"id", "must be a string"});
  } else {
    r.id = it->get<std::string>();
  }

  if (auto it = doc.find("selector"); it == doc.end()) {
    errs.push_back({"selector", "required"});
  } else if (!it->is_object()) {
    errs.push_back({"selector", "must be an object with mode and key"});
  } else {
    for (const auto& [key, _] : it->items()) {
      if (key != "mode" && key != "key") errs.push_back({"selector." + key, "unknown field"});
    }
    auto mode = it->find("mode");
    auto key = it->find("key");
    if (mode == it->end() || !mode->is_string()) {
      errs.push_back({"selector.mode", "required string"});
    } else if (auto m = SelectorModeFromName(mode->get<std::string>())) {
      r.selector.mode = *m;
    } else {
      errs.push_back({"selector.mode", "must be one of mode, seed_id, seed_hash, family"});
    }
    if (key == it->end() || !key->is_string()) {
      errs.push_back({"selector.key", "required string"});
    } else {
      r.selector.key = key->get<std::string>();
    }
  }

  for (const char* field : {"priority", "ttl_sec"}) {
    auto it = doc.find(field);
    if (it == doc.end()) {
      errs.push_back({field, "required"});
    } else if (!it->is_number_integer()) {
      errs.push_back({field, "must be an integer"});
    } else {
      const int64_t v = it->is_number_unsigned()
                            ? static_cast<int64_t>(std::min<uint64_t>(
                                  it->get<uint64_t>(), INT64_MAX))
                            : it->get<int64_t>();
      (std::string_view(field) == "priority" ? r.priority : r.ttl_sec) = v;
    }
  }

  if (auto it = doc.find("operator_weights"); it == doc.end()) {
    errs.push_back({"operator_weights", "required"});
  } else if (!it->is_object()) {
    errs.push_back({"operator_weights", "must be an object"});
  } else {
    for (const auto& [name, w] : it->items()) {
      const std::string path = "operator_weights." + name;
      auto op = OperatorFromName(name);
      if (!op) {
        errs.push_back({path, "unknown operator"});
      } else if (!w.is_number()) {
        errs.push_back({path, "weight must be a number"});
      } else {
        r.operator_weights[*op] = w.get<double>();
      }
    }
  }

  ParseRanges(doc, "focus_ranges", &r.focus_ranges, &errs);
  ParseRanges(doc, "protect_ranges", &r.protect_ranges, &errs);

  if (auto it = doc.find("dictionary_tokens"); it != doc.end()) {
    if (!it->is_array()) {
      errs.push_back({"dictionary_tokens", "must be an array of strings"});
    } else {
      for (size_t i = 0; i < it->size(); ++i) {
        const std::string path = "dictionary_tokens[" + std::to_string(i) + "]";
        if (!(*it)[i].is_string()) {
          errs.push_back({path, "must be a string"});
          continue;
        }
        auto bytes = UnescapeBytes((*it)[i].get<std::string>());
        if (!bytes) {
          errs.push_back({path, "malformed escape (use \\xNN)"});
          continue;
        }
        r.dictionary_tokens.push_back(std::move(*bytes));
      }
    }
  }

  if (auto it = doc.find("expected_signal"); it != doc.end()) {
    if (!it->is_string()) {
      errs.push_back({"expected_signal", "must be a string"});
    } else {
      r.expected_signal = it->get<std::string>();
    }
  }

  if (auto it = doc.find("fields"); it != doc.end()) {
    if (!it->is_object()) {
      errs.push_back({"fields", "must be an object of strings"});
    } else {
      for (const auto& [k, v] : it->items()) {
        if (!v.is_string()) {
          errs.push_back({"fields." + k, "must be a string"});
        } else {
          r.field_overrides[k] = v.get<std::string>();
        }
      }
    }
  }

  if (errs.empty()) errs = ValidateRecipe(r);
  if (!errs.empty()) throw SchemaViolation(std::move(errs));
  return r;
}

std::string SerializeRecipe(const MutationRecipe& r) {
  nlohmann::ordered_json doc;
  doc["id"] = r.id;
  doc["selector"] = {{"mode", SelectorModeName(r.selector.mode)}, {"key", r.selector.key}};
  doc["priority"] = r.priority;
  doc["ttl_sec"] = r.ttl_sec;
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  for (const auto& [op, w] : r.operator_weights) weights[std::string(OperatorName(op))] = w;
  doc["operator_weights"] = weights;
  auto ranges = [](const std::vector<ByteRange>& rs) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& br : rs) a.push_back({br.start, br.end});
    return a;
  };
  doc["focus_ranges"] = ranges(r.focus_ranges);
  doc["protect_ranges"] = ranges(r.protect_ranges);
  nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
  for (const auto& t : r.dictionary_tokens) tokens.push_back(EscapeBytes(t, false));
  doc["dictionary_tokens"] = tokens;
  doc["expected_signal"] = r.expected_signal;
  if (!r.field_overrides.empty()) doc["fields"] = r.field_overrides;
  return doc.dump(2);
}

TokenArena::TokenArena(std::span<const Bytes> tokens) {
  offsets_.reserve(tokens.size() + 1);
  offsets_.push_back(0);
  for (const auto& t : tokens) {
    bytes_.insert(bytes_.end(), t.begin(), t.end());
    offsets_.push_back(static_cast<uint32_t>(bytes_.size()));
  }
}

std::vector<ByteRange> MergeRanges(std::vector<ByteRange> ranges) {
  std::sort(ranges.begin(), ranges.end(), [](const ByteRange& a, const ByteRange& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<ByteRange> merged;
  for (const auto& r : ranges) {
    if (r.start >= r.end) continue;
    if (!merged.empty() && r.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, r.end);
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

double CompactRecipe::NormalizedWeight(OperatorKind op) const {
  const size_t i = static_cast<size_t>(op);
  const uint64_t lo = i == 0 ? 0 : cumulative_weights[i - 1];
  return std::ldexp(static_cast<double>(cumulative_weights[i] - lo), -62);
}

CompactRecipe LowerRecipe(const MutationRecipe& recipe) {
  std::array<double, kNumOperators> w{};
  double total = 0.0;
  for (const auto& [op, weight] : recipe.operator_weights) {
    if (weight > 0.0) {
      w[static_cast<size_t>(op)] = weight;
      total += weight;
    }
  }
  if (!(total > 0.0)) throw DegenerateWeights();
  if (auto errs = ValidateRecipe(recipe); !errs.empty()) {
    throw SchemaViolation(std::move(errs));
  }

  // Each operator gets its own fixed-point quota, so the relative error of
  // every recovered weight is ~2^-52 regardless of its magnitude. The few
  // units of rounding slack go to the heaviest operator.
  std::array<uint64_t, kNumOperators> quota{};
  int64_t assigned = 0;
  size_t heaviest = 0;
  for (size_t i = 0; i < kNumOperators; ++i) {
    quota[i] = static_cast<uint64_t>(std::floor(std::ldexp(w[i] / total, 62)));
    assigned += static_cast<int64_t>(quota[i]);
    if (w[i] > w[heaviest]) heaviest = i;
  }
  const int64_t slack = static_cast<int64_t>(kWeightUnit) - assigned;
  quota[heaviest] = static_cast<uint64_t>(static_cast<int64_t>(quota[heaviest]) + slack);

  CompactRecipe c;
  c.id = recipe.id;
  c.selector = recipe.selector;
  c.priority = recipe.priority;
  c.ttl_sec = recipe.ttl_sec;
  uint64_t acc = 0;
  for (size_t i = 0; i < kNumOperators; ++i) {
    acc += quota[i];
    c.cumulative_weights[i] = acc;
  }
  c.focus_ranges = MergeRanges(recipe.focus_ranges);
  c.protect_ranges = MergeRanges(recipe.protect_ranges);
  c.tokens = TokenArena(recipe.dictionary_tokens);
  c.field_overrides = recipe.field_overrides;
  return c;
}

OperatorKind ChooseOperator(const CompactRecipe& compact, Rng& rng) {
  const uint64_t r = rng.Next() >> 2;  // uniform in [0, kWeightUnit)
  const auto& cum = compact.cumulative_weights;
  for (size_t i = 0; i + 1 < kNumOperators; ++i) {
    if (r < cum[i]) return static_cast<OperatorKind>(i);
  }
  return OperatorKind::kDictionaryOverwrite;
}

std::optional<std::string_view> BuiltinRecipeDocument(std::string_view name) {
  if (name == "json_nesting") return kJsonNesting;
  if (name == "default") return kDefaultRule;
  return std::nullopt;
}

}  // namespace recipefuzz
