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

#ifndef RECIPEFUZZ_RECIPE_H_
#define RECIPEFUZZ_RECIPE_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recipefuzz/errors.h"
#include "recipefuzz/rng.h"

namespace recipefuzz {

using Bytes = std::vector<uint8_t>;

// The closed operator vocabulary. The order here is the order of the
// cumulative weight table in CompactRecipe.
enum class OperatorKind : uint8_t {
  kBitFlip,
  kOverwriteRange,
  kInsertToken,
  kArith,
  kSplice,
  kDeleteBlock,
  kDictionaryOverwrite,
};
inline constexpr size_t kNumOperators = 7;
inline constexpr std::array<OperatorKind, kNumOperators> kAllOperators = {
    OperatorKind::kBitFlip,     OperatorKind::kOverwriteRange,
    OperatorKind::kInsertToken, OperatorKind::kArith,
    OperatorKind::kSplice,      OperatorKind::kDeleteBlock,
    OperatorKind::kDictionaryOverwrite};

std::string_view OperatorName(OperatorKind op);
std::optional<OperatorKind> OperatorFromName(std::string_view name);

enum class SelectorMode : uint8_t { kMode, kSeedId, kSeedHash, kFamily };

std::string_view SelectorModeName(SelectorMode mode);
std::optional<SelectorMode> SelectorModeFromName(std::string_view name);

struct Selector {
  SelectorMode mode = SelectorMode::kMode;
  std::string key = "default";

  bool operator==(const Selector&) const = default;
};

// Half-open [start, end).
struct ByteRange {
  uint64_t start = 0;
  uint64_t end = 0;

  uint64_t size() const { return end - start; }
  bool operator==(const ByteRange&) const = default;
};

inline constexpr uint64_t kMaxRangeEnd = uint64_t{1} << 32;
inline constexpr size_t kMaxTokenLength = 64;
inline constexpr size_t kMaxTokenCount = 256;

struct MutationRecipe {
  std::string id;
  Selector selector;
  int64_t priority = 1;
  int64_t ttl_sec = 1800;
  std::map<OperatorKind, double> operator_weights;
  std::vector<ByteRange> focus_ranges;
  std::vector<ByteRange> protect_ranges;
  std::vector<Bytes> dictionary_tokens;
  // Audit-only. Nothing on the mutation path reads it.
  std::string expected_signal;
  // Optional "fields" object; carried through lowering, never interpreted.
  std::map<std::string, std::string> field_overrides;

  bool operator==(const MutationRecipe&) const = default;
};

// Parses and validates a recipe document. Throws SchemaViolation listing
// every problem found; never returns a partially valid recipe.
MutationRecipe ParseRecipe(std::string_view text);

// Returns the violations of an in-memory recipe (empty when valid).
std::vector<Violation> ValidateRecipe(const MutationRecipe& recipe);

// Canonical document form. ParseRecipe(SerializeRecipe(r)) == r for every
// valid r.
std::string SerializeRecipe(const MutationRecipe& recipe);

// Token escaping used in recipe documents: bytes outside 0x20..0x7e and the
// backslash are written as \xNN. When `escape_quote` is set the double quote
// is escaped as well (dictionary files need this, JSON strings do not).
std::string EscapeBytes(std::span<const uint8_t> bytes, bool escape_quote);
// Inverse of EscapeBytes; also accepts \\ and \". nullopt on a malformed
// escape.
std::optional<Bytes> UnescapeBytes(std::string_view text);

// Contiguous token storage: token i occupies [offsets[i], offsets[i+1]).
class TokenArena {
 public:
  TokenArena() = default;
  explicit TokenArena(std::span<const Bytes> tokens);

  size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  bool empty() const { return size() == 0; }
  std::span<const uint8_t> operator[](size_t i) const {
    return std::span<const uint8_t>(bytes_).subspan(
        offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

  bool operator==(const TokenArena&) const = default;

 private:
  std::vector<uint8_t> bytes_;
  std::vector<uint32_t> offsets_;
};

// Fixed-point unit of the cumulative weight table.
inline constexpr uint64_t kWeightUnit = uint64_t{1} << 62;

// The lowered form consumed by the mutator.
struct CompactRecipe {
  std::string id;
  Selector selector;
  int64_t priority = 1;
  int64_t ttl_sec = 1;
  // Nondecreasing; cumulative_weights.back() == kWeightUnit.
  std::array<uint64_t, kNumOperators> cumulative_weights{};
  // Sorted by start, merged, pairwise disjoint and non-adjacent.
  std::vector<ByteRange> focus_ranges;
  std::vector<ByteRange> protect_ranges;
  TokenArena tokens;
  std::map<std::string, std::string> field_overrides;

  double NormalizedWeight(OperatorKind op) const;
};

// Sorts and merges overlapping or adjacent ranges.
std::vector<ByteRange> MergeRanges(std::vector<ByteRange> ranges);

// Throws DegenerateWeights when every weight is zero, SchemaViolation when
// the recipe is otherwise invalid.
CompactRecipe LowerRecipe(const MutationRecipe& recipe);

// Samples one operator by the recipe's weights. Consumes exactly one draw.
OperatorKind ChooseOperator(const CompactRecipe& compact, Rng& rng);

// Built-in documents: "json_nesting" (object/array boundary tokens for a JSON
// parser) and "default" (the rule provider's dictionary recipe).
std::optional<std::string_view> BuiltinRecipeDocument(std::string_view name);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_RECIPE_H_
