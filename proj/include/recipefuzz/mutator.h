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

#ifndef RECIPEFUZZ_MUTATOR_H_
#define RECIPEFUZZ_MUTATOR_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recipefuzz/recipe.h"
#include "recipefuzz/rng.h"

namespace recipefuzz {

struct SeedEntry {
  std::string seed_id;
  std::string seed_hash;  // sha256 of bytes, lowercase hex
  Bytes bytes;
  std::string family;
};

// Builds an entry with its content digest filled in.
SeedEntry MakeSeed(std::string seed_id, Bytes bytes, std::string family = "default");

using CorpusView = std::span<const SeedEntry>;

struct MutationOutcome {
  Bytes output;
  std::optional<OperatorKind> op_applied;
  OperatorKind sampled = OperatorKind::kBitFlip;
  bool hit = false;
  bool miss = false;
};

// Allocation-free core of Mutate. `out` is overwritten; the return value has
// an empty `output`.
MutationOutcome MutateInto(const CompactRecipe& compact,
                           std::span<const uint8_t> input, CorpusView corpus,
                           Rng& rng, size_t max_size, Bytes& out);

// One sampled operator applied to `input`. Inputs longer than max_size are
// truncated first. An operator that cannot apply leaves the (truncated)
// input unchanged and records a miss.
MutationOutcome Mutate(const CompactRecipe& compact,
                       std::span<const uint8_t> input, CorpusView corpus,
                       Rng& rng, size_t max_size);

// Uniform draw from (focus ∩ [0, len)) \ protect, or from [0, len) \ protect
// when focus is empty.
std::optional<uint64_t> PickWritableOffset(std::span<const ByteRange> focus,
                                           std::span<const ByteRange> protect,
                                           uint64_t input_len, Rng& rng);

bool SelectorMatches(const Selector& selector, const SeedEntry& seed);

// Conventional havoc: 2..16 stacked random byte and bit edits.
void HavocMutate(std::span<const uint8_t> input, Rng& rng, size_t max_size,
                 Bytes& out);

enum class MutationSource : uint8_t {
  kHavoc,               // no recipe involved
  kRecipeHit,           // a recipe operator applied
  kRecipeMiss,          // recipe selected but nothing applied
  kRecipeMissFallback,  // recipe missed, havoc ran instead
};

struct FuzzCall {
  MutationSource source = MutationSource::kHavoc;
  std::optional<OperatorKind> op_applied;
  const CompactRecipe* recipe = nullptr;  // the recipe consulted, if any

  bool hit() const { return source == MutationSource::kRecipeHit; }
  bool miss() const {
    return source == MutationSource::kRecipeMiss ||
           source == MutationSource::kRecipeMissFallback;
  }
};

// The single call surface shared by every mutator configuration.
class MutatorApi {
 public:
  virtual ~MutatorApi() = default;
  virtual std::string_view Name() const = 0;
  virtual FuzzCall Fuzz(const SeedEntry& seed, CorpusView corpus, Rng& rng,
                        size_t max_size, Bytes& out) = 0;
};

class VanillaHavocMutator final : public MutatorApi {
 public:
  std::string_view Name() const override { return "vanilla"; }
  FuzzCall Fuzz(const SeedEntry& seed, CorpusView corpus, Rng& rng,
                size_t max_size, Bytes& out) override;
};

// Routes each call through the installed recipes. The highest-priority
// recipe whose selector matches the seed is used; with no recipes installed
// every call falls through to havoc. A selector mismatch or an inapplicable
// operator is a miss; with `fallback_on_miss` the call then runs havoc so
// the fuzzing loop never wastes an execution on an unchanged input.
class RecipeDispatchMutator final : public MutatorApi {
 public:
  explicit RecipeDispatchMutator(bool fallback_on_miss = true)
      : fallback_on_miss_(fallback_on_miss) {}

  void Install(CompactRecipe recipe);
  void Clear() { recipes_.clear(); }
  // Drops recipes for which `expired` returns true.
  template <typename Pred>
  void EraseIf(Pred expired) {
    std::erase_if(recipes_, expired);
  }
  const std::vector<CompactRecipe>& recipes() const { return recipes_; }

  std::string_view Name() const override {
    return recipes_.empty() ? "fp-empty" : "fp-active";
  }
  FuzzCall Fuzz(const SeedEntry& seed, CorpusView corpus, Rng& rng,
                size_t max_size, Bytes& out) override;

 private:
  std::vector<CompactRecipe> recipes_;  // sorted by descending priority
  bool fallback_on_miss_;
};

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_MUTATOR_H_
