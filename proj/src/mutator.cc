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

#include "recipefuzz/mutator.h"

#include <algorithm>

#include "recipefuzz/digest.h"

namespace recipefuzz {
namespace {

// Calls fn(start, end) for each maximal writable segment, in order.
template <typename Fn>
void ForEachWritableSegment(std::span<const ByteRange> focus,
                            std::span<const ByteRange> protect, uint64_t len,
                            Fn&& fn) {
  auto subtract = [&](uint64_t a, uint64_t b) {
    // Emit [a, b) minus every protect range.
    for (const auto& p : protect) {
      if (p.end <= a) continue;
      if (p.start >= b) break;
      if (p.start > a) fn(a, p.start);
      a = std::max(a, p.end);
      if (a >= b) return;
    }
    if (a < b) fn(a, b);
  };
  if (focus.empty()) {
    subtract(0, len);
    return;
  }
  for (const auto& f : focus) {
    if (f.start >= len) break;
    subtract(f.start, std::min(f.end, len));
  }
}

struct Pick {
  uint64_t offset;
  uint64_t segment_end;
};

std::optional<Pick> PickWritable(const CompactRecipe& c, uint64_t len, Rng& rng) {
  uint64_t total = 0;
  ForEachWritableSegment(c.focus_ranges, c.protect_ranges, len,
                         [&](uint64_t a, uint64_t b) { total += b - a; });
  if (total == 0) return std::nullopt;
  uint64_t k = rng.Below(total);
  std::optional<Pick> pick;
  ForEachWritableSegment(c.focus_ranges, c.protect_ranges, len,
                         [&](uint64_t a, uint64_t b) {
                           if (pick) return;
                           if (k < b - a) {
                             pick = Pick{a + k, b};
                           } else {
                             k -= b - a;
                           }
                         });
  return pick;
}

void ApplyArith(uint8_t* p, size_t width, bool big_endian, int delta) {
  uint64_t v = 0;
  for (size_t i = 0; i < width; ++i) {
    const size_t idx = big_endian ? i : width - 1 - i;
    v = (v << 8) | p[idx];
  }
  v += static_cast<uint64_t>(static_cast<int64_t>(delta));
  for (size_t i = 0; i < width; ++i) {
    const size_t idx = big_endian ? width - 1 - i : i;
    p[idx] = static_cast<uint8_t>(v >> (8 * i));
  }
}

constexpr size_t kMaxOverwrite = 32;
constexpr size_t kMaxSpliceCut = 32;
constexpr size_t kMaxSpliceDonor = 64;
constexpr size_t kMaxDelete = 32;
constexpr int kArithMax = 35;

}  // namespace

SeedEntry MakeSeed(std::string seed_id, Bytes bytes, std::string family) {
  SeedEntry e;
  e.seed_id = std::move(seed_id);
  e.seed_hash = Sha256Hex(bytes);
  e.bytes = std::move(bytes);
  e.family = std::move(family);
  return e;
}

std::optional<uint64_t> PickWritableOffset(std::span<const ByteRange> focus,
                                           std::span<const ByteRange> protect,
                                           uint64_t input_len, Rng& rng) {
  CompactRecipe c;
  c.focus_ranges = MergeRanges({focus.begin(), focus.end()});
  c.protect_ranges = MergeRanges({protect.begin(), protect.end()});
  auto pick = PickWritable(c, input_len, rng);
  if (!pick) return std::nullopt;
  return pick->offset;
}

MutationOutcome MutateInto(const CompactRecipe& c, std::span<const uint8_t> input,
                           CorpusView corpus, Rng& rng, size_t max_size,
                           Bytes& out) {
  max_size = std::max<size_t>(max_size, 1);
  const size_t keep = std::min(input.size(), max_size);
  out.assign(input.begin(), input.begin() + keep);
  if (out.empty()) out.push_back(0);
  const size_t len = out.size();

  MutationOutcome r;
  r.sampled = ChooseOperator(c, rng);
  auto miss = [&]() {
    r.miss = true;
    return r;
  };

  const auto pick = PickWritable(c, len, rng);
  if (!pick) return miss();
  const size_t o = pick->offset;
  const size_t room = pick->segment_end - o;

  switch (r.sampled) {
    case OperatorKind::kBitFlip:
      out[o] ^= static_cast<uint8_t>(1u << rng.Below(8));
      break;
    case OperatorKind::kOverwriteRange: {
      const size_t n = 1 + rng.Below(std::min(room, kMaxOverwrite));
      for (size_t i = 0; i < n; ++i) out[o + i] = rng.Byte();
      break;
    }
    case OperatorKind::kInsertToken: {
      if (c.tokens.empty()) return miss();
      auto tok = c.tokens[rng.Below(c.tokens.size())];
      if (len + tok.size() > max_size) return miss();
      out.insert(out.begin() + static_cast<ptrdiff_t>(o), tok.begin(), tok.end());
      break;
    }
    case OperatorKind::kArith: {
      static constexpr size_t kWidths[] = {1, 2, 4};
      size_t width = kWidths[rng.Below(3)];
      while (width > room) width /= 2;
      const bool big_endian = width > 1 && rng.Coin();
      int delta = static_cast<int>(rng.Between(1, kArithMax));
      if (rng.Coin()) delta = -delta;
      ApplyArith(out.data() + o, width, big_endian, delta);
      break;
    }
    case OperatorKind::kSplice: {
      if (corpus.empty()) return miss();
      const Bytes& donor = corpus[rng.Below(corpus.size())].bytes;
      if (donor.empty()) return miss();
      const size_t cut = 1 + rng.Below(std::min(room, kMaxSpliceCut));
      const size_t from = rng.Below(donor.size());
      size_t take = 1 + rng.Below(std::min(donor.size() - from, kMaxSpliceDonor));
      take = std::min(take, max_size - (len - cut));
      auto at = out.begin() + static_cast<ptrdiff_t>(o);
      out.erase(at, at + static_cast<ptrdiff_t>(cut));
      out.insert(out.begin() + static_cast<ptrdiff_t>(o),
                 donor.begin() + static_cast<ptrdiff_t>(from),
                 donor.begin() + static_cast<ptrdiff_t>(from + take));
      break;
    }
    case OperatorKind::kDeleteBlock: {
      if (len < 2) return miss();
      const size_t n = 1 + rng.Below(std::min({room, len - 1, kMaxDelete}));
      auto at = out.begin() + static_cast<ptrdiff_t>(o);
      out.erase(at, at + static_cast<ptrdiff_t>(n));
      break;
    }
    case OperatorKind::kDictionaryOverwrite: {
      if (c.tokens.empty()) return miss();
      auto tok = c.tokens[rng.Below(c.tokens.size())];
      if (tok.size() > room) return miss();
      std::copy(tok.begin(), tok.end(), out.begin() + static_cast<ptrdiff_t>(o));
      break;
    }
  }
  r.hit = true;
  r.op_applied = r.sampled;
  return r;
}

MutationOutcome Mutate(const CompactRecipe& compact, std::span<const uint8_t> input,
                       CorpusView corpus, Rng& rng, size_t max_size) {
  Bytes out;
  MutationOutcome r = MutateInto(compact, input, corpus, rng, max_size, out);
  r.output = std::move(out);
  return r;
}

bool SelectorMatches(const Selector& s, const SeedEntry& seed) {
  switch (s.mode) {
    case SelectorMode::kMode:
      return true;
    case SelectorMode::kSeedId:
      return seed.seed_id == s.key;
    case SelectorMode::kFamily:
      return seed.family == s.key;
    case SelectorMode::kSeedHash: {
      // Abbreviated digests ("9c4f...a7b1") match on prefix and suffix.
      const auto dots = s.key.find("...");
      if (dots == std::string::npos) return seed.seed_hash == s.key;
      const std::string_view key(s.key);
      const auto prefix = key.substr(0, dots);
      const auto suffix = key.substr(dots + 3);
      const std::string_view h(seed.seed_hash);
      return h.size() >= prefix.size() + suffix.size() && h.starts_with(prefix) &&
             h.ends_with(suffix);
    }
  }
  return false;
}

void HavocMutate(std::span<const uint8_t> input, Rng& rng, size_t max_size,
                 Bytes& out) {
  static constexpr uint8_t kInteresting[] = {0x00, 0x01, 0x10, 0x20, 0x40,
                                             0x64, 0x7f, 0x80, 0xff};
  max_size = std::max<size_t>(max_size, 1);
  out.assign(input.begin(), input.begin() + std::min(input.size(), max_size));
  if (out.empty()) out.push_back(0);
  const int stack = 1 << (1 + rng.Below(4));
  for (int i = 0; i < stack; ++i) {
    const size_t at = rng.Below(out.size());
    switch (rng.Below(6)) {
      case 0:
        out[at] ^= static_cast<uint8_t>(1u << rng.Below(8));
        break;
      case 1:
        out[at] = rng.Byte();
        break;
      case 2:
        out[at] = static_cast<uint8_t>(out[at] + rng.Between(-kArithMax, kArithMax));
        break;
      case 3:
        out[at] = kInteresting[rng.Below(sizeof(kInteresting))];
        break;
      case 4:
        if (out.size() > 1) out.erase(out.begin() + static_cast<ptrdiff_t>(at));
        break;
      case 5:
        if (out.size() < max_size) {
          out.insert(out.begin() + static_cast<ptrdiff_t>(at), rng.Byte());
        }
        break;
    }
  }
}

FuzzCall VanillaHavocMutator::Fuzz(const SeedEntry& seed, CorpusView, Rng& rng,
                                   size_t max_size, Bytes& out) {
  HavocMutate(seed.bytes, rng, max_size, out);
  return {};
}

void RecipeDispatchMutator::Install(CompactRecipe recipe) {
  auto at = std::upper_bound(recipes_.begin(), recipes_.end(), recipe.priority,
                             [](int64_t p, const CompactRecipe& r) {
                               return p > r.priority;
                             });
  recipes_.insert(at, std::move(recipe));
}

FuzzCall RecipeDispatchMutator::Fuzz(const SeedEntry& seed, CorpusView corpus,
                                     Rng& rng, size_t max_size, Bytes& out) {
  FuzzCall call;
  if (recipes_.empty()) {
    HavocMutate(seed.bytes, rng, max_size, out);
    return call;
  }
  for (const auto& r : recipes_) {
    if (!SelectorMatches(r.selector, seed)) continue;
    call.recipe = &r;
    break;
  }
  if (call.recipe != nullptr) {
    auto res = MutateInto(*call.recipe, seed.bytes, corpus, rng, max_size, out);
    if (res.hit) {
      call.source = MutationSource::kRecipeHit;
      call.op_applied = res.op_applied;
      return call;
    }
  } else {
    out.assign(seed.bytes.begin(),
               seed.bytes.begin() + std::min(seed.bytes.size(), max_size));
  }
  if (fallback_on_miss_) {
    HavocMutate(seed.bytes, rng, max_size, out);
    call.source = MutationSource::kRecipeMissFallback;
  } else {
    call.source = MutationSource::kRecipeMiss;
  }
  return call;
}

}  // namespace recipefuzz
