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

#ifndef RECIPEFUZZ_STATIC_DICT_H_
#define RECIPEFUZZ_STATIC_DICT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recipefuzz/recipe.h"

namespace recipefuzz {

struct TokenCount {
  std::string token;
  uint64_t count = 0;
};

struct TokenInventory {
  std::vector<TokenCount> tokens;  // unique, in order of first occurrence
  std::string source;              // scanned section names, comma separated
  size_t min_len = 4;
  uint64_t binary_size = 0;
};

inline constexpr size_t kDefaultMinLen = 4;

// Maximal runs of printable ASCII (0x20..0x7e) of length >= min_len inside
// .rodata, or inside every allocated, non-writable, non-executable section
// when `all_readonly` is set. Little-endian ELF32/ELF64 only. Throws NotElf
// or NoRodataSection.
TokenInventory ExtractStrings(std::span<const uint8_t> image, size_t min_len = kDefaultMinLen,
                              bool all_readonly = false);
TokenInventory ExtractStringsFromFile(const std::filesystem::path& path,
                                      size_t min_len = kDefaultMinLen, bool all_readonly = false);

// One token_NNNN="value" line per token.
std::string WriteDictionary(const TokenInventory& inventory);

// Reads dictionary lines (name="value" or "value"; blank and # lines are
// skipped). Throws ValidationError on a malformed line.
std::vector<Bytes> ParseDictionary(std::string_view text);

// Key=value summary: binary size, unique tokens, top-k by occurrence.
std::string InventoryReport(const TokenInventory& inventory, size_t top_k = 10);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_STATIC_DICT_H_
