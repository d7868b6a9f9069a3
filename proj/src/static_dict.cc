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

#include "recipefuzz/static_dict.h"

#include <elf.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <unordered_map>

#include "recipefuzz/errors.h"

namespace recipefuzz {
namespace {

struct Section {
  std::string name;
  uint32_t type = 0;
  uint64_t flags = 0;
  uint64_t offset = 0;
  uint64_t size = 0;
};

template <typename T>
T Load(std::span<const uint8_t> image, uint64_t off) {
  if (off > image.size() || image.size() - off < sizeof(T)) throw NotElf();
  T v;
  std::memcpy(&v, image.data() + off, sizeof(T));
  return v;
}

template <typename Ehdr, typename Shdr>
std::vector<Section> ReadSections(std::span<const uint8_t> image) {
  const auto eh = Load<Ehdr>(image, 0);
  if (eh.e_shentsize != sizeof(Shdr)) throw NotElf();
  std::vector<Shdr> raw;
  for (uint64_t i = 0; i < eh.e_shnum; ++i) {
    raw.push_back(Load<Shdr>(image, eh.e_shoff + i * sizeof(Shdr)));
  }
  if (eh.e_shstrndx >= raw.size()) throw NoRodataSection();
  const Shdr& strtab = raw[eh.e_shstrndx];
  if (strtab.sh_offset > image.size() || image.size() - strtab.sh_offset < strtab.sh_size) {
    throw NotElf();
  }
  const auto names = image.subspan(strtab.sh_offset, strtab.sh_size);
  std::vector<Section> out;
  for (const Shdr& s : raw) {
    Section sec;
    if (s.sh_name < names.size()) {
      const auto* p = reinterpret_cast<const char*>(names.data() + s.sh_name);
      sec.name.assign(p, strnlen(p, names.size() - s.sh_name));
    }
    sec.type = s.sh_type;
    sec.flags = s.sh_flags;
    sec.offset = s.sh_offset;
    sec.size = s.sh_size;
    out.push_back(std::move(sec));
  }
  return out;
}

bool Printable(uint8_t b) { return b >= 0x20 && b <= 0x7e; }

}  // namespace

TokenInventory ExtractStrings(std::span<const uint8_t> image, size_t min_len, bool all_readonly) {
  if (image.size() < EI_NIDENT || std::memcmp(image.data(), ELFMAG, SELFMAG) != 0) {
    throw NotElf();
  }
  if (image[EI_DATA] != ELFDATA2LSB) throw NotElf();
  std::vector<Section> sections;
  if (image[EI_CLASS] == ELFCLASS64) {
    sections = ReadSections<Elf64_Ehdr, Elf64_Shdr>(image);
  } else if (image[EI_CLASS] == ELFCLASS32) {
    sections = ReadSections<Elf32_Ehdr, Elf32_Shdr>(image);
  } else {
    throw NotElf();
  }

  std::vector<const Section*> scan;
  for (const auto& s : sections) {
    if (s.type == SHT_NOBITS || s.type == SHT_NULL) continue;
    const bool pick = all_readonly ? (s.flags & SHF_ALLOC) && !(s.flags & SHF_WRITE) &&
                                         !(s.flags & SHF_EXECINSTR)
                                   : s.name == ".rodata";
    if (pick) scan.push_back(&s);
  }
  if (scan.empty()) throw NoRodataSection();

  TokenInventory inv;
  inv.min_len = std::max<size_t>(min_len, 1);
  inv.binary_size = image.size();
  std::unordered_map<std::string, size_t> index;
  auto emit = [&](const uint8_t* b, size_t n) {
    if (n < inv.min_len) return;
    std::string tok(reinterpret_cast<const char*>(b), n);
    auto [it, fresh] = index.emplace(tok, inv.tokens.size());
    if (fresh) inv.tokens.push_back({std::move(tok), 0});
    ++inv.tokens[it->second].count;
  };
  for (const Section* s : scan) {
    if (!inv.source.empty()) inv.source += ",";
    inv.source += s->name;
    if (s->offset > image.size() || image.size() - s->offset < s->size) throw NotElf();
    const auto data = image.subspan(s->offset, s->size);
    size_t start = 0;
    for (size_t i = 0; i <= data.size(); ++i) {
      if (i < data.size() && Printable(data[i])) continue;
      emit(data.data() + start, i - start);
      start = i + 1;
    }
  }
  return inv;
}

TokenInventory ExtractStringsFromFile(const std::filesystem::path& path, size_t min_len,
                                      bool all_readonly) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const Bytes image((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ExtractStrings(image, min_len, all_readonly);
}

std::string WriteDictionary(const TokenInventory& inv) {
  std::string out;
  for (size_t i = 0; i < inv.tokens.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "token_%04zu=\"", i);
    const auto& t = inv.tokens[i].token;
    out += name;
    out += EscapeBytes({reinterpret_cast<const uint8_t*>(t.data()), t.size()}, true);
    out += "\"\n";
  }
  return out;
}

std::vector<Bytes> ParseDictionary(std::string_view text) {
  std::vector<Bytes> tokens;
  size_t pos = 0;
  for (size_t line_no = 1; pos < text.size(); ++line_no) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto open = line.find('"');
    if (open == std::string_view::npos || line.size() < open + 2 || line.back() != '"') {
      throw ValidationError("dictionary line " + std::to_string(line_no) + " is malformed");
    }
    auto value = UnescapeBytes(line.substr(open + 1, line.size() - open - 2));
    if (!value) {
      throw ValidationError("dictionary line " + std::to_string(line_no) + " has a bad escape");
    }
    tokens.push_back(std::move(*value));
  }
  return tokens;
}

std::string InventoryReport(const TokenInventory& inv, size_t top_k) {
  std::vector<const TokenCount*> order;
  for (const auto& t : inv.tokens) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const TokenCount* a, const TokenCount* b) { return a->count > b->count; });
  std::string out = "binary_size=" + std::to_string(inv.binary_size) + "\n" +
                    "source=" + inv.source + "\n" + "min_len=" + std::to_string(inv.min_len) +
                    "\n" + "unique_tokens=" + std::to_string(inv.tokens.size()) + "\n";
  for (size_t i = 0; i < std::min(top_k, order.size()); ++i) {
    const auto& t = order[i]->token;
    out += "top." + std::to_string(i + 1) + "=" +
           EscapeBytes({reinterpret_cast<const uint8_t*>(t.data()), t.size()}, true) + " " +
           std::to_string(order[i]->count) + "\n";
  }
  return out;
}

}  // namespace recipefuzz
