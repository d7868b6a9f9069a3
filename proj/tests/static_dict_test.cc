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


#include <gtest/gtest.h>

#include "elf_fixture.h"
#include "recipefuzz/artifacts.h"
#include "recipefuzz/errors.h"
#include "recipefuzz/static_dict.h"
#include "test_util.h"

namespace recipefuzz {
namespace {

using testing::BuildElf32;
using testing::BuildElf64;
using testing::FixtureSection;
using testing::PlantedSections;

const std::vector<std::pair<std::string, uint64_t>> kExpected = {
    {"null", 2}, {"true", 1}, {"usage: %s <file>", 1}, {"xkey-\"quoted\"\\", 1}, {"false", 1}};

void ExpectPlanted(const TokenInventory& inv) {
  ASSERT_EQ(inv.tokens.size(), kExpected.size());
  for (size_t i = 0; i < kExpected.size(); ++i) {
    EXPECT_EQ(inv.tokens[i].token, kExpected[i].first);
    EXPECT_EQ(inv.tokens[i].count, kExpected[i].second);
  }
  EXPECT_EQ(inv.source, ".rodata");
}

TEST(ExtractStrings, PlantedElf64) {
  const Bytes image = BuildElf64(PlantedSections());
  const auto inv = ExtractStrings(image);
  ExpectPlanted(inv);
  EXPECT_EQ(inv.binary_size, image.size());
  EXPECT_EQ(inv.min_len, kDefaultMinLen);
}

TEST(ExtractStrings, PlantedElf32) { ExpectPlanted(ExtractStrings(BuildElf32(PlantedSections()))); }

TEST(ExtractStrings, MinLength) {
  const auto image = BuildElf64(PlantedSections());
  const auto two = ExtractStrings(image, 2);
  EXPECT_EQ(two.tokens.size(), kExpected.size() + 1);
  EXPECT_EQ(two.tokens[2].token, "ok");
  const auto six = ExtractStrings(image, 6);
  ASSERT_EQ(six.tokens.size(), 2u);
  EXPECT_EQ(six.tokens[0].token, "usage: %s <file>");
}

TEST(ExtractStrings, AllReadonlyWidensTheScan) {
  const auto inv = ExtractStrings(BuildElf64(PlantedSections()), kDefaultMinLen, true);
  EXPECT_EQ(inv.source, ".rodata,.eh_frame");
  std::vector<std::string> tokens;
  for (const auto& t : inv.tokens) tokens.push_back(t.token);
  EXPECT_NE(std::find(tokens.begin(), tokens.end(), "readonly_extra"), tokens.end());
  EXPECT_EQ(std::find(tokens.begin(), tokens.end(), "writable_str"), tokens.end());
  EXPECT_EQ(std::find(tokens.begin(), tokens.end(), "codeonly"), tokens.end());
}

TEST(ExtractStrings, Errors) {
  EXPECT_THROW(ExtractStrings(testing::B("not an elf at all, just text")), NotElf);
  EXPECT_THROW(ExtractStrings(Bytes{}), NotElf);
  Bytes truncated = BuildElf64(PlantedSections());
  truncated.resize(80);
  EXPECT_THROW(ExtractStrings(truncated), NotElf);
  auto sections = PlantedSections();
  sections.erase(sections.begin() + 1);
  EXPECT_THROW(ExtractStrings(BuildElf64(sections)), NoRodataSection);
  EXPECT_THROW(ExtractStringsFromFile("/nonexistent/binary"), IoError);
}

TEST(ExtractStrings, FromFile) {
  testing::TempDir dir;
  const Bytes image = BuildElf64(PlantedSections());
  WriteTextFile(dir / "bin", std::string(image.begin(), image.end()));
  ExpectPlanted(ExtractStringsFromFile(dir / "bin"));
}

TEST(Dictionary, LinesAndRoundTrip) {
  const auto inv = ExtractStrings(BuildElf64(PlantedSections()));
  const std::string dict = WriteDictionary(inv);
  EXPECT_EQ(dict.substr(0, dict.find('\n')), "token_0000=\"null\"");
  EXPECT_NE(dict.find("token_0003=\"xkey-\\x22quoted\\x22\\x5c\"\n"), std::string::npos);
  const auto back = ParseDictionary(dict);
  ASSERT_EQ(back.size(), inv.tokens.size());
  for (size_t i = 0; i < back.size(); ++i) EXPECT_EQ(testing::S(back[i]), inv.tokens[i].token);
}

TEST(Dictionary, EdgeCases) {
  EXPECT_EQ(WriteDictionary(TokenInventory{}), "");
  TokenInventory brace;
  brace.tokens = {{"{", 1}};
  EXPECT_EQ(WriteDictionary(brace), "token_0000=\"{\"\n");
  const auto parsed = ParseDictionary("# comment\n\n\"bare\"\nkw=\"\\x00\\x01\"\r\n");
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(testing::S(parsed[0]), "bare");
  EXPECT_EQ(parsed[1], (Bytes{0, 1}));
  EXPECT_THROW(ParseDictionary("kw=unquoted\n"), ValidationError);
  EXPECT_THROW(ParseDictionary("kw=\"\\q\"\n"), ValidationError);
}

TEST(InventoryReport, ListsTopTokens) {
  const auto inv = ExtractStrings(BuildElf64(PlantedSections()));
  const std::string report = InventoryReport(inv, 2);
  EXPECT_NE(report.find("unique_tokens=5\n"), std::string::npos);
  EXPECT_NE(report.find("top.1=null 2\n"), std::string::npos);
  EXPECT_NE(report.find("top.2=true 1\n"), std::string::npos);
  EXPECT_EQ(report.find("top.3"), std::string::npos);
}

}  // namespace
}  // namespace recipefuzz
