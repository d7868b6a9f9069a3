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

#include "recipefuzz/artifacts.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "recipefuzz/errors.h"

namespace recipefuzz {
namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw IoError("fuzzer_stats lacks " + key);
  std::string v = it->second;
  if (!v.empty() && v.back() == '%') v.pop_back();
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') throw IoError("fuzzer_stats " + key + " is not numeric");
  return d;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string FormatFuzzerStats(const FuzzerStats& s) {
  const std::pair<const char*, std::string> rows[] = {
      {"run_time", Fixed(s.run_time, 0)},
      {"execs_done", std::to_string(s.execs_done)},
      {"execs_per_sec", Fixed(s.execs_per_sec, 2)},
      {"cycles_done", std::to_string(s.cycles_done)},
      {"corpus_count", std::to_string(s.corpus_count)},
      {"edges_found", std::to_string(s.edges_found)},
      {"bitmap_cvg", Fixed(s.bitmap_cvg, 2) + "%"},
      {"last_find", Fixed(s.last_find, 0)},
      {"stability", Fixed(s.stability, 2) + "%"},
  };
  std::string out;
  for (const auto& [k, v] : rows) {
    char key[32];
    std::snprintf(key, sizeof key, "%-18s", k);
    out += std::string(key) + ": " + v + "\n";
  }
  return out;
}

std::map<std::string, std::string> ParseKeyValueLines(std::string_view text) {
  std::map<std::string, std::string> kv;
  size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    kv[std::string(Trim(line.substr(0, colon)))] = std::string(Trim(line.substr(colon + 1)));
  }
  return kv;
}

FuzzerStats FuzzerStatsFromText(std::string_view text) {
  const auto kv = ParseKeyValueLines(text);
  FuzzerStats s;
  s.run_time = ToDouble(kv, "run_time");
  s.execs_done = static_cast<uint64_t>(ToDouble(kv, "execs_done"));
  s.execs_per_sec = ToDouble(kv, "execs_per_sec");
  s.cycles_done = static_cast<uint64_t>(ToDouble(kv, "cycles_done"));
  s.corpus_count = static_cast<uint64_t>(ToDouble(kv, "corpus_count"));
  s.edges_found = static_cast<uint64_t>(ToDouble(kv, "edges_found"));
  s.bitmap_cvg = ToDouble(kv, "bitmap_cvg");
  s.last_find = ToDouble(kv, "last_find");
  s.stability = ToDouble(kv, "stability");
  return s;
}

std::string FormatCoverageCsv(const std::vector<CoveragePoint>& series) {
  std::string out = "t_sec,edges_found\n";
  for (const auto& p : series) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.0f,%llu\n", p.t_sec,
                  static_cast<unsigned long long>(p.edges_found));
    out += buf;
  }
  return out;
}

std::vector<CoveragePoint> ParseCoverageCsv(std::string_view text) {
  std::vector<CoveragePoint> series;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || Trim(line) != "t_sec,edges_found") {
    throw IoError("coverage.csv lacks the t_sec,edges_found header");
  }
  for (size_t row = 2; std::getline(in, line); ++row) {
    if (Trim(line).empty()) continue;
    const auto comma = line.find(',');
    CoveragePoint p;
    char* end = nullptr;
    p.t_sec = std::strtod(line.c_str(), &end);
    const bool t_ok = comma != std::string::npos && end == line.c_str() + comma;
    const std::string_view edges = Trim(std::string_view(line).substr(comma + 1));
    auto [ptr, ec] = std::from_chars(edges.data(), edges.data() + edges.size(), p.edges_found);
    if (!t_ok || ec != std::errc() || ptr != edges.data() + edges.size()) {
      throw IoError("coverage.csv row " + std::to_string(row) + " is malformed");
    }
    series.push_back(p);
  }
  return series;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace recipefuzz
