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

#include "recipefuzz/microbench.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace recipefuzz {
namespace {

constexpr size_t kBenchMaxSize = 4096;

const char* const kKeys[] = {"id", "name", "value", "items", "ok", "nested", "n"};

void EmitValue(Rng& rng, int depth, std::string& s) {
  switch (depth > 2 ? rng.Below(4) : rng.Below(6)) {
    case 0:
      s += std::to_string(rng.Between(-1000, 100000));
      break;
    case 1:
      s += '"';
      for (int i = 0, n = static_cast<int>(rng.Between(0, 12)); i < n; ++i) {
        s += static_cast<char>('a' + rng.Below(26));
      }
      s += '"';
      break;
    case 2:
      s += rng.Coin() ? "true" : "false";
      break;
    case 3:
      s += "null";
      break;
    case 4: {
      s += '[';
      for (int i = 0, n = static_cast<int>(rng.Between(0, 4)); i < n; ++i) {
        if (i) s += ',';
        EmitValue(rng, depth + 1, s);
      }
      s += ']';
      break;
    }
    default: {
      s += '{';
      for (int i = 0, n = static_cast<int>(rng.Between(0, 4)); i < n; ++i) {
        if (i) s += ',';
        s += '"';
        s += kKeys[rng.Below(std::size(kKeys))];
        s += "\":";
        EmitValue(rng, depth + 1, s);
      }
      s += '}';
      break;
    }
  }
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CompactRecipe BenchRecipe() {
  MutationRecipe r = ParseRecipe(*BuiltinRecipeDocument("json_nesting"));
  // The document's abbreviated digest names one specific seed; the bench
  // wants the recipe consulted on every call.
  r.selector = Selector{};
  return LowerRecipe(r);
}

}  // namespace

std::string_view BenchConfigName(BenchConfig config) {
  switch (config) {
    case BenchConfig::kVanilla:
      return "vanilla";
    case BenchConfig::kFpEmpty:
      return "fp-empty";
    case BenchConfig::kFpActive:
      return "fp-active";
  }
  return "?";
}

std::optional<BenchConfig> BenchConfigFromName(std::string_view name) {
  for (auto c : {BenchConfig::kVanilla, BenchConfig::kFpEmpty, BenchConfig::kFpActive}) {
    if (BenchConfigName(c) == name) return c;
  }
  return std::nullopt;
}

std::vector<SeedEntry> GenerateJsonCorpus(size_t count, uint64_t seed) {
  std::vector<SeedEntry> corpus;
  corpus.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    Rng rng(MixSeed(seed, i));
    std::string doc;
    EmitValue(rng, 0, doc);
    char id[32];
    std::snprintf(id, sizeof id, "seed_%06zu", i);
    corpus.push_back(MakeSeed(id, Bytes(doc.begin(), doc.end()), "json"));
  }
  return corpus;
}

BenchReport BenchDispatch(BenchConfig config, uint64_t calls, CorpusView corpus,
                          uint64_t seed) {
  if (calls == 0) throw ZeroCalls();
  if (corpus.empty()) throw ConfigInvalid("microbench corpus is empty");

  VanillaHavocMutator vanilla;
  RecipeDispatchMutator dispatch(/*fallback_on_miss=*/false);
  if (config == BenchConfig::kFpActive) dispatch.Install(BenchRecipe());
  MutatorApi& m = config == BenchConfig::kVanilla
                      ? static_cast<MutatorApi&>(vanilla)
                      : static_cast<MutatorApi&>(dispatch);

  Rng rng(seed);
  Bytes out;
  out.reserve(kBenchMaxSize);
  uint64_t sink = 0;
  const size_t n = corpus.size();
  const auto start = std::chrono::steady_clock::now();
  for (uint64_t i = 0; i < calls; ++i) {
    m.Fuzz(corpus[i % n], corpus, rng, kBenchMaxSize, out);
    sink += out.size();
  }
  const auto stop = std::chrono::steady_clock::now();
  // Keeps the loop observable to the optimizer.
  asm volatile("" : : "r"(sink) : "memory");

  BenchReport r;
  r.config = config;
  r.calls = calls;
  r.elapsed_ns = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
  r.elapsed_ns = std::max<uint64_t>(r.elapsed_ns, 1);
  r.ns_per_call = static_cast<double>(r.elapsed_ns) / static_cast<double>(calls);
  r.calls_per_sec = static_cast<double>(calls) * 1e9 / static_cast<double>(r.elapsed_ns);
  return r;
}

ProtocolResult RunBenchProtocol(uint64_t calls, int reps, CorpusView corpus,
                                uint64_t seed) {
  if (reps < 1) throw ConfigInvalid("reps must be >= 1");
  static constexpr BenchConfig kConfigs[] = {
      BenchConfig::kVanilla, BenchConfig::kFpEmpty, BenchConfig::kFpActive};
  std::vector<BenchReport> by_config[3];
  for (int rep = 0; rep < reps; ++rep) {
    for (size_t c = 0; c < 3; ++c) {
      by_config[c].push_back(
          BenchDispatch(kConfigs[c], calls, corpus, MixSeed(seed, static_cast<uint64_t>(rep))));
    }
  }
  ProtocolResult res;
  std::vector<double> ns[3], cps[3];
  for (size_t c = 0; c < 3; ++c) {
    for (const auto& r : by_config[c]) {
      res.runs.push_back(r);
      ns[c].push_back(r.ns_per_call);
      cps[c].push_back(r.calls_per_sec);
    }
  }
  res.median_ns_vanilla = Median(ns[0]);
  res.median_ns_fp_empty = Median(ns[1]);
  res.median_ns_fp_active = Median(ns[2]);
  res.slowdown_fp_empty = res.median_ns_fp_empty / res.median_ns_vanilla;
  res.slowdown_fp_active = res.median_ns_fp_active / res.median_ns_vanilla;
  res.throughput_ratio_fp_empty = Median(cps[1]) / Median(cps[0]);
  res.gate_passed = res.slowdown_fp_empty <= kSlowdownGate;
  return res;
}

std::string FormatBenchReport(const BenchReport& r) {
  std::ostringstream os;
  os << "config=" << BenchConfigName(r.config) << "\n"
     << "calls=" << r.calls << "\n"
     << "elapsed_ns=" << r.elapsed_ns << "\n"
     << "calls_per_sec=" << r.calls_per_sec << "\n"
     << "ns_per_call=" << r.ns_per_call << "\n";
  return os.str();
}

std::string FormatProtocol(const ProtocolResult& p) {
  std::ostringstream os;
  for (const auto& r : p.runs) {
    os << "run." << BenchConfigName(r.config) << ".ns_per_call=" << r.ns_per_call
       << "\n";
  }
  os << "median_ns_per_call.vanilla=" << p.median_ns_vanilla << "\n"
     << "median_ns_per_call.fp-empty=" << p.median_ns_fp_empty << "\n"
     << "median_ns_per_call.fp-active=" << p.median_ns_fp_active << "\n"
     << "slowdown.fp-empty=" << p.slowdown_fp_empty << "\n"
     << "slowdown.fp-active=" << p.slowdown_fp_active << "\n"
     << "throughput_ratio.fp-empty=" << p.throughput_ratio_fp_empty << "\n"
     << "gate_max_slowdown=" << kSlowdownGate << "\n"
     << "gate=" << (p.gate_passed ? "pass" : "fail") << "\n";
  return os.str();
}

}  // namespace recipefuzz
