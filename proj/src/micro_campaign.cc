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

#include "recipefuzz/micro_campaign.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <climits>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <tuple>

#include <boost/multiprecision/cpp_int.hpp>

#include "recipefuzz/digest.h"
#include "recipefuzz/errors.h"
#include "recipefuzz/mutator.h"

namespace recipefuzz {
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 4> kInterventionNames = {
    "default", "dictionary", "seed_focus", "per_seed_recipe"};

Bytes ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

uint64_t ToCount(const AuditEvent& e, std::string_view key) {
  auto v = e.Get(key);
  if (!v) throw IoError("micro_result event lacks " + std::string(key));
  return std::stoull(*v);
}

}  // namespace

std::string_view InterventionName(Intervention i) {
  return kInterventionNames[static_cast<size_t>(i)];
}

std::optional<Intervention> InterventionFromName(std::string_view name) {
  for (size_t i = 0; i < kInterventionNames.size(); ++i) {
    if (kInterventionNames[i] == name) return static_cast<Intervention>(i);
  }
  return std::nullopt;
}

namespace {

// sum(sign * weight * count), rounded once to the nearest double. Each
// weight is split into a 53-bit integer mantissa and a binary exponent so
// the sum is exact before the single rounding step; the result does not
// depend on term order.
double ExactWeightedSum(std::initializer_list<std::tuple<double, uint64_t, int>> terms) {
  using boost::multiprecision::cpp_int;
  struct Part {
    cpp_int mantissa;
    int exponent;
  };
  std::vector<Part> parts;
  int emin = INT_MAX;
  for (const auto& [w, n, sign] : terms) {
    if (!std::isfinite(w)) {
      double plain = 0.0;
      for (const auto& [w2, n2, s2] : terms) plain += s2 * w2 * static_cast<double>(n2);
      return plain;
    }
    if (w == 0.0 || n == 0) continue;
    int e = 0;
    const double m = std::frexp(std::fabs(w), &e);
    cpp_int mant = static_cast<int64_t>(std::ldexp(m, 53));
    mant *= n;
    if ((w < 0) != (sign < 0)) mant = -mant;
    parts.push_back({std::move(mant), e - 53});
    emin = std::min(emin, e - 53);
  }
  cpp_int sum = 0;
  for (const auto& p : parts) sum += p.mantissa << (p.exponent - emin);
  if (sum == 0) return 0.0;
  const bool negative = sum < 0;
  if (negative) sum = -sum;
  const auto bits = static_cast<int>(boost::multiprecision::msb(sum)) + 1;
  int exponent = emin;
  if (bits > 53) {
    const int shift = bits - 53;
    cpp_int q = sum >> shift;
    const cpp_int rem = sum - (q << shift);
    const cpp_int half = cpp_int(1) << (shift - 1);
    if (rem > half || (rem == half && (q & 1) != 0)) ++q;
    sum = q;
    exponent += shift;
  }
  const double v = std::ldexp(static_cast<double>(sum.convert_to<uint64_t>()), exponent);
  return negative ? -v : v;
}

}  // namespace

double ComputeReward(uint64_t delta_edges, uint64_t delta_paths, uint64_t delta_crashes,
                     uint64_t hits, uint64_t misses, const RewardWeights& w,
                     bool bitmap_available) {
  return ExactWeightedSum({bitmap_available ? std::tuple{w.alpha, delta_edges, 1}
                                            : std::tuple{w.beta, delta_paths, 1},
                           {w.gamma, delta_crashes, 1},
                           {w.delta_h, hits, 1},
                           {w.delta_m, misses, -1}});
}

Snapshot SnapshotCorpus(const fs::path& queue_dir, const fs::path& dest_dir) {
  std::error_code ec;
  if (!fs::is_directory(queue_dir, ec)) {
    throw IoError("queue directory missing: " + queue_dir.string());
  }
  std::vector<fs::path> entries;
  for (const auto& de : fs::directory_iterator(queue_dir)) {
    if (de.is_regular_file()) entries.push_back(de.path());
  }
  if (entries.empty()) throw EmptyQueue("queue is empty: " + queue_dir.string());
  std::sort(entries.begin(), entries.end());

  fs::create_directories(dest_dir, ec);
  if (ec) throw IoError("cannot create " + dest_dir.string() + ": " + ec.message());
  Snapshot snap;
  snap.dir = dest_dir;
  for (const auto& src : entries) {
    const Bytes data = ReadFile(src);
    const fs::path dst = dest_dir / src.filename();
    {
      std::ofstream out(dst, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size()));
      if (!out) throw IoError("cannot write " + dst.string());
    }
    fs::permissions(dst, fs::perms::owner_read | fs::perms::group_read | fs::perms::others_read,
                    ec);
    snap.manifest.emplace_back(src.filename().string(), Sha256Hex(data));
  }
  std::ofstream manifest(dest_dir / kManifestName, std::ios::trunc);
  for (const auto& [name, digest] : snap.manifest) manifest << digest << "  " << name << '\n';
  if (!manifest) throw IoError("cannot write snapshot manifest");
  return snap;
}

Snapshot OpenSnapshot(const fs::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw IoError("snapshot has no manifest: " + dir.string());
  Snapshot snap;
  snap.dir = dir;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto sep = line.find("  ");
    if (sep == std::string::npos) throw IoError("bad manifest line: " + line);
    snap.manifest.emplace_back(line.substr(sep + 2), line.substr(0, sep));
  }
  if (snap.manifest.empty()) throw EmptyQueue("snapshot is empty: " + dir.string());
  return snap;
}

std::vector<SeedEntry> LoadSnapshot(const Snapshot& snap) {
  std::vector<SeedEntry> seeds;
  seeds.reserve(snap.manifest.size());
  for (const auto& [name, digest] : snap.manifest) {
    SeedEntry e = MakeSeed(name, ReadFile(snap.dir / name));
    if (e.seed_hash != digest) throw IoError("snapshot entry changed: " + name);
    seeds.push_back(std::move(e));
  }
  return seeds;
}

MicroResult EvaluateCandidate(const Candidate& candidate, const std::vector<SeedEntry>& snapshot,
                              const MicroBudget& budget, const Executor& executor,
                              const RewardWeights& weights, uint64_t seed,
                              const ClockConfig& clock, size_t max_size) {
  if (budget.execs ? *budget.execs == 0 : !(budget.seconds > 0.0)) throw BudgetZero();
  if (snapshot.empty()) throw EmptyQueue("micro-campaign snapshot is empty");

  RecipeDispatchMutator mutator(/*fallback_on_miss=*/true);
  mutator.Install(LowerRecipe(candidate.recipe));
  CoverageLoop loop(executor, mutator, seed, max_size);
  for (const auto& s : snapshot) loop.Import(s, 0.0);

  MicroResult r;
  r.candidate_id = candidate.candidate_id;
  r.baseline_edges = loop.edges_found();
  const uint64_t base_paths = loop.paths_total();
  const uint64_t base_crashes = loop.counters().unique_crashes;
  const uint64_t replay_execs = loop.counters().execs;

  const bool virtual_time = clock.mode == ClockConfig::Mode::kVirtual;
  const double rate = clock.exec_rate > 0.0 ? clock.exec_rate : 1.0;
  uint64_t steps = 0;
  if (budget.execs || virtual_time) {
    const uint64_t n = budget.execs
                           ? *budget.execs
                           : std::max<uint64_t>(1, static_cast<uint64_t>(
                                                       std::llround(budget.seconds * rate)));
    for (; steps < n; ++steps) loop.Step(static_cast<double>(steps + 1) / rate);
    r.elapsed_sec = static_cast<double>(replay_execs + steps) / rate;
  } else {
    const auto start = std::chrono::steady_clock::now();
    double elapsed = 0.0;
    while (elapsed < budget.seconds) {
      loop.Step(elapsed);
      ++steps;
      elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    r.elapsed_sec = elapsed;
  }

  const LoopCounters& c = loop.counters();
  r.execs = steps;
  r.delta_edges = loop.edges_found() - r.baseline_edges;
  r.delta_paths = loop.paths_total() - base_paths;
  r.delta_crashes = c.unique_crashes - base_crashes;
  r.hits = c.new_cov_from_hit;
  r.misses = c.new_cov_from_fallback;
  r.calls_hit = c.calls_hit;
  r.calls_miss = c.calls_miss;
  r.bitmap_available = true;
  r.reward = ComputeReward(r.delta_edges, r.delta_paths, r.delta_crashes, r.hits, r.misses,
                           weights, r.bitmap_available);
  return r;
}

PromotionDecision DecideWinner(const std::vector<MicroResult>& results, EventLog* log, double t) {
  if (results.empty()) throw EmptyResults();
  size_t best = 0;
  for (size_t i = 1; i < results.size(); ++i) {
    if (results[i].reward > results[best].reward) best = i;
  }
  PromotionDecision d;
  d.winner_reward = results[best].reward;
  if (d.winner_reward > 0.0) {
    d.status = PromotionStatus::kPromoted;
    d.winner = best;
    d.winner_id = results[best].candidate_id;
  }
  if (log) {
    AuditEvent decided{t, EventKind::kWinnerDecided, {}, {}, {}};
    if (d.winner) {
      decided.payload = {{"status", "promoted"},
                         {"winner", d.winner_id},
                         {"winner_reward", FormatReal(d.winner_reward)}};
      log->Append(std::move(decided));
      log->Append({t, EventKind::kRecipePromoted,
                   {{"candidate_id", d.winner_id}, {"reward", FormatReal(d.winner_reward)}},
                   {}, {}});
    } else {
      decided.payload = {{"status", "no_significance"},
                         {"winner_reward", FormatReal(d.winner_reward)}};
      log->Append(std::move(decided));
      log->Append({t, EventKind::kPromotionSkipped,
                   {{"reason", "no_successful_micro_campaign"}}, {}, {}});
    }
  }
  return d;
}

AuditEvent MicroResultEvent(const MicroResult& r, const Candidate& c, double t) {
  AuditEvent e;
  e.t = t;
  e.kind = EventKind::kMicroResult;
  e.payload = {{"candidate_id", r.candidate_id},
               {"intervention", std::string(InterventionName(c.intervention))},
               {"recipe_id", c.recipe.id},
               {"delta_edges", std::to_string(r.delta_edges)},
               {"delta_paths", std::to_string(r.delta_paths)},
               {"delta_crashes", std::to_string(r.delta_crashes)},
               {"h", std::to_string(r.hits)},
               {"m", std::to_string(r.misses)},
               {"bitmap_available", r.bitmap_available ? "true" : "false"},
               {"execs", std::to_string(r.execs)},
               {"calls_hit", std::to_string(r.calls_hit)},
               {"calls_miss", std::to_string(r.calls_miss)},
               {"baseline_edges", std::to_string(r.baseline_edges)},
               {"reward", FormatReal(r.reward)}};
  return e;
}

MicroResult MicroResultFromEvent(const AuditEvent& e, const RewardWeights& weights) {
  if (e.kind != EventKind::kMicroResult) throw IoError("not a micro_result event");
  MicroResult r;
  r.candidate_id = e.Get("candidate_id").value_or("");
  r.delta_edges = ToCount(e, "delta_edges");
  r.delta_paths = ToCount(e, "delta_paths");
  r.delta_crashes = ToCount(e, "delta_crashes");
  r.hits = ToCount(e, "h");
  r.misses = ToCount(e, "m");
  r.execs = ToCount(e, "execs");
  r.bitmap_available = e.Get("bitmap_available").value_or("true") == "true";
  r.reward = ComputeReward(r.delta_edges, r.delta_paths, r.delta_crashes, r.hits, r.misses,
                           weights, r.bitmap_available);
  return r;
}

}  // namespace recipefuzz
