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

#ifndef RECIPEFUZZ_COVERAGE_LOOP_H_
#define RECIPEFUZZ_COVERAGE_LOOP_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "recipefuzz/mutator.h"
#include "recipefuzz/rng.h"
#include "recipefuzz/sim_target.h"

namespace recipefuzz {

// Scheduling metadata; the bytes live in the corpus at the same index.
struct QueueEntry {
  std::vector<EdgeId> edges;
  double found_at = 0.0;
  bool from_seed = false;  // imported rather than discovered
  bool favored = false;
  uint64_t times_fuzzed = 0;
};

// Virtual time charges each execution 1/exec_rate seconds, which makes runs
// independent of host speed. Wall time reads the steady clock.
struct ClockConfig {
  enum class Mode : uint8_t { kVirtual, kWall };
  Mode mode = Mode::kVirtual;
  double exec_rate = 4.0;  // virtual executions per second
};

struct StepOutcome {
  MutationSource source = MutationSource::kHavoc;
  size_t new_edges = 0;
  bool new_path = false;
  bool crashed = false;
  bool new_crash = false;
};

struct LoopCounters {
  uint64_t execs = 0;
  uint64_t cycles_done = 0;
  uint64_t unique_crashes = 0;
  uint64_t total_crashes = 0;
  double last_find = 0.0;
  // Executions that found new coverage, split by where the input came from.
  uint64_t new_cov_from_hit = 0;
  uint64_t new_cov_from_fallback = 0;
  uint64_t new_cov_from_havoc = 0;
  // Per-call recipe accounting.
  uint64_t calls_hit = 0;
  uint64_t calls_miss = 0;
};

// A queue-driven coverage-guided loop: pick an entry (favored entries get
// more energy), mutate it once, execute, keep the result if it reached a new
// edge. Shared by the main campaign and by micro-campaigns, each with its
// own instance and therefore its own coverage map.
class CoverageLoop {
 public:
  CoverageLoop(const Executor& executor, MutatorApi& mutator, uint64_t seed,
               size_t max_size = 4096);

  // Executes `entry` and adds it to the queue unconditionally (seed import,
  // snapshot replay). Returns the number of new edges. Crashing seeds are
  // counted but not queued.
  size_t Import(SeedEntry entry, double t);

  StepOutcome Step(double t);

  size_t paths_total() const { return queue_.size(); }
  size_t edges_found() const { return bitmap_.count(); }
  const EdgeBitmap& bitmap() const { return bitmap_; }
  const std::vector<QueueEntry>& queue() const { return queue_; }
  CorpusView corpus() const { return corpus_; }
  const LoopCounters& counters() const { return counters_; }
  size_t favored_count() const;

  // Called whenever an entry joins the queue.
  std::function<void(const SeedEntry&, size_t index)> on_new_entry;
  // Called for each crash that reached a new crash edge.
  std::function<void(const Bytes&, size_t crash_index)> on_new_crash;

 private:
  void AddEntry(SeedEntry seed, QueueEntry entry);
  size_t NextEntry();
  uint64_t EnergyFor(size_t index) const;

  const Executor& executor_;
  MutatorApi& mutator_;
  Rng rng_;
  size_t max_size_;
  EdgeBitmap bitmap_;
  EdgeBitmap crash_bitmap_;
  std::vector<SeedEntry> corpus_;
  std::vector<QueueEntry> queue_;
  std::vector<int64_t> top_rated_;       // per edge: queue index or -1
  std::vector<uint32_t> edge_hit_count_; // entries covering each edge
  size_t cursor_ = 0;
  uint64_t energy_left_ = 0;
  size_t current_ = 0;
  bool started_ = false;
  Bytes scratch_;
  LoopCounters counters_;
};

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_COVERAGE_LOOP_H_
