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

#include "recipefuzz/coverage_loop.h"

#include <algorithm>
#include <cstdio>

#include "recipefuzz/errors.h"

namespace recipefuzz {
namespace {

std::string EntryName(size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "id:%06zu", index);
  return buf;
}

}  // namespace

CoverageLoop::CoverageLoop(const Executor& executor, MutatorApi& mutator,
                           uint64_t seed, size_t max_size)
    : executor_(executor),
      mutator_(mutator),
      rng_(seed),
      max_size_(std::max<size_t>(max_size, 1)),
      top_rated_(kDefaultBitmapSize, -1),
      edge_hit_count_(kDefaultBitmapSize, 0) {
  scratch_.reserve(max_size_);
}

size_t CoverageLoop::Import(SeedEntry entry, double t) {
  if (entry.bytes.size() > max_size_) entry.bytes.resize(max_size_);
  if (entry.bytes.empty()) entry.bytes.push_back(0);
  const ExecResult r = executor_.Execute(entry.bytes);
  ++counters_.execs;
  if (r.crashed) {
    ++counters_.total_crashes;
    if (crash_bitmap_.Merge(r.edges_hit) > 0) ++counters_.unique_crashes;
    return 0;
  }
  const size_t fresh = bitmap_.Merge(r.edges_hit);
  QueueEntry q;
  q.edges = r.edges_hit;
  q.found_at = t;
  q.from_seed = true;
  AddEntry(std::move(entry), std::move(q));
  return fresh;
}

void CoverageLoop::AddEntry(SeedEntry seed, QueueEntry entry) {
  const size_t index = queue_.size();
  const size_t len = seed.bytes.size();
  for (EdgeId e : entry.edges) {
    if (e >= top_rated_.size()) continue;
    ++edge_hit_count_[e];
    const int64_t cur = top_rated_[e];
    if (cur < 0 || len < corpus_[static_cast<size_t>(cur)].bytes.size()) {
      top_rated_[e] = static_cast<int64_t>(index);
    }
  }
  corpus_.push_back(std::move(seed));
  queue_.push_back(std::move(entry));
  for (auto& q : queue_) q.favored = false;
  for (int64_t i : top_rated_) {
    if (i >= 0) queue_[static_cast<size_t>(i)].favored = true;
  }
  if (on_new_entry) on_new_entry(corpus_.back(), index);
}

size_t CoverageLoop::favored_count() const {
  return static_cast<size_t>(
      std::count_if(queue_.begin(), queue_.end(), [](const QueueEntry& q) { return q.favored; }));
}

uint64_t CoverageLoop::EnergyFor(size_t index) const {
  const QueueEntry& q = queue_[index];
  uint64_t energy = q.favored ? 16 : 4;
  uint32_t rarest = UINT32_MAX;
  for (EdgeId e : q.edges) {
    if (e < edge_hit_count_.size()) rarest = std::min(rarest, edge_hit_count_[e]);
  }
  if (rarest <= 1) {
    energy *= 4;
  } else if (rarest <= 3) {
    energy *= 2;
  }
  return energy;
}

size_t CoverageLoop::NextEntry() {
  if (started_ && energy_left_ > 0) {
    --energy_left_;
    return current_;
  }
  const bool any_favored = favored_count() > 0;
  size_t idx = started_ ? cursor_ + 1 : 0;
  started_ = true;
  while (true) {
    if (idx >= queue_.size()) {
      idx = 0;
      ++counters_.cycles_done;
    }
    // Non-favored entries are mostly skipped while favored ones exist.
    if (!any_favored || queue_[idx].favored || rng_.Below(4) == 0) break;
    ++idx;
  }
  cursor_ = idx;
  current_ = idx;
  ++queue_[idx].times_fuzzed;
  energy_left_ = EnergyFor(idx) - 1;
  return idx;
}

StepOutcome CoverageLoop::Step(double t) {
  if (queue_.empty()) throw EmptyQueue("coverage loop has no queue entries");
  const size_t idx = NextEntry();
  const FuzzCall call = mutator_.Fuzz(corpus_[idx], corpus_, rng_, max_size_, scratch_);
  counters_.calls_hit += call.hit();
  counters_.calls_miss += call.miss();

  StepOutcome out;
  out.source = call.source;
  const ExecResult r = executor_.Execute(scratch_);
  ++counters_.execs;
  if (r.crashed) {
    out.crashed = true;
    ++counters_.total_crashes;
    if (crash_bitmap_.Merge(r.edges_hit) > 0) {
      out.new_crash = true;
      ++counters_.unique_crashes;
      if (on_new_crash) on_new_crash(scratch_, counters_.unique_crashes - 1);
    }
    return out;
  }
  out.new_edges = bitmap_.Merge(r.edges_hit);
  if (out.new_edges == 0) return out;

  out.new_path = true;
  counters_.last_find = t;
  switch (call.source) {
    case MutationSource::kRecipeHit:
      ++counters_.new_cov_from_hit;
      break;
    case MutationSource::kRecipeMissFallback:
      ++counters_.new_cov_from_fallback;
      break;
    default:
      ++counters_.new_cov_from_havoc;
      break;
  }
  QueueEntry q;
  q.edges = r.edges_hit;
  q.found_at = t;
  AddEntry(MakeSeed(EntryName(queue_.size()), scratch_, corpus_[idx].family), std::move(q));
  return out;
}

}  // namespace recipefuzz
