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

#ifndef RECIPEFUZZ_SIM_TARGET_H_
#define RECIPEFUZZ_SIM_TARGET_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recipefuzz/recipe.h"

namespace recipefuzz {

using EdgeId = uint16_t;

struct ExecResult {
  std::vector<EdgeId> edges_hit;  // sorted, unique
  bool crashed = false;
  size_t consumed = 0;
};

// The target-execution seam. Execute is pure and reentrant.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecResult Execute(std::span<const uint8_t> input) const = 0;
  // Stable name used in run metadata.
  virtual std::string Identity() const = 0;
  // Printable constants the target compares against, standing in for the
  // read-only data of a real binary when no binary is supplied.
  virtual std::vector<std::string> Literals() const { return {}; }
  size_t max_input() const { return max_input_; }

 protected:
  size_t max_input_ = size_t{1} << 20;
};

inline constexpr size_t kDefaultBitmapSize = 4096;

class EdgeBitmap {
 public:
  explicit EdgeBitmap(size_t capacity = kDefaultBitmapSize) : slots_(capacity, 0) {}

  // Returns the number of edges not previously present.
  size_t Merge(std::span<const EdgeId> edges);
  size_t Merge(const EdgeBitmap& other);
  // Edges of `edges` not yet in the map, without merging.
  size_t CountNew(std::span<const EdgeId> edges) const;
  bool Contains(EdgeId e) const { return e < slots_.size() && slots_[e] != 0; }
  size_t count() const { return count_; }
  size_t capacity() const { return slots_.size(); }

 private:
  std::vector<uint8_t> slots_;
  size_t count_ = 0;
};

// Recursive-descent parser for JSON-like text. Every branch arm has its own
// edge id. Nesting deeper than `crash_depth` reports a crash.
class JsonTarget final : public Executor {
 public:
  explicit JsonTarget(int crash_depth = 64) : crash_depth_(crash_depth) {}
  ExecResult Execute(std::span<const uint8_t> input) const override;
  std::string Identity() const override;
  std::vector<std::string> Literals() const override;
  static constexpr EdgeId kNumEdges = 56;

 private:
  int crash_depth_;
};

// Edges {0, 1, 2} on every input; edges 3+4i .. 6+4i only when gate literal
// i occurs in the input. With no gates the reachable set is just the base.
class StaircaseTarget final : public Executor {
 public:
  explicit StaircaseTarget(std::vector<std::string> gates = {"XKEY1", "XKEY2"});
  ExecResult Execute(std::span<const uint8_t> input) const override;
  std::string Identity() const override;
  std::vector<std::string> Literals() const override;

  const std::vector<std::string>& gates() const { return gates_; }
  static std::vector<EdgeId> BaseEdges() { return {0, 1, 2}; }
  static std::vector<EdgeId> GateEdges(size_t gate);

 private:
  std::vector<std::string> gates_;
};

// Runs an external command per input. `{input}` in the template is replaced
// by a file holding the input and `{coverage}` by a file the command writes
// edge ids into, one decimal id per line. Death by signal is a crash; a
// missing coverage file is an ExecutorFailure. Not reentrant: calls share
// one input/coverage file pair inside work_dir.
class CommandExecutor final : public Executor {
 public:
  CommandExecutor(std::string command_template, std::string work_dir);
  ExecResult Execute(std::span<const uint8_t> input) const override;
  std::string Identity() const override { return "command:" + template_; }

 private:
  std::string template_;
  std::string work_dir_;
};

// "json", "staircase", or "saturated" (staircase with no gates). Throws
// ConfigInvalid for other names.
std::unique_ptr<Executor> MakeTarget(std::string_view name);

// Starting corpus for a built-in target; never contains a gate literal.
std::vector<Bytes> DefaultSeeds(std::string_view target_name);

// Exhaustive sweep over every input of length 1..max_len drawn from
// `alphabet`. Counts are per gate literal.
struct GateSweep {
  uint64_t inputs = 0;
  std::vector<uint64_t> with_literal;     // inputs containing gate i
  std::vector<uint64_t> reached;          // inputs hitting any edge of gate i
  std::vector<uint64_t> violations;       // reached without the literal, or vice versa
  std::vector<EdgeId> reachable;          // union of all edges hit
};

GateSweep SweepStaircaseSerial(const StaircaseTarget& target,
                               std::string_view alphabet, int max_len);
GateSweep SweepStaircase(const StaircaseTarget& target, std::string_view alphabet,
                         int max_len);  // OpenMP

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_SIM_TARGET_H_
