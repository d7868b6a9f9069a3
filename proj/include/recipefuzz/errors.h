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

#ifndef RECIPEFUZZ_ERRORS_H_
#define RECIPEFUZZ_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace recipefuzz {

// Every error raised by the library derives from one of three roots so the
// CLI can map it to an exit code: validation (5), I/O (3), executor (4).

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExecutorFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string path;    // e.g. "operator_weights.BitFlip"
  std::string reason;
};

// A recipe document failed validation. Carries every violation found, not
// just the first one.
class SchemaViolation : public ValidationError {
 public:
  explicit SchemaViolation(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class DegenerateWeights : public ValidationError {
 public:
  DegenerateWeights() : ValidationError("all operator weights are zero") {}
};

class ConfigInvalid : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonMonotonicTelemetry : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonMonotonicSeries : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySample : public ValidationError {
 public:
  EmptySample() : ValidationError("sample must contain at least one value") {}
};

class DegenerateVariance : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroCalls : public ValidationError {
 public:
  ZeroCalls() : ValidationError("microbench needs at least one call") {}
};

class BudgetZero : public ValidationError {
 public:
  BudgetZero() : ValidationError("micro-campaign budget must be positive") {}
};

class EmptyResults : public ValidationError {
 public:
  EmptyResults() : ValidationError("no micro-campaign results to rank") {}
};

class EmptyQueue : public IoError {
 public:
  using IoError::IoError;
};

class MissingArtifact : public IoError {
 public:
  MissingArtifact(const std::string& run_id, const std::string& artifact)
      : IoError("run " + run_id + ": missing artifact " + artifact),
        run_id_(run_id), artifact_(artifact) {}
  const std::string& run_id() const { return run_id_; }
  const std::string& artifact() const { return artifact_; }

 private:
  std::string run_id_;
  std::string artifact_;
};

class NotElf : public ValidationError {
 public:
  NotElf() : ValidationError("input is not an ELF image") {}
};

class NoRodataSection : public ValidationError {
 public:
  NoRodataSection() : ValidationError("ELF image has no .rodata section") {}
};

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_ERRORS_H_
