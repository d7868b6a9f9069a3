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

#include "recipefuzz/sim_target.h"

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "recipefuzz/errors.h"

namespace recipefuzz {

size_t EdgeBitmap::Merge(std::span<const EdgeId> edges) {
  size_t fresh = 0;
  for (EdgeId e : edges) {
    if (e >= slots_.size() || slots_[e]) continue;
    slots_[e] = 1;
    ++fresh;
  }
  count_ += fresh;
  return fresh;
}

size_t EdgeBitmap::Merge(const EdgeBitmap& other) {
  size_t fresh = 0;
  const size_t n = std::min(slots_.size(), other.slots_.size());
  for (size_t i = 0; i < n; ++i) {
    if (other.slots_[i] && !slots_[i]) {
      slots_[i] = 1;
      ++fresh;
    }
  }
  count_ += fresh;
  return fresh;
}

size_t EdgeBitmap::CountNew(std::span<const EdgeId> edges) const {
  size_t fresh = 0;
  for (EdgeId e : edges) fresh += e < slots_.size() && !slots_[e];
  return fresh;
}

namespace {

enum JsonEdge : EdgeId {
  kEntry, kEmptyInput, kLeadingSpace,
  kValObject, kValArray, kValString, kValNumber, kValTrue, kValFalse, kValNull,
  kValBadLiteral, kValUnexpected, kValEof,
  kObjEmpty, kObjKey, kObjKeyNotString, kObjMissingColon, kObjComma, kObjBadSep,
  kObjClosed,
  kArrEmpty, kArrElement, kArrComma, kArrBadSep, kArrClosed,
  kStrPlain, kEscQuote, kEscBackslash, kEscSlash, kEscB, kEscF, kEscN, kEscR,
  kEscT, kEscU, kEscUBadHex, kEscUnknown, kStrUnterminated, kStrControl,
  kStrHighByte,
  kNumMinus, kNumLeadingZero, kNumDigits, kNumFraction, kNumFractionEmpty,
  kNumExponent, kNumExponentSign, kNumExponentEmpty, kNumMinusAlone,
  kDepth8, kDepth16, kDepth32,
  kDocOk, kDocTrailing, kDocTrailingSpace, kEscSurrogate,
};
static_assert(kEscSurrogate + 1 == JsonTarget::kNumEdges);

class JsonParser {
 public:
  JsonParser(std::span<const uint8_t> in, int crash_depth)
      : in_(in), crash_depth_(crash_depth) {}

  ExecResult Run() {
    Hit(kEntry);
    if (in_.empty()) {
      Hit(kEmptyInput);
      return Finish();
    }
    if (SkipSpace()) Hit(kLeadingSpace);
    if (Value(0)) {
      const bool spaced = SkipSpace();
      if (pos_ == in_.size()) {
        if (spaced) Hit(kDocTrailingSpace);
        Hit(kDocOk);
      } else {
        Hit(kDocTrailing);
      }
    }
    return Finish();
  }

 private:
  void Hit(EdgeId e) { hits_.set(e); }
  bool Eof() const { return pos_ >= in_.size(); }
  uint8_t Peek() const { return in_[pos_]; }

  bool SkipSpace() {
    const size_t start = pos_;
    while (!Eof() && (Peek() == ' ' || Peek() == '\t' || Peek() == '\n' || Peek() == '\r')) {
      ++pos_;
    }
    return pos_ > start;
  }

  ExecResult Finish() {
    ExecResult r;
    for (EdgeId e = 0; e < JsonTarget::kNumEdges; ++e) {
      if (hits_.test(e)) r.edges_hit.push_back(e);
    }
    r.crashed = crashed_;
    r.consumed = pos_;
    return r;
  }

  bool Literal(std::string_view word, EdgeId edge) {
    if (in_.size() - pos_ >= word.size() &&
        std::equal(word.begin(), word.end(), in_.begin() + static_cast<ptrdiff_t>(pos_))) {
      pos_ += word.size();
      Hit(edge);
      return true;
    }
    Hit(kValBadLiteral);
    return false;
  }

  bool Value(int depth) {
    if (crashed_) return false;
    SkipSpace();
    if (Eof()) {
      Hit(kValEof);
      return false;
    }
    switch (Peek()) {
      case '{':
        Hit(kValObject);
        return Object(depth + 1);
      case '[':
        Hit(kValArray);
        return Array(depth + 1);
      case '"':
        Hit(kValString);
        return String();
      case 't':
        return Literal("true", kValTrue);
      case 'f':
        return Literal("false", kValFalse);
      case 'n':
        return Literal("null", kValNull);
      default:
        if (Peek() == '-' || (Peek() >= '0' && Peek() <= '9')) {
          Hit(kValNumber);
          return Number();
        }
        Hit(kValUnexpected);
        return false;
    }
  }

  bool Enter(int depth) {
    if (depth > 8) Hit(kDepth8);
    if (depth > 16) Hit(kDepth16);
    if (depth > 32) Hit(kDepth32);
    if (depth > crash_depth_) {
      crashed_ = true;
      return false;
    }
    return true;
  }

  bool Object(int depth) {
    if (!Enter(depth)) return false;
    ++pos_;
    SkipSpace();
    if (!Eof() && Peek() == '}') {
      ++pos_;
      Hit(kObjEmpty);
      return true;
    }
    while (true) {
      SkipSpace();
      if (Eof() || Peek() != '"') {
        Hit(kObjKeyNotString);
        return false;
      }
      Hit(kObjKey);
      if (!String()) return false;
      SkipSpace();
      if (Eof() || Peek() != ':') {
        Hit(kObjMissingColon);
        return false;
      }
      ++pos_;
      if (!Value(depth)) return false;
      SkipSpace();
      if (!Eof() && Peek() == ',') {
        ++pos_;
        Hit(kObjComma);
        continue;
      }
      if (!Eof() && Peek() == '}') {
        ++pos_;
        Hit(kObjClosed);
        return true;
      }
      Hit(kObjBadSep);
      return false;
    }
  }

  bool Array(int depth) {
    if (!Enter(depth)) return false;
    ++pos_;
    SkipSpace();
    if (!Eof() && Peek() == ']') {
      ++pos_;
      Hit(kArrEmpty);
      return true;
    }
    while (true) {
      Hit(kArrElement);
      if (!Value(depth)) return false;
      SkipSpace();
      if (!Eof() && Peek() == ',') {
        ++pos_;
        Hit(kArrComma);
        continue;
      }
      if (!Eof() && Peek() == ']') {
        ++pos_;
        Hit(kArrClosed);
        return true;
      }
      Hit(kArrBadSep);
      return false;
    }
  }

  static int Hex(uint8_t c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  bool String() {
    ++pos_;  // opening quote
    while (!Eof()) {
      const uint8_t c = Peek();
      ++pos_;
      if (c == '"') return true;
      if (c < 0x20) {
        Hit(kStrControl);
        return false;
      }
      if (c >= 0x80) {
        Hit(kStrHighByte);
        continue;
      }
      if (c != '\\') {
        Hit(kStrPlain);
        continue;
      }
      if (Eof()) break;
      const uint8_t e = Peek();
      ++pos_;
      switch (e) {
        case '"': Hit(kEscQuote); break;
        case '\\': Hit(kEscBackslash); break;
        case '/': Hit(kEscSlash); break;
        case 'b': Hit(kEscB); break;
        case 'f': Hit(kEscF); break;
        case 'n': Hit(kEscN); break;
        case 'r': Hit(kEscR); break;
        case 't': Hit(kEscT); break;
        case 'u': {
          int code = 0;
          for (int i = 0; i < 4; ++i) {
            const int h = Eof() ? -1 : Hex(Peek());
            if (h < 0) {
              Hit(kEscUBadHex);
              return false;
            }
            code = code * 16 + h;
            ++pos_;
          }
          Hit(code >= 0xd800 && code <= 0xdfff ? kEscSurrogate : kEscU);
          break;
        }
        default:
          Hit(kEscUnknown);
          return false;
      }
    }
    Hit(kStrUnterminated);
    return false;
  }

  bool Digits() {
    const size_t start = pos_;
    while (!Eof() && Peek() >= '0' && Peek() <= '9') ++pos_;
    return pos_ > start;
  }

  bool Number() {
    if (Peek() == '-') {
      Hit(kNumMinus);
      ++pos_;
      if (Eof() || Peek() < '0' || Peek() > '9') {
        Hit(kNumMinusAlone);
        return false;
      }
    }
    if (Peek() == '0') {
      Hit(kNumLeadingZero);
      ++pos_;
    } else {
      Hit(kNumDigits);
      Digits();
    }
    if (!Eof() && Peek() == '.') {
      ++pos_;
      if (!Digits()) {
        Hit(kNumFractionEmpty);
        return false;
      }
      Hit(kNumFraction);
    }
    if (!Eof() && (Peek() == 'e' || Peek() == 'E')) {
      Hit(kNumExponent);
      ++pos_;
      if (!Eof() && (Peek() == '+' || Peek() == '-')) {
        Hit(kNumExponentSign);
        ++pos_;
      }
      if (!Digits()) {
        Hit(kNumExponentEmpty);
        return false;
      }
    }
    return true;
  }

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
  int crash_depth_;
  bool crashed_ = false;
  std::bitset<JsonTarget::kNumEdges> hits_;
};

bool ContainsLiteral(std::span<const uint8_t> input, std::string_view lit) {
  if (lit.empty()) return true;
  return std::search(input.begin(), input.end(), lit.begin(), lit.end()) != input.end();
}

void SweepRange(const StaircaseTarget& target, std::string_view alphabet, int len,
                uint64_t lo, uint64_t hi, GateSweep& acc, std::vector<uint8_t>& seen) {
  const size_t g = target.gates().size();
  Bytes input(static_cast<size_t>(len));
  for (uint64_t k = lo; k < hi; ++k) {
    uint64_t x = k;
    for (int i = 0; i < len; ++i) {
      input[static_cast<size_t>(i)] = static_cast<uint8_t>(alphabet[x % alphabet.size()]);
      x /= alphabet.size();
    }
    const ExecResult r = target.Execute(input);
    for (EdgeId e : r.edges_hit) seen[e] = 1;
    for (size_t gi = 0; gi < g; ++gi) {
      const bool has = ContainsLiteral(input, target.gates()[gi]);
      const auto edges = StaircaseTarget::GateEdges(gi);
      bool reached = false;
      for (EdgeId e : edges) {
        reached |= std::binary_search(r.edges_hit.begin(), r.edges_hit.end(), e);
      }
      acc.with_literal[gi] += has;
      acc.reached[gi] += reached;
      acc.violations[gi] += has != reached;
    }
    ++acc.inputs;
  }
}

GateSweep EmptySweep(size_t gates) {
  GateSweep s;
  s.with_literal.assign(gates, 0);
  s.reached.assign(gates, 0);
  s.violations.assign(gates, 0);
  return s;
}

void Accumulate(GateSweep& into, const GateSweep& part) {
  into.inputs += part.inputs;
  for (size_t i = 0; i < into.with_literal.size(); ++i) {
    into.with_literal[i] += part.with_literal[i];
    into.reached[i] += part.reached[i];
    into.violations[i] += part.violations[i];
  }
}

uint64_t Power(uint64_t base, int exp) {
  uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void CollectReachable(GateSweep& s, const std::vector<uint8_t>& seen) {
  for (size_t e = 0; e < seen.size(); ++e) {
    if (seen[e]) s.reachable.push_back(static_cast<EdgeId>(e));
  }
}

}  // namespace

ExecResult JsonTarget::Execute(std::span<const uint8_t> input) const {
  return JsonParser(input.first(std::min(input.size(), max_input_)), crash_depth_).Run();
}

std::string JsonTarget::Identity() const {
  return "sim:json/v1/crash_depth=" + std::to_string(crash_depth_);
}

std::vector<std::string> JsonTarget::Literals() const {
  return {"true", "false", "null", "\\u"};
}

StaircaseTarget::StaircaseTarget(std::vector<std::string> gates) : gates_(std::move(gates)) {
  for (const auto& g : gates_) {
    if (g.empty()) throw ConfigInvalid("staircase gate literal must be non-empty");
  }
  if (3 + 4 * gates_.size() > kDefaultBitmapSize) {
    throw ConfigInvalid("too many staircase gates");
  }
}

std::vector<EdgeId> StaircaseTarget::GateEdges(size_t gate) {
  const auto base = static_cast<EdgeId>(3 + 4 * gate);
  return {base, static_cast<EdgeId>(base + 1), static_cast<EdgeId>(base + 2),
          static_cast<EdgeId>(base + 3)};
}

ExecResult StaircaseTarget::Execute(std::span<const uint8_t> input) const {
  input = input.first(std::min(input.size(), max_input_));
  ExecResult r;
  r.edges_hit = BaseEdges();
  for (size_t i = 0; i < gates_.size(); ++i) {
    if (ContainsLiteral(input, gates_[i])) {
      for (EdgeId e : GateEdges(i)) r.edges_hit.push_back(e);
    }
  }
  r.consumed = input.size();
  return r;
}

std::string StaircaseTarget::Identity() const {
  std::string id = gates_.empty() ? "sim:saturated/v1" : "sim:staircase/v1/gates=";
  for (size_t i = 0; i < gates_.size(); ++i) id += (i ? "," : "") + gates_[i];
  return id;
}

std::vector<std::string> StaircaseTarget::Literals() const {
  std::vector<std::string> lits = {"stair_check", "usage: stair <file>"};
  lits.insert(lits.end(), gates_.begin(), gates_.end());
  return lits;
}

CommandExecutor::CommandExecutor(std::string command_template, std::string work_dir)
    : template_(std::move(command_template)), work_dir_(std::move(work_dir)) {
  if (template_.find("{input}") == std::string::npos ||
      template_.find("{coverage}") == std::string::npos) {
    throw ConfigInvalid("command template needs {input} and {coverage}");
  }
  std::error_code ec;
  std::filesystem::create_directories(work_dir_, ec);
  if (ec) throw IoError("cannot create " + work_dir_ + ": " + ec.message());
}

ExecResult CommandExecutor::Execute(std::span<const uint8_t> input) const {
  namespace fs = std::filesystem;
  const std::string in_path = (fs::path(work_dir_) / "cur_input").string();
  const std::string cov_path = (fs::path(work_dir_) / "cur_coverage").string();
  {
    std::ofstream f(in_path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(input.data()),
            static_cast<std::streamsize>(input.size()));
    if (!f) throw IoError("cannot write " + in_path);
  }
  fs::remove(cov_path);
  std::string cmd = template_;
  for (auto [key, value] : {std::pair<std::string, std::string>{"{input}", in_path},
                            {"{coverage}", cov_path}}) {
    for (size_t at; (at = cmd.find(key)) != std::string::npos;) cmd.replace(at, key.size(), value);
  }
  const int status = std::system(cmd.c_str());
  if (status == -1) throw ExecutorFailure("cannot spawn: " + cmd);
  ExecResult r;
  r.consumed = input.size();
  // The shell reports a child's fatal signal as 128 + signo.
  r.crashed = WIFSIGNALED(status) || (WIFEXITED(status) && WEXITSTATUS(status) > 128);
  std::ifstream cov(cov_path);
  if (!cov) throw ExecutorFailure("command produced no coverage file: " + cmd);
  for (long e; cov >> e;) {
    if (e >= 0 && e < static_cast<long>(kDefaultBitmapSize)) {
      r.edges_hit.push_back(static_cast<EdgeId>(e));
    }
  }
  std::sort(r.edges_hit.begin(), r.edges_hit.end());
  r.edges_hit.erase(std::unique(r.edges_hit.begin(), r.edges_hit.end()), r.edges_hit.end());
  return r;
}

std::unique_ptr<Executor> MakeTarget(std::string_view name) {
  if (name == "json") return std::make_unique<JsonTarget>();
  if (name == "staircase") return std::make_unique<StaircaseTarget>();
  if (name == "saturated") return std::make_unique<StaircaseTarget>(std::vector<std::string>{});
  throw ConfigInvalid("unknown target: " + std::string(name));
}

std::vector<Bytes> DefaultSeeds(std::string_view target_name) {
  auto bytes = [](std::string_view s) { return Bytes(s.begin(), s.end()); };
  if (target_name == "json") {
    return {bytes("{\"a\":1}"), bytes("[true,null]"), bytes("\"hi\"")};
  }
  return {bytes("hello world"), bytes("seed-0001"), bytes("abcdefgh")};
}

GateSweep SweepStaircaseSerial(const StaircaseTarget& target, std::string_view alphabet,
                               int max_len) {
  GateSweep total = EmptySweep(target.gates().size());
  std::vector<uint8_t> seen(kDefaultBitmapSize, 0);
  for (int len = 1; len <= max_len; ++len) {
    SweepRange(target, alphabet, len, 0, Power(alphabet.size(), len), total, seen);
  }
  CollectReachable(total, seen);
  return total;
}

GateSweep SweepStaircase(const StaircaseTarget& target, std::string_view alphabet,
                         int max_len) {
  const size_t g = target.gates().size();
  GateSweep total = EmptySweep(g);
  std::vector<uint8_t> seen(kDefaultBitmapSize, 0);
  for (int len = 1; len <= max_len; ++len) {
    const auto n = static_cast<int64_t>(Power(alphabet.size(), len));
    constexpr int64_t kChunk = 4096;
#pragma omp parallel
    {
      GateSweep local = EmptySweep(g);
      std::vector<uint8_t> local_seen(kDefaultBitmapSize, 0);
#pragma omp for schedule(static)
      for (int64_t c = 0; c < (n + kChunk - 1) / kChunk; ++c) {
        const auto lo = static_cast<uint64_t>(c * kChunk);
        const auto hi = static_cast<uint64_t>(std::min(n, (c + 1) * kChunk));
        SweepRange(target, alphabet, len, lo, hi, local, local_seen);
      }
#pragma omp critical
      {
        Accumulate(total, local);
        for (size_t e = 0; e < seen.size(); ++e) seen[e] |= local_seen[e];
      }
    }
  }
  CollectReachable(total, seen);
  return total;
}

}  // namespace recipefuzz
