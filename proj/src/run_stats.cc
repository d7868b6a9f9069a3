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

#include "recipefuzz/run_stats.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>
#include <random>
#include <regex>

#include "json.hpp"
#include "recipefuzz/errors.h"
#include "recipefuzz/rng.h"

namespace recipefuzz {
namespace fs = std::filesystem;

namespace {

void RequireNonEmpty(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw EmptySample();
}

// Midranks of the pooled sample, doubled so they stay integral.
std::vector<int64_t> DoubledRanks(const std::vector<double>& pooled) {
  const size_t n = pooled.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return pooled[a] < pooled[b]; });
  std::vector<int64_t> ranks(n);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    // Ranks i+1 .. j+1 share their mean; doubled: (i+1) + (j+1).
    const auto doubled = static_cast<int64_t>(i + j + 2);
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

double ExactP(const std::vector<int64_t>& ranks, size_t n, size_t m, int64_t observed_dev) {
  // ways[k][s]: subsets of size k with doubled rank sum s.
  const int64_t max_sum = std::accumulate(ranks.begin(), ranks.end(), int64_t{0});
  std::vector<std::vector<double>> ways(n + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (int64_t r : ranks) {
    for (size_t k = n; k >= 1; --k) {
      auto& dst = ways[k];
      const auto& src = ways[k - 1];
      for (int64_t s = max_sum; s >= r; --s) dst[s] += src[s - r];
    }
  }
  // Doubled U for a subset with doubled sum s is s - n(n+1); deviation from
  // the null mean (doubled) is |s - n(n+1) - nm|.
  const auto nn = static_cast<int64_t>(n);
  const auto mm = static_cast<int64_t>(m);
  double extreme = 0.0;
  double total = 0.0;
  for (int64_t s = 0; s <= max_sum; ++s) {
    const double w = ways[n][s];
    if (w == 0.0) continue;
    total += w;
    if (std::llabs(s - nn * (nn + 1) - nn * mm) >= observed_dev) extreme += w;
  }
  return std::min(1.0, extreme / total);
}

double NormalP(const std::vector<double>& pooled, double u, size_t n, size_t m) {
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  const double N = static_cast<double>(n + m);
  double tie_term = 0.0;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double nm = static_cast<double>(n) * static_cast<double>(m);
  const double var = nm / 12.0 * ((N + 1.0) - tie_term / (N * (N - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double dev = std::max(0.0, std::abs(u - nm / 2.0) - 0.5);
  const boost::math::normal_distribution<double> z;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(z, dev / std::sqrt(var))));
}

double Percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

double ResampleMedian(std::span<const double> x, uint64_t seed, uint64_t r,
                      std::vector<double>& buf) {
  Rng rng(MixSeed(seed, r));
  buf.resize(x.size());
  for (auto& v : buf) v = x[rng.Below(x.size())];
  return Median(buf);
}

ConfidenceInterval CiFromMedians(std::vector<double> medians, double level) {
  std::sort(medians.begin(), medians.end());
  const double tail = (1.0 - level) / 2.0;
  return {Percentile(medians, tail), Percentile(medians, 1.0 - tail)};
}

void RequireSample(std::span<const double> x, uint64_t resamples) {
  if (x.empty()) throw EmptySample();
  if (resamples == 0) throw ConfigInvalid("resamples must be >= 1");
}

bool IsRunDir(const fs::path& p) {
  for (auto name : {kFuzzerStatsFile, kCoverageFile, kEventsFile, kMetadataFile}) {
    if (fs::exists(p / name)) return true;
  }
  return false;
}

void CollectRunDirs(const fs::path& dir, std::vector<fs::path>& out) {
  if (IsRunDir(dir)) {
    out.push_back(dir);
    return;
  }
  std::vector<fs::path> children;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (de.is_directory()) children.push_back(de.path());
  }
  std::sort(children.begin(), children.end());
  for (const auto& c : children) CollectRunDirs(c, out);
}

std::string Num(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string Opt(const std::optional<double>& v, int digits) {
  return v ? Num(*v, digits) : std::string("NA");
}

std::vector<double> Column(const std::vector<const RunRow*>& rows, double RunRow::*field) {
  std::vector<double> v;
  for (const RunRow* r : rows) v.push_back(r->*field);
  return v;
}

}  // namespace

MannWhitneyResult MannWhitney(std::span<const double> x, std::span<const double> y) {
  RequireNonEmpty(x, y);
  const size_t n = x.size();
  const size_t m = y.size();
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const auto ranks = DoubledRanks(pooled);
  int64_t rank_sum_x = 0;
  for (size_t i = 0; i < n; ++i) rank_sum_x += ranks[i];
  const auto nn = static_cast<int64_t>(n);
  const auto mm = static_cast<int64_t>(m);
  const int64_t u2_x = rank_sum_x - nn * (nn + 1);  // doubled U_x
  const int64_t u2_y = 2 * nn * mm - u2_x;

  MannWhitneyResult r;
  r.u = static_cast<double>(std::min(u2_x, u2_y)) / 2.0;
  if (std::min(n, m) <= kExactLimit) {
    r.exact = true;
    // Enumerate subsets of the smaller side for a smaller table; the
    // deviation |2U - nm| is symmetric in the two samples.
    const int64_t dev = std::llabs(u2_x - nn * mm);
    if (n <= m) {
      r.p_two_sided = ExactP(ranks, n, m, dev);
    } else {
      std::vector<int64_t> swapped(ranks.begin() + static_cast<ptrdiff_t>(n), ranks.end());
      swapped.insert(swapped.end(), ranks.begin(), ranks.begin() + static_cast<ptrdiff_t>(n));
      r.p_two_sided = ExactP(swapped, m, n, dev);
    }
  } else {
    r.p_two_sided = NormalP(pooled, r.u, n, m);
  }
  return r;
}

double VarghaDelaneyA12(std::span<const double> x, std::span<const double> y) {
  RequireNonEmpty(x, y);
  double wins = 0.0;
  for (double a : x) {
    for (double b : y) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

double Median(std::span<const double> x) {
  if (x.empty()) throw EmptySample();
  std::vector<double> v(x.begin(), x.end());
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

ConfidenceInterval BootstrapMedianCiSerial(std::span<const double> x, uint64_t resamples,
                                           uint64_t seed, double level) {
  RequireSample(x, resamples);
  std::vector<double> medians(resamples);
  std::vector<double> buf;
  for (uint64_t r = 0; r < resamples; ++r) medians[r] = ResampleMedian(x, seed, r, buf);
  return CiFromMedians(std::move(medians), level);
}

ConfidenceInterval BootstrapMedianCi(std::span<const double> x, uint64_t resamples,
                                     uint64_t seed, double level) {
  RequireSample(x, resamples);
  std::vector<double> medians(resamples);
  const auto total = static_cast<int64_t>(resamples);
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (int64_t r = 0; r < total; ++r) {
      medians[static_cast<size_t>(r)] = ResampleMedian(x, seed, static_cast<uint64_t>(r), buf);
    }
  }
  return CiFromMedians(std::move(medians), level);
}

double TostEquivalence(std::span<const double> x, std::span<const double> y, double band) {
  if (x.size() < 2 || y.size() < 2) {
    throw DegenerateVariance("equivalence test needs at least two values per sample");
  }
  if (!(band > 0.0)) throw ConfigInvalid("equivalence band must be > 0");
  auto moments = [](std::span<const double> v) {
    double mean = 0.0;
    for (double a : v) {
      if (!(a > 0.0)) throw ValidationError("equivalence test needs positive values");
      mean += std::log(a);
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double a : v) ss += (std::log(a) - mean) * (std::log(a) - mean);
    return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [mx, vx] = moments(x);
  const auto [my, vy] = moments(y);
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  const double sx = vx / nx;
  const double sy = vy / ny;
  const double se2 = sx + sy;
  if (!(se2 > 0.0)) throw DegenerateVariance("both samples are constant");
  const double se = std::sqrt(se2);
  const double df = se2 * se2 / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
  const double margin = std::log1p(band);
  const double diff = mx - my;
  const boost::math::students_t_distribution<double> t(df);
  // H0a: diff <= -margin, H0b: diff >= +margin.
  const double p_lower = boost::math::cdf(boost::math::complement(t, (diff + margin) / se));
  const double p_upper = boost::math::cdf(t, (diff - margin) / se);
  return std::max(p_lower, p_upper);
}

std::optional<double> TimeToNEdges(const std::vector<CoveragePoint>& series, uint64_t n) {
  for (size_t i = 1; i < series.size(); ++i) {
    if (series[i].t_sec < series[i - 1].t_sec) {
      throw NonMonotonicSeries("coverage series time decreases at row " + std::to_string(i));
    }
  }
  for (const auto& p : series) {
    if (p.edges_found >= n) return p.t_sec;
  }
  return std::nullopt;
}

RunRow ParseRunDir(const fs::path& dir, std::optional<uint64_t> time_to_n) {
  RunRow row;
  row.run_id = dir.filename().string();
  static const std::regex kModeRun(R"((.+)_r\d+)");
  std::smatch m;
  const std::string name = row.run_id;
  if (std::regex_match(name, m, kModeRun)) {
    row.mode = m[1];
  } else {
    row.mode = dir.parent_path().filename().string();
  }
  if (fs::exists(dir / kMetadataFile)) {
    try {
      const auto meta = nlohmann::json::parse(ReadTextFile(dir / kMetadataFile));
      if (meta.contains("mode")) row.mode = meta["mode"].get<std::string>();
      if (meta.contains("run_id")) row.run_id = meta["run_id"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(row.run_id + ": bad run_metadata.json: " + e.what());
    }
  }
  for (auto artifact : {kFuzzerStatsFile, kCoverageFile, kEventsFile}) {
    if (!fs::exists(dir / artifact)) throw MissingArtifact(row.run_id, std::string(artifact));
  }
  const FuzzerStats s = FuzzerStatsFromText(ReadTextFile(dir / kFuzzerStatsFile));
  const auto series = ParseCoverageCsv(ReadTextFile(dir / kCoverageFile));
  row.run_time = s.run_time;
  row.last_find = s.last_find;
  row.execs_done = s.execs_done;
  row.execs_per_sec = s.execs_per_sec;
  row.cycles_done = s.cycles_done;
  row.corpus_count = s.corpus_count;
  row.edges_found = s.edges_found;
  row.plateau_sec = s.run_time - s.last_find;
  row.coverage_rows = series.size();
  if (time_to_n) row.time_to_n = TimeToNEdges(series, *time_to_n);
  row.gates_passed = row.run_time >= kGateRunTime && row.execs_done >= kGateExecs &&
                     row.coverage_rows >= kGateCoverageRows;
  return row;
}

std::vector<fs::path> FindRunDirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("run root is not a directory: " + root.string());
  std::vector<fs::path> dirs;
  CollectRunDirs(root, dirs);
  return dirs;
}

namespace {

void SortRows(std::vector<RunRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    return std::tie(a.mode, a.run_id) < std::tie(b.mode, b.run_id);
  });
}

}  // namespace

std::vector<RunRow> ParseRunsSerial(const fs::path& root, std::optional<uint64_t> time_to_n) {
  std::vector<RunRow> rows;
  for (const auto& d : FindRunDirs(root)) rows.push_back(ParseRunDir(d, time_to_n));
  SortRows(rows);
  return rows;
}

std::vector<RunRow> ParseRuns(const fs::path& root, std::optional<uint64_t> time_to_n) {
  const auto dirs = FindRunDirs(root);
  std::vector<RunRow> rows(dirs.size());
  std::vector<std::exception_ptr> errors(dirs.size());
  const auto n = static_cast<int64_t>(dirs.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<size_t>(i);
    try {
      rows[k] = ParseRunDir(dirs[k], time_to_n);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  // Report the first failure in directory order, as the serial path would.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  SortRows(rows);
  return rows;
}

Aggregate Summarize(std::vector<RunRow> rows, const StatsOptions& options) {
  Aggregate agg;
  agg.options = options;
  agg.rows = std::move(rows);
  std::map<std::string, std::vector<const RunRow*>> by_mode;
  for (const auto& r : agg.rows) by_mode[r.mode].push_back(&r);

  std::vector<double> base_plateaus;
  if (auto it = by_mode.find(options.baseline_mode); it != by_mode.end()) {
    base_plateaus = Column(it->second, &RunRow::plateau_sec);
  }
  std::vector<std::string> order;
  if (by_mode.count(options.baseline_mode)) order.push_back(options.baseline_mode);
  for (const auto& [mode, _] : by_mode) {
    if (mode != options.baseline_mode) order.push_back(mode);
  }
  for (const auto& mode : order) {
    const auto& runs = by_mode[mode];
    ModeSummary s;
    s.mode = mode;
    s.runs = runs.size();
    for (const RunRow* r : runs) s.gates_passed += r->gates_passed;
    const auto plateaus = Column(runs, &RunRow::plateau_sec);
    s.median_plateau = Median(plateaus);
    s.plateau_ci = BootstrapMedianCi(plateaus, options.resamples, options.seed);
    s.median_last_find = Median(Column(runs, &RunRow::last_find));
    std::vector<double> edges;
    std::vector<double> ttn;
    for (const RunRow* r : runs) {
      edges.push_back(static_cast<double>(r->edges_found));
      if (r->time_to_n) ttn.push_back(*r->time_to_n);
    }
    s.median_edges = Median(edges);
    s.reached_n = ttn.size();
    if (!ttn.empty()) s.median_time_to_n = Median(ttn);
    if (mode != options.baseline_mode && !base_plateaus.empty()) {
      s.vs_baseline = MannWhitney(base_plateaus, plateaus);
      s.a12_vs_baseline = VarghaDelaneyA12(base_plateaus, plateaus);
    }
    agg.modes.push_back(std::move(s));
  }
  return agg;
}

Aggregate AggregateRuns(const fs::path& root, const StatsOptions& options) {
  return Summarize(ParseRuns(root, options.time_to_n), options);
}

std::string RunsCsv(const Aggregate& agg) {
  std::string out =
      "mode,run_id,run_time,last_find,plateau_sec,execs_done,execs_per_sec,cycles_done,"
      "corpus_count,edges_found,coverage_rows,time_to_n,gates_passed\n";
  for (const auto& r : agg.rows) {
    out += r.mode + "," + r.run_id + "," + Num(r.run_time, 0) + "," + Num(r.last_find, 0) + "," +
           Num(r.plateau_sec, 0) + "," + std::to_string(r.execs_done) + "," +
           Num(r.execs_per_sec, 2) + "," + std::to_string(r.cycles_done) + "," +
           std::to_string(r.corpus_count) + "," + std::to_string(r.edges_found) + "," +
           std::to_string(r.coverage_rows) + "," + Opt(r.time_to_n, 0) + "," +
           (r.gates_passed ? "true" : "false") + "\n";
  }
  return out;
}

std::string SummaryCsv(const Aggregate& agg) {
  std::string out =
      "mode,runs,gates_passed,median_plateau,ci_lo,ci_hi,median_last_find,median_edges,"
      "U,p,A12,reached_n,median_time_to_n\n";
  for (const auto& s : agg.modes) {
    out += s.mode + "," + std::to_string(s.runs) + "," + std::to_string(s.gates_passed) + "," +
           Num(s.median_plateau, 1) + "," + Num(s.plateau_ci.lo, 1) + "," +
           Num(s.plateau_ci.hi, 1) + "," + Num(s.median_last_find, 1) + "," +
           Num(s.median_edges, 1) + "," +
           (s.vs_baseline ? Num(s.vs_baseline->u, 1) : "NA") + "," +
           (s.vs_baseline ? Num(s.vs_baseline->p_two_sided, 2) : "NA") + "," +
           Opt(s.a12_vs_baseline, 2) + "," + std::to_string(s.reached_n) + "," +
           Opt(s.median_time_to_n, 0) + "\n";
  }
  return out;
}

std::string TextReport(const Aggregate& agg) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-34s %-26s %s\n", "metric", "result", "companion");
  out += line;
  for (const auto& s : agg.modes) {
    std::snprintf(line, sizeof line, "%-34s %-26s %s\n",
                  ("median plateau (" + s.mode + ")").c_str(),
                  (Num(s.median_plateau, 0) + " s").c_str(),
                  ("95% CI [" + Num(s.plateau_ci.lo, 0) + ", " + Num(s.plateau_ci.hi, 0) +
                   "], n=" + std::to_string(s.runs))
                      .c_str());
    out += line;
    if (s.vs_baseline) {
      std::snprintf(line, sizeof line, "%-34s %-26s %s\n",
                    ("plateau U vs " + agg.options.baseline_mode + " (" + s.mode + ")").c_str(),
                    Num(s.vs_baseline->u, 1).c_str(),
                    ("p=" + Num(s.vs_baseline->p_two_sided, 2) +
                     (s.vs_baseline->exact ? " exact" : " normal") +
                     ", A12=" + Opt(s.a12_vs_baseline, 2))
                        .c_str());
      out += line;
    }
    if (agg.options.time_to_n) {
      std::snprintf(line, sizeof line, "%-34s %-26s %s\n",
                    ("median time to " + std::to_string(*agg.options.time_to_n) + " edges (" +
                     s.mode + ")")
                        .c_str(),
                    (Opt(s.median_time_to_n, 0) + " s").c_str(),
                    ("reached in " + std::to_string(s.reached_n) + "/" + std::to_string(s.runs))
                        .c_str());
      out += line;
    }
    std::snprintf(line, sizeof line, "%-34s %-26s %s\n",
                  ("acceptance gates (" + s.mode + ")").c_str(),
                  (std::to_string(s.gates_passed) + "/" + std::to_string(s.runs)).c_str(),
                  "run_time>=14000, execs>=1e6, rows>=200");
    out += line;
  }
  return out;
}

}  // namespace recipefuzz
