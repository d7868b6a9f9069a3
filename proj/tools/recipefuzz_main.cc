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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "recipefuzz/artifacts.h"
#include "recipefuzz/controller.h"
#include "recipefuzz/errors.h"
#include "recipefuzz/micro_campaign.h"
#include "recipefuzz/microbench.h"
#include "recipefuzz/mutator.h"
#include "recipefuzz/run_stats.h"
#include "recipefuzz/static_dict.h"

namespace fs = std::filesystem;
using namespace recipefuzz;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitExecutor = 4;
constexpr int kExitValidation = 5;

Bytes ReadBytes(const std::string& path) {
  const std::string s = ReadTextFile(path);
  return Bytes(s.begin(), s.end());
}

std::string RecipeText(const std::string& arg) {
  if (auto builtin = BuiltinRecipeDocument(arg)) return std::string(*builtin);
  return ReadTextFile(arg);
}

std::vector<Bytes> ReadSeedDir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (de.is_regular_file()) files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Bytes> seeds;
  for (const auto& f : files) seeds.push_back(ReadBytes(f.string()));
  if (seeds.empty()) throw IoError("seed directory is empty: " + dir);
  return seeds;
}

std::shared_ptr<const Executor> ExecutorFor(const std::string& target, const fs::path& work) {
  constexpr std::string_view kCommand = "command:";
  if (target.rfind(kCommand, 0) == 0) {
    return std::make_shared<CommandExecutor>(target.substr(kCommand.size()),
                                             (work / ".exec").string());
  }
  return MakeTarget(target);
}

ClockConfig ParseClock(const std::string& mode, double rate) {
  ClockConfig c;
  if (mode == "wall") {
    c.mode = ClockConfig::Mode::kWall;
  } else if (mode != "virtual") {
    throw ConfigInvalid("--clock must be virtual or wall");
  }
  c.exec_rate = rate;
  return c;
}

struct RunOpts {
  std::string target = "json";
  std::string ablation = "full";
  double budget = 14400.0;
  uint64_t budget_execs = 0;
  uint64_t seed = 1;
  std::string out;
  std::string seeds;
  std::vector<std::string> providers_files;
  std::string binary;
  std::string clock = "virtual";
  double exec_rate = 4.0;
  size_t k_cand = 4;
  double micro_budget = 20.0;
  uint64_t micro_execs = 0;
  double poll = 1.0;
  double window = 10.0;
  uint64_t theta_execs = 50;
  uint64_t theta_paths = 1;
  std::string run_id;
  std::string mode_label;
};

int DoRun(const RunOpts& o) {
  CampaignConfig cfg;
  const auto ablation = AblationFromName(o.ablation);
  if (!ablation) throw ConfigInvalid("unknown ablation: " + o.ablation);
  cfg.ablation = *ablation;
  cfg.output_dir = o.out;
  fs::create_directories(cfg.output_dir);
  cfg.target = o.target;
  cfg.executor = ExecutorFor(o.target, cfg.output_dir);
  cfg.budget_sec = o.budget;
  if (o.budget_execs) cfg.budget_execs = o.budget_execs;
  cfg.seed = o.seed;
  if (!o.seeds.empty()) cfg.seeds = ReadSeedDir(o.seeds);
  for (const auto& f : o.providers_files) {
    cfg.providers.push_back(std::make_shared<FileProposalProvider>(f));
  }
  cfg.binary_path = o.binary;
  cfg.clock = ParseClock(o.clock, o.exec_rate);
  cfg.k_cand = o.k_cand;
  cfg.micro.seconds = o.micro_budget;
  if (o.micro_execs) cfg.micro.execs = o.micro_execs;
  cfg.poll_sec = o.poll;
  cfg.detector.window_sec = o.window;
  cfg.detector.theta_execs = o.theta_execs;
  cfg.detector.theta_paths = o.theta_paths;
  cfg.run_id = o.run_id;
  cfg.mode_label = o.mode_label;
  const RunArtifacts art = RunCampaign(cfg);
  std::cout << "run_time=" << art.stats.run_time << "\n"
            << "execs_done=" << art.stats.execs_done << "\n"
            << "edges_found=" << art.stats.edges_found << "\n"
            << "plateau_cycles=" << art.plateau_cycles << "\n"
            << "promotions=" << art.promotions << "\n"
            << "active_recipe=" << (art.active_recipe_id.empty() ? "none" : art.active_recipe_id)
            << "\n";
  return 0;
}

struct MutateOpts {
  std::string recipe = "default";
  std::string input;
  std::string out;
  std::string corpus;
  uint64_t seed = 1;
  size_t max_size = 4096;
};

int DoMutate(const MutateOpts& o) {
  const CompactRecipe compact = LowerRecipe(ParseRecipe(RecipeText(o.recipe)));
  const Bytes input = ReadBytes(o.input);
  std::vector<SeedEntry> corpus;
  if (!o.corpus.empty()) {
    for (auto& b : ReadSeedDir(o.corpus)) corpus.push_back(MakeSeed("corpus", std::move(b)));
  }
  Rng rng(o.seed);
  const MutationOutcome r = Mutate(compact, input, corpus, rng, o.max_size);
  // Without --out the mutated bytes own stdout and the summary moves to stderr.
  std::ostream* report = &std::cout;
  if (o.out.empty()) {
    std::cout.write(reinterpret_cast<const char*>(r.output.data()),
                    static_cast<std::streamsize>(r.output.size()));
    std::cout.flush();
    report = &std::cerr;
  } else {
    WriteTextFile(o.out, std::string(r.output.begin(), r.output.end()));
  }
  *report << "sampled=" << OperatorName(r.sampled) << "\n"
            << "op_applied=" << (r.op_applied ? OperatorName(*r.op_applied) : "none") << "\n"
            << "hit=" << (r.hit ? "true" : "false") << "\n"
            << "miss=" << (r.miss ? "true" : "false") << "\n"
            << "output_size=" << r.output.size() << "\n";
  return 0;
}

struct MicroOpts {
  std::string snapshot;
  std::vector<std::string> recipes;
  std::string target = "json";
  double budget = 20.0;
  uint64_t execs = 0;
  uint64_t seed = 1;
  std::string clock = "virtual";
  double exec_rate = 4.0;
};

int DoMicro(const MicroOpts& o) {
  const auto seeds = LoadSnapshot(OpenSnapshot(o.snapshot));
  const auto executor = ExecutorFor(o.target, fs::temp_directory_path() / "recipefuzz_micro");
  MicroBudget budget;
  budget.seconds = o.budget;
  if (o.execs) budget.execs = o.execs;
  const ClockConfig clock = ParseClock(o.clock, o.exec_rate);
  std::vector<MicroResult> results;
  EventLog log;
  for (size_t i = 0; i < o.recipes.size(); ++i) {
    Candidate c;
    c.recipe = ParseRecipe(RecipeText(o.recipes[i]));
    c.candidate_id = "c" + std::to_string(i) + "_" + c.recipe.id;
    results.push_back(EvaluateCandidate(c, seeds, budget, *executor, RewardWeights{},
                                        MixSeed(o.seed, i), clock));
    std::cout << EventMessage(MicroResultEvent(results.back(), c, 0.0)) << "\n";
  }
  DecideWinner(results, &log);
  for (const auto& e : log.events()) std::cout << EventMessage(e) << "\n";
  return 0;
}

struct BenchOpts {
  std::string config = "all";
  uint64_t calls = 100000;
  int reps = 5;
  size_t corpus_size = 10000;
  uint64_t seed = 1;
};

int DoMicrobench(const BenchOpts& o) {
  const auto corpus = GenerateJsonCorpus(o.corpus_size, o.seed);
  if (o.config == "all") {
    std::cout << FormatProtocol(RunBenchProtocol(o.calls, o.reps, corpus, o.seed));
    return 0;
  }
  const auto config = BenchConfigFromName(o.config);
  if (!config) throw ConfigInvalid("unknown bench config: " + o.config);
  for (int rep = 0; rep < o.reps; ++rep) {
    std::cout << FormatBenchReport(
        BenchDispatch(*config, o.calls, corpus, MixSeed(o.seed, static_cast<uint64_t>(rep))));
  }
  return 0;
}

struct DictOpts {
  std::string binary;
  size_t min_len = kDefaultMinLen;
  std::string out;
  std::string report;
  bool all_readonly = false;
  size_t top_k = 10;
};

int DoExtractDict(const DictOpts& o) {
  const TokenInventory inv = ExtractStringsFromFile(o.binary, o.min_len, o.all_readonly);
  const std::string dict = WriteDictionary(inv);
  if (o.out.empty()) {
    std::cout << dict;
  } else {
    WriteTextFile(o.out, dict);
  }
  const std::string report = InventoryReport(inv, o.top_k);
  if (o.report.empty()) {
    std::cerr << report;
  } else {
    WriteTextFile(o.report, report);
  }
  return 0;
}

struct StatsOpts {
  std::string runs;
  std::string baseline_mode = "baseline";
  std::string out;
  std::string runs_csv;
  std::string report;
  uint64_t resamples = 10000;
  uint64_t seed = 1;
  uint64_t time_to_n = 0;
};

int DoStats(const StatsOpts& o) {
  StatsOptions opts;
  opts.baseline_mode = o.baseline_mode;
  opts.resamples = o.resamples;
  opts.seed = o.seed;
  if (o.time_to_n) opts.time_to_n = o.time_to_n;
  const Aggregate agg = AggregateRuns(o.runs, opts);
  const std::string summary = SummaryCsv(agg);
  if (o.out.empty()) {
    std::cout << summary;
  } else {
    WriteTextFile(o.out, summary);
  }
  if (!o.runs_csv.empty()) WriteTextFile(o.runs_csv, RunsCsv(agg));
  if (!o.report.empty()) WriteTextFile(o.report, TextReport(agg));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recipefuzz: plateau-triggered, gate-checked mutation recipes"};
  app.require_subcommand(1);

  RunOpts run;
  auto* run_cmd = app.add_subcommand("run", "run a campaign");
  run_cmd->add_option("--target", run.target, "json | staircase | saturated | command:<template>");
  run_cmd->add_option("--ablation", run.ablation,
                      "baseline | rule-only | no-mutator | controller-only | "
                      "no-static-analysis | full");
  run_cmd->add_option("--budget", run.budget, "campaign budget in seconds");
  run_cmd->add_option("--budget-execs", run.budget_execs, "stop after this many executions");
  run_cmd->add_option("--seed", run.seed);
  run_cmd->add_option("--out", run.out, "run directory")->required();
  run_cmd->add_option("--seeds", run.seeds, "directory of seed inputs");
  run_cmd->add_option("--providers-file", run.providers_files, "JSONL canned proposals");
  run_cmd->add_option("--binary", run.binary, "ELF whose .rodata feeds the static context");
  run_cmd->add_option("--clock", run.clock, "virtual | wall");
  run_cmd->add_option("--exec-rate", run.exec_rate, "virtual executions per second");
  run_cmd->add_option("--k-cand", run.k_cand, "candidates per plateau");
  run_cmd->add_option("--micro-budget", run.micro_budget, "micro-campaign seconds");
  run_cmd->add_option("--micro-execs", run.micro_execs, "micro-campaign executions");
  run_cmd->add_option("--poll", run.poll, "telemetry interval in seconds");
  run_cmd->add_option("--window", run.window, "detector window in seconds");
  run_cmd->add_option("--theta-execs", run.theta_execs);
  run_cmd->add_option("--theta-paths", run.theta_paths);
  run_cmd->add_option("--run-id", run.run_id);
  run_cmd->add_option("--mode-label", run.mode_label, "mode recorded in run metadata");

  MutateOpts mut;
  auto* mutate_cmd = app.add_subcommand("mutate", "apply one recipe mutation to a file");
  mutate_cmd->add_option("--recipe", mut.recipe, "recipe file, or json_nesting / default");
  mutate_cmd->add_option("--input", mut.input)->required();
  mutate_cmd->add_option("--out", mut.out, "output file (default stdout)");
  mutate_cmd->add_option("--seed", mut.seed);
  mutate_cmd->add_option("--max-size", mut.max_size);
  mutate_cmd->add_option("--corpus", mut.corpus, "directory of splice donors");

  MicroOpts micro;
  auto* micro_cmd = app.add_subcommand("micro", "score recipes against a corpus snapshot");
  micro_cmd->add_option("--snapshot", micro.snapshot)->required();
  micro_cmd->add_option("--recipe", micro.recipes, "recipe file, or json_nesting / default")
      ->required();
  micro_cmd->add_option("--target", micro.target);
  micro_cmd->add_option("--micro-budget", micro.budget);
  micro_cmd->add_option("--micro-execs", micro.execs);
  micro_cmd->add_option("--seed", micro.seed);
  micro_cmd->add_option("--clock", micro.clock);
  micro_cmd->add_option("--exec-rate", micro.exec_rate);

  BenchOpts bench;
  auto* bench_cmd = app.add_subcommand("microbench", "mutator dispatch cost");
  bench_cmd->add_option("--config", bench.config, "vanilla | fp-empty | fp-active | all");
  bench_cmd->add_option("--calls", bench.calls);
  bench_cmd->add_option("--reps", bench.reps);
  bench_cmd->add_option("--corpus-size", bench.corpus_size);
  bench_cmd->add_option("--seed", bench.seed);

  DictOpts dict;
  auto* dict_cmd = app.add_subcommand("extract-dict", "build a dictionary from .rodata");
  dict_cmd->add_option("--binary", dict.binary)->required();
  dict_cmd->add_option("--min-len", dict.min_len);
  dict_cmd->add_option("--out", dict.out);
  dict_cmd->add_option("--report", dict.report);
  dict_cmd->add_flag("--all-readonly", dict.all_readonly);
  dict_cmd->add_option("--top-k", dict.top_k);

  StatsOpts stats;
  auto* stats_cmd = app.add_subcommand("stats", "aggregate run directories");
  stats_cmd->add_option("--runs", stats.runs)->required();
  stats_cmd->add_option("--baseline-mode", stats.baseline_mode);
  stats_cmd->add_option("--out", stats.out, "summary CSV (default stdout)");
  stats_cmd->add_option("--runs-csv", stats.runs_csv);
  stats_cmd->add_option("--report", stats.report);
  stats_cmd->add_option("--resamples", stats.resamples);
  stats_cmd->add_option("--seed", stats.seed);
  stats_cmd->add_option("--time-to-n", stats.time_to_n);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*run_cmd) return DoRun(run);
    if (*mutate_cmd) return DoMutate(mut);
    if (*micro_cmd) return DoMicro(micro);
    if (*bench_cmd) return DoMicrobench(bench);
    if (*dict_cmd) return DoExtractDict(dict);
    if (*stats_cmd) return DoStats(stats);
  } catch (const SchemaViolation& e) {
    std::cerr << "error: invalid recipe\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.path << ": " << v.reason << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ExecutorFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitExecutor;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
