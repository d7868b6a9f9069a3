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

#include "recipefuzz/controller.h"

#include <array>
#include <chrono>
#include <cstdio>

#include "json.hpp"
#include "recipefuzz/digest.h"
#include "recipefuzz/errors.h"
#include "recipefuzz/mutator.h"
#include "recipefuzz/static_dict.h"

namespace recipefuzz {
namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<std::string_view, 6> kAblationNames = {
    "baseline", "rule-only", "no-mutator", "controller-only", "no-static-analysis", "full"};

std::string Name(const char* fmt, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, n);
  return buf;
}

void WriteBytes(const fs::path& p, const Bytes& b) {
  WriteTextFile(p, std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
}

bool UsesRecipeMutator(Ablation a) {
  return a == Ablation::kRuleOnly || a == Ablation::kNoStaticAnalysis || a == Ablation::kFull;
}

bool UsesStaticContext(Ablation a) { return a == Ablation::kFull || a == Ablation::kNoMutator; }

bool UsesExternalProviders(Ablation a) {
  return a == Ablation::kFull || a == Ablation::kNoMutator || a == Ablation::kNoStaticAnalysis;
}

class CampaignRunner {
 public:
  explicit CampaignRunner(const CampaignConfig& config)
      : cfg_(config),
        executor_(config.executor ? config.executor
                                  : std::shared_ptr<const Executor>(MakeTarget(config.target))),
        detector_(config.detector),
        dispatch_(/*fallback_on_miss=*/true) {
    if (!(cfg_.budget_sec >= 0.0)) throw ConfigInvalid("budget_sec must be >= 0");
    if (cfg_.k_cand < 1) throw ConfigInvalid("k_cand must be >= 1");
    if (!(cfg_.poll_sec > 0.0)) throw ConfigInvalid("poll_sec must be > 0");
    if (cfg_.clock.mode == ClockConfig::Mode::kVirtual && !(cfg_.clock.exec_rate > 0.0)) {
      throw ConfigInvalid("exec_rate must be > 0");
    }
    if (cfg_.output_dir.empty()) throw ConfigInvalid("output_dir is required");
  }

  RunArtifacts Run();

 private:
  double Now() const;
  TelemetryFrame Frame(double t) const;
  void Poll(double tp);
  double HandlePlateau(const PlateauEvent& ev, double t);
  void Install(const MutationRecipe& recipe, double t);
  std::optional<std::vector<std::string>> StaticTokens() const;
  void Finish(double t);

  const CampaignConfig& cfg_;
  std::shared_ptr<const Executor> executor_;
  PlateauDetector detector_;
  RecipeDispatchMutator dispatch_;
  VanillaHavocMutator havoc_;
  std::unique_ptr<CoverageLoop> loop_;
  std::unique_ptr<EventLog> log_;
  fs::path out_;
  std::string digest_;
  std::chrono::steady_clock::time_point wall_start_;
  RunArtifacts art_;
  bool pending_plateau_ = false;
  PlateauEvent pending_;
  double installed_at_ = 0.0;
  int64_t installed_ttl_ = 0;
};

double CampaignRunner::Now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_).count();
}

TelemetryFrame CampaignRunner::Frame(double t) const {
  return {t, loop_->counters().execs, loop_->paths_total(), loop_->edges_found()};
}

std::optional<std::vector<std::string>> CampaignRunner::StaticTokens() const {
  if (!UsesStaticContext(cfg_.ablation)) return std::nullopt;
  if (!cfg_.binary_path.empty()) {
    std::vector<std::string> tokens;
    for (auto& t : ExtractStringsFromFile(cfg_.binary_path).tokens) {
      tokens.push_back(std::move(t.token));
    }
    return tokens;
  }
  return executor_->Literals();
}

void CampaignRunner::Install(const MutationRecipe& recipe, double t) {
  dispatch_.Clear();
  dispatch_.Install(LowerRecipe(recipe));
  art_.active_recipe_id = recipe.id;
  installed_at_ = t;
  installed_ttl_ = recipe.ttl_sec;
}

void CampaignRunner::Poll(double tp) {
  art_.coverage.push_back({tp, loop_->edges_found()});
  // A promoted recipe that outlived its ttl gives way to the default.
  if (UsesRecipeMutator(cfg_.ablation) && art_.active_recipe_id != kDefaultRecipeId &&
      tp - installed_at_ >= static_cast<double>(installed_ttl_)) {
    Install(DefaultRuleRecipe(), tp);
  }
  if (cfg_.ablation == Ablation::kBaseline) return;
  detector_.Observe(Frame(tp));
  if (auto ev = detector_.CheckPlateau()) {
    pending_plateau_ = true;
    pending_ = *ev;
  }
}

double CampaignRunner::HandlePlateau(const PlateauEvent& ev, double t) {
  const int cycle = ++art_.plateau_cycles;
  const fs::path dir = out_ / Name("plateau_%02d", cycle);
  log_->Append({t, EventKind::kPlateauDetected,
                {{"cycle", std::to_string(cycle)},
                 {"window_start", FormatReal(ev.window_start)},
                 {"delta_execs", std::to_string(ev.delta_execs)},
                 {"delta_paths", std::to_string(ev.delta_paths)},
                 {"edges_found", std::to_string(loop_->edges_found())}},
                {}, {}});

  const Snapshot snap = SnapshotCorpus(out_ / "queue", dir / "snapshot");
  log_->Append({t, EventKind::kCorpusSnapshot,
                {{"cycle", std::to_string(cycle)},
                 {"snapshot", fs::relative(snap.dir, out_).string()},
                 {"entries", std::to_string(snap.manifest.size())},
                 {"manifest_sha256", Sha256Hex(ReadTextFile(snap.dir / kManifestName))}},
                {}, {}});

  if (cfg_.ablation == Ablation::kControllerOnly) {
    log_->Append({t, EventKind::kWinnerDecided,
                  {{"status", "no_significance"}, {"winner_reward", FormatReal(0.0)}}, {}, {}});
    log_->Append({t, EventKind::kPromotionSkipped, {{"reason", "controller_only"}}, {}, {}});
    return 0.0;
  }

  Blackboard bb;
  bb.snapshot_dir = fs::relative(snap.dir, out_).string();
  bb.snapshot_manifest = snap.manifest;
  bb.recent_stats.assign(detector_.frames().begin(), detector_.frames().end());
  bb.static_tokens = StaticTokens();
  bb.config_digest = digest_;
  WriteTextFile(dir / "blackboard.json", bb.ToJson());

  std::vector<ProposalProvider*> providers;
  StaticContextProvider static_provider;
  if (UsesExternalProviders(cfg_.ablation)) {
    for (const auto& p : cfg_.providers) providers.push_back(p.get());
  }
  if (UsesStaticContext(cfg_.ablation)) providers.push_back(&static_provider);
  const auto candidates = ProposeCandidates(bb, providers, cfg_.k_cand, cycle, log_.get(), t);

  fs::create_directories(dir / "candidates");
  const auto seeds = LoadSnapshot(snap);
  std::vector<MicroResult> results;
  double elapsed = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    WriteTextFile(dir / "candidates" / (c.candidate_id + ".json"), SerializeRecipe(c.recipe));
    const uint64_t seed = MixSeed(cfg_.seed, 1000 * static_cast<uint64_t>(cycle) + i);
    MicroResult r = EvaluateCandidate(c, seeds, cfg_.micro, *executor_, cfg_.weights, seed,
                                      cfg_.clock, cfg_.max_size);
    elapsed += r.elapsed_sec;
    log_->Append(MicroResultEvent(r, c, t + elapsed));
    results.push_back(std::move(r));
  }

  const PromotionDecision d = DecideWinner(results, log_.get(), t + elapsed);
  if (d.winner) {
    ++art_.promotions;
    const MutationRecipe& winner = candidates[*d.winner].recipe;
    fs::create_directories(out_ / "main_recipes");
    WriteTextFile(out_ / "main_recipes" / (winner.id + ".json"), SerializeRecipe(winner));
    if (UsesRecipeMutator(cfg_.ablation)) {
      Install(winner, t + elapsed);
      ++art_.promotions_installed;
    }
  }
  return elapsed;
}

RunArtifacts CampaignRunner::Run() {
  out_ = cfg_.output_dir;
  fs::create_directories(out_ / "queue");
  fs::create_directories(out_ / "crashes");
  digest_ = ConfigDigest(cfg_);
  log_ = std::make_unique<EventLog>((out_ / kEventsFile).string());

  const bool recipes = UsesRecipeMutator(cfg_.ablation);
  MutatorApi& mutator = recipes ? static_cast<MutatorApi&>(dispatch_) : havoc_;
  loop_ = std::make_unique<CoverageLoop>(*executor_, mutator, MixSeed(cfg_.seed, 0),
                                         cfg_.max_size);
  loop_->on_new_entry = [this](const SeedEntry& e, size_t) {
    WriteBytes(out_ / "queue" / e.seed_id, e.bytes);
  };
  loop_->on_new_crash = [this](const Bytes& b, size_t i) {
    WriteBytes(out_ / "crashes" / Name("id:%06d", static_cast<int>(i)), b);
  };
  if (recipes) Install(DefaultRuleRecipe(), 0.0);

  wall_start_ = std::chrono::steady_clock::now();
  const auto seeds = cfg_.seeds.empty() ? DefaultSeeds(cfg_.target) : cfg_.seeds;
  for (const auto& s : seeds) {
    loop_->Import(MakeSeed(Name("id:%06d", static_cast<int>(loop_->paths_total())), s, "seed"),
                  0.0);
  }
  if (loop_->paths_total() == 0) throw ConfigInvalid("no usable seed (all seeds crash)");

  const bool virtual_time = cfg_.clock.mode == ClockConfig::Mode::kVirtual;
  const double dt = virtual_time ? 1.0 / cfg_.clock.exec_rate : 0.0;
  double t = 0.0;
  Poll(0.0);
  double next_poll = cfg_.poll_sec;
  uint64_t main_execs = 0;

  while (t < cfg_.budget_sec && !(cfg_.budget_execs && main_execs >= *cfg_.budget_execs)) {
    const double t_exec = virtual_time ? t + dt : Now();
    loop_->Step(t_exec);
    ++main_execs;
    t = virtual_time ? t_exec : Now();
    while (t >= next_poll) {
      Poll(next_poll);
      next_poll += cfg_.poll_sec;
      if (!pending_plateau_) continue;
      pending_plateau_ = false;
      const double elapsed = HandlePlateau(pending_, pending_.fired_at);
      const double resume = virtual_time ? pending_.fired_at + elapsed : Now();
      // The main loop was paused; coverage rows keep their cadence.
      for (; next_poll <= resume; next_poll += cfg_.poll_sec) {
        art_.coverage.push_back({next_poll, loop_->edges_found()});
      }
      t = std::max(t, resume);
      detector_.ResetWindow();
      detector_.Observe(Frame(t));
    }
  }
  Finish(t);
  return art_;
}

void CampaignRunner::Finish(double t) {
  if (art_.coverage.empty() || art_.coverage.back().t_sec < t) {
    art_.coverage.push_back({t, loop_->edges_found()});
  }
  const LoopCounters& c = loop_->counters();
  FuzzerStats& s = art_.stats;
  s.run_time = t;
  s.execs_done = c.execs;
  s.execs_per_sec = t > 0.0 ? static_cast<double>(c.execs) / t : 0.0;
  s.cycles_done = c.cycles_done;
  s.corpus_count = loop_->paths_total();
  s.edges_found = loop_->edges_found();
  s.bitmap_cvg = 100.0 * static_cast<double>(s.edges_found) /
                 static_cast<double>(loop_->bitmap().capacity());
  s.last_find = c.last_find;
  s.stability = 100.0;

  const std::string stats_text = FormatFuzzerStats(s);
  const std::string coverage_text = FormatCoverageCsv(art_.coverage);
  WriteTextFile(out_ / kFuzzerStatsFile, stats_text);
  WriteTextFile(out_ / kCoverageFile, coverage_text);
  log_->Append({t, EventKind::kRunCompleted,
                {{"execs_done", std::to_string(s.execs_done)},
                 {"edges_found", std::to_string(s.edges_found)},
                 {"plateau_cycles", std::to_string(art_.plateau_cycles)},
                 {"promotions", std::to_string(art_.promotions)},
                 {"active_recipe", art_.active_recipe_id.empty() ? "none" : art_.active_recipe_id}},
                {}, {}});
  art_.events = log_->events();
  log_.reset();  // flush and close before hashing

  const std::string run_id = cfg_.run_id.empty() ? out_.filename().string() : cfg_.run_id;
  const std::string mode =
      cfg_.mode_label.empty() ? std::string(AblationName(cfg_.ablation)) : cfg_.mode_label;
  ojson meta;
  meta["run_id"] = run_id;
  meta["mode"] = mode;
  meta["ablation"] = AblationName(cfg_.ablation);
  meta["seed"] = cfg_.seed;
  meta["executor"] = executor_->Identity();
  meta["config_digest"] = digest_;
  meta["clock"] = cfg_.clock.mode == ClockConfig::Mode::kVirtual ? "virtual" : "wall";
  meta["status"] = "completed";
  meta["plateau_cycles"] = art_.plateau_cycles;
  meta["promotions"] = art_.promotions;
  meta["promotions_installed"] = art_.promotions_installed;
  meta["active_recipe_id"] = art_.active_recipe_id;
  meta["artifacts"] = {{std::string(kFuzzerStatsFile), Sha256Hex(stats_text)},
                       {std::string(kCoverageFile), Sha256Hex(coverage_text)},
                       {std::string(kEventsFile), Sha256Hex(ReadTextFile(out_ / kEventsFile))}};
  WriteTextFile(out_ / kMetadataFile, meta.dump(2) + "\n");

  std::string report = "# Campaign " + run_id + "\n\n";
  report += "- mode: " + mode + "\n";
  report += "- executor: " + executor_->Identity() + "\n";
  report += "- run_time: " + FormatReal(s.run_time) + " s\n";
  report += "- execs_done: " + std::to_string(s.execs_done) + "\n";
  report += "- edges_found: " + std::to_string(s.edges_found) + "\n";
  report += "- last_find: " + FormatReal(s.last_find) + " s\n";
  report += "- plateau cycles: " + std::to_string(art_.plateau_cycles) + "\n";
  report += "- promotions: " + std::to_string(art_.promotions) + "\n";
  report += "- active recipe: " +
            (art_.active_recipe_id.empty() ? std::string("none (havoc)") : art_.active_recipe_id) +
            "\n\n## Gate events\n\n";
  for (const auto& e : art_.events) {
    if (e.kind == EventKind::kProposalRecorded) continue;
    report += "- t=" + FormatReal(e.t) + " `" + EventMessage(e) + "`\n";
  }
  WriteTextFile(out_ / "report.md", report);
}

}  // namespace

std::string_view AblationName(Ablation a) { return kAblationNames[static_cast<size_t>(a)]; }

std::optional<Ablation> AblationFromName(std::string_view name) {
  for (size_t i = 0; i < kAblationNames.size(); ++i) {
    if (kAblationNames[i] == name) return static_cast<Ablation>(i);
  }
  return std::nullopt;
}

std::string ConfigDigest(const CampaignConfig& c) {
  ojson j;
  j["target"] = c.executor ? c.executor->Identity() : c.target;
  j["ablation"] = AblationName(c.ablation);
  j["budget_sec"] = c.budget_sec;
  j["budget_execs"] = c.budget_execs ? ojson(*c.budget_execs) : ojson(nullptr);
  j["detector"] = {c.detector.window_sec, c.detector.theta_execs, c.detector.theta_paths,
                   c.detector.rearm == RearmPolicy::kOncePerCampaign ? "once" : "cooldown",
                   c.detector.cooldown_sec};
  j["poll_sec"] = c.poll_sec;
  j["micro"] = {c.micro.seconds, c.micro.execs ? ojson(*c.micro.execs) : ojson(nullptr)};
  j["k_cand"] = c.k_cand;
  j["weights"] = {c.weights.alpha, c.weights.beta, c.weights.gamma, c.weights.delta_h,
                  c.weights.delta_m};
  ojson providers = ojson::array();
  for (const auto& p : c.providers) providers.push_back(p->Name());
  j["providers"] = providers;
  j["binary"] = c.binary_path;
  j["seed"] = c.seed;
  j["clock"] = {c.clock.mode == ClockConfig::Mode::kVirtual ? "virtual" : "wall",
                c.clock.exec_rate};
  j["max_size"] = c.max_size;
  ojson seeds = ojson::array();
  for (const auto& s : c.seeds) seeds.push_back(Sha256Hex(s));
  j["seeds"] = seeds;
  return Sha256Hex(j.dump());
}

RunArtifacts RunCampaign(const CampaignConfig& config) {
  return CampaignRunner(config).Run();
}

}  // namespace recipefuzz
