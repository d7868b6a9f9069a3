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

#include "recipefuzz/plateau.h"

#include <algorithm>
#include <string>

#include "recipefuzz/errors.h"

namespace recipefuzz {

PlateauDetector::PlateauDetector(DetectorConfig config) : config_(config) {
  if (!(config_.window_sec > 0.0)) throw ConfigInvalid("window_sec must be > 0");
  if (config_.theta_execs < 1) throw ConfigInvalid("theta_execs must be >= 1");
  if (config_.theta_paths < 1) throw ConfigInvalid("theta_paths must be >= 1");
  if (config_.cooldown_sec < 0.0) throw ConfigInvalid("cooldown_sec must be >= 0");
}

void PlateauDetector::Observe(const TelemetryFrame& f) {
  if (last_) {
    if (f.t < last_->t) {
      throw NonMonotonicTelemetry("time went backwards at t=" + std::to_string(f.t));
    }
    if (f.execs_done < last_->execs_done || f.paths_total < last_->paths_total ||
        f.edges_found < last_->edges_found) {
      throw NonMonotonicTelemetry("counter decreased at t=" + std::to_string(f.t));
    }
  }
  if (!first_t_) first_t_ = f.t;
  last_ = f;
  frames_.push_back(f);
  // Keep the newest frame at or before the horizon as the window's anchor,
  // so the window spans at least W even when polls jitter.
  const double horizon = f.t - config_.window_sec;
  while (frames_.size() >= 2 && frames_[1].t <= horizon) frames_.pop_front();
}

std::optional<PlateauEvent> PlateauDetector::Evaluate() const {
  if (frames_.empty() || !first_t_) return std::nullopt;
  const TelemetryFrame& newest = frames_.back();
  if (newest.t - *first_t_ < config_.window_sec) return std::nullopt;  // warm-up
  const TelemetryFrame& oldest = frames_.front();
  PlateauEvent e;
  e.fired_at = newest.t;
  e.window_start = oldest.t;
  e.delta_execs = newest.execs_done - oldest.execs_done;
  e.delta_paths = newest.paths_total - oldest.paths_total;
  if (e.delta_execs < config_.theta_execs && e.delta_paths < config_.theta_paths) {
    return e;
  }
  return std::nullopt;
}

void PlateauDetector::ResetWindow() {
  frames_.clear();
  first_t_.reset();
}

bool PlateauDetector::armed() const {
  if (!last_fire_) return true;
  if (config_.rearm == RearmPolicy::kOncePerCampaign) return false;
  if (!last_) return false;
  const double gap = std::max(config_.cooldown_sec, config_.window_sec);
  return last_->t - *last_fire_ >= gap;
}

std::optional<PlateauEvent> PlateauDetector::CheckPlateau() {
  if (!armed()) return std::nullopt;
  auto e = Evaluate();
  if (e) {
    last_fire_ = e->fired_at;
    ++fired_count_;
  }
  return e;
}

}  // namespace recipefuzz
