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

#ifndef RECIPEFUZZ_PLATEAU_H_
#define RECIPEFUZZ_PLATEAU_H_

#include <cstdint>
#include <deque>
#include <optional>

namespace recipefuzz {

struct TelemetryFrame {
  double t = 0.0;  // seconds since campaign start
  uint64_t execs_done = 0;
  uint64_t paths_total = 0;
  uint64_t edges_found = 0;
};

enum class RearmPolicy : uint8_t { kOncePerCampaign, kAfterCooldown };

struct DetectorConfig {
  double window_sec = 10.0;
  uint64_t theta_execs = 50;
  uint64_t theta_paths = 1;
  RearmPolicy rearm = RearmPolicy::kOncePerCampaign;
  double cooldown_sec = 0.0;  // only read under kAfterCooldown
};

struct PlateauEvent {
  double fired_at = 0.0;
  double window_start = 0.0;
  uint64_t delta_execs = 0;
  uint64_t delta_paths = 0;
};

class PlateauDetector {
 public:
  // Throws ConfigInvalid unless W > 0, theta_execs >= 1, theta_paths >= 1.
  explicit PlateauDetector(DetectorConfig config = {});

  // Throws NonMonotonicTelemetry if time or any counter goes backwards.
  void Observe(const TelemetryFrame& frame);

  // Pure: reports whether the current window qualifies, ignoring arming.
  std::optional<PlateauEvent> Evaluate() const;

  // Evaluate() gated by the arming state. A returned event disarms.
  std::optional<PlateauEvent> CheckPlateau();

  // Drops the window and restarts warm-up; used after the main loop was
  // paused, so the pause itself does not read as a stall.
  void ResetWindow();

  bool armed() const;
  int fired_count() const { return fired_count_; }
  const std::deque<TelemetryFrame>& frames() const { return frames_; }
  const DetectorConfig& config() const { return config_; }

 private:
  DetectorConfig config_;
  std::deque<TelemetryFrame> frames_;
  std::optional<double> first_t_;
  std::optional<TelemetryFrame> last_;
  std::optional<double> last_fire_;
  int fired_count_ = 0;
};

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_PLATEAU_H_
