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


#include <gtest/gtest.h>

#include "recipefuzz/errors.h"
#include "recipefuzz/plateau.h"

namespace recipefuzz {
namespace {

TelemetryFrame F(double t, uint64_t execs, uint64_t paths = 0, uint64_t edges = 0) {
  return {t, execs, paths, edges};
}

// Feeds frames each second from t=0 to t=end with constant per-second rates.
void Feed(PlateauDetector& d, int end, uint64_t execs_per_sec, uint64_t paths_per_sec = 0) {
  for (int t = 0; t <= end; ++t) d.Observe(F(t, t * execs_per_sec, t * paths_per_sec));
}

TEST(Plateau, FirstFrame) {
  PlateauDetector d;
  d.Observe(F(0, 0));
  EXPECT_EQ(d.frames().size(), 1u);
  EXPECT_FALSE(d.Evaluate());
}

TEST(Plateau, EvictsFramesOlderThanWindow) {
  PlateauDetector d;
  for (int t = 0; t <= 12; ++t) d.Observe(F(t, 0));
  EXPECT_EQ(d.frames().front().t, 2.0);
  EXPECT_EQ(d.frames().size(), 11u);
}

TEST(Plateau, RejectsRegressions) {
  PlateauDetector d;
  d.Observe(F(5, 100, 3, 7));
  EXPECT_THROW(d.Observe(F(6, 99, 3, 7)), NonMonotonicTelemetry);
  EXPECT_THROW(d.Observe(F(6, 100, 2, 7)), NonMonotonicTelemetry);
  EXPECT_THROW(d.Observe(F(6, 100, 3, 6)), NonMonotonicTelemetry);
  EXPECT_THROW(d.Observe(F(4, 100, 3, 7)), NonMonotonicTelemetry);
  d.Observe(F(5, 100, 3, 7));  // equal frame is fine
}

TEST(Plateau, InvalidConfig) {
  EXPECT_THROW(PlateauDetector(DetectorConfig{0.0, 50, 1}), ConfigInvalid);
  EXPECT_THROW(PlateauDetector(DetectorConfig{10.0, 0, 1}), ConfigInvalid);
  EXPECT_THROW(PlateauDetector(DetectorConfig{10.0, 50, 0}), ConfigInvalid);
}

TEST(Plateau, StrictThresholds) {
  {
    PlateauDetector d;
    d.Observe(F(0, 0));
    d.Observe(F(10, 49));
    const auto e = d.CheckPlateau();
    ASSERT_TRUE(e);
    EXPECT_EQ(e->delta_execs, 49u);
    EXPECT_EQ(e->delta_paths, 0u);
    EXPECT_EQ(e->window_start, 0.0);
    EXPECT_EQ(e->fired_at, 10.0);
  }
  {
    PlateauDetector d;
    d.Observe(F(0, 0));
    d.Observe(F(10, 50));
    EXPECT_FALSE(d.CheckPlateau());
  }
  {
    PlateauDetector d;
    d.Observe(F(0, 0, 0));
    d.Observe(F(10, 0, 1));
    EXPECT_FALSE(d.CheckPlateau());
  }
}

TEST(Plateau, WarmUp) {
  PlateauDetector d;
  for (int t = 0; t < 10; ++t) {
    d.Observe(F(t, 0));
    EXPECT_FALSE(d.CheckPlateau()) << t;
  }
  d.Observe(F(10, 0));
  EXPECT_TRUE(d.CheckPlateau());
}

TEST(Plateau, OncePerCampaign) {
  PlateauDetector d;
  int fired = 0;
  for (int t = 0; t <= 200; ++t) {
    d.Observe(F(t, t));
    fired += d.CheckPlateau().has_value();
  }
  EXPECT_EQ(fired, 1);
  EXPECT_EQ(d.fired_count(), 1);
  EXPECT_FALSE(d.armed());
  EXPECT_TRUE(d.Evaluate().has_value());  // the window still qualifies
}

TEST(Plateau, Cooldown) {
  DetectorConfig cfg;
  cfg.rearm = RearmPolicy::kAfterCooldown;
  cfg.cooldown_sec = 30;
  PlateauDetector d(cfg);
  std::vector<double> fired;
  for (int t = 0; t <= 100; ++t) {
    d.Observe(F(t, t));
    if (auto e = d.CheckPlateau()) fired.push_back(e->fired_at);
  }
  EXPECT_EQ(fired, (std::vector<double>{10, 40, 70, 100}));
}

TEST(Plateau, BusyWindowsNeverFire) {
  PlateauDetector a, b;
  Feed(a, 100, 5);     // 50 execs per window
  EXPECT_FALSE(a.CheckPlateau());
  Feed(b, 100, 0, 1);  // a new path every second
  EXPECT_FALSE(b.CheckPlateau());
}

TEST(Plateau, JitteredPollsUseTimestamps) {
  PlateauDetector d;
  // Irregular frame spacing: the window still spans at least W seconds.
  const double ts[] = {0, 0.4, 3.3, 7.9, 9.8, 10.6, 14.1};
  for (double t : ts) d.Observe(F(t, static_cast<uint64_t>(t * 4)));
  const auto e = d.Evaluate();
  ASSERT_TRUE(e);
  EXPECT_GE(e->fired_at - e->window_start, 10.0);
  EXPECT_EQ(e->window_start, 3.3);
}

TEST(Plateau, ResetWindowRestartsWarmUp) {
  PlateauDetector d(DetectorConfig{10.0, 50, 1, RearmPolicy::kAfterCooldown, 0.0});
  Feed(d, 10, 1);
  ASSERT_TRUE(d.CheckPlateau());
  d.ResetWindow();
  d.Observe(F(40, 40));
  EXPECT_FALSE(d.Evaluate());
  d.Observe(F(49, 49));
  EXPECT_FALSE(d.Evaluate());
  d.Observe(F(50, 50));
  EXPECT_TRUE(d.CheckPlateau());
  EXPECT_THROW(d.Observe(F(51, 10)), NonMonotonicTelemetry);
}

}  // namespace
}  // namespace recipefuzz
