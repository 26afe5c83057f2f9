/*
 * Copyright 2026 The setfair Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "setfair/scores.h"

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "setfair/error.h"

namespace setfair {
namespace {

ScoreConfig Cfg(ScoreKind kind, double lambda = 0.0, int k_reg = 1) {
  ScoreConfig c;
  c.kind = kind;
  c.lambda = lambda;
  c.k_reg = k_reg;
  return c;
}

std::vector<double> RandomSimplex(std::mt19937_64& rng, int m) {
  std::gamma_distribution<double> g(0.7, 1.0);
  std::vector<double> p(m);
  for (auto& v : p) v = g(rng);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= s;
  return p;
}

TEST(TemperatureTest, IdentityAndSymmetry) {
  const std::vector<double> p{0.1, 0.25, 0.65};
  const auto same = ApplyTemperature(p, 1.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(same[i], p[i], 1e-12);
  for (double t : {0.05, 0.5, 3.0}) {
    const auto half = ApplyTemperature(std::vector<double>{0.5, 0.5}, t);
    EXPECT_NEAR(half[0], 0.5, 1e-12);
    EXPECT_NEAR(half[1], 0.5, 1e-12);
  }
}

TEST(TemperatureTest, HalfTemperatureSquares) {
  const std::vector<double> p{0.7, 0.2, 0.1};
  const auto q = ApplyTemperature(p, 0.5);
  const double z = 0.49 + 0.04 + 0.01;
  EXPECT_NEAR(q[0], 0.49 / z, 1e-12);
  EXPECT_NEAR(q[1], 0.04 / z, 1e-12);
  EXPECT_NEAR(q[2], 0.01 / z, 1e-12);
  EXPECT_NEAR(q[0], 0.9074, 1e-3);
  EXPECT_NEAR(q[1], 0.0741, 1e-3);
  EXPECT_NEAR(q[2], 0.0185, 1e-3);
}

TEST(TemperatureTest, ZerosClampedAndArgmaxKept) {
  const auto q = ApplyTemperature(std::vector<double>{0.0, 0.3, 0.7}, 2.0);
  EXPECT_GT(q[0], 0.0);
  EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(std::max_element(q.begin(), q.end()) - q.begin(), 2);
  EXPECT_THROW(ApplyTemperature(std::vector<double>{0.5, 0.5}, 0.0), ParameterError);
}

TEST(RankTest, TiesBrokenByClassIndex) {
  const std::vector<double> p{0.2, 0.4, 0.2, 0.2};
  EXPECT_EQ(Ranks(p), (std::vector<int>{2, 1, 3, 4}));
  const auto rho = MassAbove(p);
  EXPECT_NEAR(rho[0], 0.4, 1e-15);
  EXPECT_NEAR(rho[2], 0.4, 1e-15);
  EXPECT_EQ(rho[1], 0.0);
}

TEST(ScoreTest, RapsWorkedExample) {
  const std::vector<double> p{0.5, 0.3, 0.2};
  const auto cfg = Cfg(ScoreKind::kRaps, 0.1, 1);
  EXPECT_NEAR(Score(p, 0, cfg, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(Score(p, 1, cfg, 1.0), 0.9, 1e-12);
  EXPECT_NEAR(Score(p, 2, cfg, 1.0), 1.2, 1e-12);
}

TEST(ScoreTest, SapsWorkedExample) {
  const std::vector<double> p{0.6, 0.3, 0.1};
  const auto cfg = Cfg(ScoreKind::kSaps, 0.2);
  EXPECT_NEAR(Score(p, 0, cfg, 1.0), 0.6, 1e-12);
  EXPECT_NEAR(Score(p, 1, cfg, 1.0), 0.8, 1e-12);
  EXPECT_NEAR(Score(p, 2, cfg, 1.0), 1.0, 1e-12);
}

TEST(ScoreTest, LacAndAps) {
  EXPECT_EQ(Score(std::vector<double>{0.0, 1.0, 0.0}, 1, Cfg(ScoreKind::kLac), 1.0), 0.0);
  const std::vector<double> p{0.5, 0.3, 0.2};
  EXPECT_NEAR(Score(p, 0, Cfg(ScoreKind::kAps), 1.0), 0.5, 1e-15);
  EXPECT_NEAR(Score(p, 2, Cfg(ScoreKind::kAps), 1.0), 1.0, 1e-12);
  EXPECT_NEAR(Score(p, 1, Cfg(ScoreKind::kAps), 0.5), 0.5 + 0.15, 1e-12);
  EXPECT_THROW(Score(p, 3, Cfg(ScoreKind::kLac), 1.0), IndexError);
  EXPECT_THROW(Score(p, -1, Cfg(ScoreKind::kLac), 1.0), IndexError);
}

TEST(ScoreTest, UniformRandomizationFormulas) {
  const std::vector<double> p{0.6, 0.3, 0.1};
  const double u = 0.25;
  EXPECT_NEAR(Score(p, 0, Cfg(ScoreKind::kSaps, 0.2), u), 0.6 * u, 1e-12);
  EXPECT_NEAR(Score(p, 2, Cfg(ScoreKind::kSaps, 0.2), u), 0.6 + 0.2 * (1 + u), 1e-12);
  EXPECT_NEAR(Score(p, 2, Cfg(ScoreKind::kRaps, 0.5, 2), u), 0.9 + u * 0.1 + 0.5, 1e-12);
}

TEST(ScoreTest, PropertiesOnRandomRecords) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = RandomSimplex(rng, 8);
    const auto ranks = Ranks(p);
    auto perm = ranks;
    std::sort(perm.begin(), perm.end());
    for (int i = 0; i < 8; ++i) EXPECT_EQ(perm[i], i + 1);
    for (auto kind : {ScoreKind::kAps, ScoreKind::kRaps, ScoreKind::kSaps}) {
      const auto all = ScoreAll(p, Cfg(kind, 0.3, 2), 1.0);
      std::vector<double> by_rank(8);
      for (const auto& s : all) by_rank[s.rank - 1] = s.score;
      EXPECT_TRUE(std::is_sorted(by_rank.begin(), by_rank.end()));
    }
    for (int y = 0; y < 8; ++y) {
      EXPECT_EQ(Score(p, y, Cfg(ScoreKind::kAps), 0.7),
                Score(p, y, Cfg(ScoreKind::kRaps, 0.0, 3), 0.7));
    }
    // saps beyond rank 1 only sees max(p).
    auto q = p;
    const int top = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
    for (int y = 0; y < 8; ++y) {
      if (y != top && ranks[y] >= 2) {
        const double s = Score(p, y, Cfg(ScoreKind::kSaps, 0.4), 1.0);
        EXPECT_NEAR(s, p[top] + 0.4 * (ranks[y] - 1), 1e-12);
      }
    }
  }
}

TEST(ScoreTest, ScoreMatchesScoreAll) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = RandomSimplex(rng, 6);
    for (auto kind : {ScoreKind::kLac, ScoreKind::kAps, ScoreKind::kRaps, ScoreKind::kSaps}) {
      auto cfg = Cfg(kind, 0.2, 2);
      cfg.temperature = 0.7;
      const auto all = ScoreAll(p, cfg, 0.3);
      for (int y = 0; y < 6; ++y) EXPECT_EQ(all[y].score, Score(p, y, cfg, 0.3));
    }
  }
}

TEST(ScoreTest, RecordUStreams) {
  ScoreConfig cfg = Cfg(ScoreKind::kAps);
  EXPECT_EQ(RecordU(cfg, 1, "x", ScoreEvent::kCalibration), 1.0);
  cfg.randomized = true;
  EXPECT_EQ(RecordU(cfg, 1, "x", ScoreEvent::kCalibration), 1.0);  // fixed_one
  cfg.u_mode = UMode::kSeeded;
  const double a = RecordU(cfg, 1, "x", ScoreEvent::kCalibration);
  EXPECT_EQ(a, RecordU(cfg, 1, "x", ScoreEvent::kCalibration));
  EXPECT_NE(a, RecordU(cfg, 1, "x", ScoreEvent::kPrediction));
  EXPECT_NE(a, RecordU(cfg, 2, "x", ScoreEvent::kCalibration));
  EXPECT_GE(a, 0.0);
  EXPECT_LT(a, 1.0);
}

TEST(ScoreTest, ConfigValidation) {
  ScoreConfig c;
  c.temperature = 0.0;
  EXPECT_THROW(c.Validate(), ParameterError);
  c = Cfg(ScoreKind::kRaps, -1.0);
  EXPECT_THROW(c.Validate(), ParameterError);
  c = Cfg(ScoreKind::kRaps, 0.1, 0);
  EXPECT_THROW(c.Validate(), ParameterError);
  EXPECT_EQ(ScoreKindFromString("saps"), ScoreKind::kSaps);
  EXPECT_THROW(ScoreKindFromString("thr"), ParameterError);
}

}  // namespace
}  // namespace setfair
