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

#include "setfair/setpred.h"

#include <algorithm>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "setfair/audit.h"
#include "setfair/error.h"
#include "setfair/human_sim.h"
#include "test_util.h"

namespace setfair {
namespace {

using testing::MakeDataset;

constexpr double kInf = std::numeric_limits<double>::infinity();

SetPredictor Marginal(double q_hat, int m, ScoreConfig cfg = {}) {
  SetPredictor p;
  p.method = Method::kMarginal;
  p.score_cfg = cfg;
  p.alpha = 0.1;
  p.q_hat = q_hat;
  p.num_classes = m;
  p.num_groups = 1;
  return p;
}

ProbRecord Rec(std::vector<double> probs, int label = 0, int group = 0) {
  return ProbRecord{"x", std::move(probs), label, group};
}

TEST(SetpredTest, NonStrictThreshold) {
  EXPECT_EQ(MembersAtOrBelow(std::vector<double>{0.1, 0.5, 0.9}, 0.5),
            (std::vector<int>{0, 1}));
  // lac scores (0.25, 0.75, 1.0); the threshold lands exactly on class 1.
  const auto s = PredictSet(Rec({0.75, 0.25, 0.0}, 1), Marginal(0.75, 3));
  EXPECT_EQ(s.members, (std::vector<int>{0, 1}));
  EXPECT_TRUE(s.covered);
  EXPECT_EQ(s.size, 2);
}

TEST(SetpredTest, InfiniteThresholdIsFullSet) {
  const auto s = PredictSet(Rec({0.2, 0.3, 0.5}, 2), Marginal(kInf, 3));
  EXPECT_EQ(s.members, (std::vector<int>{0, 1, 2}));
  SetPredictor avgk;
  avgk.method = Method::kAvgK;
  avgk.k = 3.0;
  avgk.q_k = -kInf;
  avgk.num_classes = 3;
  EXPECT_EQ(PredictSet(Rec({0.2, 0.3, 0.5}), avgk).size, 3);
}

TEST(SetpredTest, RapsWorkedExample) {
  ScoreConfig raps;
  raps.kind = ScoreKind::kRaps;
  raps.lambda = 0.1;
  raps.k_reg = 1;
  const auto s = PredictSet(Rec({0.5, 0.3, 0.2}), Marginal(1.0, 3, raps));
  EXPECT_EQ(s.members, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.size, 2);
}

TEST(SetpredTest, ForceNonemptyFallsBackToArgmax) {
  auto pred = Marginal(0.01, 3);
  const auto s = PredictSet(Rec({0.2, 0.5, 0.3}), pred);
  EXPECT_EQ(s.members, (std::vector<int>{1}));
  pred.force_nonempty = false;
  EXPECT_EQ(PredictSet(Rec({0.2, 0.5, 0.3}), pred).size, 0);
}

TEST(SetpredTest, NestedInThreshold) {
  SyntheticTaskSpec spec;
  spec.n = 300;
  const auto ds = GenerateTask(spec);
  ScoreConfig aps;
  aps.kind = ScoreKind::kAps;
  for (const auto& rec : ds.records()) {
    std::vector<int> prev;
    for (double q : {0.2, 0.5, 0.8, 0.95, 1.0}) {
      auto pred = Marginal(q, 10, aps);
      pred.force_nonempty = false;
      const auto s = PredictSet(rec, pred);
      EXPECT_TRUE(std::includes(s.members.begin(), s.members.end(), prev.begin(),
                                prev.end()));
      prev = s.members;
    }
  }
}

TEST(SetpredTest, Errors) {
  EXPECT_THROW(PredictSet(Rec({0.5, 0.5}), Marginal(0.5, 3)), ValidationError);
  SetPredictor mond;
  mond.method = Method::kMondrian;
  mond.score_cfg = ScoreConfig{};
  mond.alpha = 0.1;
  mond.q_hat_by_group = {0.5};
  mond.num_classes = 2;
  mond.num_groups = 1;
  EXPECT_THROW(PredictSet(Rec({0.5, 0.5}, 0, 1), mond), IndexError);
}

TEST(SetpredTest, BatchIsOrderPreservingMap) {
  SyntheticTaskSpec spec;
  spec.n = 500;
  const auto ds = GenerateTask(spec);
  const auto pred = Marginal(0.8, 10);
  const auto batch = PredictBatch(ds, pred, 4);
  ASSERT_EQ(batch.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(batch[i], PredictSet(ds[i], pred));
  EXPECT_TRUE(PredictBatch(LabeledDataset({}, 10, 1), pred).empty());
}

TEST(SetpredTest, MarginalBatchCoverage) {
  SyntheticTaskSpec spec;
  spec.n = 4000;
  spec.seed = 21;
  const auto parts = Split(GenerateTask(spec), {{0.0, 0.5, 0.5}, Stratify::kNone, 1});
  const auto pred = CalibrateMarginal(parts.cal, ScoreConfig{}, 0.1);
  const double cov = CoverageRate(PredictBatch(parts.test, pred));
  EXPECT_GE(cov, 0.88);
  EXPECT_LE(cov, 0.92);
}

TEST(SetpredTest, CsvRoundTripPreservesAudit) {
  SyntheticTaskSpec spec;
  spec.n = 400;
  const auto ds = GenerateTask(spec);
  const auto sets = PredictBatch(ds, Marginal(0.85, 10));
  std::stringstream io;
  WriteSetsCsv(io, sets);
  const auto back = ReadSetsCsv(io);
  EXPECT_EQ(back, sets);
  const auto a = AuditSets(sets, 2);
  const auto b = AuditSets(back, 2);
  EXPECT_EQ(a.delta_cov, b.delta_cov);
  EXPECT_EQ(a.delta_size, b.delta_size);
}

TEST(SetpredTest, CsvRejectsInconsistentRows) {
  std::istringstream bad_size(
      "example_id,group,label,set_size,covered,members\nx,0,1,3,1,0|1\n");
  EXPECT_THROW(ReadSetsCsv(bad_size), ParseError);
  std::istringstream bad_cov(
      "example_id,group,label,set_size,covered,members\nx,0,2,2,1,0|1\n");
  EXPECT_THROW(ReadSetsCsv(bad_cov), ParseError);
  std::istringstream empty_set(
      "# comment\nexample_id,group,label,set_size,covered,members\nx,0,2,0,0,\n");
  const auto sets = ReadSetsCsv(empty_set);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_TRUE(sets[0].members.empty());
}

}  // namespace
}  // namespace setfair
