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

#include "setfair/inference.h"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "logistic_oracle.h"
#include "setfair/error.h"

namespace setfair {
namespace {

// ---- fixtures -------------------------------------------------------------

std::vector<int> Singletons(int n) {
  std::vector<int> c(n);
  std::iota(c.begin(), c.end(), 0);
  return c;
}

TrialResponse Resp(int pid, Treatment t, int group, bool correct, int diff = 1) {
  TrialResponse r;
  r.participant_id = pid;
  r.trial_id = "t";
  r.treatment = t;
  r.group = group;
  r.correct = correct;
  r.diff = diff;
  if (t != Treatment::kControl) r.chosen_in_set = correct;
  return r;
}

// Saturated cell counts: `successes` / `failures` per (treatment, group).
void AddCell(std::vector<TrialResponse>& out, Treatment t, int group, int successes,
             int failures) {
  int pid = static_cast<int>(out.size());
  for (int i = 0; i < successes; ++i) out.push_back(Resp(pid++, t, group, true));
  for (int i = 0; i < failures; ++i) out.push_back(Resp(pid++, t, group, false));
}

DesignSpec NoDiff() {
  DesignSpec spec;
  spec.include_diff = false;
  return spec;
}

const OddsRatio& Find(const std::vector<OddsRatio>& ors, Treatment t, int g) {
  for (const auto& r : ors) {
    if (r.treatment == t && r.group == g) return r;
  }
  throw std::runtime_error("missing odds ratio");
}

// ---- tests ----------------------------------------------------------------

TEST(FitLogisticTest, InterceptOnlyClosedForm) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(100, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(100);
  y.head(75).setOnes();
  const auto fit = FitLogistic(x, y, Singletons(100));
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.beta(0), std::log(3.0), 1e-6);
  EXPECT_NEAR(fit.beta(0), 1.0986, 1e-4);
}

TEST(FitLogisticTest, AntisymmetricCovariateHasZeroSlope) {
  Eigen::MatrixXd x(100, 2);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i < 50 ? 1.0 : -1.0;
    y(i) = (i % 50) < 30;
  }
  const auto fit = FitLogistic(x, y, Singletons(100));
  EXPECT_NEAR(fit.beta(1), 0.0, 1e-8);
  EXPECT_NEAR(fit.beta(0), std::log(30.0 / 20.0), 1e-8);
}

TEST(FitLogisticTest, MatchesIndependentOptimizer) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = testing::ClusteredSample(seed, 500, 50, 4);
    const auto fit = FitLogistic(s.x, s.y, s.clusters);
    ASSERT_TRUE(fit.converged);
    EXPECT_LE(fit.gradient_norm, 1e-8);
    const auto oracle = testing::BfgsOracle(s.x, s.y);
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
      EXPECT_NEAR(fit.beta(j), oracle(j), 1e-4) << "seed " << seed << " coef " << j;
    }
    EXPECT_NEAR(fit.log_likelihood, BernoulliLogLikelihood(s.x, s.y, fit.beta), 1e-9);
  }
}

TEST(FitLogisticTest, SingletonClustersGiveHeteroskedasticSandwich) {
  const auto s = testing::ClusteredSample(3, 400, 400, 3);
  const auto fit = FitLogistic(s.x, s.y, Singletons(400));
  const Eigen::VectorXd p =
      (-(s.x * fit.beta).array()).exp().unaryExpr([](double e) { return 1.0 / (1.0 + e); });
  const Eigen::VectorXd w = p.array() * (1.0 - p.array());
  const Eigen::MatrixXd a = s.x.transpose() * w.asDiagonal() * s.x;
  const Eigen::VectorXd r2 = (s.y - p).array().square();
  const Eigen::MatrixXd b = s.x.transpose() * r2.asDiagonal() * s.x;
  const Eigen::MatrixXd a_inv = a.inverse();
  const Eigen::MatrixXd hc0 = a_inv * b * a_inv;
  EXPECT_LT((fit.covariance - hc0).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((fit.model_covariance - a_inv).cwiseAbs().maxCoeff(), 1e-10);
  // Symmetric PSD.
  EXPECT_LT((fit.covariance - fit.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.covariance);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
}

TEST(FitLogisticTest, SandwichAgreesWithModelCovarianceWhenSpecified) {
  // Correctly specified, one observation per cluster: the two estimators
  // agree on average and both track the sampling variance of beta.
  const int reps = 200, n = 400;
  Eigen::VectorXd truth(3);
  truth << -0.3, 0.8, -0.5;
  Eigen::VectorXd robust = Eigen::VectorXd::Zero(3), model = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3), sq = Eigen::VectorXd::Zero(3);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  for (int r = 0; r < reps; ++r) {
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = n01(rng);
      x(i, 2) = n01(rng);
      y(i) = std::uniform_real_distribution<double>()(rng) <
             1.0 / (1.0 + std::exp(-x.row(i).dot(truth)));
    }
    const auto fit = FitLogistic(x, y, Singletons(n));
    robust += fit.covariance.diagonal();
    model += fit.model_covariance.diagonal();
    mean += fit.beta;
    sq += fit.beta.array().square().matrix();
  }
  robust /= reps;
  model /= reps;
  mean /= reps;
  const Eigen::VectorXd empirical = sq / reps - mean.array().square().matrix();
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(robust(j) / model(j), 1.0, 0.05) << j;
    // The sample variance of 200 draws has relative sd ~ 0.1.
    EXPECT_NEAR(empirical(j) / model(j), 1.0, 0.3) << j;
  }
}

TEST(FitLogisticTest, Errors) {
  Eigen::MatrixXd x(6, 3);
  x << 1, 1, 1, 1, 2, 2, 1, 3, 3, 1, 4, 4, 1, 5, 5, 1, 6, 6;
  Eigen::VectorXd y(6);
  y << 0, 1, 0, 1, 1, 0;
  EXPECT_THROW(FitLogistic(x, y, Singletons(6)), FitError);
  Eigen::MatrixXd sep(6, 2);
  // On this scale a separating slope must pass the |beta| bound before the
  // gradient becomes negligible.
  sep << 1, -0.03, 1, -0.02, 1, -0.01, 1, 0.01, 1, 0.02, 1, 0.03;
  Eigen::VectorXd ysep(6);
  ysep << 0, 0, 0, 1, 1, 1;
  try {
    FitLogistic(sep, ysep, Singletons(6));
    FAIL();
  } catch (const FitError& e) {
    EXPECT_NE(std::string(e.what()).find("separated"), std::string::npos) << e.what();
  }
  EXPECT_THROW(FitLogistic(sep.topRows(2), ysep.head(2), std::vector<int>{0, 0}), FitError);
}

TEST(DesignTest, ColumnCounts) {
  std::vector<TrialResponse> rs;
  int pid = 0;
  for (auto t : {Treatment::kControl, Treatment::kMarginal}) {
    for (int g = 0; g < 2; ++g) {
      for (int i = 0; i < 4; ++i) rs.push_back(Resp(pid++, t, g, i % 2, 1 + i));
    }
  }
  const auto d = BuildDesign(rs, DesignSpec{});
  EXPECT_EQ(d.x.cols(), 5);
  EXPECT_EQ(d.terms, (std::vector<std::string>{"intercept", "treat[marginal]", "group[1]",
                                               "treat[marginal]:group[1]", "diff"}));
  std::vector<TrialResponse> facet;
  for (int t = 0; t < 4; ++t) {
    for (int g = 0; g < 4; ++g) {
      for (int i = 0; i < 3; ++i) {
        facet.push_back(Resp(pid++, static_cast<Treatment>(t), g, i == 0, 1 + i));
      }
    }
  }
  const auto d4 = BuildDesign(facet, DesignSpec{});
  EXPECT_EQ(d4.x.cols(), 17);
  // First row: control, group 0, diff 1; with diff 0 it is (1, 0, ..., 0).
  EXPECT_EQ(d4.x(0, 0), 1.0);
  EXPECT_EQ(d4.x.row(0).segment(1, 15).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(d4.x(0, 16), 1.0);
  EXPECT_EQ(d4.clusters[0], facet[0].participant_id);
}

TEST(DesignTest, DegenerateInputs) {
  std::vector<TrialResponse> rs;
  for (int i = 0; i < 8; ++i) rs.push_back(Resp(i, Treatment::kControl, i % 2, i % 3 == 0));
  EXPECT_THROW(BuildDesign(rs, DesignSpec{}), ValidationError);  // one treatment
  for (int i = 0; i < 8; ++i) rs.push_back(Resp(i, Treatment::kMarginal, i % 2, i % 3 == 0));
  try {
    BuildDesign(rs, DesignSpec{});  // every diff is 1
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("diff"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(BuildDesign(rs, NoDiff()));
}

TEST(OddsRatioTest, TwoByTwoArithmetic) {
  std::vector<TrialResponse> rs;
  AddCell(rs, Treatment::kControl, 0, 50, 50);
  AddCell(rs, Treatment::kMarginal, 0, 75, 25);
  AddCell(rs, Treatment::kControl, 1, 40, 60);
  AddCell(rs, Treatment::kMarginal, 1, 40, 60);
  const auto d = BuildDesign(rs, NoDiff());
  const auto fit = FitLogistic(d);
  const auto ors = OddsRatios(fit, NoDiff(), d.treatments, d.groups);
  EXPECT_NEAR(Find(ors, Treatment::kMarginal, 0).odds_ratio, 3.0, 1e-9);
  EXPECT_NEAR(Find(ors, Treatment::kMarginal, 0).p_treated, 0.75, 1e-9);
  EXPECT_NEAR(Find(ors, Treatment::kMarginal, 0).p_control, 0.5, 1e-9);
  EXPECT_NEAR(Find(ors, Treatment::kMarginal, 1).odds_ratio, 1.0, 1e-9);
  for (int g = 0; g < 2; ++g) EXPECT_EQ(Find(ors, Treatment::kControl, g).odds_ratio, 1.0);
  const auto& r = Find(ors, Treatment::kMarginal, 0);
  EXPECT_LT(r.ci_low, 3.0);
  EXPECT_GT(r.ci_high, 3.0);
  EXPECT_NEAR(std::log(r.ci_high) - std::log(3.0), 1.959963984540054 * r.log_se, 1e-12);
  EXPECT_TRUE(r.significant_5);
  EXPECT_FALSE(Find(ors, Treatment::kMarginal, 1).significant_10);
}

TEST(OddsRatioTest, TableTwoFixtureFromCoefficients) {
  // Invert OR = exp(b_t + b_{t x a}) directly into a fit.
  const double target[4] = {1.34, 1.20, 1.08, 1.06};
  FitResult fit;
  fit.terms = {"intercept", TreatTerm(Treatment::kMarginal)};
  for (int g = 1; g < 4; ++g) fit.terms.push_back(GroupTerm(g));
  for (int g = 1; g < 4; ++g) fit.terms.push_back(InteractionTerm(Treatment::kMarginal, g));
  fit.terms.push_back(kDiffTerm);
  fit.beta = Eigen::VectorXd::Zero(9);
  fit.beta(0) = 0.4;
  fit.beta(1) = std::log(target[0]);
  for (int g = 1; g < 4; ++g) {
    fit.beta(1 + g) = -0.2 * g;
    fit.beta(4 + g) = std::log(target[g]) - std::log(target[0]);
  }
  fit.beta(8) = -0.3;
  fit.covariance = Eigen::MatrixXd::Identity(9, 9) * 1e-3;
  fit.converged = true;
  const std::vector<Treatment> ts{Treatment::kControl, Treatment::kMarginal};
  const std::vector<int> gs{0, 1, 2, 3};
  for (double at_diff : {0.0, 3.0}) {
    const auto ors = OddsRatios(fit, DesignSpec{}, ts, gs, at_diff);
    for (int g = 0; g < 4; ++g) {
      EXPECT_NEAR(Find(ors, Treatment::kMarginal, g).odds_ratio, target[g], 1e-9);
      EXPECT_EQ(Find(ors, Treatment::kControl, g).odds_ratio, 1.0);
      const auto& r = Find(ors, Treatment::kMarginal, g);
      const double odds_t = r.p_treated / (1 - r.p_treated);
      const double odds_c = r.p_control / (1 - r.p_control);
      EXPECT_NEAR(odds_t / odds_c, target[g], 1e-9);
    }
    const auto rors = MaxRors(ors);
    ASSERT_EQ(rors.size(), 2u);
    EXPECT_EQ(rors[0].max_ror, 1.0);
    EXPECT_NEAR(rors[1].max_ror, 1.34 / 1.06, 1e-9);
    EXPECT_NEAR(rors[1].max_ror, 1.264, 5e-4);
    EXPECT_EQ(rors[1].pair, (std::pair<int, int>{0, 3}));
  }
}

TEST(OddsRatioTest, TableTwoFixtureFromCounts) {
  // Control odds 1 in every group; marginal odds equal the target ORs.
  std::vector<TrialResponse> rs;
  const int succ[4] = {134, 120, 108, 106};
  for (int g = 0; g < 4; ++g) {
    AddCell(rs, Treatment::kControl, g, 100, 100);
    AddCell(rs, Treatment::kMarginal, g, succ[g], 100);
  }
  const auto d = BuildDesign(rs, NoDiff());
  const auto fit = FitLogistic(d);
  const auto ors = OddsRatios(fit, NoDiff(), d.treatments, d.groups);
  for (int g = 0; g < 4; ++g) {
    EXPECT_NEAR(Find(ors, Treatment::kMarginal, g).odds_ratio, succ[g] / 100.0, 1e-9);
  }
  EXPECT_NEAR(MaxRors(ors)[1].max_ror, 1.34 / 1.06, 1e-9);
}

TEST(MaxRorTest, Examples) {
  std::vector<OddsRatio> ors(2);
  ors[0].treatment = ors[1].treatment = Treatment::kConditional;
  ors[0].group = 0;
  ors[0].odds_ratio = 1.43;
  ors[1].group = 1;
  ors[1].odds_ratio = 1.12;
  auto r = MaxRors(ors);
  EXPECT_NEAR(r[0].max_ror, 1.277, 5e-4);
  EXPECT_EQ(r[0].pair, (std::pair<int, int>{0, 1}));
  ors[1].odds_ratio = 1.43;
  r = MaxRors(ors);
  EXPECT_EQ(r[0].max_ror, 1.0);
  EXPECT_NE(r[0].pair.first, r[0].pair.second);
}

TEST(OddsRatioTest, GroupRelabelingPermutesOddsRatios) {
  std::mt19937_64 rng(8);
  std::vector<TrialResponse> rs;
  for (int p = 0; p < 120; ++p) {
    const auto t = p % 2 ? Treatment::kMarginal : Treatment::kControl;
    for (int j = 0; j < 30; ++j) {
      const int g = j % 3;
      const int diff = 1 + static_cast<int>(rng() % 5);
      const double logit = 0.5 - 0.2 * diff + (t == Treatment::kMarginal ? 0.3 + 0.2 * g : 0.0);
      const bool ok = std::uniform_real_distribution<double>()(rng) < 1 / (1 + std::exp(-logit));
      rs.push_back(Resp(p, t, g, ok, diff));
    }
  }
  auto relabeled = rs;
  for (auto& r : relabeled) r.group = 2 - r.group;
  DesignSpec spec;
  const auto d1 = BuildDesign(rs, spec);
  const auto d2 = BuildDesign(relabeled, spec);
  const auto o1 = OddsRatios(FitLogistic(d1), spec, d1.treatments, d1.groups);
  const auto o2 = OddsRatios(FitLogistic(d2), spec, d2.treatments, d2.groups);
  for (int g = 0; g < 3; ++g) {
    EXPECT_NEAR(Find(o1, Treatment::kMarginal, g).odds_ratio,
                Find(o2, Treatment::kMarginal, 2 - g).odds_ratio, 1e-7);
  }
  EXPECT_NEAR(MaxRors(o1)[1].max_ror, MaxRors(o2)[1].max_ror, 1e-7);
  EXPECT_GE(MaxRors(o1)[1].max_ror, 1.0);
}

}  // namespace
}  // namespace setfair
