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

#ifndef SETFAIR_INFERENCE_H_
#define SETFAIR_INFERENCE_H_

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "setfair/responses.h"

namespace setfair {

struct DesignSpec {
  Treatment reference_treatment = Treatment::kControl;
  GroupIndex reference_group = 0;
  bool include_diff = true;
};

// Dummy-coded treat x group + diff design. Columns: intercept, one dummy per
// non-reference treatment, one per non-reference group, every product of
// those, then diff. Clusters are participant ids.
struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<int> clusters;
  std::vector<std::string> terms;
  std::vector<Treatment> treatments;  // reference first
  std::vector<GroupIndex> groups;     // reference first
};

std::string TreatTerm(Treatment t);
std::string GroupTerm(GroupIndex g);
std::string InteractionTerm(Treatment t, GroupIndex g);
inline constexpr const char* kInterceptTerm = "intercept";
inline constexpr const char* kDiffTerm = "diff";

// Throws ValidationError when fewer than two treatments or groups are
// present, a reference level is missing, or a column is constant (the
// message names the term).
Design BuildDesign(std::span<const TrialResponse> responses,
                   const DesignSpec& spec);

struct FitResult {
  std::vector<std::string> terms;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;        // cluster-robust A^-1 B A^-1
  Eigen::MatrixXd model_covariance;  // A^-1
  int n_clusters = 0;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;  // max-norm of the score at beta

  // Index of `term`, or -1.
  int TermIndex(const std::string& term) const;
  double Coefficient(const std::string& term) const;
};

struct FitOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  double separation_bound = 30.0;
};

// Logistic maximum likelihood by iteratively reweighted least squares
// (independence working correlation), with the sandwich covariance summed
// over clusters. Throws FitError on rank deficiency, fewer than two
// clusters, or any |beta| above the separation bound.
FitResult FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      std::span<const int> clusters,
                      std::vector<std::string> terms = {},
                      const FitOptions& opts = {});

FitResult FitLogistic(const Design& design, const FitOptions& opts = {});

double BernoulliLogLikelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta);

struct OddsRatio {
  Treatment treatment = Treatment::kControl;
  GroupIndex group = 0;
  double odds_ratio = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double log_se = 0.0;
  double p_value = 1.0;
  bool significant_5 = false;
  bool significant_10 = false;
  double p_treated = 0.0;  // model probability at the requested diff
  double p_control = 0.0;
};

// OR_{t,a} = exp(beta_treat[t] + beta_treat[t]:group[a]); the reference
// treatment gets exactly 1. Intervals and Wald p-values use the robust
// covariance of that linear combination. `at_diff` only affects the reported
// probabilities, not the ratios.
std::vector<OddsRatio> OddsRatios(const FitResult& fit, const DesignSpec& spec,
                                  std::span<const Treatment> treatments,
                                  std::span<const GroupIndex> groups,
                                  double at_diff = 0.0);

struct MaxRor {
  Treatment treatment = Treatment::kControl;
  double max_ror = 1.0;
  std::pair<GroupIndex, GroupIndex> pair{0, 0};  // (largest OR, smallest OR)
};

// max over group pairs of OR_a / OR_b per treatment = max(OR) / min(OR).
std::vector<MaxRor> MaxRors(std::span<const OddsRatio> ors);

}  // namespace setfair

#endif  // SETFAIR_INFERENCE_H_
