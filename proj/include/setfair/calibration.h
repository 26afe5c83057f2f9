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

#ifndef SETFAIR_CALIBRATION_H_
#define SETFAIR_CALIBRATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "setfair/dataset.h"
#include "setfair/scores.h"

namespace setfair {

struct PredictionSet;

enum class Method { kMarginal, kMondrian, kAvgK };

std::string ToString(Method m);
Method MethodFromString(const std::string& s);

// A calibrated set predictor. Exactly the fields of `method` are populated:
//   marginal: score_cfg, alpha, q_hat
//   mondrian: score_cfg, alpha, q_hat_by_group (one entry per group)
//   avgk:     k, q_k
// Thresholds may be +inf (marginal/mondrian) or -inf (avgk).
struct SetPredictor {
  Method method = Method::kMarginal;
  std::optional<ScoreConfig> score_cfg;
  std::optional<double> alpha;
  std::optional<double> q_hat;
  std::vector<double> q_hat_by_group;
  std::optional<double> k;
  std::optional<double> q_k;
  int n_cal = 0;
  uint64_t seed = 0;
  int num_classes = 0;
  int num_groups = 0;
  // Empty sets fall back to the top-1 class.
  bool force_nonempty = true;
  // avgk only: labels with p == q_k join with probability 1/2.
  bool randomize_ties = false;

  // Throws ParameterError if the populated fields do not match `method`.
  void Validate() const;

  friend bool operator==(const SetPredictor&, const SetPredictor&) = default;
};

struct CalibrationOptions {
  uint64_t seed = 0;
  bool force_nonempty = true;
  bool randomize_ties = false;
};

inline constexpr int kDefaultMinGroupN = 30;

// r = ceil((n+1)(1-alpha)); the r-th smallest score, or +inf when r > n.
// (n+1)(1-alpha) values within 1e-9 above an integer count as that integer.
double ConformalQuantile(std::span<const double> scores, double alpha);

// 1-based rank used by ConformalQuantile.
long ConformalRank(std::size_t n, double alpha);

SetPredictor CalibrateMarginal(const LabeledDataset& cal,
                               const ScoreConfig& cfg, double alpha,
                               const CalibrationOptions& opts = {});

// Independent conformal quantile per group with a shared ScoreConfig.
// Throws CalibrationError naming the first group with fewer than
// min_group_n calibration records; there is no fallback to marginal.
SetPredictor CalibrateMondrian(const LabeledDataset& cal,
                               const ScoreConfig& cfg, double alpha,
                               int min_group_n = kDefaultMinGroupN,
                               const CalibrationOptions& opts = {});

// Flattens every softmax value of `cal` and takes the ceil(p*|Y|)-th
// smallest with p = 1 - k/m; -inf when that index is 0.
SetPredictor CalibrateAvgK(const LabeledDataset& cal, double k,
                           const CalibrationOptions& opts = {});

// Threshold for a pre-sorted flattened softmax vector (shared with tuning).
double AvgKThreshold(std::span<const double> sorted_values, int num_classes,
                     double k);

// Fraction of sets containing their label.
double EmpiricalCoverage(std::span<const PredictionSet> sets,
                         std::span<const ClassIndex> labels);

}  // namespace setfair

#endif  // SETFAIR_CALIBRATION_H_
