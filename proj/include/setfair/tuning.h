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

#ifndef SETFAIR_TUNING_H_
#define SETFAIR_TUNING_H_

#include <cstdint>
#include <vector>

#include "setfair/calibration.h"
#include "setfair/dataset.h"
#include "setfair/scores.h"

namespace setfair {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntRange {
  int lo = 1;
  int hi = 1;
};

// Hyperparameter search for score functions. T and lambda are sampled
// log-uniformly (uniformly when the lower bound is 0), k_reg uniformly.
struct TuneSpec {
  double target_coverage = 0.9;
  Range temperature{0.05, 5.0};
  Range lambda{1e-3, 20.0};
  IntRange k_reg{1, 10};
  int budget = 50;
  uint64_t seed = 0;
  // Candidates whose calval coverage is within this slack below the target
  // still qualify.
  double coverage_slack = 0.005;
  bool randomized = false;
  UMode u_mode = UMode::kFixedOne;
  int min_group_n = kDefaultMinGroupN;
  bool force_nonempty = true;

  void Validate() const;
};

struct TuneCandidate {
  ScoreConfig cfg;
  double avg_size = 0.0;
  double coverage = 0.0;
};

struct TuneReport {
  std::vector<TuneCandidate> candidates;  // evaluation order
  std::size_t winner = 0;
  bool winner_meets_target = false;

  const TuneCandidate& best() const { return candidates.at(winner); }
};

// Candidate 0 is the anchor (T = 1 clamped into range, lambda and k_reg at
// their lower bounds); the remaining budget - 1 are random draws. Each is
// calibrated on `cal` and scored on `calval`. The winner minimizes calval
// average size among candidates meeting target - slack, otherwise it is the
// candidate with the highest coverage. Ties go to the earlier candidate.
TuneReport TuneScore(const LabeledDataset& cal, const LabeledDataset& calval,
                     ScoreKind kind, Method method, double alpha,
                     const TuneSpec& spec, int jobs = 1);

// The candidate configurations TuneScore will evaluate, in order.
std::vector<ScoreConfig> SampleScoreConfigs(ScoreKind kind, int num_classes,
                                            const TuneSpec& spec);

struct AvgKTuneOptions {
  double precision = 1e-5;
  bool force_nonempty = false;
};

struct AvgKTuneResult {
  double k = 0.0;
  double q_k = 0.0;
  double coverage = 0.0;  // calval coverage at k
  int iterations = 0;
};

// Calval coverage of the avg-k predictor calibrated on `cal` at size k.
class AvgKCoverage {
 public:
  AvgKCoverage(const LabeledDataset& cal, const LabeledDataset& calval,
               bool force_nonempty);
  double Threshold(double k) const;
  double operator()(double k) const;
  int num_classes() const { return num_classes_; }

 private:
  std::vector<double> sorted_;
  std::vector<double> true_prob_;
  std::vector<char> true_is_top_;
  int num_classes_;
  bool force_nonempty_;
};

// Binary search on k in (0, m] for the smallest k (to `precision`) whose
// calval coverage reaches the target. Throws CalibrationError if even k = m
// falls short, or if coverage is not monotone at five probe points.
AvgKTuneResult TuneAvgK(const LabeledDataset& cal, const LabeledDataset& calval,
                        double target_coverage,
                        const AvgKTuneOptions& opts = {});

}  // namespace setfair

#endif  // SETFAIR_TUNING_H_
