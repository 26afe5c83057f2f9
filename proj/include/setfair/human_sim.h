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

#ifndef SETFAIR_HUMAN_SIM_H_
#define SETFAIR_HUMAN_SIM_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "setfair/audit.h"
#include "setfair/calibration.h"
#include "setfair/dataset.h"
#include "setfair/responses.h"
#include "setfair/scores.h"
#include "setfair/setpred.h"

namespace setfair {

// A synthetic classifier with per-group top-1 accuracy. Each record's
// softmax is a Dirichlet draw with base mass 1 on every class plus
// concentration * c_i on a center class, where c_i ~ Gamma(1/spread, spread)
// (c_i = 1 when spread is 0). The center is the label with probability
// group_accuracy[g], otherwise a uniform wrong class, in which case the label
// also receives runner_up * concentration * c_i. The largest entry is then
// swapped onto the center so the argmax is exactly the center.
struct SyntheticTaskSpec {
  int num_classes = 10;
  int num_groups = 2;
  std::vector<double> group_weights{0.5, 0.5};
  std::vector<double> group_accuracy{0.85, 0.55};
  double concentration = 5.0;
  double concentration_spread = 1.0;
  double runner_up = 0.3;
  int n = 20000;
  uint64_t seed = 0;

  void Validate() const;
};

LabeledDataset GenerateTask(const SyntheticTaskSpec& spec);

// Minimal set-assisted decision maker: unaided it is right with probability
// skill[g]; with probability `reliance` it answers from inside the shown set,
// picking the truth with probability skill + (1 - skill) / |set| when the set
// covers it and never otherwise.
struct HumanModel {
  std::vector<double> skill{0.65, 0.55};
  double reliance = 0.8;
  uint64_t seed = 0;

  void Validate(int num_groups) const;
};

inline constexpr int kTrialSeedSlots = 10;

struct SimulationShape {
  int participants = 800;
  int trials_per_participant = 100;
};

// Participants are assigned round-robin over the treatments present (in
// enum order). Participant p sees trial sequence slot (p / T) % 10, so each
// slot is shared across treatments. `sets_by_treatment` must contain the
// control (an empty vector is fine) and the marginal arm, whose set size is
// the diff covariate of every trial.
std::vector<TrialResponse> SimulateResponses(
    const std::map<Treatment, std::vector<PredictionSet>>& sets_by_treatment,
    const LabeledDataset& ds, const HumanModel& hm, const SimulationShape& shape,
    int jobs = 1);

// Closed-form expected accuracy of `hm` on the given sets of one group.
double ExpectedAidedAccuracy(std::span<const PredictionSet> sets, double skill,
                             double reliance);

struct MechanismConfig {
  SyntheticTaskSpec task;
  HumanModel human;
  double alpha = 0.1;
  ScoreConfig score;  // lac, u fixed at 1
  SplitSpec split{{0.2, 0.4, 0.4}, Stratify::kGroup, 0};
  SimulationShape shape;
  int min_group_n = kDefaultMinGroupN;
  bool force_nonempty = true;
};

struct MethodOutcome {
  Treatment treatment = Treatment::kMarginal;
  SetPredictor predictor;
  std::vector<PredictionSet> sets;
  FairnessReport report;
};

struct MechanismFlags {
  bool mondrian_equalizes_coverage = false;  // dCov(mondrian) <= 0.02
  bool marginal_coverage_gap = false;        // dCov(marginal) > dCov(mondrian)
  bool mondrian_size_gap = false;            // dSize(mondrian) > dSize(marginal)
  bool mondrian_more_disparate = false;      // dT(mondrian) > dT(marginal)
};

struct MechanismReport {
  std::vector<MethodOutcome> methods;  // avgk, marginal, conditional
  std::vector<double> control_accuracy;
  MechanismFlags flags;
  KeyFactorTable key_factors;
  std::vector<TrialResponse> responses;
  LabeledDataset test;

  const MethodOutcome& outcome(Treatment t) const;
};

inline constexpr double kEqualizedCoverageTolerance = 0.02;

// Splits a synthetic task, calibrates marginal, mondrian and avg-k (k tuned
// on calval to 1 - alpha), audits test sets, simulates participants and
// evaluates the mechanism flags. Failed expectations show up as false flags.
MechanismReport RunMechanismBenchmark(const MechanismConfig& cfg, int jobs = 1);

struct SweepResult {
  std::vector<MechanismConfig> configs;
  KeyFactorTable table;  // rows from every config's three aided arms
};

// `count` configurations drawn deterministically from `seed` around `base`
// (group accuracies, concentration, reliance and skills vary), each run
// through RunMechanismBenchmark and pooled into one key-factor table.
SweepResult RunKeyFactorSweep(const MechanismConfig& base, int count,
                              uint64_t seed, int jobs = 1);

}  // namespace setfair

#endif  // SETFAIR_HUMAN_SIM_H_
