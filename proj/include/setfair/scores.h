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

#ifndef SETFAIR_SCORES_H_
#define SETFAIR_SCORES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "setfair/dataset.h"

namespace setfair {

enum class ScoreKind { kLac, kAps, kRaps, kSaps };
enum class UMode { kSeeded, kFixedOne };

std::string ToString(ScoreKind k);
ScoreKind ScoreKindFromString(const std::string& s);
std::string ToString(UMode m);
UMode UModeFromString(const std::string& s);

struct ScoreConfig {
  ScoreKind kind = ScoreKind::kLac;
  double temperature = 1.0;
  double lambda = 0.0;  // raps / saps
  int k_reg = 1;        // raps
  bool randomized = false;
  UMode u_mode = UMode::kFixedOne;

  // Throws ParameterError unless T > 0, lambda >= 0 and k_reg >= 1.
  void Validate() const;
  // u is only ever drawn when both flags ask for it.
  bool draws_u() const { return randomized && u_mode == UMode::kSeeded; }

  friend bool operator==(const ScoreConfig&, const ScoreConfig&) = default;
};

struct ScoredLabel {
  ClassIndex label = 0;
  double score = 0.0;
  int rank = 1;             // o_x(y), 1 = most probable
  double mass_above = 0.0;  // probability mass strictly above p_y
};

// Zero entries are clamped to 1e-12 before the log, so the output is
// strictly positive whenever T != 1. T == 1 returns the input unchanged.
std::vector<double> ApplyTemperature(std::span<const double> probs,
                                     double temperature);

// Rank of every label with ties broken by ascending class index, and the
// probability mass strictly above each label.
std::vector<int> Ranks(std::span<const double> probs);
std::vector<double> MassAbove(std::span<const double> probs);

// Conformal score of label y on an already temperature-scaled vector.
double Score(std::span<const double> probs, ClassIndex y,
             const ScoreConfig& cfg, double u);

// Scores of every label, sharing one u. Temperature is NOT applied here.
std::vector<ScoredLabel> ScoreAll(std::span<const double> probs,
                                  const ScoreConfig& cfg, double u);

// Randomization events. Calibration and prediction each draw their own u
// per record from the same keyed stream.
enum class ScoreEvent : uint64_t { kCalibration = 0, kPrediction = 1 };

// u for one record: 1.0 unless the config draws u, otherwise a keyed
// uniform of (seed, example_id, event).
double RecordU(const ScoreConfig& cfg, uint64_t seed,
               std::string_view example_id, ScoreEvent event);

// Temperature scaling + u + score of the record's true label.
double TrueLabelScore(const ProbRecord& rec, const ScoreConfig& cfg,
                      uint64_t seed, ScoreEvent event);

// Temperature scaling + u + every label's score.
std::vector<double> RecordScores(const ProbRecord& rec, const ScoreConfig& cfg,
                                 uint64_t seed, ScoreEvent event);

}  // namespace setfair

#endif  // SETFAIR_SCORES_H_
