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

#ifndef SETFAIR_JSON_IO_H_
#define SETFAIR_JSON_IO_H_

#include "json.hpp"
#include "setfair/audit.h"
#include "setfair/calibration.h"
#include "setfair/human_sim.h"
#include "setfair/inference.h"
#include "setfair/scores.h"
#include "setfair/tuning.h"

namespace setfair {

using json = nlohmann::json;

// Infinite thresholds are written as the strings "inf" / "-inf".
json ThresholdToJson(double v);
double ThresholdFromJson(const json& j);

json ToJson(const ScoreConfig& cfg);
ScoreConfig ScoreConfigFromJson(const json& j, ScoreConfig base = {});

json ToJson(const SetPredictor& pred);
SetPredictor SetPredictorFromJson(const json& j);

json ToJson(const FairnessReport& report);
json ToJson(const KeyFactorTable& table);
json ToJson(const TuneReport& report);
json ToJson(const AvgKTuneResult& result);

SyntheticTaskSpec SyntheticTaskSpecFromJson(const json& j,
                                            SyntheticTaskSpec base = {});
json ToJson(const SyntheticTaskSpec& spec);
HumanModel HumanModelFromJson(const json& j, HumanModel base = {});
json ToJson(const HumanModel& hm);

json ToJson(const MechanismReport& report);

// Terms, coefficients, robust standard errors, odds ratios with intervals
// and significance flags, and the maxROR table.
json StatsToJson(const FitResult& fit, std::span<const OddsRatio> ors,
                 std::span<const MaxRor> max_rors);

}  // namespace setfair

#endif  // SETFAIR_JSON_IO_H_
