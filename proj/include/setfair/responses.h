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

#ifndef SETFAIR_RESPONSES_H_
#define SETFAIR_RESPONSES_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "setfair/dataset.h"

namespace setfair {

// Ordered so that control is the natural reference level.
enum class Treatment { kControl = 0, kAvgK = 1, kMarginal = 2, kConditional = 3 };
inline constexpr int kNumTreatments = 4;

std::string ToString(Treatment t);
Treatment TreatmentFromString(const std::string& s);

// One answer by one (simulated or imported) participant.
struct TrialResponse {
  int participant_id = 0;
  std::string trial_id;
  Treatment treatment = Treatment::kControl;
  GroupIndex group = 0;
  int diff = 1;  // marginal set size of the trial's record
  bool correct = false;
  std::optional<bool> chosen_in_set;  // absent under control

  friend bool operator==(const TrialResponse&, const TrialResponse&) = default;
};

// `participant_id,trial_id,treatment,group,diff,correct,chosen_in_set`;
// booleans are 0/1 and an absent chosen_in_set is an empty field.
void WriteResponsesCsv(std::ostream& out, std::span<const TrialResponse> rs);
std::vector<TrialResponse> ReadResponsesCsv(std::istream& in);

}  // namespace setfair

#endif  // SETFAIR_RESPONSES_H_
