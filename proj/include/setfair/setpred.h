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

#ifndef SETFAIR_SETPRED_H_
#define SETFAIR_SETPRED_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "setfair/calibration.h"
#include "setfair/dataset.h"

namespace setfair {

struct PredictionSet {
  std::string example_id;
  std::vector<ClassIndex> members;  // ascending, duplicate-free
  int size = 0;
  bool covered = false;
  GroupIndex group = 0;
  ClassIndex label = 0;

  bool Contains(ClassIndex y) const;
  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

// Labels whose score is <= threshold.
std::vector<ClassIndex> MembersAtOrBelow(std::span<const double> scores,
                                         double threshold);

PredictionSet PredictSet(const ProbRecord& rec, const SetPredictor& pred);

// Order-preserving map of PredictSet; `jobs` only changes wall time. The
// first failing record (in input order) aborts the batch with its id.
std::vector<PredictionSet> PredictBatch(const LabeledDataset& ds,
                                        const SetPredictor& pred,
                                        int jobs = 1);

double AverageSize(std::span<const PredictionSet> sets);
double CoverageRate(std::span<const PredictionSet> sets);

// `example_id,group,label,set_size,covered,members` with '|'-joined members.
// Lines beginning with '#' (provenance comments) are skipped on read.
void WriteSetsCsv(std::ostream& out, std::span<const PredictionSet> sets);
std::vector<PredictionSet> ReadSetsCsv(std::istream& in);

}  // namespace setfair

#endif  // SETFAIR_SETPRED_H_
