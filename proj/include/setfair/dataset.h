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

#ifndef SETFAIR_DATASET_H_
#define SETFAIR_DATASET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

namespace setfair {

using ClassIndex = int;
using GroupIndex = int;

// Tolerance on the probability simplex check. Upstream exporters round, so
// rows are accepted as given within this slack and never renormalized.
inline constexpr double kSimplexTolerance = 1e-6;

struct ProbRecord {
  std::string example_id;
  std::vector<double> probs;
  ClassIndex label = 0;
  GroupIndex group = 0;

  int num_classes() const { return static_cast<int>(probs.size()); }
  friend bool operator==(const ProbRecord&, const ProbRecord&) = default;
};

// Immutable after construction; the constructor enforces every invariant.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  // Throws ValidationError naming the first offending example_id.
  LabeledDataset(std::vector<ProbRecord> records, int num_classes,
                 int num_groups, std::vector<std::string> class_names = {},
                 std::vector<std::string> group_names = {});

  const std::vector<ProbRecord>& records() const { return records_; }
  const ProbRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  int num_classes() const { return num_classes_; }
  int num_groups() const { return num_groups_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<std::string>& group_names() const { return group_names_; }

  // Same metadata, different records (used by splits and filters).
  LabeledDataset WithRecords(std::vector<ProbRecord> records) const;

  friend bool operator==(const LabeledDataset&,
                         const LabeledDataset&) = default;

 private:
  std::vector<ProbRecord> records_;
  int num_classes_ = 0;
  int num_groups_ = 0;
  std::vector<std::string> class_names_;
  std::vector<std::string> group_names_;
};

enum class DataFormat { kCsv, kJsonl };

DataFormat FormatFromPath(const std::filesystem::path& path);

// Reads `example_id,group,label,p_0,...,p_{m-1}` CSV or JSONL with keys
// example_id/group/label/probs. Lines starting with '#' are provenance
// comments and skipped. Row order is preserved. m is taken from the header
// (CSV) or the first row (JSONL); n_g is max(group)+1 unless a sidecar names
// more groups.
LabeledDataset LoadDataset(const std::filesystem::path& path,
                           DataFormat format);
LabeledDataset LoadDataset(const std::filesystem::path& path);
LabeledDataset ParseDataset(std::istream& in, DataFormat format);

// Optional `{"groups": [...], "classes": [...]}` sidecar.
LabeledDataset AttachNames(const LabeledDataset& ds,
                           const std::filesystem::path& sidecar);

// Probabilities are written in shortest round-trip form, so CSV and JSONL
// both reload bit-exactly.
void WriteDataset(std::ostream& out, const LabeledDataset& ds,
                  DataFormat format);
void SaveDataset(const std::filesystem::path& path, const LabeledDataset& ds,
                 DataFormat format);

enum class Stratify { kNone, kClass, kGroup, kClassAndGroup };

struct SplitSpec {
  // (calval, cal, test)
  std::array<double, 3> fractions{0.2, 0.4, 0.4};
  Stratify stratify_by = Stratify::kNone;
  uint64_t seed = 0;
};

struct DatasetSplits {
  LabeledDataset calval;
  LabeledDataset cal;
  LabeledDataset test;
};

// Exhaustive, disjoint partition. Within each stratum the record order is
// shuffled with a stream keyed by (seed, stratum) and part sizes are
// floor(f * n) plus largest-remainder rounding, so every part is within one
// record of its target. Records keep their input order inside each part.
DatasetSplits Split(const LabeledDataset& ds, const SplitSpec& spec);

std::string ToString(Stratify s);
Stratify StratifyFromString(const std::string& s);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace setfair

#endif  // SETFAIR_DATASET_H_
