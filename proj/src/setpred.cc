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

#include "setfair/setpred.h"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "setfair/error.h"
#include "setfair/parallel.h"
#include "setfair/random.h"

namespace setfair {

bool PredictionSet::Contains(ClassIndex y) const {
  return std::binary_search(members.begin(), members.end(), y);
}

std::vector<ClassIndex> MembersAtOrBelow(std::span<const double> scores,
                                         double threshold) {
  std::vector<ClassIndex> out;
  for (std::size_t y = 0; y < scores.size(); ++y) {
    if (scores[y] <= threshold) out.push_back(static_cast<ClassIndex>(y));
  }
  return out;
}

PredictionSet PredictSet(const ProbRecord& rec, const SetPredictor& pred) {
  if (rec.num_classes() != pred.num_classes) {
    throw ValidationError("example '" + rec.example_id + "' has " +
                          std::to_string(rec.num_classes()) +
                          " classes, predictor expects " +
                          std::to_string(pred.num_classes));
  }
  PredictionSet out;
  out.example_id = rec.example_id;
  out.group = rec.group;
  out.label = rec.label;

  switch (pred.method) {
    case Method::kMarginal:
    case Method::kMondrian: {
      double threshold = 0.0;
      if (pred.method == Method::kMarginal) {
        threshold = *pred.q_hat;
      } else {
        if (rec.group < 0 ||
            rec.group >= static_cast<int>(pred.q_hat_by_group.size())) {
          throw IndexError("example '" + rec.example_id + "': group " +
                           std::to_string(rec.group) +
                           " has no mondrian threshold");
        }
        threshold = pred.q_hat_by_group[rec.group];
      }
      const auto scores = RecordScores(rec, *pred.score_cfg, pred.seed,
                                       ScoreEvent::kPrediction);
      out.members = MembersAtOrBelow(scores, threshold);
      break;
    }
    case Method::kAvgK: {
      const double q = *pred.q_k;
      for (int y = 0; y < rec.num_classes(); ++y) {
        const double p = rec.probs[y];
        if (p > q) {
          out.members.push_back(y);
        } else if (pred.randomize_ties && p == q &&
                   KeyedUniform(pred.seed, rec.example_id,
                                2 + static_cast<uint64_t>(y)) < 0.5) {
          out.members.push_back(y);
        }
      }
      break;
    }
  }
  if (out.members.empty() && pred.force_nonempty && rec.num_classes() > 0) {
    const auto top = std::max_element(rec.probs.begin(), rec.probs.end());
    out.members.push_back(static_cast<ClassIndex>(top - rec.probs.begin()));
  }
  out.size = static_cast<int>(out.members.size());
  out.covered = out.Contains(rec.label);
  return out;
}

std::vector<PredictionSet> PredictBatch(const LabeledDataset& ds,
                                        const SetPredictor& pred, int jobs) {
  pred.Validate();
  std::vector<PredictionSet> out(ds.size());
  ParallelFor(ds.size(), jobs,
              [&](std::size_t i) { out[i] = PredictSet(ds[i], pred); });
  return out;
}

double AverageSize(std::span<const PredictionSet> sets) {
  if (sets.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : sets) total += s.size;
  return total / static_cast<double>(sets.size());
}

double CoverageRate(std::span<const PredictionSet> sets) {
  if (sets.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : sets) hits += s.covered;
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

void WriteSetsCsv(std::ostream& out, std::span<const PredictionSet> sets) {
  out << "example_id,group,label,set_size,covered,members\n";
  for (const auto& s : sets) {
    out << s.example_id << ',' << s.group << ',' << s.label << ',' << s.size
        << ',' << (s.covered ? 1 : 0) << ',';
    for (std::size_t j = 0; j < s.members.size(); ++j) {
      if (j) out << '|';
      out << s.members[j];
    }
    out << '\n';
  }
}

namespace {

int ToInt(const std::string& s, long line, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("cannot parse ") + what + " '" + s + "'", line);
  }
  return v;
}

std::vector<std::string> Fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, sep)) out.push_back(f);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<PredictionSet> ReadSetsCsv(std::istream& in) {
  std::string line;
  long lineno = 0;
  bool header = false;
  std::vector<PredictionSet> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "example_id,group,label,set_size,covered,members") {
        throw ParseError("unexpected sets header", lineno);
      }
      header = true;
      continue;
    }
    const auto f = Fields(line, ',');
    if (f.size() != 6) {
      throw ParseError("expected 6 fields, got " + std::to_string(f.size()), lineno);
    }
    PredictionSet s;
    s.example_id = f[0];
    s.group = ToInt(f[1], lineno, "group");
    s.label = ToInt(f[2], lineno, "label");
    s.size = ToInt(f[3], lineno, "set_size");
    const int covered = ToInt(f[4], lineno, "covered");
    if (!f[5].empty()) {
      for (const auto& m : Fields(f[5], '|')) {
        s.members.push_back(ToInt(m, lineno, "member"));
      }
    }
    if (!std::is_sorted(s.members.begin(), s.members.end()) ||
        std::adjacent_find(s.members.begin(), s.members.end()) !=
            s.members.end()) {
      throw ParseError("members must be ascending and unique", lineno);
    }
    if (s.size != static_cast<int>(s.members.size())) {
      throw ParseError("set_size disagrees with members", lineno);
    }
    s.covered = s.Contains(s.label);
    if (covered != (s.covered ? 1 : 0)) {
      throw ParseError("covered flag disagrees with members", lineno);
    }
    out.push_back(std::move(s));
  }
  if (!header) throw ParseError("missing sets header", lineno);
  return out;
}

}  // namespace setfair
