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

#include "setfair/calibration.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "setfair/error.h"
#include "setfair/setpred.h"

namespace setfair {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("alpha must lie in (0, 1), got " + FormatDouble(alpha));
  }
}

std::vector<double> TrueLabelScores(const LabeledDataset& ds,
                                    const ScoreConfig& cfg, uint64_t seed) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& rec : ds.records()) {
    out.push_back(TrueLabelScore(rec, cfg, seed, ScoreEvent::kCalibration));
  }
  return out;
}

}  // namespace

std::string ToString(Method m) {
  switch (m) {
    case Method::kMarginal: return "marginal";
    case Method::kMondrian: return "mondrian";
    case Method::kAvgK: return "avgk";
  }
  return "marginal";
}

Method MethodFromString(const std::string& s) {
  if (s == "marginal") return Method::kMarginal;
  if (s == "mondrian" || s == "conditional") return Method::kMondrian;
  if (s == "avgk") return Method::kAvgK;
  throw ParameterError("unknown method '" + s + "'");
}

void SetPredictor::Validate() const {
  const bool conformal = method != Method::kAvgK;
  if (conformal != score_cfg.has_value() || conformal != alpha.has_value()) {
    throw ParameterError("score config / alpha must be set exactly for conformal methods");
  }
  if ((method == Method::kMarginal) != q_hat.has_value()) {
    throw ParameterError("q_hat must be set exactly for the marginal method");
  }
  if (method == Method::kMondrian) {
    if (static_cast<int>(q_hat_by_group.size()) != num_groups) {
      throw ParameterError("mondrian predictor needs one threshold per group");
    }
  } else if (!q_hat_by_group.empty()) {
    throw ParameterError("per-group thresholds only apply to mondrian");
  }
  const bool avgk_fields = method == Method::kAvgK ? k.has_value() && q_k.has_value()
                                                  : k.has_value() || q_k.has_value();
  if ((method == Method::kAvgK) != avgk_fields) {
    throw ParameterError("k / q_k must be set exactly for the avgk method");
  }
  if (score_cfg) score_cfg->Validate();
  if (num_classes < 1) throw ParameterError("predictor has no classes");
}

long ConformalRank(std::size_t n, double alpha) {
  CheckAlpha(alpha);
  const double x = static_cast<double>(n + 1) * (1.0 - alpha);
  return static_cast<long>(std::ceil(x - 1e-9));
}

double ConformalQuantile(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw CalibrationError("no calibration scores");
  const long r = ConformalRank(scores.size(), alpha);
  if (r > static_cast<long>(scores.size())) return kInf;
  std::vector<double> work(scores.begin(), scores.end());
  const auto nth = work.begin() + (std::max(r, 1L) - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

SetPredictor CalibrateMarginal(const LabeledDataset& cal,
                               const ScoreConfig& cfg, double alpha,
                               const CalibrationOptions& opts) {
  CheckAlpha(alpha);
  cfg.Validate();
  if (cal.empty()) throw CalibrationError("empty calibration set");
  SetPredictor pred;
  pred.method = Method::kMarginal;
  pred.score_cfg = cfg;
  pred.alpha = alpha;
  pred.q_hat = ConformalQuantile(TrueLabelScores(cal, cfg, opts.seed), alpha);
  pred.n_cal = static_cast<int>(cal.size());
  pred.seed = opts.seed;
  pred.num_classes = cal.num_classes();
  pred.num_groups = cal.num_groups();
  pred.force_nonempty = opts.force_nonempty;
  return pred;
}

SetPredictor CalibrateMondrian(const LabeledDataset& cal,
                               const ScoreConfig& cfg, double alpha,
                               int min_group_n,
                               const CalibrationOptions& opts) {
  CheckAlpha(alpha);
  cfg.Validate();
  if (cal.empty()) throw CalibrationError("empty calibration set");
  const auto scores = TrueLabelScores(cal, cfg, opts.seed);
  std::vector<std::vector<double>> by_group(cal.num_groups());
  for (std::size_t i = 0; i < cal.size(); ++i) {
    by_group[cal[i].group].push_back(scores[i]);
  }
  SetPredictor pred;
  pred.method = Method::kMondrian;
  pred.score_cfg = cfg;
  pred.alpha = alpha;
  for (int g = 0; g < cal.num_groups(); ++g) {
    const auto n = static_cast<long>(by_group[g].size());
    if (n < std::max(min_group_n, 1)) {
      std::string name = std::to_string(g);
      if (g < static_cast<int>(cal.group_names().size())) {
        name += " (" + cal.group_names()[g] + ")";
      }
      throw CalibrationError("group " + name + " has " + std::to_string(n) +
                             " calibration records, fewer than min_group_n=" +
                             std::to_string(min_group_n));
    }
    pred.q_hat_by_group.push_back(ConformalQuantile(by_group[g], alpha));
  }
  pred.n_cal = static_cast<int>(cal.size());
  pred.seed = opts.seed;
  pred.num_classes = cal.num_classes();
  pred.num_groups = cal.num_groups();
  pred.force_nonempty = opts.force_nonempty;
  return pred;
}

double AvgKThreshold(std::span<const double> sorted_values, int num_classes,
                     double k) {
  if (!(k > 0.0) || k > static_cast<double>(num_classes)) {
    throw ParameterError("k must lie in (0, " + std::to_string(num_classes) +
                         "], got " + FormatDouble(k));
  }
  const double n = static_cast<double>(sorted_values.size());
  // ceil(p * |Y|) with p = 1 - k/m, evaluated as |Y|(m-k)/m.
  const double x = n * (static_cast<double>(num_classes) - k) / num_classes;
  const auto idx = static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9)));
  if (idx == 0) return -kInf;
  return sorted_values[std::min(idx, sorted_values.size()) - 1];
}

SetPredictor CalibrateAvgK(const LabeledDataset& cal, double k,
                           const CalibrationOptions& opts) {
  if (cal.empty()) throw CalibrationError("empty calibration set");
  std::vector<double> flat;
  flat.reserve(cal.size() * cal.num_classes());
  for (const auto& rec : cal.records()) {
    flat.insert(flat.end(), rec.probs.begin(), rec.probs.end());
  }
  std::sort(flat.begin(), flat.end());
  SetPredictor pred;
  pred.method = Method::kAvgK;
  pred.k = k;
  pred.q_k = AvgKThreshold(flat, cal.num_classes(), k);
  pred.n_cal = static_cast<int>(cal.size());
  pred.seed = opts.seed;
  pred.num_classes = cal.num_classes();
  pred.num_groups = cal.num_groups();
  pred.force_nonempty = opts.force_nonempty;
  pred.randomize_ties = opts.randomize_ties;
  return pred;
}

double EmpiricalCoverage(std::span<const PredictionSet> sets,
                         std::span<const ClassIndex> labels) {
  if (sets.size() != labels.size()) {
    throw ParameterError("coverage: " + std::to_string(sets.size()) +
                         " sets but " + std::to_string(labels.size()) +
                         " labels");
  }
  if (sets.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    hits += sets[i].Contains(labels[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

}  // namespace setfair
