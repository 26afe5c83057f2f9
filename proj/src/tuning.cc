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

#include "setfair/tuning.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "setfair/error.h"
#include "setfair/parallel.h"
#include "setfair/random.h"
#include "setfair/setpred.h"

namespace setfair {
namespace {

double SampleReal(const Range& r, double u) {
  if (r.hi <= r.lo) return r.lo;
  if (r.lo > 0.0) {
    return std::exp(std::log(r.lo) + u * (std::log(r.hi) - std::log(r.lo)));
  }
  return r.lo + u * (r.hi - r.lo);
}

int SampleInt(const IntRange& r, double u) {
  const int span = r.hi - r.lo + 1;
  return r.lo + std::min(span - 1, static_cast<int>(u * span));
}

}  // namespace

void TuneSpec::Validate() const {
  if (budget < 1) throw ParameterError("tuning budget must be >= 1");
  if (!(target_coverage > 0.0 && target_coverage < 1.0)) {
    throw ParameterError("target coverage must lie in (0, 1)");
  }
  if (!(temperature.lo > 0.0) || temperature.hi < temperature.lo) {
    throw ParameterError("empty or non-positive temperature range");
  }
  if (!(lambda.lo >= 0.0) || lambda.hi < lambda.lo) {
    throw ParameterError("empty or negative lambda range");
  }
  if (k_reg.lo < 1 || k_reg.hi < k_reg.lo) {
    throw ParameterError("empty k_reg range");
  }
}

std::vector<ScoreConfig> SampleScoreConfigs(ScoreKind kind, int num_classes,
                                            const TuneSpec& spec) {
  spec.Validate();
  const bool uses_lambda = kind == ScoreKind::kRaps || kind == ScoreKind::kSaps;
  const bool uses_kreg = kind == ScoreKind::kRaps;
  IntRange kreg = spec.k_reg;
  kreg.hi = std::min(kreg.hi, std::max(num_classes, kreg.lo));

  std::vector<ScoreConfig> out;
  out.reserve(spec.budget);
  for (int i = 0; i < spec.budget; ++i) {
    ScoreConfig cfg;
    cfg.kind = kind;
    cfg.randomized = spec.randomized;
    cfg.u_mode = spec.u_mode;
    if (i == 0) {
      cfg.temperature = std::clamp(1.0, spec.temperature.lo, spec.temperature.hi);
      cfg.lambda = uses_lambda ? spec.lambda.lo : 0.0;
      cfg.k_reg = uses_kreg ? kreg.lo : 1;
    } else {
      const auto u = [&](uint64_t j) {
        return KeyedUniform(spec.seed, "tune", 3 * static_cast<uint64_t>(i) + j);
      };
      cfg.temperature = SampleReal(spec.temperature, u(0));
      cfg.lambda = uses_lambda ? SampleReal(spec.lambda, u(1)) : 0.0;
      cfg.k_reg = uses_kreg ? SampleInt(kreg, u(2)) : 1;
    }
    out.push_back(cfg);
  }
  return out;
}

TuneReport TuneScore(const LabeledDataset& cal, const LabeledDataset& calval,
                     ScoreKind kind, Method method, double alpha,
                     const TuneSpec& spec, int jobs) {
  if (cal.empty() || calval.empty()) {
    throw CalibrationError("tuning needs nonempty cal and calval sets");
  }
  if (method == Method::kAvgK) {
    throw ParameterError("use TuneAvgK for the avgk method");
  }
  const auto configs = SampleScoreConfigs(kind, cal.num_classes(), spec);
  TuneReport report;
  report.candidates.resize(configs.size());
  CalibrationOptions opts;
  opts.seed = spec.seed;
  opts.force_nonempty = spec.force_nonempty;
  ParallelFor(configs.size(), jobs, [&](std::size_t i) {
    const SetPredictor pred =
        method == Method::kMarginal
            ? CalibrateMarginal(cal, configs[i], alpha, opts)
            : CalibrateMondrian(cal, configs[i], alpha, spec.min_group_n, opts);
    const auto sets = PredictBatch(calval, pred);
    report.candidates[i] = {configs[i], AverageSize(sets), CoverageRate(sets)};
  });

  const double floor = spec.target_coverage - spec.coverage_slack;
  std::size_t best = report.candidates.size();
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& c = report.candidates[i];
    if (c.coverage >= floor &&
        (best == report.candidates.size() ||
         c.avg_size < report.candidates[best].avg_size)) {
      best = i;
    }
  }
  report.winner_meets_target = best != report.candidates.size();
  if (!report.winner_meets_target) {
    best = 0;
    for (std::size_t i = 1; i < report.candidates.size(); ++i) {
      if (report.candidates[i].coverage > report.candidates[best].coverage) {
        best = i;
      }
    }
  }
  report.winner = best;
  return report;
}

AvgKCoverage::AvgKCoverage(const LabeledDataset& cal,
                           const LabeledDataset& calval, bool force_nonempty)
    : num_classes_(cal.num_classes()), force_nonempty_(force_nonempty) {
  if (cal.empty() || calval.empty()) {
    throw CalibrationError("avg-k tuning needs nonempty cal and calval sets");
  }
  if (calval.num_classes() != num_classes_) {
    throw ValidationError("cal and calval disagree on the class count");
  }
  sorted_.reserve(cal.size() * num_classes_);
  for (const auto& rec : cal.records()) {
    sorted_.insert(sorted_.end(), rec.probs.begin(), rec.probs.end());
  }
  std::sort(sorted_.begin(), sorted_.end());
  for (const auto& rec : calval.records()) {
    true_prob_.push_back(rec.probs[rec.label]);
    const auto top = std::max_element(rec.probs.begin(), rec.probs.end());
    true_is_top_.push_back(top - rec.probs.begin() == rec.label);
  }
}

double AvgKCoverage::Threshold(double k) const {
  return AvgKThreshold(sorted_, num_classes_, k);
}

double AvgKCoverage::operator()(double k) const {
  const double q = Threshold(k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < true_prob_.size(); ++i) {
    // A forced top-1 set only arises when nothing clears q, and then it
    // covers exactly when the label is the argmax.
    hits += true_prob_[i] > q || (force_nonempty_ && true_is_top_[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(true_prob_.size());
}

AvgKTuneResult TuneAvgK(const LabeledDataset& cal, const LabeledDataset& calval,
                        double target_coverage, const AvgKTuneOptions& opts) {
  if (!(target_coverage >= 0.0 && target_coverage <= 1.0)) {
    throw ParameterError("target coverage must lie in [0, 1]");
  }
  if (!(opts.precision > 0.0)) throw ParameterError("precision must be positive");
  const AvgKCoverage coverage(cal, calval, opts.force_nonempty);
  const double m = coverage.num_classes();

  const double best_possible = coverage(m);
  if (best_possible < target_coverage) {
    throw CalibrationError("target coverage " + FormatDouble(target_coverage) +
                           " unreachable; coverage at k=m is " +
                           FormatDouble(best_possible));
  }
  double previous = -1.0;
  std::ostringstream probes;
  bool monotone = true;
  for (int i = 1; i <= 5; ++i) {
    const double k = m * i / 5.0;
    const double c = coverage(k);
    probes << " k=" << FormatDouble(k) << ":" << FormatDouble(c);
    monotone = monotone && c >= previous;
    previous = c;
  }
  if (!monotone) {
    throw CalibrationError("avg-k coverage is not monotone in k:" + probes.str());
  }

  double lo = 0.0;
  double hi = m;
  int iterations = 0;
  while (hi - lo > opts.precision) {
    const double mid = 0.5 * (lo + hi);
    if (coverage(mid) >= target_coverage) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++iterations;
  }
  return AvgKTuneResult{hi, coverage.Threshold(hi), coverage(hi), iterations};
}

}  // namespace setfair
