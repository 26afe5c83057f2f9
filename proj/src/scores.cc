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

#include "setfair/scores.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "setfair/error.h"
#include "setfair/random.h"

namespace setfair {

std::string ToString(ScoreKind k) {
  switch (k) {
    case ScoreKind::kLac: return "lac";
    case ScoreKind::kAps: return "aps";
    case ScoreKind::kRaps: return "raps";
    case ScoreKind::kSaps: return "saps";
  }
  return "lac";
}

ScoreKind ScoreKindFromString(const std::string& s) {
  if (s == "lac") return ScoreKind::kLac;
  if (s == "aps") return ScoreKind::kAps;
  if (s == "raps") return ScoreKind::kRaps;
  if (s == "saps") return ScoreKind::kSaps;
  throw ParameterError("unknown score kind '" + s + "'");
}

std::string ToString(UMode m) {
  return m == UMode::kSeeded ? "seeded" : "fixed_one";
}

UMode UModeFromString(const std::string& s) {
  if (s == "seeded") return UMode::kSeeded;
  if (s == "fixed_one") return UMode::kFixedOne;
  throw ParameterError("unknown u_mode '" + s + "'");
}

void ScoreConfig::Validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ParameterError("temperature must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be non-negative");
  }
  if (kind == ScoreKind::kRaps && k_reg < 1) {
    throw ParameterError("k_reg must be >= 1");
  }
}

std::vector<double> ApplyTemperature(std::span<const double> probs,
                                     double temperature) {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
  std::vector<double> out(probs.begin(), probs.end());
  if (temperature == 1.0 || out.empty()) return out;
  double max_logit = -INFINITY;
  for (double& v : out) {
    v = std::log(std::max(v, 1e-12)) / temperature;
    max_logit = std::max(max_logit, v);
  }
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - max_logit);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<int> Ranks(std::span<const double> probs) {
  const int m = static_cast<int>(probs.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  std::vector<int> rank(m);
  for (int r = 0; r < m; ++r) rank[order[r]] = r + 1;
  return rank;
}

std::vector<double> MassAbove(std::span<const double> probs) {
  const int m = static_cast<int>(probs.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  // Walk descending; equal values share the mass accumulated before them.
  std::vector<double> above(m, 0.0);
  double acc = 0.0;
  int i = 0;
  while (i < m) {
    int j = i;
    double block = 0.0;
    while (j < m && probs[order[j]] == probs[order[i]]) {
      above[order[j]] = acc;
      block += probs[order[j]];
      ++j;
    }
    acc += block;
    i = j;
  }
  return above;
}

namespace {

double ScoreFromParts(double p_y, double max_p, int rank, double mass_above,
                      const ScoreConfig& cfg, double u) {
  switch (cfg.kind) {
    case ScoreKind::kLac:
      return 1.0 - p_y;
    case ScoreKind::kAps:
      return mass_above + u * p_y;
    case ScoreKind::kRaps:
      return mass_above + u * p_y +
             cfg.lambda * std::max(0, rank - cfg.k_reg);
    case ScoreKind::kSaps:
      if (rank == 1) return u * p_y;
      return max_p + cfg.lambda * (static_cast<double>(rank) - 2.0 + u);
  }
  return 0.0;
}

}  // namespace

std::vector<ScoredLabel> ScoreAll(std::span<const double> probs,
                                  const ScoreConfig& cfg, double u) {
  const auto rank = Ranks(probs);
  const auto above = MassAbove(probs);
  const double max_p =
      probs.empty() ? 0.0 : *std::max_element(probs.begin(), probs.end());
  std::vector<ScoredLabel> out(probs.size());
  for (std::size_t y = 0; y < probs.size(); ++y) {
    out[y].label = static_cast<ClassIndex>(y);
    out[y].rank = rank[y];
    out[y].mass_above = above[y];
    out[y].score = ScoreFromParts(probs[y], max_p, rank[y], above[y], cfg, u);
  }
  return out;
}

double Score(std::span<const double> probs, ClassIndex y,
             const ScoreConfig& cfg, double u) {
  if (y < 0 || y >= static_cast<int>(probs.size())) {
    throw IndexError("label " + std::to_string(y) + " out of range for " +
                     std::to_string(probs.size()) + " classes");
  }
  // Shares ScoreAll's summation order so calibration and prediction scores
  // agree to the last bit.
  return ScoreAll(probs, cfg, u)[y].score;
}

double RecordU(const ScoreConfig& cfg, uint64_t seed,
               std::string_view example_id, ScoreEvent event) {
  if (!cfg.draws_u()) return 1.0;
  return KeyedUniform(seed, example_id, static_cast<uint64_t>(event));
}

double TrueLabelScore(const ProbRecord& rec, const ScoreConfig& cfg,
                      uint64_t seed, ScoreEvent event) {
  const double u = RecordU(cfg, seed, rec.example_id, event);
  if (cfg.temperature == 1.0) return Score(rec.probs, rec.label, cfg, u);
  const auto scaled = ApplyTemperature(rec.probs, cfg.temperature);
  return Score(scaled, rec.label, cfg, u);
}

std::vector<double> RecordScores(const ProbRecord& rec, const ScoreConfig& cfg,
                                 uint64_t seed, ScoreEvent event) {
  const double u = RecordU(cfg, seed, rec.example_id, event);
  const auto scaled = ApplyTemperature(rec.probs, cfg.temperature);
  const auto scored = ScoreAll(scaled, cfg, u);
  std::vector<double> out(scored.size());
  for (std::size_t y = 0; y < scored.size(); ++y) out[y] = scored[y].score;
  return out;
}

}  // namespace setfair
