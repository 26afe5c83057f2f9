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

#ifndef SETFAIR_AUDIT_H_
#define SETFAIR_AUDIT_H_

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "setfair/responses.h"
#include "setfair/setpred.h"

namespace setfair {

struct GroupMetrics {
  GroupIndex group = 0;
  long n = 0;
  double coverage = 0.0;
  double avg_size = 0.0;
  double singleton_freq = 0.0;
  std::optional<double> accuracy;  // human accuracy under the treatment
  std::optional<double> adoption;  // share of aided answers chosen in-set
};

using GroupPair = std::pair<GroupIndex, GroupIndex>;

// Every delta is max over pairs (a, b) of metric_a - metric_b, i.e.
// max - min; each pair is (argmax, argmin) with ties to the lowest index.
struct FairnessReport {
  std::vector<GroupMetrics> per_group;
  double delta_cov = 0.0;
  double delta_size = 0.0;
  double delta_singleton = 0.0;
  GroupPair cov_pair{0, 0};
  GroupPair size_pair{0, 0};
  GroupPair singleton_pair{0, 0};
  // Present when human responses were audited.
  std::optional<std::vector<double>> improvements;
  std::optional<double> delta_accuracy_improvement;
  std::optional<GroupPair> improvement_pair;
};

// Set-level metrics per group. Throws ValidationError naming an empty group
// or an out-of-range group index.
FairnessReport AuditSets(std::span<const PredictionSet> sets, int num_groups);

// delta_{t,a} = acc_t(a) - acc_control(a), per group index.
std::vector<double> AccuracyImprovements(std::span<const TrialResponse> treated,
                                         std::span<const TrialResponse> control,
                                         int num_groups);

// Per-group accuracy of a response stream; throws if a group is absent.
std::vector<double> GroupAccuracy(std::span<const TrialResponse> rs,
                                  int num_groups);

struct DisparateImpactResult {
  double delta = 0.0;
  GroupPair pair{0, 0};  // (most improved, least improved)
};

// max(delta) - min(delta). The most improved group is the lowest index
// attaining the max; the least improved is the lowest other index attaining
// the min (so a fully tied vector yields the pair (0, 1)).
DisparateImpactResult DisparateImpact(std::span<const double> improvements);

// Set metrics plus human accuracy, adoption and improvement over control.
FairnessReport AuditTreatment(std::span<const PredictionSet> sets,
                              std::span<const TrialResponse> treated,
                              std::span<const TrialResponse> control,
                              int num_groups);

struct KeyFactorRow {
  std::string treatment;
  double delta_t = 0.0;
  double cov_diff = 0.0;
  std::optional<double> adoption_diff;
  double size_diff = 0.0;
  double singleton_diff = 0.0;
};

struct KeyFactorTable {
  std::vector<KeyFactorRow> rows;
  // Spearman correlation of each factor column with delta_t; absent when a
  // column is constant (or has fewer than two rows).
  std::optional<double> spearman_cov;
  std::optional<double> spearman_adoption;
  std::optional<double> spearman_size;
  std::optional<double> spearman_singleton;
};

// Factor differences are taken between the most- and least-improved groups
// (metric(most) - metric(least)), so they may be negative.
KeyFactorTable BuildKeyFactorTable(
    std::span<const std::pair<std::string, FairnessReport>> reports);

// Recomputes the Spearman columns of `table` from its rows.
void FillCorrelations(KeyFactorTable& table);

// Average-rank Spearman correlation; nullopt for degenerate columns.
std::optional<double> Spearman(std::span<const double> x,
                               std::span<const double> y);

// Human-readable per-group table.
std::string FormatReport(const FairnessReport& report);

}  // namespace setfair

#endif  // SETFAIR_AUDIT_H_
