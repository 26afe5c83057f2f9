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

#include "setfair/audit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "setfair/error.h"

namespace setfair {
namespace {

struct Extremes {
  double delta;
  GroupPair pair;
};

Extremes MaxMin(std::span<const double> v) {
  std::size_t hi = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[hi]) hi = i;
  }
  std::size_t lo = v.size();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == hi && v.size() > 1) continue;
    if (lo == v.size() || v[i] < v[lo]) lo = i;
  }
  if (lo == v.size()) lo = hi;
  return {v[hi] - v[lo], {static_cast<GroupIndex>(hi), static_cast<GroupIndex>(lo)}};
}

std::vector<double> AverageRanks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

FairnessReport AuditSets(std::span<const PredictionSet> sets, int num_groups) {
  if (num_groups < 1) throw ParameterError("need at least one group");
  std::vector<GroupMetrics> per(num_groups);
  for (int g = 0; g < num_groups; ++g) per[g].group = g;
  for (const auto& s : sets) {
    if (s.group < 0 || s.group >= num_groups) {
      throw ValidationError("example '" + s.example_id + "' has group " +
                            std::to_string(s.group) + " outside [0, " +
                            std::to_string(num_groups) + ")");
    }
    auto& gm = per[s.group];
    ++gm.n;
    gm.coverage += s.covered;
    gm.avg_size += s.size;
    gm.singleton_freq += s.size == 1;
  }
  std::vector<double> cov, size, single;
  for (auto& gm : per) {
    if (gm.n == 0) {
      throw ValidationError("group " + std::to_string(gm.group) +
                            " has no prediction sets");
    }
    const double n = static_cast<double>(gm.n);
    gm.coverage /= n;
    gm.avg_size /= n;
    gm.singleton_freq /= n;
    cov.push_back(gm.coverage);
    size.push_back(gm.avg_size);
    single.push_back(gm.singleton_freq);
  }
  FairnessReport report;
  report.per_group = std::move(per);
  const auto c = MaxMin(cov);
  const auto z = MaxMin(size);
  const auto s = MaxMin(single);
  report.delta_cov = c.delta;
  report.cov_pair = c.pair;
  report.delta_size = z.delta;
  report.size_pair = z.pair;
  report.delta_singleton = s.delta;
  report.singleton_pair = s.pair;
  return report;
}

std::vector<double> GroupAccuracy(std::span<const TrialResponse> rs,
                                  int num_groups) {
  std::vector<double> hits(num_groups, 0.0);
  std::vector<long> n(num_groups, 0);
  for (const auto& r : rs) {
    if (r.group < 0 || r.group >= num_groups) {
      throw ValidationError("response for trial '" + r.trial_id +
                            "' has group " + std::to_string(r.group) +
                            " outside [0, " + std::to_string(num_groups) + ")");
    }
    ++n[r.group];
    hits[r.group] += r.correct;
  }
  for (int g = 0; g < num_groups; ++g) {
    if (n[g] == 0) {
      throw ValidationError("group " + std::to_string(g) + " has no responses");
    }
    hits[g] /= static_cast<double>(n[g]);
  }
  return hits;
}

std::vector<double> AccuracyImprovements(std::span<const TrialResponse> treated,
                                         std::span<const TrialResponse> control,
                                         int num_groups) {
  const auto t = GroupAccuracy(treated, num_groups);
  const auto c = GroupAccuracy(control, num_groups);
  std::vector<double> out(num_groups);
  for (int g = 0; g < num_groups; ++g) out[g] = t[g] - c[g];
  return out;
}

DisparateImpactResult DisparateImpact(std::span<const double> improvements) {
  if (improvements.size() < 2) {
    throw ParameterError("disparate impact needs at least two groups");
  }
  const auto e = MaxMin(improvements);
  return {e.delta, e.pair};
}

FairnessReport AuditTreatment(std::span<const PredictionSet> sets,
                              std::span<const TrialResponse> treated,
                              std::span<const TrialResponse> control,
                              int num_groups) {
  FairnessReport report = AuditSets(sets, num_groups);
  const auto acc = GroupAccuracy(treated, num_groups);
  std::vector<double> chosen(num_groups, 0.0);
  std::vector<long> aided(num_groups, 0);
  for (const auto& r : treated) {
    if (r.chosen_in_set) {
      ++aided[r.group];
      chosen[r.group] += *r.chosen_in_set;
    }
  }
  for (int g = 0; g < num_groups; ++g) {
    report.per_group[g].accuracy = acc[g];
    if (aided[g] > 0) {
      report.per_group[g].adoption = chosen[g] / static_cast<double>(aided[g]);
    }
  }
  auto delta = AccuracyImprovements(treated, control, num_groups);
  if (num_groups >= 2) {
    const auto di = DisparateImpact(delta);
    report.delta_accuracy_improvement = di.delta;
    report.improvement_pair = di.pair;
  }
  report.improvements = std::move(delta);
  return report;
}

std::optional<double> Spearman(std::span<const double> x,
                               std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

KeyFactorTable BuildKeyFactorTable(
    std::span<const std::pair<std::string, FairnessReport>> reports) {
  KeyFactorTable table;
  for (const auto& [tag, rep] : reports) {
    if (!rep.improvements || rep.improvements->size() < 2) {
      throw ValidationError("report '" + tag +
                            "' has no per-group accuracy improvements");
    }
    const auto di = DisparateImpact(*rep.improvements);
    const auto& most = rep.per_group.at(di.pair.first);
    const auto& least = rep.per_group.at(di.pair.second);
    KeyFactorRow row;
    row.treatment = tag;
    row.delta_t = di.delta;
    row.cov_diff = most.coverage - least.coverage;
    row.size_diff = most.avg_size - least.avg_size;
    row.singleton_diff = most.singleton_freq - least.singleton_freq;
    if (most.adoption && least.adoption) {
      row.adoption_diff = *most.adoption - *least.adoption;
    }
    table.rows.push_back(std::move(row));
  }
  FillCorrelations(table);
  return table;
}

void FillCorrelations(KeyFactorTable& table) {
  std::vector<double> dt, cov, adopt, size, single;
  bool all_adoption = true;
  for (const auto& r : table.rows) {
    dt.push_back(r.delta_t);
    cov.push_back(r.cov_diff);
    size.push_back(r.size_diff);
    single.push_back(r.singleton_diff);
    if (r.adoption_diff) {
      adopt.push_back(*r.adoption_diff);
    } else {
      all_adoption = false;
    }
  }
  table.spearman_cov = Spearman(cov, dt);
  table.spearman_size = Spearman(size, dt);
  table.spearman_singleton = Spearman(single, dt);
  table.spearman_adoption.reset();
  if (all_adoption) table.spearman_adoption = Spearman(adopt, dt);
}

std::string FormatReport(const FairnessReport& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-6s %8s %9s %9s %10s %9s %9s %9s\n",
                "group", "n", "coverage", "avg_size", "singleton", "accuracy",
                "adoption", "improve");
  out << buf;
  for (const auto& g : report.per_group) {
    const auto opt = [](const std::optional<double>& v) {
      char b[32];
      if (v) {
        std::snprintf(b, sizeof(b), "%9.4f", *v);
      } else {
        std::snprintf(b, sizeof(b), "%9s", "-");
      }
      return std::string(b);
    };
    std::optional<double> imp;
    if (report.improvements) imp = (*report.improvements)[g.group];
    std::snprintf(buf, sizeof(buf), "%-6d %8ld %9.4f %9.4f %10.4f %s %s %s\n",
                  g.group, g.n, g.coverage, g.avg_size, g.singleton_freq,
                  opt(g.accuracy).c_str(), opt(g.adoption).c_str(),
                  opt(imp).c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "delta_cov %.4f (%d,%d)  delta_size %.4f (%d,%d)  "
                "delta_singleton %.4f (%d,%d)\n",
                report.delta_cov, report.cov_pair.first, report.cov_pair.second,
                report.delta_size, report.size_pair.first,
                report.size_pair.second, report.delta_singleton,
                report.singleton_pair.first, report.singleton_pair.second);
  out << buf;
  if (report.delta_accuracy_improvement) {
    std::snprintf(buf, sizeof(buf), "delta_t %.4f (%d,%d)\n",
                  *report.delta_accuracy_improvement,
                  report.improvement_pair->first,
                  report.improvement_pair->second);
    out << buf;
  }
  return out.str();
}

}  // namespace setfair
