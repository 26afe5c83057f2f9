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

#include "setfair/human_sim.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "setfair/error.h"
#include "setfair/parallel.h"
#include "setfair/random.h"
#include "setfair/tuning.h"

namespace setfair {
namespace {

double Unit(uint64_t word) { return static_cast<double>(word >> 11) * 0x1.0p-53; }

// Decision randomness for one participant: draw c of trial j.
double ParticipantUniform(uint64_t seed, int participant, int trial, int c) {
  const uint64_t key = StreamKey(seed, "participant", static_cast<uint64_t>(participant));
  return Unit(StreamKey(key, static_cast<uint64_t>(trial), static_cast<uint64_t>(c)));
}

}  // namespace

void SyntheticTaskSpec::Validate() const {
  if (num_classes < 2) throw ParameterError("synthetic task needs m >= 2");
  if (num_groups < 1) throw ParameterError("synthetic task needs n_g >= 1");
  if (static_cast<int>(group_weights.size()) != num_groups ||
      static_cast<int>(group_accuracy.size()) != num_groups) {
    throw ParameterError("group_weights and group_accuracy need one entry per group");
  }
  double total = 0.0;
  for (double w : group_weights) {
    if (!(w >= 0.0)) throw ParameterError("group weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("group weights must sum to 1");
  for (double a : group_accuracy) {
    if (!(a > 0.0 && a <= 1.0)) throw ParameterError("group accuracy must lie in (0, 1]");
  }
  if (!(concentration > 0.0)) throw ParameterError("concentration must be positive");
  if (!(concentration_spread >= 0.0)) throw ParameterError("spread must be >= 0");
  if (!(runner_up >= 0.0)) throw ParameterError("runner_up must be >= 0");
  if (n < 0) throw ParameterError("record count must be >= 0");
}

LabeledDataset GenerateTask(const SyntheticTaskSpec& spec) {
  spec.Validate();
  const int m = spec.num_classes;
  auto engine = MakeEngine(spec.seed, 0x7a5c);
  std::discrete_distribution<int> group_dist(spec.group_weights.begin(),
                                             spec.group_weights.end());
  std::uniform_int_distribution<int> label_dist(0, m - 1);
  std::uniform_int_distribution<int> wrong_dist(1, m - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::gamma_distribution<double> base_gamma(1.0, 1.0);

  std::vector<ProbRecord> records;
  records.reserve(spec.n);
  std::vector<double> alpha(m);
  for (int i = 0; i < spec.n; ++i) {
    ProbRecord rec;
    rec.example_id = std::to_string(i);
    rec.group = group_dist(engine);
    rec.label = label_dist(engine);
    const bool correct = unit(engine) < spec.group_accuracy[rec.group];
    const int center = correct ? rec.label : (rec.label + wrong_dist(engine)) % m;
    double scale = 1.0;
    if (spec.concentration_spread > 0.0) {
      std::gamma_distribution<double> spread(1.0 / spec.concentration_spread,
                                             spec.concentration_spread);
      scale = spread(engine);
    }
    std::fill(alpha.begin(), alpha.end(), 1.0);
    alpha[center] += spec.concentration * scale;
    if (!correct) alpha[rec.label] += spec.runner_up * spec.concentration * scale;

    rec.probs.resize(m);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      std::gamma_distribution<double> g(alpha[j], 1.0);
      rec.probs[j] = g(engine);
      sum += rec.probs[j];
    }
    if (!(sum > 0.0)) {
      std::fill(rec.probs.begin(), rec.probs.end(), 0.0);
      rec.probs[center] = 1.0;
      sum = 1.0;
    }
    for (double& p : rec.probs) p /= sum;
    const auto top = std::max_element(rec.probs.begin(), rec.probs.end()) -
                     rec.probs.begin();
    std::swap(rec.probs[top], rec.probs[center]);
    records.push_back(std::move(rec));
  }
  return LabeledDataset(std::move(records), m, spec.num_groups);
}

void HumanModel::Validate(int num_groups) const {
  if (!(reliance >= 0.0 && reliance <= 1.0)) {
    throw ParameterError("reliance must lie in [0, 1]");
  }
  if (static_cast<int>(skill.size()) != num_groups) {
    throw ParameterError("human model needs one skill per group (" +
                         std::to_string(num_groups) + ")");
  }
  for (double s : skill) {
    if (!(s > 0.0 && s < 1.0)) throw ParameterError("skills must lie in (0, 1)");
  }
}

std::vector<TrialResponse> SimulateResponses(
    const std::map<Treatment, std::vector<PredictionSet>>& sets_by_treatment,
    const LabeledDataset& ds, const HumanModel& hm, const SimulationShape& shape,
    int jobs) {
  hm.Validate(ds.num_groups());
  if (!sets_by_treatment.contains(Treatment::kControl)) {
    throw ParameterError("simulation needs a control arm");
  }
  if (!sets_by_treatment.contains(Treatment::kMarginal)) {
    throw ParameterError("simulation needs the marginal arm for the diff covariate");
  }
  if (shape.participants < 0 || shape.trials_per_participant < 0) {
    throw ParameterError("participant and trial counts must be non-negative");
  }
  if (static_cast<std::size_t>(shape.trials_per_participant) > ds.size()) {
    throw ParameterError("more trials per participant than records");
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.size(); ++i) index.emplace(ds[i].example_id, i);

  // Per treatment: record index -> set.
  std::vector<Treatment> arms;
  std::map<Treatment, std::vector<const PredictionSet*>> aligned;
  for (const auto& [t, sets] : sets_by_treatment) {
    arms.push_back(t);
    if (t == Treatment::kControl) continue;
    auto& slot = aligned[t];
    slot.assign(ds.size(), nullptr);
    for (const auto& s : sets) {
      const auto it = index.find(s.example_id);
      if (it != index.end()) slot[it->second] = &s;
    }
  }

  // The ten shared trial sequences.
  std::vector<std::vector<std::size_t>> slots(kTrialSeedSlots);
  for (int k = 0; k < kTrialSeedSlots; ++k) {
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto engine = MakeEngine(hm.seed, 0x5107 + static_cast<uint64_t>(k));
    for (int j = 0; j < shape.trials_per_participant; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, idx.size() - 1);
      std::swap(idx[j], idx[pick(engine)]);
    }
    idx.resize(shape.trials_per_participant);
    slots[k] = std::move(idx);
  }

  const int num_arms = static_cast<int>(arms.size());
  const int m = ds.num_classes();
  std::vector<std::vector<TrialResponse>> per(shape.participants);
  ParallelFor(per.size(), jobs, [&](std::size_t pi) {
    const int p = static_cast<int>(pi);
    const Treatment t = arms[p % num_arms];
    const auto& trials = slots[(p / num_arms) % kTrialSeedSlots];
    auto& out = per[pi];
    out.reserve(trials.size());
    for (int j = 0; j < static_cast<int>(trials.size()); ++j) {
      const ProbRecord& rec = ds[trials[j]];
      const PredictionSet* marginal = aligned.at(Treatment::kMarginal)[trials[j]];
      if (marginal == nullptr) {
        throw ValidationError("no marginal set for example '" + rec.example_id + "'");
      }
      TrialResponse r;
      r.participant_id = p;
      r.trial_id = rec.example_id;
      r.treatment = t;
      r.group = rec.group;
      r.diff = std::max(marginal->size, 1);
      const double skill = hm.skill[rec.group];
      const double u_rely = ParticipantUniform(hm.seed, p, j, 0);
      const double u_correct = ParticipantUniform(hm.seed, p, j, 1);
      const double u_pick = ParticipantUniform(hm.seed, p, j, 2);
      if (t == Treatment::kControl) {
        r.correct = u_correct < skill;
      } else {
        const PredictionSet* set = aligned.at(t)[trials[j]];
        if (set == nullptr) {
          throw ValidationError("no " + ToString(t) + " set for example '" +
                                rec.example_id + "'");
        }
        if (u_rely < hm.reliance) {
          r.chosen_in_set = true;
          r.correct = set->covered &&
                      u_correct < skill + (1.0 - skill) / std::max(set->size, 1);
        } else {
          r.correct = u_correct < skill;
          if (r.correct) {
            r.chosen_in_set = set->covered;
          } else {
            // A uniformly chosen wrong answer lands in the set with
            // probability |set \ {label}| / (m - 1).
            const int wrong_in_set = set->size - (set->covered ? 1 : 0);
            r.chosen_in_set = u_pick * (m - 1) < wrong_in_set;
          }
        }
      }
      out.push_back(std::move(r));
    }
  });

  std::vector<TrialResponse> all;
  all.reserve(static_cast<std::size_t>(shape.participants) *
              shape.trials_per_participant);
  for (auto& v : per) {
    std::move(v.begin(), v.end(), std::back_inserter(all));
  }
  return all;
}

double ExpectedAidedAccuracy(std::span<const PredictionSet> sets, double skill,
                             double reliance) {
  if (sets.empty()) return (1.0 - reliance) * skill;
  double aided = 0.0;
  for (const auto& s : sets) {
    if (s.covered) aided += skill + (1.0 - skill) / std::max(s.size, 1);
  }
  aided /= static_cast<double>(sets.size());
  return (1.0 - reliance) * skill + reliance * aided;
}

const MethodOutcome& MechanismReport::outcome(Treatment t) const {
  for (const auto& m : methods) {
    if (m.treatment == t) return m;
  }
  throw ParameterError("no outcome for treatment " + ToString(t));
}

MechanismReport RunMechanismBenchmark(const MechanismConfig& cfg, int jobs) {
  cfg.task.Validate();
  cfg.human.Validate(cfg.task.num_groups);
  const LabeledDataset full = GenerateTask(cfg.task);
  SplitSpec split = cfg.split;
  split.seed = StreamKey(cfg.task.seed, "split", split.seed);
  const DatasetSplits parts = Split(full, split);

  CalibrationOptions opts;
  opts.seed = cfg.task.seed;
  opts.force_nonempty = cfg.force_nonempty;

  MechanismReport report;
  report.test = parts.test;

  AvgKTuneOptions avgk_opts;
  avgk_opts.force_nonempty = cfg.force_nonempty;
  const auto tuned = TuneAvgK(parts.cal, parts.calval, 1.0 - cfg.alpha, avgk_opts);

  std::vector<std::pair<Treatment, SetPredictor>> predictors = {
      {Treatment::kAvgK, CalibrateAvgK(parts.cal, tuned.k, opts)},
      {Treatment::kMarginal, CalibrateMarginal(parts.cal, cfg.score, cfg.alpha, opts)},
      {Treatment::kConditional,
       CalibrateMondrian(parts.cal, cfg.score, cfg.alpha, cfg.min_group_n, opts)},
  };

  std::map<Treatment, std::vector<PredictionSet>> sets_by_treatment;
  sets_by_treatment[Treatment::kControl] = {};
  for (auto& [t, pred] : predictors) {
    MethodOutcome o;
    o.treatment = t;
    o.predictor = std::move(pred);
    o.sets = PredictBatch(parts.test, o.predictor, jobs);
    sets_by_treatment[t] = o.sets;
    report.methods.push_back(std::move(o));
  }

  report.responses = SimulateResponses(sets_by_treatment, parts.test, cfg.human,
                                       cfg.shape, jobs);
  std::map<Treatment, std::vector<TrialResponse>> by_arm;
  for (const auto& r : report.responses) by_arm[r.treatment].push_back(r);

  const int n_g = cfg.task.num_groups;
  report.control_accuracy = GroupAccuracy(by_arm[Treatment::kControl], n_g);
  std::vector<std::pair<std::string, FairnessReport>> tagged;
  for (auto& o : report.methods) {
    o.report = AuditTreatment(o.sets, by_arm[o.treatment],
                              by_arm[Treatment::kControl], n_g);
    tagged.emplace_back(ToString(o.treatment), o.report);
  }
  if (n_g >= 2) report.key_factors = BuildKeyFactorTable(tagged);

  const auto& marg = report.outcome(Treatment::kMarginal).report;
  const auto& cond = report.outcome(Treatment::kConditional).report;
  report.flags.mondrian_equalizes_coverage =
      cond.delta_cov <= kEqualizedCoverageTolerance;
  report.flags.marginal_coverage_gap = marg.delta_cov > cond.delta_cov;
  report.flags.mondrian_size_gap = cond.delta_size > marg.delta_size;
  report.flags.mondrian_more_disparate =
      cond.delta_accuracy_improvement.value_or(0.0) >
      marg.delta_accuracy_improvement.value_or(0.0);
  return report;
}

SweepResult RunKeyFactorSweep(const MechanismConfig& base, int count,
                              uint64_t seed, int jobs) {
  if (count < 1) throw ParameterError("sweep needs at least one configuration");
  SweepResult out;
  for (int i = 0; i < count; ++i) {
    const auto u = [&](uint64_t c) {
      return KeyedUniform(seed, "sweep", 16 * static_cast<uint64_t>(i) + c);
    };
    MechanismConfig cfg = base;
    cfg.task.seed = StreamKey(seed, "sweep-task", static_cast<uint64_t>(i));
    cfg.human.seed = StreamKey(seed, "sweep-human", static_cast<uint64_t>(i));
    const int n_g = cfg.task.num_groups;
    // Group 0 is the easiest; later groups are progressively harder.
    const double top = 0.75 + 0.2 * u(0);
    const double gap = 0.05 + 0.35 * u(1);
    const double skill_top = 0.55 + 0.25 * u(2);
    const double skill_gap = 0.15 * u(3);
    for (int g = 0; g < n_g; ++g) {
      const double frac = n_g > 1 ? static_cast<double>(g) / (n_g - 1) : 0.0;
      cfg.task.group_accuracy[g] = top - gap * frac;
      cfg.human.skill[g] = skill_top - skill_gap * frac;
    }
    cfg.task.concentration = 3.0 + 7.0 * u(4);
    cfg.human.reliance = 0.5 + 0.5 * u(5);
    out.configs.push_back(std::move(cfg));
  }

  std::vector<std::vector<KeyFactorRow>> rows(count);
  ParallelFor(static_cast<std::size_t>(count), jobs, [&](std::size_t i) {
    rows[i] = RunMechanismBenchmark(out.configs[i], 1).key_factors.rows;
  });

  for (int i = 0; i < count; ++i) {
    for (auto& r : rows[i]) {
      r.treatment = "cfg" + std::to_string(i) + ":" + r.treatment;
      out.table.rows.push_back(std::move(r));
    }
  }
  FillCorrelations(out.table);
  return out;
}

}  // namespace setfair
