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

#include "setfair/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "setfair/audit.h"
#include "setfair/calibration.h"
#include "setfair/dataset.h"
#include "setfair/error.h"
#include "setfair/human_sim.h"
#include "setfair/inference.h"
#include "setfair/json_io.h"
#include "setfair/parallel.h"
#include "setfair/random.h"
#include "setfair/responses.h"
#include "setfair/setpred.h"
#include "setfair/tuning.h"

namespace setfair {

namespace fs = std::filesystem;

std::string ConfigHash(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(config.dump())));
  return buf;
}

namespace {

constexpr const char* kProvenancePrefix = "# provenance config_hash=";

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<double> alpha;
  std::string method;
  std::string score;
  std::string out = "setfair_out";
  int jobs = 1;
};

void AddCommon(CLI::App* sub, CommonFlags& c) {
  sub->add_option("--config", c.config_path, "JSON run configuration");
  sub->add_option("--seed", c.seed, "Master seed (overrides config)");
  sub->add_option("--alpha", c.alpha, "Miscoverage level in (0, 1)");
  sub->add_option("--method", c.method, "marginal | mondrian | avgk")
      ->check(CLI::IsMember({"marginal", "mondrian", "conditional", "avgk"}));
  sub->add_option("--score", c.score, "lac | aps | raps | saps")
      ->check(CLI::IsMember({"lac", "aps", "raps", "saps"}));
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--jobs", c.jobs, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
}

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

// Effective configuration of one invocation: config file, then flag
// overrides, then the subcommand's input paths. Output location and job
// count are excluded so they never change the hash.
struct Run {
  std::string command;
  json config;
  std::string hash;
  uint64_t seed = 0;
  fs::path out_dir;
  int jobs = 1;
  std::vector<std::string> files;
};

Run MakeRun(const std::string& command, const CommonFlags& flags,
            const json& inputs) {
  Run run;
  run.command = command;
  run.config = flags.config_path.empty() ? json::object() : ReadJsonFile(flags.config_path);
  if (!run.config.is_object()) throw ParseError("config must be a JSON object", 0);
  auto& c = run.config;
  if (flags.seed) c["seed"] = *flags.seed;
  if (flags.alpha) c["alpha"] = *flags.alpha;
  if (!flags.method.empty()) c["method"] = flags.method;
  if (!flags.score.empty()) {
    if (!c.contains("score") || !c["score"].is_object()) c["score"] = json::object();
    c["score"]["kind"] = flags.score;
  }
  if (!c.contains("seed")) c["seed"] = 0;
  if (!c.contains("alpha")) c["alpha"] = 0.1;
  if (!c.contains("method")) c["method"] = "marginal";
  c["command"] = command;
  for (auto it = inputs.begin(); it != inputs.end(); ++it) {
    if (!it.value().is_null()) c["inputs"][it.key()] = it.value();
  }
  run.seed = c["seed"].get<uint64_t>();
  const double alpha = c["alpha"].get<double>();
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  run.hash = ConfigHash(c);
  run.out_dir = flags.out;
  run.jobs = flags.jobs;
  fs::create_directories(run.out_dir);
  return run;
}

json Provenance(const Run& run) {
  return {{"config", run.config}, {"config_hash", run.hash}, {"seed", run.seed}};
}

void WriteJson(Run& run, const std::string& name, json body) {
  body["provenance"] = Provenance(run);
  std::ofstream out(run.out_dir / name);
  if (!out) throw Error("cannot write " + (run.out_dir / name).string());
  out << body.dump(2) << '\n';
  run.files.push_back(name);
}

template <typename Writer>
void WriteCsv(Run& run, const std::string& name, Writer&& writer) {
  std::ofstream out(run.out_dir / name);
  if (!out) throw Error("cannot write " + (run.out_dir / name).string());
  out << kProvenancePrefix << run.hash << " seed=" << run.seed << '\n';
  writer(out);
  run.files.push_back(name);
}

// One manifest per configuration, so several runs can share a directory.
std::string ManifestName(const std::string& hash) { return "run_" + hash + ".json"; }

void WriteManifest(const Run& run) {
  json body = {{"provenance", Provenance(run)}, {"files", run.files}};
  std::ofstream out(run.out_dir / ManifestName(run.hash));
  out << body.dump(2) << '\n';
}

std::string Fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

ScoreConfig ScoreFromConfig(const json& c) {
  return c.contains("score") ? ScoreConfigFromJson(c["score"]) : ScoreConfig{};
}

CalibrationOptions OptionsFromConfig(const json& c, uint64_t seed) {
  CalibrationOptions opts;
  opts.seed = seed;
  opts.force_nonempty = c.value("force_nonempty", true);
  opts.randomize_ties = c.value("randomize_ties", false);
  return opts;
}

SplitSpec SplitFromJson(const json& task, uint64_t seed) {
  SplitSpec spec;
  spec.stratify_by = Stratify::kGroup;
  spec.seed = seed;
  if (task.contains("split")) {
    const auto& s = task["split"];
    if (s.contains("fractions")) {
      const auto f = s["fractions"].get<std::vector<double>>();
      if (f.size() != 3) throw ParameterError("split.fractions needs 3 entries");
      spec.fractions = {f[0], f[1], f[2]};
    }
    if (s.contains("stratify_by")) {
      spec.stratify_by = StratifyFromString(s["stratify_by"].get<std::string>());
    }
    if (s.contains("seed")) spec.seed = s["seed"].get<uint64_t>();
  }
  return spec;
}

SyntheticTaskSpec SyntheticFromConfig(const json& c, uint64_t seed) {
  SyntheticTaskSpec base;
  base.seed = seed;
  const json task = c.value("task", json::object());
  return SyntheticTaskSpecFromJson(task.value("synthetic", json::object()), base);
}

struct TaskData {
  std::optional<LabeledDataset> cal;
  std::optional<LabeledDataset> calval;
  std::optional<LabeledDataset> test;
};

LabeledDataset LoadWithNames(const std::string& path, const json& task) {
  LabeledDataset ds = LoadDataset(path);
  if (task.contains("names")) ds = AttachNames(ds, task["names"].get<std::string>());
  return ds;
}

// Datasets named by the config's task section, with explicit input paths
// taking precedence.
TaskData ResolveTask(const json& c, uint64_t seed) {
  TaskData data;
  const json task = c.value("task", json::object());
  const json inputs = c.value("inputs", json::object());
  if (task.contains("synthetic") || task.contains("data")) {
    const LabeledDataset full = task.contains("synthetic")
                                    ? GenerateTask(SyntheticFromConfig(c, seed))
                                    : LoadWithNames(task["data"].get<std::string>(), task);
    auto parts = Split(full, SplitFromJson(task, seed));
    data.calval = std::move(parts.calval);
    data.cal = std::move(parts.cal);
    data.test = std::move(parts.test);
  }
  for (const char* key : {"cal", "calval", "test"}) {
    std::optional<std::string> path;
    if (task.contains(key)) path = task[key].get<std::string>();
    if (inputs.contains(key)) path = inputs[key].get<std::string>();
    if (!path) continue;
    auto ds = LoadWithNames(*path, task);
    if (std::string(key) == "cal") data.cal = std::move(ds);
    if (std::string(key) == "calval") data.calval = std::move(ds);
    if (std::string(key) == "test") data.test = std::move(ds);
  }
  return data;
}

const LabeledDataset& Require(const std::optional<LabeledDataset>& ds,
                              const char* what) {
  if (!ds) throw ParameterError(std::string("no ") + what + " dataset given");
  return *ds;
}

MechanismConfig MechanismFromConfig(const json& c, uint64_t seed) {
  MechanismConfig mc;
  mc.task = SyntheticFromConfig(c, seed);
  HumanModel hm;
  hm.seed = seed;
  mc.human = HumanModelFromJson(c.value("human_model", json::object()), hm);
  mc.alpha = c["alpha"].get<double>();
  mc.score = ScoreFromConfig(c);
  mc.split = SplitFromJson(c.value("task", json::object()), 0);
  if (c.contains("simulation")) {
    const auto& s = c["simulation"];
    mc.shape.participants = s.value("participants", mc.shape.participants);
    mc.shape.trials_per_participant =
        s.value("trials_per_participant", mc.shape.trials_per_participant);
  }
  mc.min_group_n = c.value("min_group_n", mc.min_group_n);
  mc.force_nonempty = c.value("force_nonempty", mc.force_nonempty);
  return mc;
}

// ---------------------------------------------------------------- commands

int CmdCalibrate(Run& run, std::ostream& out, std::optional<double> k_flag,
                 std::optional<int> min_group_flag) {
  const auto& c = run.config;
  const TaskData data = ResolveTask(c, run.seed);
  const LabeledDataset& cal = Require(data.cal, "calibration");
  const Method method = MethodFromString(c["method"].get<std::string>());
  const auto opts = OptionsFromConfig(c, run.seed);
  const double alpha = c["alpha"].get<double>();

  SetPredictor pred;
  json extra = json::object();
  if (method == Method::kAvgK) {
    const json avgk = c.value("avgk", json::object());
    std::optional<double> k = k_flag;
    if (!k && avgk.contains("k")) k = avgk["k"].get<double>();
    if (!k) {
      const double target = avgk.value("target_coverage", 1.0 - alpha);
      AvgKTuneOptions topts;
      topts.force_nonempty = opts.force_nonempty;
      const auto tuned = TuneAvgK(cal, Require(data.calval, "calval"), target, topts);
      extra["avgk_tuning"] = ToJson(tuned);
      k = tuned.k;
    }
    pred = CalibrateAvgK(cal, *k, opts);
    out << "n_cal=" << pred.n_cal << " k=" << Fmt(*pred.k)
        << " q_k=" << Fmt(*pred.q_k) << '\n';
  } else if (method == Method::kMarginal) {
    pred = CalibrateMarginal(cal, ScoreFromConfig(c), alpha, opts);
    out << "n_cal=" << pred.n_cal << " q_hat=" << Fmt(*pred.q_hat) << '\n';
  } else {
    const int min_n = min_group_flag.value_or(c.value("min_group_n", kDefaultMinGroupN));
    pred = CalibrateMondrian(cal, ScoreFromConfig(c), alpha, min_n, opts);
    out << "n_cal=" << pred.n_cal;
    for (std::size_t g = 0; g < pred.q_hat_by_group.size(); ++g) {
      out << " q_hat[" << g << "]=" << Fmt(pred.q_hat_by_group[g]);
    }
    out << '\n';
  }
  json body = {{"predictor", ToJson(pred)}};
  if (!extra.empty()) body["details"] = extra;
  if (data.calval) {
    const auto sets = PredictBatch(*data.calval, pred, run.jobs);
    body["calval"] = {{"coverage", CoverageRate(sets)}, {"avg_size", AverageSize(sets)}};
    out << "calval_coverage=" << Fmt(CoverageRate(sets))
        << " calval_avg_size=" << Fmt(AverageSize(sets)) << '\n';
  }
  WriteJson(run, "predictor.json", body);
  return kExitOk;
}

SetPredictor LoadPredictor(const std::string& path) {
  const json j = ReadJsonFile(path);
  return SetPredictorFromJson(j.contains("predictor") ? j["predictor"] : j);
}

int CmdPredict(Run& run, std::ostream& out) {
  const auto& c = run.config;
  const std::string predictor_path = c["inputs"].value("predictor", "");
  if (predictor_path.empty()) throw ParameterError("predict needs --predictor");
  const SetPredictor pred = LoadPredictor(predictor_path);
  const TaskData data = ResolveTask(c, run.seed);
  const LabeledDataset& test = Require(data.test, "test");
  if (!test.empty() && test.num_classes() != pred.num_classes) {
    throw ValidationError("dataset has " + std::to_string(test.num_classes()) +
                          " classes, predictor expects " +
                          std::to_string(pred.num_classes));
  }
  const auto sets = PredictBatch(test, pred, run.jobs);
  WriteCsv(run, "sets.csv", [&](std::ostream& os) { WriteSetsCsv(os, sets); });
  out << "n=" << sets.size() << " coverage=" << Fmt(CoverageRate(sets))
      << " avg_size=" << Fmt(AverageSize(sets)) << '\n';
  return kExitOk;
}

TuneSpec TuneSpecFromConfig(const json& c, uint64_t seed) {
  TuneSpec spec;
  spec.seed = seed;
  spec.target_coverage = 1.0 - c["alpha"].get<double>();
  spec.min_group_n = c.value("min_group_n", spec.min_group_n);
  spec.force_nonempty = c.value("force_nonempty", spec.force_nonempty);
  const json t = c.value("tune", json::object());
  spec.target_coverage = t.value("target_coverage", spec.target_coverage);
  spec.budget = t.value("budget", spec.budget);
  spec.coverage_slack = t.value("coverage_slack", spec.coverage_slack);
  const auto range = [&](const char* key, Range r) {
    if (!t.contains(key)) return r;
    const auto v = t[key].get<std::vector<double>>();
    if (v.size() != 2) throw ParameterError(std::string("tune.") + key + " needs [lo, hi]");
    return Range{v[0], v[1]};
  };
  spec.temperature = range("temperature", spec.temperature);
  spec.lambda = range("lambda", spec.lambda);
  if (t.contains("k_reg")) {
    const auto v = t["k_reg"].get<std::vector<int>>();
    if (v.size() != 2) throw ParameterError("tune.k_reg needs [lo, hi]");
    spec.k_reg = {v[0], v[1]};
  }
  const ScoreConfig base = ScoreFromConfig(c);
  spec.randomized = base.randomized;
  spec.u_mode = base.u_mode;
  spec.Validate();
  return spec;
}

int CmdTune(Run& run, std::ostream& out) {
  const auto& c = run.config;
  const TaskData data = ResolveTask(c, run.seed);
  const LabeledDataset& cal = Require(data.cal, "calibration");
  const LabeledDataset& calval = Require(data.calval, "calval");
  const Method method = MethodFromString(c["method"].get<std::string>());
  json body;
  if (method == Method::kAvgK) {
    const double target = c.value("tune", json::object())
                              .value("target_coverage", 1.0 - c["alpha"].get<double>());
    const auto r = TuneAvgK(cal, calval, target);
    body = {{"method", "avgk"}, {"target_coverage", target}, {"result", ToJson(r)}};
    out << "k=" << Fmt(r.k) << " q_k=" << Fmt(r.q_k)
        << " calval_coverage=" << Fmt(r.coverage) << '\n';
  } else {
    const TuneSpec spec = TuneSpecFromConfig(c, run.seed);
    const ScoreKind kind = ScoreFromConfig(c).kind;
    const auto report =
        TuneScore(cal, calval, kind, method, c["alpha"].get<double>(), spec, run.jobs);
    body = ToJson(report);
    body["method"] = ToString(method);
    body["target_coverage"] = spec.target_coverage;
    const auto& best = report.best();
    out << "evaluated=" << report.candidates.size() << " winner=" << report.winner
        << " T=" << Fmt(best.cfg.temperature) << " lambda=" << Fmt(best.cfg.lambda)
        << " k_reg=" << best.cfg.k_reg << " avg_size=" << Fmt(best.avg_size)
        << " coverage=" << Fmt(best.coverage) << '\n';
  }
  WriteJson(run, "tuning.json", body);
  return kExitOk;
}

std::vector<PredictionSet> ReadSetsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return ReadSetsCsv(in);
}

std::vector<TrialResponse> ReadResponsesFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return ReadResponsesCsv(in);
}

void WriteKeyFactorCsv(std::ostream& os, const KeyFactorTable& t) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string();
  };
  os << "treatment,delta_t,cov_diff,adoption_diff,size_diff,singleton_diff\n";
  for (const auto& r : t.rows) {
    os << r.treatment << ',' << FormatDouble(r.delta_t) << ','
       << FormatDouble(r.cov_diff) << ',' << opt(r.adoption_diff) << ','
       << FormatDouble(r.size_diff) << ',' << FormatDouble(r.singleton_diff) << '\n';
  }
}

int CmdAudit(Run& run, std::ostream& out, std::optional<int> groups_flag) {
  const auto& c = run.config;
  const json inputs = c.value("inputs", json::object());
  const auto set_specs = inputs.value("sets", std::vector<std::string>{});
  if (set_specs.empty()) throw ParameterError("audit needs --sets");
  std::vector<std::pair<std::string, std::vector<PredictionSet>>> tagged;
  int max_group = -1;
  for (const auto& spec : set_specs) {
    const auto eq = spec.find('=');
    const std::string tag = eq == std::string::npos ? "sets" : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    auto sets = ReadSetsFile(path);
    for (const auto& s : sets) max_group = std::max(max_group, s.group);
    tagged.emplace_back(tag, std::move(sets));
  }
  const int n_g = groups_flag.value_or(c.value("n_g", max_group + 1));

  std::optional<std::vector<TrialResponse>> responses;
  if (inputs.contains("responses")) {
    responses = ReadResponsesFile(inputs["responses"].get<std::string>());
  }
  json reports = json::object();
  std::vector<std::pair<std::string, FairnessReport>> for_table;
  for (const auto& [tag, sets] : tagged) {
    FairnessReport rep;
    if (responses) {
      const Treatment t = TreatmentFromString(tag);
      std::vector<TrialResponse> treated, control;
      for (const auto& r : *responses) {
        if (r.treatment == t) treated.push_back(r);
        if (r.treatment == Treatment::kControl) control.push_back(r);
      }
      rep = AuditTreatment(sets, treated, control, n_g);
      for_table.emplace_back(ToString(t), rep);
    } else {
      rep = AuditSets(sets, n_g);
    }
    out << "[" << tag << "]\n" << FormatReport(rep);
    reports[tag] = ToJson(rep);
  }
  json body = {{"reports", reports}, {"n_g", n_g}};
  if (responses && n_g >= 2) {
    const auto table = BuildKeyFactorTable(for_table);
    body["key_factors"] = ToJson(table);
    WriteCsv(run, "key_factors.csv", [&](std::ostream& os) { WriteKeyFactorCsv(os, table); });
  }
  WriteJson(run, "audit.json", body);
  return kExitOk;
}

int CmdSimulate(Run& run, std::ostream& out) {
  const MechanismConfig mc = MechanismFromConfig(run.config, run.seed);
  const MechanismReport report = RunMechanismBenchmark(mc, run.jobs);
  WriteCsv(run, "test.csv", [&](std::ostream& os) {
    WriteDataset(os, report.test, DataFormat::kCsv);
  });
  for (const auto& m : report.methods) {
    WriteCsv(run, "sets_" + ToString(m.treatment) + ".csv",
             [&](std::ostream& os) { WriteSetsCsv(os, m.sets); });
  }
  WriteCsv(run, "responses.csv",
           [&](std::ostream& os) { WriteResponsesCsv(os, report.responses); });
  WriteCsv(run, "key_factors.csv",
           [&](std::ostream& os) { WriteKeyFactorCsv(os, report.key_factors); });
  json body = ToJson(report);
  body["task"] = ToJson(mc.task);
  body["human_model"] = ToJson(mc.human);
  WriteJson(run, "simulate.json", body);
  for (const auto& m : report.methods) {
    out << ToString(m.treatment) << ": delta_cov=" << Fmt(m.report.delta_cov)
        << " delta_size=" << Fmt(m.report.delta_size)
        << " delta_t=" << Fmt(m.report.delta_accuracy_improvement.value_or(0.0)) << '\n';
  }
  const auto& f = report.flags;
  out << "flags: mondrian_equalizes_coverage=" << f.mondrian_equalizes_coverage
      << " marginal_coverage_gap=" << f.marginal_coverage_gap
      << " mondrian_size_gap=" << f.mondrian_size_gap
      << " mondrian_more_disparate=" << f.mondrian_more_disparate << '\n';
  return kExitOk;
}

int CmdBench(Run& run, std::ostream& out, int seeds, int sweep) {
  const MechanismConfig base = MechanismFromConfig(run.config, run.seed);
  std::vector<json> rows(seeds);
  std::vector<MechanismFlags> flags(seeds);
  ParallelFor(static_cast<std::size_t>(seeds), run.jobs, [&](std::size_t i) {
    MechanismConfig mc = base;
    mc.task.seed = base.task.seed + i;
    mc.human.seed = base.human.seed + i;
    const auto rep = RunMechanismBenchmark(mc, 1);
    json per = json::object();
    for (const auto& m : rep.methods) {
      per[ToString(m.treatment)] = {
          {"delta_cov", m.report.delta_cov},
          {"delta_size", m.report.delta_size},
          {"delta_singleton", m.report.delta_singleton},
          {"delta_t", m.report.delta_accuracy_improvement.value_or(0.0)}};
    }
    flags[i] = rep.flags;
    rows[i] = {{"task_seed", mc.task.seed},
               {"methods", per},
               {"flags",
                {{"mondrian_equalizes_coverage", rep.flags.mondrian_equalizes_coverage},
                 {"marginal_coverage_gap", rep.flags.marginal_coverage_gap},
                 {"mondrian_size_gap", rep.flags.mondrian_size_gap},
                 {"mondrian_more_disparate", rep.flags.mondrian_more_disparate}}}};
  });
  int eq = 0, gap = 0, size = 0, disp = 0;
  for (const auto& f : flags) {
    eq += f.mondrian_equalizes_coverage;
    gap += f.marginal_coverage_gap;
    size += f.mondrian_size_gap;
    disp += f.mondrian_more_disparate;
  }
  json body = {{"seeds", rows},
               {"summary",
                {{"n_seeds", seeds},
                 {"mondrian_equalizes_coverage", eq},
                 {"marginal_coverage_gap", gap},
                 {"mondrian_size_gap", size},
                 {"mondrian_more_disparate", disp}}}};
  out << "seeds=" << seeds << " mondrian_equalizes_coverage=" << eq
      << " marginal_coverage_gap=" << gap << " mondrian_size_gap=" << size
      << " mondrian_more_disparate=" << disp << '\n';
  if (sweep > 0) {
    const auto res = RunKeyFactorSweep(base, sweep, run.seed, run.jobs);
    body["sweep"] = ToJson(res.table);
    const auto opt = [](const std::optional<double>& v) {
      return v ? Fmt(*v) : std::string("absent");
    };
    out << "sweep configs=" << sweep << " spearman(size_diff)=" << opt(res.table.spearman_size)
        << " spearman(cov_diff)=" << opt(res.table.spearman_cov)
        << " spearman(singleton_diff)=" << opt(res.table.spearman_singleton) << '\n';
    WriteCsv(run, "key_factors.csv",
             [&](std::ostream& os) { WriteKeyFactorCsv(os, res.table); });
  }
  WriteJson(run, "bench.json", body);
  return kExitOk;
}

int CmdStats(Run& run, std::ostream& out, double at_diff) {
  const auto& c = run.config;
  const json inputs = c.value("inputs", json::object());
  if (!inputs.contains("responses")) throw ParameterError("stats needs --responses");
  const auto responses = ReadResponsesFile(inputs["responses"].get<std::string>());
  DesignSpec spec;
  const json s = c.value("stats", json::object());
  spec.reference_group = s.value("reference_group", 0);
  spec.include_diff = s.value("include_diff", true);
  const Design design = BuildDesign(responses, spec);
  const FitResult fit = FitLogistic(design);
  const auto ors = OddsRatios(fit, spec, design.treatments, design.groups, at_diff);
  const auto rors = MaxRors(ors);
  json body = StatsToJson(fit, ors, rors);
  WriteJson(run, "stats.json", body);
  for (const auto& m : rors) {
    if (m.treatment == spec.reference_treatment) continue;
    out << ToString(m.treatment) << ":";
    for (const auto& r : ors) {
      if (r.treatment != m.treatment) continue;
      out << " OR[" << r.group << "]=" << Fmt(r.odds_ratio)
          << (r.significant_5 ? "*" : (r.significant_10 ? "+" : ""));
    }
    out << " maxROR=" << Fmt(m.max_ror) << '\n';
  }
  return kExitOk;
}

int Verify(const std::string& file, std::ostream& out, std::ostream& err) {
  const fs::path path(file);
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + file, 0);
  std::string first;
  std::getline(in, first);
  std::string claimed;
  json config;
  if (first.rfind(kProvenancePrefix, 0) == 0) {
    claimed = first.substr(std::string(kProvenancePrefix).size());
    claimed = claimed.substr(0, claimed.find(' '));
    const fs::path manifest = path.parent_path() / ManifestName(claimed);
    const json m = ReadJsonFile(manifest);
    config = m.at("provenance").at("config");
    if (m["provenance"]["config_hash"].get<std::string>() != claimed) {
      err << "MISMATCH " << file << ": manifest hash differs\n";
      return kExitUser;
    }
  } else {
    const json j = ReadJsonFile(path);
    if (!j.contains("provenance")) throw ParseError(file + " has no provenance", 0);
    claimed = j["provenance"]["config_hash"].get<std::string>();
    config = j["provenance"]["config"];
  }
  const std::string derived = ConfigHash(config);
  if (derived != claimed) {
    err << "MISMATCH " << file << ": embedded " << claimed << " derived " << derived << '\n';
    return kExitUser;
  }
  out << "OK " << file << " config_hash=" << derived << '\n';
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"setfair: conformal set prediction and fairness audits"};
  app.require_subcommand(0, 1);
  std::string verify_file;
  app.add_option("--verify", verify_file,
                 "Re-derive the config hash embedded in an output file");

  CommonFlags flags;
  std::string data, calval, predictor, responses;
  std::vector<std::string> sets;
  std::optional<double> k;
  std::optional<int> min_group_n, groups;
  int seeds = 20, sweep = 0;
  double at_diff = 0.0;

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate a set predictor");
  AddCommon(calibrate, flags);
  calibrate->add_option("--data", data, "Calibration dataset (csv/jsonl)");
  calibrate->add_option("--calval", calval, "Validation dataset for reporting / avg-k tuning");
  calibrate->add_option("--k", k, "Average set size for avgk");
  calibrate->add_option("--min-group-n", min_group_n, "Mondrian minimum group size");

  auto* predict = app.add_subcommand("predict", "Write prediction sets for a dataset");
  AddCommon(predict, flags);
  predict->add_option("--predictor", predictor, "Predictor artifact")->required();
  predict->add_option("--data", data, "Dataset to predict (csv/jsonl)");

  auto* tune = app.add_subcommand("tune", "Tune score hyperparameters or avg-k's k");
  AddCommon(tune, flags);
  tune->add_option("--data", data, "Calibration dataset");
  tune->add_option("--calval", calval, "Calibration-validation dataset");

  auto* audit = app.add_subcommand("audit", "Per-group fairness audit of prediction sets");
  AddCommon(audit, flags);
  audit->add_option("--sets", sets, "Sets CSV, optionally tagged treatment=path")->required();
  audit->add_option("--responses", responses, "Trial responses CSV");
  audit->add_option("--groups", groups, "Number of groups");

  auto* simulate = app.add_subcommand("simulate", "Synthetic task + simulated participants");
  AddCommon(simulate, flags);

  auto* bench = app.add_subcommand("bench-mechanism", "Mechanism benchmark over seeds");
  AddCommon(bench, flags);
  bench->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  bench->add_option("--sweep", sweep, "Configurations in the key-factor sweep");

  auto* stats = app.add_subcommand("stats", "Clustered logistic model, odds ratios, maxROR");
  AddCommon(stats, flags);
  stats->add_option("--responses", responses, "Trial responses CSV")->required();
  stats->add_option("--at-diff", at_diff, "diff value for reported probabilities");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (!verify_file.empty()) return Verify(verify_file, out, err);
    if (app.get_subcommands().empty()) {
      out << app.help();
      return kExitUser;
    }
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    json inputs = json::object();
    const auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) inputs[key] = v;
    };
    if (name == "calibrate" || name == "tune") {
      put("cal", data);
      put("calval", calval);
    } else if (name == "predict") {
      put("test", data);
      put("predictor", predictor);
    } else if (name == "audit") {
      inputs["sets"] = sets;
      put("responses", responses);
    } else if (name == "stats") {
      put("responses", responses);
    }
    Run run = MakeRun(name, flags, inputs);
    if (name == "bench-mechanism") {
      run.config["bench"] = {{"seeds", seeds}, {"sweep", sweep}};
      run.hash = ConfigHash(run.config);
    }
    if (name == "stats") {
      run.config["stats_at_diff"] = at_diff;
      run.hash = ConfigHash(run.config);
    }
    int code = kExitOk;
    if (name == "calibrate") code = CmdCalibrate(run, out, k, min_group_n);
    if (name == "predict") code = CmdPredict(run, out);
    if (name == "tune") code = CmdTune(run, out);
    if (name == "audit") code = CmdAudit(run, out, groups);
    if (name == "simulate") code = CmdSimulate(run, out);
    if (name == "bench-mechanism") code = CmdBench(run, out, seeds, sweep);
    if (name == "stats") code = CmdStats(run, out, at_diff);
    WriteManifest(run);
    out << "config_hash=" << run.hash << " out=" << run.out_dir.string() << '\n';
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace setfair
