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


// Python bindings. Predictors, reports and specs cross the boundary as JSON
// text so the Python side sees the same shapes the CLI writes.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "setfair/audit.h"
#include "setfair/calibration.h"
#include "setfair/dataset.h"
#include "setfair/error.h"
#include "setfair/human_sim.h"
#include "setfair/inference.h"
#include "setfair/json_io.h"
#include "setfair/scores.h"
#include "setfair/setpred.h"
#include "setfair/tuning.h"

namespace py = pybind11;
using namespace setfair;

namespace {

using Probs = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Ints = py::array_t<int, py::array::c_style | py::array::forcecast>;

LabeledDataset ToDataset(const Probs& probs, const Ints& labels, const Ints& groups,
                         int num_groups) {
  if (probs.ndim() != 2) throw ValidationError("probs must be a 2-d array");
  const auto n = probs.shape(0);
  const auto m = probs.shape(1);
  if (labels.size() != n) throw ValidationError("labels length does not match probs");
  if (groups.size() != 0 && groups.size() != n) {
    throw ValidationError("groups length does not match probs");
  }
  auto p = probs.unchecked<2>();
  auto y = labels.unchecked<1>();
  std::vector<ProbRecord> records(n);
  int max_group = 0;
  for (py::ssize_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.example_id = "r" + std::to_string(i);
    r.probs.resize(m);
    for (py::ssize_t c = 0; c < m; ++c) r.probs[c] = p(i, c);
    r.label = y(i);
    r.group = groups.size() == 0 ? 0 : groups.data()[i];
    max_group = std::max(max_group, r.group);
  }
  if (num_groups <= 0) num_groups = max_group + 1;
  return LabeledDataset(std::move(records), static_cast<int>(m), num_groups);
}

json Parse(const std::string& text) { return text.empty() ? json::object() : json::parse(text); }

std::string CalibrateJson(const Probs& probs, const Ints& labels, const Ints& groups,
                          const std::string& method, double alpha, const std::string& score,
                          double k, int min_group_n, bool force_nonempty, uint64_t seed,
                          int num_groups) {
  const auto ds = ToDataset(probs, labels, groups, num_groups);
  const auto cfg = ScoreConfigFromJson(Parse(score));
  CalibrationOptions opts;
  opts.seed = seed;
  opts.force_nonempty = force_nonempty;
  switch (MethodFromString(method)) {
    case Method::kMarginal:
      return ToJson(CalibrateMarginal(ds, cfg, alpha, opts)).dump();
    case Method::kMondrian:
      return ToJson(CalibrateMondrian(ds, cfg, alpha, min_group_n, opts)).dump();
    case Method::kAvgK:
      return ToJson(CalibrateAvgK(ds, k, opts)).dump();
  }
  throw ParameterError("unknown method " + method);
}

std::vector<PredictionSet> PredictSets(const Probs& probs, const Ints& labels, const Ints& groups,
                                       const std::string& predictor, int jobs) {
  const auto pred = SetPredictorFromJson(Parse(predictor));
  return PredictBatch(ToDataset(probs, labels, groups, pred.num_groups), pred, jobs);
}

py::tuple GenerateTaskArrays(const std::string& spec) {
  const auto ds = GenerateTask(SyntheticTaskSpecFromJson(Parse(spec)));
  const auto n = static_cast<py::ssize_t>(ds.size());
  const auto m = static_cast<py::ssize_t>(ds.num_classes());
  Probs probs({n, m});
  Ints labels(n);
  Ints groups(n);
  auto p = probs.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    for (py::ssize_t c = 0; c < m; ++c) p(i, c) = ds[i].probs[c];
    labels.mutable_data()[i] = ds[i].label;
    groups.mutable_data()[i] = ds[i].group;
  }
  return py::make_tuple(probs, labels, groups);
}

}  // namespace

PYBIND11_MODULE(_setfair, m) {
  m.doc() = "Conformal set prediction, fairness audits and human-aid simulation.";

  py::register_exception<Error>(m, "SetfairError", PyExc_ValueError);

  m.def("conformal_quantile",
        [](const std::vector<double>& scores, double alpha) {
          return ConformalQuantile(scores, alpha);
        },
        py::arg("scores"), py::arg("alpha"));

  m.def("score",
        [](const std::vector<double>& probs, int label, const std::string& cfg, double u) {
          return Score(probs, label, ScoreConfigFromJson(Parse(cfg)), u);
        },
        py::arg("probs"), py::arg("label"), py::arg("score") = "", py::arg("u") = 1.0);

  m.def("generate_task", &GenerateTaskArrays, py::arg("spec") = "");

  m.def("calibrate", &CalibrateJson, py::arg("probs"), py::arg("labels"), py::arg("groups"),
        py::arg("method") = "marginal", py::arg("alpha") = 0.1, py::arg("score") = "",
        py::arg("k") = 1.0, py::arg("min_group_n") = kDefaultMinGroupN,
        py::arg("force_nonempty") = true, py::arg("seed") = 0, py::arg("num_groups") = 0);

  m.def("predict",
        [](const Probs& probs, const Ints& labels, const Ints& groups, const std::string& predictor,
           int jobs) {
          std::vector<std::vector<int>> members;
          for (auto& s : PredictSets(probs, labels, groups, predictor, jobs)) {
            members.push_back(std::move(s.members));
          }
          return members;
        },
        py::arg("probs"), py::arg("labels"), py::arg("groups"), py::arg("predictor"),
        py::arg("jobs") = 1);

  m.def("audit",
        [](const Probs& probs, const Ints& labels, const Ints& groups, const std::string& predictor,
           int jobs) {
          const auto pred = SetPredictorFromJson(Parse(predictor));
          const auto sets = PredictSets(probs, labels, groups, predictor, jobs);
          return ToJson(AuditSets(sets, pred.num_groups)).dump();
        },
        py::arg("probs"), py::arg("labels"), py::arg("groups"), py::arg("predictor"),
        py::arg("jobs") = 1);

  m.def("tune_avgk",
        [](const Probs& cal_probs, const Ints& cal_labels, const Probs& val_probs,
           const Ints& val_labels, double target, bool force_nonempty) {
          AvgKTuneOptions opts;
          opts.force_nonempty = force_nonempty;
          const Ints none(0);
          return ToJson(TuneAvgK(ToDataset(cal_probs, cal_labels, none, 1),
                                 ToDataset(val_probs, val_labels, none, 1), target, opts))
              .dump();
        },
        py::arg("cal_probs"), py::arg("cal_labels"), py::arg("calval_probs"),
        py::arg("calval_labels"), py::arg("target_coverage") = 0.9,
        py::arg("force_nonempty") = false);

  m.def("fit_logistic",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& clusters) {
          const auto fit = FitLogistic(x, y, clusters);
          return py::make_tuple(fit.beta, fit.covariance, fit.converged);
        },
        py::arg("x"), py::arg("y"), py::arg("clusters"));

  m.def("run_mechanism",
        [](const std::string& task, const std::string& human, double alpha, int participants,
           int trials, uint64_t seed, int jobs) {
          MechanismConfig cfg;
          cfg.task.seed = seed;
          cfg.human.seed = seed;
          cfg.task = SyntheticTaskSpecFromJson(Parse(task), cfg.task);
          cfg.human = HumanModelFromJson(Parse(human), cfg.human);
          cfg.alpha = alpha;
          cfg.shape = {participants, trials};
          return ToJson(RunMechanismBenchmark(cfg, jobs)).dump();
        },
        py::arg("task") = "", py::arg("human") = "", py::arg("alpha") = 0.1,
        py::arg("participants") = 800, py::arg("trials_per_participant") = 100,
        py::arg("seed") = 0, py::arg("jobs") = 1);
}
