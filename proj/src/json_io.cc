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

#include "setfair/json_io.h"

#include <cmath>
#include <limits>

#include "setfair/error.h"

namespace setfair {
namespace {

json Optional(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json PairJson(const std::pair<int, int>& p) { return json::array({p.first, p.second}); }

template <typename T>
T Get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what(), 0);
  }
}

}  // namespace

json ThresholdToJson(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double ThresholdFromJson(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError("bad threshold '" + s + "'", 0);
  }
  if (!j.is_number()) throw ParseError("threshold must be a number", 0);
  return j.get<double>();
}

json ToJson(const ScoreConfig& cfg) {
  return {{"kind", ToString(cfg.kind)},
          {"temperature", cfg.temperature},
          {"lambda", cfg.lambda},
          {"k_reg", cfg.k_reg},
          {"randomized", cfg.randomized},
          {"u_mode", ToString(cfg.u_mode)}};
}

ScoreConfig ScoreConfigFromJson(const json& j, ScoreConfig base) {
  if (j.contains("kind")) base.kind = ScoreKindFromString(Get<std::string>(j, "kind"));
  if (j.contains("temperature")) base.temperature = Get<double>(j, "temperature");
  if (j.contains("lambda")) base.lambda = Get<double>(j, "lambda");
  if (j.contains("k_reg")) base.k_reg = Get<int>(j, "k_reg");
  if (j.contains("randomized")) base.randomized = Get<bool>(j, "randomized");
  if (j.contains("u_mode")) base.u_mode = UModeFromString(Get<std::string>(j, "u_mode"));
  base.Validate();
  return base;
}

json ToJson(const SetPredictor& pred) {
  json j;
  j["method"] = ToString(pred.method);
  if (pred.score_cfg) j["score"] = ToJson(*pred.score_cfg);
  if (pred.alpha) j["alpha"] = *pred.alpha;
  if (pred.q_hat) j["q_hat"] = ThresholdToJson(*pred.q_hat);
  if (pred.method == Method::kMondrian) {
    json arr = json::array();
    for (double q : pred.q_hat_by_group) arr.push_back(ThresholdToJson(q));
    j["q_hat_by_group"] = arr;
  }
  if (pred.k) j["k"] = *pred.k;
  if (pred.q_k) j["q_k"] = ThresholdToJson(*pred.q_k);
  j["n_cal"] = pred.n_cal;
  j["seed"] = pred.seed;
  j["num_classes"] = pred.num_classes;
  j["num_groups"] = pred.num_groups;
  j["force_nonempty"] = pred.force_nonempty;
  if (pred.method == Method::kAvgK) j["randomize_ties"] = pred.randomize_ties;
  return j;
}

SetPredictor SetPredictorFromJson(const json& j) {
  SetPredictor pred;
  pred.method = MethodFromString(Get<std::string>(j, "method"));
  if (j.contains("score")) pred.score_cfg = ScoreConfigFromJson(j.at("score"));
  if (j.contains("alpha")) pred.alpha = Get<double>(j, "alpha");
  if (j.contains("q_hat")) pred.q_hat = ThresholdFromJson(j.at("q_hat"));
  if (j.contains("q_hat_by_group")) {
    for (const auto& q : j.at("q_hat_by_group")) {
      pred.q_hat_by_group.push_back(ThresholdFromJson(q));
    }
  }
  if (j.contains("k")) pred.k = Get<double>(j, "k");
  if (j.contains("q_k")) pred.q_k = ThresholdFromJson(j.at("q_k"));
  pred.n_cal = Get<int>(j, "n_cal");
  pred.seed = Get<uint64_t>(j, "seed");
  pred.num_classes = Get<int>(j, "num_classes");
  pred.num_groups = Get<int>(j, "num_groups");
  pred.force_nonempty = j.value("force_nonempty", true);
  pred.randomize_ties = j.value("randomize_ties", false);
  pred.Validate();
  return pred;
}

json ToJson(const FairnessReport& report) {
  json groups = json::array();
  for (const auto& g : report.per_group) {
    groups.push_back({{"group", g.group},
                      {"n", g.n},
                      {"coverage", g.coverage},
                      {"avg_size", g.avg_size},
                      {"singleton_freq", g.singleton_freq},
                      {"accuracy", Optional(g.accuracy)},
                      {"adoption", Optional(g.adoption)}});
  }
  json j = {{"per_group", groups},
            {"delta_cov", report.delta_cov},
            {"delta_size", report.delta_size},
            {"delta_singleton", report.delta_singleton},
            {"cov_pair", PairJson(report.cov_pair)},
            {"size_pair", PairJson(report.size_pair)},
            {"singleton_pair", PairJson(report.singleton_pair)}};
  if (report.improvements) j["improvements"] = *report.improvements;
  if (report.delta_accuracy_improvement) {
    j["delta_accuracy_improvement"] = *report.delta_accuracy_improvement;
    j["improvement_pair"] = PairJson(*report.improvement_pair);
  }
  return j;
}

json ToJson(const KeyFactorTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"treatment", r.treatment},
                    {"delta_t", r.delta_t},
                    {"cov_diff", r.cov_diff},
                    {"adoption_diff", Optional(r.adoption_diff)},
                    {"size_diff", r.size_diff},
                    {"singleton_diff", r.singleton_diff}});
  }
  return {{"rows", rows},
          {"spearman",
           {{"cov_diff", Optional(table.spearman_cov)},
            {"adoption_diff", Optional(table.spearman_adoption)},
            {"size_diff", Optional(table.spearman_size)},
            {"singleton_diff", Optional(table.spearman_singleton)}}}};
}

json ToJson(const TuneReport& report) {
  json cands = json::array();
  for (const auto& c : report.candidates) {
    cands.push_back({{"config", ToJson(c.cfg)},
                     {"avg_size", c.avg_size},
                     {"coverage", c.coverage}});
  }
  return {{"candidates", cands},
          {"winner_index", report.winner},
          {"winner", cands.at(report.winner)},
          {"winner_meets_target", report.winner_meets_target}};
}

json ToJson(const AvgKTuneResult& r) {
  return {{"k", r.k},
          {"q_k", ThresholdToJson(r.q_k)},
          {"coverage", r.coverage},
          {"iterations", r.iterations}};
}

SyntheticTaskSpec SyntheticTaskSpecFromJson(const json& j, SyntheticTaskSpec s) {
  if (j.contains("m")) s.num_classes = Get<int>(j, "m");
  if (j.contains("n_g")) s.num_groups = Get<int>(j, "n_g");
  if (j.contains("group_weights")) s.group_weights = Get<std::vector<double>>(j, "group_weights");
  if (j.contains("group_accuracy")) s.group_accuracy = Get<std::vector<double>>(j, "group_accuracy");
  if (j.contains("concentration")) s.concentration = Get<double>(j, "concentration");
  if (j.contains("concentration_spread")) s.concentration_spread = Get<double>(j, "concentration_spread");
  if (j.contains("runner_up")) s.runner_up = Get<double>(j, "runner_up");
  if (j.contains("n")) s.n = Get<int>(j, "n");
  if (j.contains("seed")) s.seed = Get<uint64_t>(j, "seed");
  if (!j.contains("group_weights") &&
      static_cast<int>(s.group_weights.size()) != s.num_groups && s.num_groups > 0) {
    s.group_weights.assign(s.num_groups, 1.0 / s.num_groups);
  }
  s.Validate();
  return s;
}

json ToJson(const SyntheticTaskSpec& s) {
  return {{"m", s.num_classes},
          {"n_g", s.num_groups},
          {"group_weights", s.group_weights},
          {"group_accuracy", s.group_accuracy},
          {"concentration", s.concentration},
          {"concentration_spread", s.concentration_spread},
          {"runner_up", s.runner_up},
          {"n", s.n},
          {"seed", s.seed}};
}

HumanModel HumanModelFromJson(const json& j, HumanModel hm) {
  if (j.contains("skill")) hm.skill = Get<std::vector<double>>(j, "skill");
  if (j.contains("reliance")) hm.reliance = Get<double>(j, "reliance");
  if (j.contains("seed")) hm.seed = Get<uint64_t>(j, "seed");
  return hm;
}

json ToJson(const HumanModel& hm) {
  return {{"skill", hm.skill}, {"reliance", hm.reliance}, {"seed", hm.seed}};
}

json ToJson(const MechanismReport& report) {
  json methods = json::object();
  for (const auto& m : report.methods) {
    methods[ToString(m.treatment)] = {{"predictor", ToJson(m.predictor)},
                                      {"audit", ToJson(m.report)}};
  }
  return {{"methods", methods},
          {"control_accuracy", report.control_accuracy},
          {"flags",
           {{"mondrian_equalizes_coverage", report.flags.mondrian_equalizes_coverage},
            {"marginal_coverage_gap", report.flags.marginal_coverage_gap},
            {"mondrian_size_gap", report.flags.mondrian_size_gap},
            {"mondrian_more_disparate", report.flags.mondrian_more_disparate}}},
          {"key_factors", ToJson(report.key_factors)},
          {"n_responses", report.responses.size()},
          {"n_test", report.test.size()}};
}

json StatsToJson(const FitResult& fit, std::span<const OddsRatio> ors,
                 std::span<const MaxRor> max_rors) {
  json terms = json::array();
  for (std::size_t i = 0; i < fit.terms.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    terms.push_back({{"term", fit.terms[i]},
                     {"beta", fit.beta(k)},
                     {"robust_se", std::sqrt(std::max(fit.covariance(k, k), 0.0))}});
  }
  json or_rows = json::array();
  for (const auto& r : ors) {
    or_rows.push_back({{"treatment", ToString(r.treatment)},
                       {"group", r.group},
                       {"odds_ratio", r.odds_ratio},
                       {"ci_low", r.ci_low},
                       {"ci_high", r.ci_high},
                       {"p_value", r.p_value},
                       {"significant_5", r.significant_5},
                       {"significant_10", r.significant_10}});
  }
  json ror_rows = json::array();
  for (const auto& m : max_rors) {
    ror_rows.push_back({{"treatment", ToString(m.treatment)},
                        {"max_ror", m.max_ror},
                        {"pair", PairJson(m.pair)}});
  }
  return {{"terms", terms},
          {"n_clusters", fit.n_clusters},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"log_likelihood", fit.log_likelihood},
          {"odds_ratios", or_rows},
          {"max_ror", ror_rows}};
}

}  // namespace setfair
