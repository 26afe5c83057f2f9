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

#include "setfair/inference.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "setfair/error.h"

namespace setfair {
namespace {

double Sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

constexpr double kZ975 = 1.959963984540054;

}  // namespace

std::string TreatTerm(Treatment t) { return "treat[" + ToString(t) + "]"; }
std::string GroupTerm(GroupIndex g) { return "group[" + std::to_string(g) + "]"; }
std::string InteractionTerm(Treatment t, GroupIndex g) {
  return TreatTerm(t) + ":" + GroupTerm(g);
}

Design BuildDesign(std::span<const TrialResponse> responses,
                   const DesignSpec& spec) {
  std::set<Treatment> treat_levels;
  std::set<GroupIndex> group_levels;
  for (const auto& r : responses) {
    treat_levels.insert(r.treatment);
    group_levels.insert(r.group);
  }
  if (treat_levels.size() < 2 || group_levels.size() < 2) {
    throw ValidationError("design needs at least two treatments and two groups");
  }
  if (!treat_levels.contains(spec.reference_treatment)) {
    throw ValidationError("reference treatment " +
                          ToString(spec.reference_treatment) + " not in data");
  }
  if (!group_levels.contains(spec.reference_group)) {
    throw ValidationError("reference group " +
                          std::to_string(spec.reference_group) + " not in data");
  }

  Design d;
  d.treatments.push_back(spec.reference_treatment);
  for (Treatment t : treat_levels) {
    if (t != spec.reference_treatment) d.treatments.push_back(t);
  }
  d.groups.push_back(spec.reference_group);
  for (GroupIndex g : group_levels) {
    if (g != spec.reference_group) d.groups.push_back(g);
  }

  std::map<Treatment, int> treat_col;
  std::map<GroupIndex, int> group_col;
  std::map<std::pair<Treatment, GroupIndex>, int> inter_col;
  d.terms.push_back(kInterceptTerm);
  for (std::size_t i = 1; i < d.treatments.size(); ++i) {
    treat_col[d.treatments[i]] = static_cast<int>(d.terms.size());
    d.terms.push_back(TreatTerm(d.treatments[i]));
  }
  for (std::size_t i = 1; i < d.groups.size(); ++i) {
    group_col[d.groups[i]] = static_cast<int>(d.terms.size());
    d.terms.push_back(GroupTerm(d.groups[i]));
  }
  for (std::size_t i = 1; i < d.treatments.size(); ++i) {
    for (std::size_t j = 1; j < d.groups.size(); ++j) {
      inter_col[{d.treatments[i], d.groups[j]}] = static_cast<int>(d.terms.size());
      d.terms.push_back(InteractionTerm(d.treatments[i], d.groups[j]));
    }
  }
  int diff_col = -1;
  if (spec.include_diff) {
    diff_col = static_cast<int>(d.terms.size());
    d.terms.push_back(kDiffTerm);
  }

  const auto n = static_cast<Eigen::Index>(responses.size());
  const auto p = static_cast<Eigen::Index>(d.terms.size());
  d.x = Eigen::MatrixXd::Zero(n, p);
  d.y.resize(n);
  d.clusters.reserve(responses.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = responses[i];
    d.x(i, 0) = 1.0;
    const auto tc = treat_col.find(r.treatment);
    const auto gc = group_col.find(r.group);
    if (tc != treat_col.end()) d.x(i, tc->second) = 1.0;
    if (gc != group_col.end()) d.x(i, gc->second) = 1.0;
    if (tc != treat_col.end() && gc != group_col.end()) {
      d.x(i, inter_col.at({r.treatment, r.group})) = 1.0;
    }
    if (diff_col >= 0) d.x(i, diff_col) = r.diff;
    d.y(i) = r.correct ? 1.0 : 0.0;
    d.clusters.push_back(r.participant_id);
  }
  for (Eigen::Index j = 1; j < p; ++j) {
    if (d.x.col(j).maxCoeff() == d.x.col(j).minCoeff()) {
      throw ValidationError("design column '" + d.terms[j] + "' is constant");
    }
  }
  return d;
}

int FitResult::TermIndex(const std::string& term) const {
  const auto it = std::find(terms.begin(), terms.end(), term);
  return it == terms.end() ? -1 : static_cast<int>(it - terms.begin());
}

double FitResult::Coefficient(const std::string& term) const {
  const int i = TermIndex(term);
  if (i < 0) throw IndexError("no term '" + term + "' in fit");
  return beta(i);
}

double BernoulliLogLikelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // y*eta - log(1 + e^eta), evaluated stably.
    const double e = eta(i);
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y(i) * e - softplus;
  }
  return ll;
}

FitResult FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      std::span<const int> clusters,
                      std::vector<std::string> terms, const FitOptions& opts) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n || static_cast<Eigen::Index>(clusters.size()) != n) {
    throw FitError("design, response and cluster lengths differ");
  }
  if (terms.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) terms.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(terms.size()) != p) {
    throw FitError("term names do not match design columns");
  }
  std::map<int, int> cluster_index;
  for (int c : clusters) cluster_index.emplace(c, 0);
  if (cluster_index.size() < 2) throw FitError("need at least two clusters");
  {
    int k = 0;
    for (auto& [c, idx] : cluster_index) idx = k++;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) {
    throw FitError("design matrix is rank deficient (rank " +
                   std::to_string(qr.rank()) + " of " + std::to_string(p) + ")");
  }

  FitResult fit;
  fit.terms = std::move(terms);
  fit.beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mu(n);
  Eigen::VectorXd w(n);
  Eigen::VectorXd grad(p);
  const auto evaluate = [&] {
    const Eigen::VectorXd eta = x * fit.beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = Sigmoid(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    grad = x.transpose() * (y - mu);
  };

  evaluate();
  for (fit.iterations = 0; fit.iterations < opts.max_iterations; ++fit.iterations) {
    if (grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd step = info.ldlt().solve(grad);
    fit.beta += step;
    if (fit.beta.cwiseAbs().maxCoeff() > opts.separation_bound) {
      throw FitError(
          "coefficients diverge (|beta| > " + std::to_string(opts.separation_bound) +
          "): the data look perfectly separated; pool sparse groups or treatments");
    }
    evaluate();
  }
  if (!fit.converged && grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
    fit.converged = true;
  }
  fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  fit.log_likelihood = BernoulliLogLikelihood(x, y, fit.beta);

  const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
  const Eigen::MatrixXd info_inv =
      info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd cluster_scores = Eigen::MatrixXd::Zero(cluster_index.size(), p);
  for (Eigen::Index i = 0; i < n; ++i) {
    cluster_scores.row(cluster_index.at(clusters[i])) +=
        (y(i) - mu(i)) * x.row(i);
  }
  const Eigen::MatrixXd meat = cluster_scores.transpose() * cluster_scores;
  fit.model_covariance = info_inv;
  fit.covariance = info_inv * meat * info_inv;
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose());
  fit.n_clusters = static_cast<int>(cluster_index.size());
  return fit;
}

FitResult FitLogistic(const Design& design, const FitOptions& opts) {
  return FitLogistic(design.x, design.y, design.clusters, design.terms, opts);
}

std::vector<OddsRatio> OddsRatios(const FitResult& fit, const DesignSpec& spec,
                                  std::span<const Treatment> treatments,
                                  std::span<const GroupIndex> groups,
                                  double at_diff) {
  if (!fit.converged) throw FitError("odds ratios need a converged fit");
  const auto p = fit.beta.size();
  const int diff_idx = fit.TermIndex(kDiffTerm);

  // Linear predictor coefficients for (t, a).
  const auto predictor = [&](Treatment t, GroupIndex a) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
    c(0) = 1.0;
    if (a != spec.reference_group) c(fit.TermIndex(GroupTerm(a))) = 1.0;
    if (t != spec.reference_treatment) {
      c(fit.TermIndex(TreatTerm(t))) = 1.0;
      if (a != spec.reference_group) c(fit.TermIndex(InteractionTerm(t, a))) = 1.0;
    }
    if (diff_idx >= 0) c(diff_idx) = at_diff;
    return c;
  };
  for (Treatment t : treatments) {
    if (t != spec.reference_treatment && fit.TermIndex(TreatTerm(t)) < 0) {
      throw IndexError("fit has no term for treatment " + ToString(t));
    }
  }
  for (GroupIndex a : groups) {
    if (a != spec.reference_group && fit.TermIndex(GroupTerm(a)) < 0) {
      throw IndexError("fit has no term for group " + std::to_string(a));
    }
  }

  std::vector<OddsRatio> out;
  for (Treatment t : treatments) {
    for (GroupIndex a : groups) {
      OddsRatio r;
      r.treatment = t;
      r.group = a;
      const Eigen::VectorXd base = predictor(spec.reference_treatment, a);
      r.p_control = Sigmoid(base.dot(fit.beta));
      r.p_treated = Sigmoid(predictor(t, a).dot(fit.beta));
      if (t != spec.reference_treatment) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
        c(fit.TermIndex(TreatTerm(t))) = 1.0;
        if (a != spec.reference_group) c(fit.TermIndex(InteractionTerm(t, a))) = 1.0;
        const double log_or = c.dot(fit.beta);
        const double var = c.dot(fit.covariance * c);
        r.log_se = std::sqrt(std::max(var, 0.0));
        r.odds_ratio = std::exp(log_or);
        r.ci_low = std::exp(log_or - kZ975 * r.log_se);
        r.ci_high = std::exp(log_or + kZ975 * r.log_se);
        if (r.log_se > 0.0) {
          r.p_value = std::erfc(std::abs(log_or / r.log_se) / std::sqrt(2.0));
        }
        r.significant_5 = r.p_value < 0.05;
        r.significant_10 = r.p_value < 0.10;
      }
      out.push_back(r);
    }
  }
  return out;
}

std::vector<MaxRor> MaxRors(std::span<const OddsRatio> ors) {
  std::vector<MaxRor> out;
  std::vector<Treatment> order;
  std::map<Treatment, std::vector<const OddsRatio*>> by_t;
  for (const auto& r : ors) {
    if (!by_t.contains(r.treatment)) order.push_back(r.treatment);
    by_t[r.treatment].push_back(&r);
  }
  for (Treatment t : order) {
    const auto& v = by_t[t];
    const OddsRatio* hi = v.front();
    const OddsRatio* lo = v.front();
    for (const auto* r : v) {
      if (r->odds_ratio > hi->odds_ratio) hi = r;
      if (r->odds_ratio < lo->odds_ratio) lo = r;
    }
    if (v.size() > 1 && hi == lo) lo = v[v.front() == hi ? 1 : 0];
    out.push_back({t, hi->odds_ratio / lo->odds_ratio, {hi->group, lo->group}});
  }
  return out;
}

}  // namespace setfair
