# Copyright 2026 The setfair Authors.
# SPDX-License-Identifier: Apache-2.0
"""Conformal set prediction, fairness audits and human-aid simulation.

Predictors, reports and specs are plain dicts with the same layout as the
JSON files written by the ``setfair`` command-line tool.
"""

import json

import numpy as np

from . import _setfair
from ._setfair import SetfairError, conformal_quantile

__all__ = [
    "SetfairError",
    "audit",
    "calibrate",
    "conformal_quantile",
    "fit_logistic",
    "generate_task",
    "predict",
    "run_mechanism",
    "score",
    "tune_avgk",
]


def _dump(obj):
    return "" if obj is None else json.dumps(obj)


def _groups(groups):
    return np.zeros(0, dtype=np.int32) if groups is None else groups


def score(probs, label, config=None, u=1.0):
    """Nonconformity score of ``label`` under a score config such as {"kind": "raps"}."""
    return _setfair.score(list(probs), int(label), _dump(config), u)


def generate_task(spec=None):
    """Synthetic task as (probs, labels, groups) arrays."""
    return _setfair.generate_task(_dump(spec))


def calibrate(probs, labels, groups=None, method="marginal", alpha=0.1,
              score=None, k=1.0, min_group_n=30, force_nonempty=True, seed=0,
              num_groups=0):
    """Calibrate a set predictor. ``method`` is marginal, mondrian or avgk."""
    return json.loads(_setfair.calibrate(
        probs, labels, _groups(groups), method, alpha, _dump(score), k,
        min_group_n, force_nonempty, seed, num_groups))


def predict(probs, labels, groups, predictor, jobs=1):
    """Prediction sets as lists of class indices."""
    return _setfair.predict(probs, labels, _groups(groups),
                            json.dumps(predictor), jobs)


def audit(probs, labels, groups, predictor, jobs=1):
    """Per-group coverage, size and singleton report for a predictor."""
    return json.loads(_setfair.audit(probs, labels, _groups(groups),
                                     json.dumps(predictor), jobs))


def tune_avgk(cal_probs, cal_labels, calval_probs, calval_labels,
              target_coverage=0.9, force_nonempty=False):
    """Smallest avg-k reaching the target coverage on the held-out split."""
    return json.loads(_setfair.tune_avgk(
        cal_probs, cal_labels, calval_probs, calval_labels, target_coverage,
        force_nonempty))


def fit_logistic(x, y, clusters):
    """Logistic fit with cluster-robust covariance: (beta, covariance, converged)."""
    return _setfair.fit_logistic(np.asarray(x, dtype=float),
                                 np.asarray(y, dtype=float), list(clusters))


def run_mechanism(task=None, human=None, alpha=0.1, participants=800,
                  trials_per_participant=100, seed=0, jobs=1):
    """Run the marginal, mondrian and avg-k arms with simulated participants."""
    return json.loads(_setfair.run_mechanism(
        _dump(task), _dump(human), alpha, participants, trials_per_participant,
        seed, jobs))
