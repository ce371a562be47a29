"""Fidelity of a rule set to the black box.

A naive Bayes classifier over binary rule-match indicators, fitted with
Laplace correction against the black box's predicted labels on the dev
split, then scored on the test split: accuracy, F1, AUC (Mann-Whitney, ties
at 0.5) and coverage. Ground-truth labels never enter these metrics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

from .filtering import RuleSet
from .model import BlackBoxPredictions, ClassLabel, FeatureSchema, FitError
from .preprocess import EncodedInstance, matches


@dataclass(frozen=True)
class RuleClassifier:
    ruleset: RuleSet
    labels: tuple  # (negative, positive) ClassLabel
    priors: dict  # ClassLabel -> float, Laplace-smoothed
    match_probs: tuple  # per rule: {ClassLabel: P(match | label)}
    fallback_label: ClassLabel

    @property
    def positive_label(self) -> ClassLabel:
        return self.labels[1]


def fit(
    ruleset: RuleSet,
    dev_encoded: Sequence[EncodedInstance],
    dev_predictions: BlackBoxPredictions,
    schema: FeatureSchema,
) -> RuleClassifier:
    """Laplace-smoothed match likelihoods and priors, counted against the
    black-box labels on the dev split."""
    if not ruleset.rules:
        raise FitError("cannot fit a rule classifier on an empty rule set")
    if not dev_encoded:
        raise FitError("cannot fit a rule classifier on an empty dev split")
    neg, pos = schema.negative_label, schema.positive_label
    n_by_label = {neg: 0, pos: 0}
    match_by_label = [{neg: 0, pos: 0} for _ in ruleset.rules]
    for inst in dev_encoded:
        label = dev_predictions.require(inst.instance_id).label
        n_by_label[label] += 1
        for j, rule in enumerate(ruleset.rules):
            if matches(inst, rule.conditions):
                match_by_label[j][label] += 1
    n = len(dev_encoded)
    priors = {l: (n_by_label[l] + 1) / (n + 2) for l in (neg, pos)}
    match_probs = tuple(
        {l: (match_by_label[j][l] + 1) / (n_by_label[l] + 2) for l in (neg, pos)}
        for j in range(len(ruleset.rules))
    )
    fallback = max((neg, pos), key=lambda l: (n_by_label[l], l.index))
    return RuleClassifier(ruleset, (neg, pos), priors, match_probs, fallback)


def predict(clf: RuleClassifier, instance: EncodedInstance):
    """Posterior over black-box labels from the instance's rule-match vector,
    computed in log space. Returns (argmax label, positive-class posterior);
    exact ties fall back to the majority dev label."""
    logpost = {l: math.log(clf.priors[l]) for l in clf.labels}
    for rule, probs in zip(clf.ruleset.rules, clf.match_probs):
        hit = matches(instance, rule.conditions)
        for l in clf.labels:
            logpost[l] += math.log(probs[l] if hit else 1.0 - probs[l])
    neg, pos = clf.labels
    # normalized positive posterior via a stable logsumexp over two terms
    m = max(logpost[neg], logpost[pos])
    z = math.exp(logpost[neg] - m) + math.exp(logpost[pos] - m)
    score = math.exp(logpost[pos] - m) / z
    if logpost[pos] > logpost[neg]:
        label = pos
    elif logpost[pos] < logpost[neg]:
        label = neg
    else:
        label = clf.fallback_label
    return label, score


def covered(clf: RuleClassifier, instance: EncodedInstance) -> bool:
    return any(matches(instance, r.conditions) for r in clf.ruleset.rules)


def mann_whitney_auc(scores: Sequence[float], positives: Sequence[bool]) -> float:
    """AUC as the normalized Mann-Whitney U statistic with average ranks,
    so tied scores count 0.5. Requires both classes present."""
    n_pos = sum(positives)
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    ranks = [0.0] * len(scores)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg_rank
        i = j + 1
    rank_sum = sum(r for r, p in zip(ranks, positives) if p)
    u = rank_sum - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class FidelityReport:
    accuracy: float
    auc: float
    f1: float
    coverage: float
    n_rules: int
    confusion: dict  # tp/fp/fn/tn against black-box labels
    auc_degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "auc": self.auc,
            "f1": self.f1,
            "coverage": self.coverage,
            "n_rules": self.n_rules,
            "confusion": dict(self.confusion),
            "auc_degenerate": self.auc_degenerate,
        }


def fidelity(
    clf: RuleClassifier,
    test_encoded: Sequence[EncodedInstance],
    test_predictions: BlackBoxPredictions,
) -> FidelityReport:
    """Agreement of the rule classifier with the black-box labels on test."""
    if not test_encoded:
        raise FitError("cannot evaluate on an empty test split")
    pos = clf.positive_label
    tp = fp = fn = tn = 0
    scores = []
    is_pos = []
    n_covered = 0
    for inst in test_encoded:
        bb_label = test_predictions.require(inst.instance_id).label
        label, score = predict(clf, inst)
        scores.append(score)
        is_pos.append(bb_label == pos)
        if covered(clf, inst):
            n_covered += 1
        if label == pos and bb_label == pos:
            tp += 1
        elif label == pos:
            fp += 1
        elif bb_label == pos:
            fn += 1
        else:
            tn += 1
    n = len(test_encoded)
    accuracy = (tp + tn) / n
    f1 = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0
    degenerate = len(set(is_pos)) < 2
    if degenerate:
        warnings.warn("test predictions contain a single class; AUC reported as 0.5")
        auc = 0.5
    else:
        auc = mann_whitney_auc(scores, is_pos)
    return FidelityReport(
        accuracy=accuracy,
        auc=auc,
        f1=f1,
        coverage=n_covered / n,
        n_rules=len(clf.ruleset.rules),
        confusion={"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        auc_degenerate=degenerate,
    )
