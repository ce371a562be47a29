"""Score-based local explainers for the exported black box.

Both explainers attribute the model's positive-class probability to the
original features and render the scores onto the schema's item vocabulary:
the instance's active item carries the feature score, and for categorical
features the score is copied to the remaining one-hot items so downstream
sign routing sees the full column set. Positive always supports the schema's
positive label.
"""

from __future__ import annotations

import random

import pandas as pd

from .schema import BridgeError, Schema

ADDITIVE = "additive"
PERTURBATION = "perturbation"
ANCHOR = "anchor"
EXPLAINERS = (ADDITIVE, PERTURBATION, ANCHOR)


def _positive_proba(model, frame: pd.DataFrame, positive: str):
    idx = list(model.classes_).index(positive)
    return model.predict_proba(frame)[:, idx]


def _scores_to_items(schema: Schema, row: pd.Series, feature_scores: dict) -> dict:
    scores = {}
    for name, s in feature_scores.items():
        feature = schema.feature(name)
        active = feature.item_for(row[name])
        scores[active] = s
        if feature.kind == "categorical":
            for item in feature.all_items():
                scores.setdefault(item, s)
    return scores


def explain_additive(model, schema: Schema, row: pd.Series, train: pd.DataFrame,
                     n_samples: int, seed: int, instance_id: str) -> dict:
    """Coalition-sampled additive attribution: each sample replaces a random
    subset of the other features with a drawn train row's values and
    contrasts the feature's observed value against the drawn one."""
    rng = random.Random(f"{seed}:{instance_id}")
    names = [f.name for f in schema.features]
    queries, meta = [], []
    for name in names:
        for _ in range(n_samples):
            drawn = train.iloc[rng.randrange(len(train))]
            hybrid = {
                other: drawn[other] if rng.random() < 0.5 else row[other]
                for other in names if other != name
            }
            with_own = dict(hybrid, **{name: row[name]})
            with_drawn = dict(hybrid, **{name: drawn[name]})
            queries.extend([with_own, with_drawn])
            meta.append(name)
    probs = _positive_proba(model, pd.DataFrame(queries, columns=names),
                            schema.positive)
    totals = {name: 0.0 for name in names}
    for k, name in enumerate(meta):
        totals[name] += probs[2 * k] - probs[2 * k + 1]
    feature_scores = {name: totals[name] / n_samples for name in names}
    return _scores_to_items(schema, row, feature_scores)


def explain_perturbation(model, schema: Schema, row: pd.Series, train: pd.DataFrame,
                         n_samples: int, seed: int, instance_id: str) -> dict:
    """Single-feature occlusion: mean drop in positive probability when the
    feature is resampled from the train marginal."""
    rng = random.Random(f"{seed}:{instance_id}")
    names = [f.name for f in schema.features]
    queries, meta = [], []
    for name in names:
        for _ in range(n_samples):
            perturbed = dict(row[names])
            perturbed[name] = train.iloc[rng.randrange(len(train))][name]
            queries.append(perturbed)
            meta.append(name)
    frame = pd.DataFrame([dict(row[names])] + queries, columns=names)
    probs = _positive_proba(model, frame, schema.positive)
    base = probs[0]
    totals = {name: 0.0 for name in names}
    for k, name in enumerate(meta):
        totals[name] += base - probs[1 + k]
    feature_scores = {name: totals[name] / n_samples for name in names}
    return _scores_to_items(schema, row, feature_scores)


def get_explainer(choice: str):
    if choice == ADDITIVE:
        return explain_additive
    if choice == PERTURBATION:
        return explain_perturbation
    if choice == ANCHOR:
        raise BridgeError(
            "no rule-form explainer package is available in this environment; "
            "use --explainer additive or perturbation")
    raise BridgeError(f"unknown explainer {choice!r} (choose from {EXPLAINERS})")
