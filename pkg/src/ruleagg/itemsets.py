"""Conversion of local explanations into the transaction database.

Each transaction is one explanation itemset: a set of binarized condition
items plus exactly one class item. Rule-form explanations map one-to-one to
transactions; score-form explanations split into up to two transactions, one
per class, with sign-based routing and the absent-one-hot flip for binary
tasks.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .model import (
    BlackBoxPredictions,
    ClassLabel,
    Dataset,
    FeatureSchema,
    IntegrityError,
    Item,
    MiningConfig,
    Prediction,
    class_item,
)
from .preprocess import EncodedInstance, encode_dataset

RULE_FORM = "rule"
SCORE_FORM = "score"


@dataclass(frozen=True)
class LocalExplanation:
    """One instance-specific explanation, in rule or signed-score form.

    Positive scores support the schema's positive label; score producers are
    responsible for normalizing to that convention.
    """

    instance_id: str
    predicted_label: ClassLabel
    kind: str
    conditions: Optional[frozenset] = None  # rule form
    scores: Optional[Mapping] = None  # score form: Item -> float

    def __post_init__(self):
        if self.kind == RULE_FORM:
            if self.conditions is None or self.scores is not None:
                raise ValueError("rule-form explanation needs conditions only")
        elif self.kind == SCORE_FORM:
            if self.scores is None or self.conditions is not None:
                raise ValueError("score-form explanation needs scores only")
            if any(not math.isfinite(s) for s in self.scores.values()):
                raise ValueError(f"non-finite score in explanation {self.instance_id!r}")
        else:
            raise ValueError(f"unknown explanation kind {self.kind!r}")

    @classmethod
    def rule_form(cls, instance_id, predicted_label, conditions):
        return cls(instance_id, predicted_label, RULE_FORM, conditions=frozenset(conditions))

    @classmethod
    def score_form(cls, instance_id, predicted_label, scores):
        return cls(instance_id, predicted_label, SCORE_FORM, scores=dict(scores))


@dataclass(frozen=True)
class ExplanationItemset:
    """One transaction: condition items plus exactly one class item."""

    instance_id: str
    class_item: Item
    condition_items: frozenset

    def __post_init__(self):
        if not self.class_item.is_class:
            raise ValueError("class_item must be a class item")
        if not self.condition_items or any(i.is_class for i in self.condition_items):
            raise ValueError("condition items must be non-empty and non-class")

    @property
    def items(self) -> frozenset:
        return self.condition_items | {self.class_item}


def _check_prediction(expl: LocalExplanation, predictions: BlackBoxPredictions) -> None:
    pred = predictions.require(expl.instance_id)
    if pred.label != expl.predicted_label:
        raise IntegrityError(
            f"explanation for {expl.instance_id!r} carries label "
            f"{expl.predicted_label.name!r} but the black box predicted {pred.label.name!r}"
        )


def itemsets_from_rule_form(
    explanations: Sequence[LocalExplanation],
    predictions: BlackBoxPredictions,
    counters: Optional[Counter] = None,
) -> list:
    """One transaction per explanation: predicted class item plus the rule's
    conditions. Empty condition sets are dropped (counted under
    ``dropped_empty``)."""
    out = []
    for expl in explanations:
        if expl.kind != RULE_FORM:
            raise IntegrityError(f"expected rule-form explanation, got {expl.kind!r}")
        _check_prediction(expl, predictions)
        if not expl.conditions:
            if counters is not None:
                counters["dropped_empty"] += 1
            continue
        out.append(ExplanationItemset(expl.instance_id,
                                      class_item(expl.predicted_label),
                                      expl.conditions))
    return out


def itemsets_from_score_form(
    explanations: Sequence[LocalExplanation],
    predictions: BlackBoxPredictions,
    schema: FeatureSchema,
    threshold: float = 0.01,
    encoded_by_id: Optional[Mapping] = None,
    top_k: Optional[int] = None,
    counters: Optional[Counter] = None,
) -> list:
    """Up to two transactions per explanation, one per class.

    An item with score s joins the positive-label transaction when
    s > threshold and the negative-label transaction when s < -threshold;
    |s| <= threshold is discarded. For a one-hot categorical item whose bit
    is 0 on the instance (requires ``encoded_by_id``), the routing flips to
    the opposite class: the explainer tied the item's absence to one class,
    so its presence favors the other.
    """
    pos, neg = schema.positive_label, schema.negative_label
    pos_item, neg_item = class_item(pos), class_item(neg)
    out = []
    for expl in explanations:
        if expl.kind != SCORE_FORM:
            raise IntegrityError(f"expected score-form explanation, got {expl.kind!r}")
        _check_prediction(expl, predictions)
        scores = expl.scores.items()
        if top_k is not None:
            scores = sorted(scores, key=lambda kv: -abs(kv[1]))[:top_k]
        pos_items, neg_items = set(), set()
        for item, s in scores:
            if abs(s) <= threshold:
                continue
            schema.validate_item(item)
            supports_positive = s > 0
            if (
                encoded_by_id is not None
                and not item.is_class
                and schema.feature(item.feature).kind == "categorical"
                and expl.instance_id in encoded_by_id
                and item not in encoded_by_id[expl.instance_id].active_items
            ):
                supports_positive = not supports_positive
            (pos_items if supports_positive else neg_items).add(item)
        emitted = False
        if pos_items:
            out.append(ExplanationItemset(expl.instance_id, pos_item, frozenset(pos_items)))
            emitted = True
        if neg_items:
            out.append(ExplanationItemset(expl.instance_id, neg_item, frozenset(neg_items)))
            emitted = True
        if counters is not None and not emitted:
            counters["dropped_empty"] += 1
    return out


def generate_explanation_itemsets(
    dataset: Optional[Dataset],
    explanations: Sequence[LocalExplanation],
    predictions: BlackBoxPredictions,
    schema: FeatureSchema,
    config: MiningConfig,
    counters: Optional[Counter] = None,
) -> list:
    """Dispatch to the converter matching the batch's explanation kind and
    return transactions in deterministic order. ``dataset`` supplies the
    instances for the score-form absent-bit flip; mixed batches are rejected."""
    if not explanations:
        return []
    kinds = {e.kind for e in explanations}
    if len(kinds) > 1:
        raise IntegrityError(f"mixed explanation kinds in one batch: {sorted(kinds)}")
    kind = kinds.pop()
    if kind == RULE_FORM:
        transactions = itemsets_from_rule_form(explanations, predictions, counters=counters)
    else:
        encoded_by_id = None
        if dataset is not None:
            encoded_by_id = {e.instance_id: e for e in encode_dataset(dataset, schema)}
        transactions = itemsets_from_score_form(
            explanations, predictions, schema,
            threshold=config.score_threshold,
            encoded_by_id=encoded_by_id,
            top_k=config.top_k,
            counters=counters,
        )
    return sorted(transactions,
                  key=lambda t: (t.instance_id, t.class_item, tuple(sorted(t.condition_items))))


# ---------------------------------------------------------------------------
# Exchange formats (JSON Lines)
# ---------------------------------------------------------------------------

def write_explanations(explanations: Sequence[LocalExplanation], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for expl in explanations:
            rec = {"instance_id": expl.instance_id, "kind": expl.kind,
                   "label": expl.predicted_label.name}
            if expl.kind == RULE_FORM:
                rec["conditions"] = sorted(i.render() for i in expl.conditions)
            else:
                rec["scores"] = {i.render(): s for i in sorted(expl.scores)
                                 for s in [expl.scores[i]]}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_explanations(path, schema: FeatureSchema) -> list:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                label = schema.label(rec["label"])
                if rec["kind"] == RULE_FORM:
                    conds = frozenset(schema.parse_item(t) for t in rec["conditions"])
                    out.append(LocalExplanation.rule_form(rec["instance_id"], label, conds))
                else:
                    scores = {schema.parse_item(t): float(s)
                              for t, s in rec["scores"].items()}
                    out.append(LocalExplanation.score_form(rec["instance_id"], label, scores))
            except (KeyError, ValueError) as exc:
                raise IntegrityError(f"{path}:{lineno}: bad explanation record: {exc}") from exc
    return out


def write_predictions(predictions: BlackBoxPredictions, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for iid in sorted(predictions.by_id):
            pred = predictions.by_id[iid]
            rec = {"instance_id": iid, "label": pred.label.name}
            if pred.score is not None:
                rec["score"] = pred.score
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_predictions(path, schema: FeatureSchema) -> BlackBoxPredictions:
    by_id = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                by_id[rec["instance_id"]] = Prediction(
                    schema.label(rec["label"]),
                    float(rec["score"]) if "score" in rec else None,
                )
            except (KeyError, ValueError) as exc:
                raise IntegrityError(f"{path}:{lineno}: bad prediction record: {exc}") from exc
    return BlackBoxPredictions(by_id)


def write_transactions(transactions: Sequence[ExplanationItemset], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in transactions:
            rec = {"instance_id": t.instance_id, "label": t.class_item.value,
                   "items": sorted(i.render() for i in t.condition_items)}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_transactions(path, schema: FeatureSchema) -> list:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(ExplanationItemset(
                    rec["instance_id"],
                    class_item(schema.label(rec["label"])),
                    frozenset(schema.parse_item(t) for t in rec["items"]),
                ))
            except (KeyError, ValueError) as exc:
                raise IntegrityError(f"{path}:{lineno}: bad transaction record: {exc}") from exc
    return out
