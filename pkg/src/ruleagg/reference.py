"""Self-contained black box and local explainer for desk-scale runs.

A greedy Gini decision tree over item tests stands in for the opaque model,
and an occlusion explainer (marginal-resampling probability deltas) produces
score-form local explanations, so the whole pipeline is exercisable without
any external model or explainer.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .itemsets import LocalExplanation
from .model import (
    BlackBoxPredictions,
    ClassLabel,
    FeatureSchema,
    Item,
    Prediction,
)
from .preprocess import EncodedInstance


@dataclass(frozen=True)
class TreeNode:
    counts: tuple  # (n_negative, n_positive) training samples at this node
    item: Optional[Item] = None  # test: item present -> right, absent -> left
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.item is None


@dataclass(frozen=True)
class DecisionTree:
    root: TreeNode
    labels: tuple  # (negative, positive) ClassLabel
    max_depth: int
    min_leaf: int


def _gini(n_neg: int, n_pos: int) -> float:
    n = n_neg + n_pos
    if n == 0:
        return 0.0
    p = n_pos / n
    return 2.0 * p * (1.0 - p)


def train_tree(
    encoded: Sequence[EncodedInstance],
    labels: Sequence[ClassLabel],
    schema: FeatureSchema,
    max_depth: int = 6,
    min_leaf: int = 1,
    seed: int = 0,
) -> DecisionTree:
    """Greedy Gini splits over item-membership tests; ties among equal-gain
    candidate splits break deterministically via the seed."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    neg, pos = schema.negative_label, schema.positive_label
    candidates = [i for i in schema.all_items() if not i.is_class]
    rng = random.Random(seed)
    y = [1 if l == pos else 0 for l in labels]

    def build(idx: Sequence[int], depth: int) -> TreeNode:
        n_pos = sum(y[i] for i in idx)
        n_neg = len(idx) - n_pos
        counts = (n_neg, n_pos)
        if depth >= max_depth or n_pos == 0 or n_neg == 0 or len(idx) < 2 * min_leaf:
            return TreeNode(counts)
        parent = _gini(n_neg, n_pos)
        # split while impure: zero-gain splits are allowed (an XOR-style
        # concept shows no first-level gain yet is learnable at depth 2)
        best_gain = None
        best = []
        for item in candidates:
            right = [i for i in idx if item in encoded[i].active_items]
            if len(right) < min_leaf or len(idx) - len(right) < min_leaf:
                continue
            r_pos = sum(y[i] for i in right)
            r_neg = len(right) - r_pos
            l_pos, l_neg = n_pos - r_pos, n_neg - r_neg
            child = (len(right) * _gini(r_neg, r_pos)
                     + (len(idx) - len(right)) * _gini(l_neg, l_pos)) / len(idx)
            gain = parent - child
            if best_gain is None or gain > best_gain + 1e-12:
                best_gain, best = gain, [item]
            elif abs(gain - best_gain) <= 1e-12:
                best.append(item)
        if not best:
            return TreeNode(counts)
        item = best[rng.randrange(len(best))] if len(best) > 1 else best[0]
        right_idx = [i for i in idx if item in encoded[i].active_items]
        left_idx = [i for i in idx if item not in encoded[i].active_items]
        return TreeNode(counts, item,
                        build(left_idx, depth + 1), build(right_idx, depth + 1))

    root = build(list(range(len(encoded))), 0)
    return DecisionTree(root, (neg, pos), max_depth, min_leaf)


def _leaf(tree: DecisionTree, active: frozenset) -> TreeNode:
    node = tree.root
    while not node.is_leaf:
        node = node.right if node.item in active else node.left
    return node


def predict_proba(tree: DecisionTree, instance: EncodedInstance) -> float:
    """P(positive) from the leaf class distribution."""
    n_neg, n_pos = _leaf(tree, instance.active_items).counts
    return n_pos / (n_neg + n_pos)


def predict_label(tree: DecisionTree, instance: EncodedInstance) -> ClassLabel:
    neg, pos = tree.labels
    return pos if predict_proba(tree, instance) >= 0.5 else neg


def predictions_for(tree: DecisionTree, encoded: Sequence[EncodedInstance]) -> BlackBoxPredictions:
    return BlackBoxPredictions({
        inst.instance_id: Prediction(predict_label(tree, inst), predict_proba(tree, inst))
        for inst in encoded
    })


def explain_occlusion(
    tree: DecisionTree,
    instance: EncodedInstance,
    train_encoded: Sequence[EncodedInstance],
    schema: FeatureSchema,
    n_samples: int = 20,
    seed: int = 0,
    onehot_scores: bool = True,
) -> LocalExplanation:
    """Score each feature by the mean rise in P(positive) its observed value
    causes over values resampled from the train marginal.

    Each sample draws a train instance and occludes a random coalition of the
    remaining features with that instance's values before contrasting the
    feature's observed value against the drawn one. Occluding lone features
    would miss redundant-but-relevant ones entirely: when several features
    each suffice for the prediction, no single replacement moves the output,
    yet under random coalitions every one of them earns correctly signed
    credit.

    The per-feature score lands on the instance's active item; with
    ``onehot_scores`` it is also copied onto the feature's remaining one-hot
    items, mirroring explainers that attribute over all one-hot columns (the
    value-absent columns then feed the itemset builder's opposite-class
    routing). Deterministic for a given seed and instance id.
    """
    rng = random.Random(f"{seed}:{instance.instance_id}")
    by_feature = {i.feature: i for i in instance.active_items}
    names = [spec.name for spec in schema.features]
    scores = {}
    for spec in schema.features:
        active = by_feature[spec.name]
        total = 0.0
        for _ in range(n_samples):
            drawn = train_encoded[rng.randrange(len(train_encoded))]
            drawn_by_feature = {i.feature: i for i in drawn.active_items}
            hybrid = {
                name: drawn_by_feature[name] if rng.random() < 0.5 else by_feature[name]
                for name in names if name != spec.name
            }
            items = frozenset(hybrid.values())
            with_own = EncodedInstance(instance.instance_id, items | {active})
            with_drawn = EncodedInstance(instance.instance_id,
                                         items | {drawn_by_feature[spec.name]})
            total += predict_proba(tree, with_own) - predict_proba(tree, with_drawn)
        score = total / n_samples
        scores[active] = score
        if onehot_scores and spec.kind == "categorical":
            for item in spec.items():
                if item != active:
                    scores[item] = score
    return LocalExplanation.score_form(
        instance.instance_id, predict_label(tree, instance), scores)


def explain_dataset(
    tree: DecisionTree,
    encoded: Sequence[EncodedInstance],
    train_encoded: Sequence[EncodedInstance],
    schema: FeatureSchema,
    n_samples: int = 20,
    seed: int = 0,
) -> list:
    return [
        explain_occlusion(tree, inst, train_encoded, schema,
                          n_samples=n_samples, seed=seed)
        for inst in encoded
    ]


# ---------------------------------------------------------------------------
# JSON serialization (reproducible test fixtures)
# ---------------------------------------------------------------------------

def _node_to_dict(node: TreeNode) -> dict:
    d = {"counts": list(node.counts)}
    if not node.is_leaf:
        d["item"] = node.item.render()
        d["left"] = _node_to_dict(node.left)
        d["right"] = _node_to_dict(node.right)
    return d


def _node_from_dict(d: dict, schema: FeatureSchema) -> TreeNode:
    if "item" not in d:
        return TreeNode(tuple(d["counts"]))
    return TreeNode(
        tuple(d["counts"]),
        schema.parse_item(d["item"]),
        _node_from_dict(d["left"], schema),
        _node_from_dict(d["right"], schema),
    )


def tree_to_json(tree: DecisionTree) -> str:
    return json.dumps({
        "root": _node_to_dict(tree.root),
        "max_depth": tree.max_depth,
        "min_leaf": tree.min_leaf,
    }, sort_keys=True)


def tree_from_json(text: str, schema: FeatureSchema) -> DecisionTree:
    d = json.loads(text)
    return DecisionTree(
        _node_from_dict(d["root"], schema),
        (schema.negative_label, schema.positive_label),
        d["max_depth"],
        d["min_leaf"],
    )
