"""Synthetic binary-feature datasets for demos and desk-scale experiments."""

from __future__ import annotations

import random
from typing import Tuple

from .model import ClassLabel, Dataset, FeatureSchema, FeatureSpec


def binary_schema(n_features: int, labels=("neg", "pos")) -> FeatureSchema:
    """n binary categorical features f1..fn with values "0"/"1"."""
    feats = tuple(
        FeatureSpec(f"f{i + 1}", "categorical", ("0", "1")) for i in range(n_features)
    )
    cls = (ClassLabel(labels[0], 0), ClassLabel(labels[1], 1))
    return FeatureSchema(feats, cls, cls[1])


def generate_m_of_n(
    n_instances: int,
    n_features: int = 10,
    n_relevant: int = 7,
    m: int = 3,
    seed: int = 0,
    split: str = "train",
) -> Tuple[FeatureSchema, Dataset]:
    """Instances of the m-of-n concept: label positive iff at least ``m`` of
    the first ``n_relevant`` binary features are 1; remaining features are
    noise. Features are iid Bernoulli(0.5)."""
    schema = binary_schema(n_features)
    rng = random.Random(seed)
    rows = []
    labels = {}
    for i in range(n_instances):
        iid = f"{split}{i:05d}"
        bits = [rng.randrange(2) for _ in range(n_features)]
        rows.append((iid, {f"f{j + 1}": str(bits[j]) for j in range(n_features)}))
        labels[iid] = "pos" if sum(bits[:n_relevant]) >= m else "neg"
    return schema, Dataset(tuple(rows), split=split, labels=labels)


def generate_single_rule(
    n_instances: int,
    n_features: int = 4,
    seed: int = 0,
    split: str = "train",
) -> Tuple[FeatureSchema, Dataset]:
    """One-rule concept: positive iff f1 = 1; other features are noise."""
    schema = binary_schema(n_features)
    rng = random.Random(seed)
    rows = []
    labels = {}
    for i in range(n_instances):
        iid = f"{split}{i:05d}"
        bits = [rng.randrange(2) for _ in range(n_features)]
        rows.append((iid, {f"f{j + 1}": str(bits[j]) for j in range(n_features)}))
        labels[iid] = "pos" if bits[0] == 1 else "neg"
    return schema, Dataset(tuple(rows), split=split, labels=labels)
