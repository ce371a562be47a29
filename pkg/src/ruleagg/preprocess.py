"""Binarization of raw tabular data.

One-hot items for categorical features, equal-width binning for continuous
features (edges fitted on the train split only), and the instance →
active-item-set encoding used for rule matching and coverage.
"""

from __future__ import annotations

import csv
import warnings
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional

from .model import (
    Dataset,
    FeatureSchema,
    FeatureSpec,
    Item,
    SchemaError,
    UnknownCategoryError,
)


@dataclass(frozen=True)
class EncodedInstance:
    """Exactly one active item per schema feature."""

    instance_id: str
    active_items: frozenset


def fit_bins(train: Dataset, schema: FeatureSchema, n_bins: int = 5) -> FeatureSchema:
    """Fit equal-width bin edges for every continuous feature on the train
    split and return the updated schema. A constant feature degrades to a
    single bin with a warning."""
    if len(train) == 0:
        raise SchemaError("cannot fit bins on an empty train split")
    new_feats = []
    for spec in schema.features:
        if spec.kind != "continuous":
            new_feats.append(spec)
            continue
        values = [float(v[spec.name]) for _, v in train.instances]
        lo, hi = min(values), max(values)
        if lo == hi:
            warnings.warn(
                f"feature {spec.name!r} is constant on the train split; using a single bin"
            )
            edges = ()
        else:
            width = (hi - lo) / n_bins
            edges = tuple(lo + width * i for i in range(1, n_bins))
        new_feats.append(replace(spec, edges=edges))
    return replace(schema, features=tuple(new_feats))


def bin_index(x: float, edges: tuple) -> int:
    """Bin of x under the [lo, hi) convention: first bin open below, last bin
    closed above, so out-of-range values clamp to the extreme bins."""
    return bisect_right(edges, x)


def encode(instance_id: str, values: Mapping, schema: FeatureSchema) -> EncodedInstance:
    if not schema.is_fitted:
        raise SchemaError("schema has unfitted continuous features; run fit_bins first")
    items = []
    for spec in schema.features:
        if spec.name not in values:
            raise SchemaError(f"instance {instance_id!r} missing feature {spec.name!r}")
        v = values[spec.name]
        if spec.kind == "categorical":
            token = str(v)
            if token not in [str(x) for x in spec.values]:
                raise UnknownCategoryError(spec.name, token)
            items.append(Item(spec.name, token))
        else:
            items.append(Item(spec.name, f"bin{bin_index(float(v), spec.edges)}"))
    return EncodedInstance(instance_id, frozenset(items))


def encode_dataset(dataset: Dataset, schema: FeatureSchema) -> list:
    return [encode(iid, values, schema) for iid, values in dataset.instances]


def matches(encoded: EncodedInstance, conditions: Iterable) -> bool:
    """True iff every condition item is active on the instance."""
    return frozenset(conditions) <= encoded.active_items


def load_csv(path, schema: FeatureSchema, split: str = "train") -> Dataset:
    """Read a data split: header must contain ``instance_id`` and every schema
    feature; an optional ``label`` column feeds the reference black box."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "instance_id" not in header:
            raise SchemaError(f"{path}: missing required column 'instance_id'")
        for spec in schema.features:
            if spec.name not in header:
                raise SchemaError(f"{path}: missing required column {spec.name!r}")
        has_label = "label" in header
        rows = []
        labels = {}
        for row in reader:
            iid = row["instance_id"]
            values = {}
            for spec in schema.features:
                raw = row[spec.name]
                values[spec.name] = raw if spec.kind == "categorical" else float(raw)
            rows.append((iid, values))
            if has_label:
                labels[iid] = row["label"]
    ds = Dataset(tuple(rows), split=split, labels=labels if has_label else None)
    ds.validate(schema)
    return ds


def save_csv(dataset: Dataset, schema: FeatureSchema, path) -> None:
    names = [f.name for f in schema.features]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fieldnames = ["instance_id"] + names + (["label"] if dataset.labels else [])
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for iid, values in dataset.instances:
            row = {"instance_id": iid}
            row.update({n: values[n] for n in names})
            if dataset.labels:
                row["label"] = dataset.labels[iid]
            writer.writerow(row)
