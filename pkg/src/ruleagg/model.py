"""Shared vocabulary of the rule-aggregation pipeline.

Schemas, items, transactions, association rules, black-box predictions and
mining configuration. Everything here is immutable after construction and
safe to share between workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

CLASS_FEATURE = "__class__"

CHARACTERISTIC = "characteristic"
DISCRIMINATIVE = "discriminative"
MODES = (CHARACTERISTIC, DISCRIMINATIVE)


class SchemaError(ValueError):
    """Input does not conform to the feature schema."""


class UnknownCategoryError(SchemaError):
    """A categorical value is absent from the schema's declared values."""

    def __init__(self, feature: str, value: str):
        super().__init__(f"unknown category {value!r} for feature {feature!r}")
        self.feature = feature
        self.value = value


class IntegrityError(ValueError):
    """Inconsistent inputs, e.g. an explanation whose label disagrees with
    the black-box prediction for the same instance."""


class FitError(RuntimeError):
    """A model could not be fitted (empty rule set or empty data split)."""


@dataclass(frozen=True, order=True)
class Item:
    """An atomic binarized condition (``feature=value``) or a class tag.

    Class tags use the reserved feature name ``__class__`` and render as the
    bare label name. The dataclass ordering (feature, value) is the canonical
    total order used everywhere for deterministic output.
    """

    feature: str
    value: str

    @property
    def is_class(self) -> bool:
        return self.feature == CLASS_FEATURE

    def render(self) -> str:
        if self.is_class:
            return self.value
        return f"{self.feature}={self.value}"

    def __str__(self) -> str:
        return self.render()


def class_item(label: "ClassLabel") -> Item:
    return Item(CLASS_FEATURE, label.name)


@dataclass(frozen=True)
class ClassLabel:
    name: str
    index: int  # 0 or 1; index 1 is the designated positive label

    def __post_init__(self):
        if self.index not in (0, 1):
            raise SchemaError(f"class index must be 0 or 1, got {self.index}")
        if "=" in self.name:
            raise SchemaError(f"class label name may not contain '=': {self.name!r}")


@dataclass(frozen=True)
class FeatureSpec:
    """One raw feature: categorical with declared values, or continuous with
    interior bin edges (None until fitted; empty tuple = degenerate single bin)."""

    name: str
    kind: str  # "categorical" | "continuous"
    values: tuple = ()
    edges: Optional[tuple] = None

    def __post_init__(self):
        if "=" in self.name:
            raise SchemaError(f"feature name may not contain '=': {self.name!r}")
        if self.kind == "categorical":
            if not self.values:
                raise SchemaError(f"categorical feature {self.name!r} needs values")
            if len(set(self.values)) != len(self.values):
                raise SchemaError(f"duplicate values for feature {self.name!r}")
        elif self.kind == "continuous":
            if self.values:
                raise SchemaError(f"continuous feature {self.name!r} must not declare values")
            if self.edges is not None:
                edges = tuple(float(e) for e in self.edges)
                if any(b <= a for a, b in zip(edges, edges[1:])):
                    raise SchemaError(f"bin edges for {self.name!r} must be strictly increasing")
                object.__setattr__(self, "edges", edges)
        else:
            raise SchemaError(f"unknown feature kind {self.kind!r}")

    @property
    def is_fitted(self) -> bool:
        return self.kind == "categorical" or self.edges is not None

    @property
    def n_bins(self) -> int:
        if self.kind != "continuous" or self.edges is None:
            raise SchemaError(f"feature {self.name!r} has no fitted bins")
        return len(self.edges) + 1

    def items(self) -> list:
        """All items this feature can produce (requires fitted bins)."""
        if self.kind == "categorical":
            return [Item(self.name, str(v)) for v in self.values]
        return [Item(self.name, f"bin{i}") for i in range(self.n_bins)]


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple
    class_labels: tuple  # exactly two ClassLabel, positions 0 and 1
    positive_label: ClassLabel

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if len(self.class_labels) != 2:
            raise SchemaError(f"exactly two class labels required, got {len(self.class_labels)}")
        if {l.index for l in self.class_labels} != {0, 1}:
            raise SchemaError("class labels must carry indices 0 and 1")
        if self.positive_label not in self.class_labels:
            raise SchemaError("positive label must be one of the class labels")

    @property
    def negative_label(self) -> ClassLabel:
        a, b = self.class_labels
        return b if a == self.positive_label else a

    @property
    def is_fitted(self) -> bool:
        return all(f.is_fitted for f in self.features)

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaError(f"unknown feature {name!r}")

    def label(self, name: str) -> ClassLabel:
        for l in self.class_labels:
            if l.name == name:
                return l
        raise SchemaError(f"unknown class label {name!r}")

    def class_items(self) -> tuple:
        return tuple(class_item(l) for l in self.class_labels)

    def all_items(self) -> list:
        out = []
        for f in self.features:
            out.extend(f.items())
        out.extend(self.class_items())
        return out

    def validate_item(self, item: Item) -> None:
        if item.is_class:
            self.label(item.value)
            return
        spec = self.feature(item.feature)
        if spec.kind == "categorical":
            if item.value not in [str(v) for v in spec.values]:
                raise UnknownCategoryError(item.feature, item.value)
        else:
            if not item.value.startswith("bin"):
                raise SchemaError(f"continuous item needs a bin value, got {item!s}")
            try:
                idx = int(item.value[3:])
            except ValueError:
                raise SchemaError(f"bad bin token in {item!s}") from None
            if spec.edges is not None and not 0 <= idx < spec.n_bins:
                raise SchemaError(f"bin index out of range in {item!s}")

    def parse_item(self, token: str) -> Item:
        """Inverse of Item.render. Bare tokens are class labels; anything
        with '=' splits on the first occurrence (values may contain '=')."""
        if "=" in token:
            name, _, value = token.partition("=")
            item = Item(name, value)
        else:
            item = class_item(self.label(token))
        self.validate_item(item)
        return item


def schema_to_dict(schema: FeatureSchema) -> dict:
    feats = []
    for f in schema.features:
        if f.kind == "categorical":
            feats.append({"name": f.name, "kind": "categorical", "values": list(f.values)})
        else:
            d = {"name": f.name, "kind": "continuous"}
            if f.edges is not None:
                d["edges"] = list(f.edges)
            feats.append(d)
    return {
        "features": feats,
        "classes": [l.name for l in sorted(schema.class_labels, key=lambda l: l.index)],
        "positive": schema.positive_label.name,
    }


def schema_from_dict(data: Mapping) -> FeatureSchema:
    classes = data.get("classes", [])
    if len(classes) != 2:
        raise SchemaError(f"binary tasks only: need exactly 2 classes, got {len(classes)}")
    labels = tuple(ClassLabel(name, i) for i, name in enumerate(classes))
    positive = data.get("positive", classes[1])
    feats = []
    for fd in data["features"]:
        kind = fd.get("kind")
        if kind == "categorical":
            feats.append(FeatureSpec(fd["name"], "categorical", tuple(str(v) for v in fd["values"])))
        elif kind == "continuous":
            edges = fd.get("edges")
            feats.append(FeatureSpec(fd["name"], "continuous",
                                     edges=tuple(edges) if edges is not None else None))
        else:
            raise SchemaError(f"feature {fd.get('name')!r}: unknown kind {kind!r}")
    schema = FeatureSchema(tuple(feats), labels, next(l for l in labels if l.name == positive))
    return schema


def load_schema(path) -> FeatureSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))


def save_schema(schema: FeatureSchema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema_to_dict(schema), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class AssociationRule:
    """A class-linked association rule.

    ``confidence`` is always ``support_count / antecedent_support``; keep both
    counts so the exact ratio is recoverable without floating-point loss.
    """

    antecedent: frozenset
    consequent: frozenset
    support_count: int
    antecedent_support: int
    confidence: float
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown rule mode {self.mode!r}")
        if not self.antecedent or not self.consequent:
            raise ValueError("rule sides must be non-empty")
        ant_cls = [i for i in self.antecedent if i.is_class]
        con_cls = [i for i in self.consequent if i.is_class]
        if self.mode == CHARACTERISTIC:
            ok = len(self.antecedent) == 1 and len(ant_cls) == 1 and not con_cls
        else:
            ok = len(self.consequent) == 1 and len(con_cls) == 1 and not ant_cls
        if not ok:
            raise ValueError(f"rule shape does not match mode {self.mode!r}")
        if self.support_count < 0 or self.antecedent_support < self.support_count:
            raise ValueError("support counts inconsistent")

    @classmethod
    def from_counts(cls, antecedent, consequent, support_count, antecedent_support, mode):
        return cls(frozenset(antecedent), frozenset(consequent), support_count,
                   antecedent_support, support_count / antecedent_support, mode)

    @property
    def class_item(self) -> Item:
        side = self.antecedent if self.mode == CHARACTERISTIC else self.consequent
        return next(iter(side))

    @property
    def conditions(self) -> frozenset:
        return self.consequent if self.mode == CHARACTERISTIC else self.antecedent

    def sort_key(self):
        return (-self.confidence, -self.support_count,
                tuple(sorted(self.antecedent)), tuple(sorted(self.consequent)))


def canonical_render(rule: AssociationRule, schema: FeatureSchema) -> str:
    """Deterministic one-line form, e.g.
    ``good → credit_history=critical (conf=1.000, sup=12/12)``."""
    for item in rule.antecedent | rule.consequent:
        schema.validate_item(item)
    ant = " & ".join(i.render() for i in sorted(rule.antecedent))
    con = " & ".join(i.render() for i in sorted(rule.consequent))
    return (f"{ant} → {con} (conf={rule.confidence:.3f}, "
            f"sup={rule.support_count}/{rule.antecedent_support})")


def parse_rule(text: str, schema: FeatureSchema) -> AssociationRule:
    """Inverse of canonical_render."""
    body, _, tail = text.rpartition(" (conf=")
    if not body:
        raise ValueError(f"unparseable rule text: {text!r}")
    sup_part = tail.split("sup=")[1].rstrip(")")
    support, antecedent_support = (int(x) for x in sup_part.split("/"))
    ant_text, arrow, con_text = body.partition(" → ")
    if not arrow:
        raise ValueError(f"unparseable rule text: {text!r}")
    antecedent = frozenset(schema.parse_item(t) for t in ant_text.split(" & "))
    consequent = frozenset(schema.parse_item(t) for t in con_text.split(" & "))
    mode = CHARACTERISTIC if any(i.is_class for i in antecedent) else DISCRIMINATIVE
    return AssociationRule.from_counts(antecedent, consequent, support,
                                       antecedent_support, mode)


@dataclass(frozen=True)
class MiningConfig:
    """Mining thresholds. ``min_support`` is an absolute transaction count;
    set ``support_fraction`` to derive it from the transaction count instead."""

    min_support: int = 10
    min_confidence: float = 1.0
    mode: str = CHARACTERISTIC
    max_itemset_size: Optional[int] = 5
    score_threshold: float = 0.01
    support_fraction: Optional[float] = None
    top_k: Optional[int] = None

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("min_support must be >= 1")
        if not 0.0 < self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be in (0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.score_threshold < 0:
            raise ValueError("score_threshold must be >= 0")

    @classmethod
    def default_for(cls, kind: str, mode: str = CHARACTERISTIC) -> "MiningConfig":
        """Defaults by explanation kind: support 10 for score-form input,
        4 for rule-form; discriminative mode pins confidence to 1.0."""
        min_support = 10 if kind == "score" else 4
        min_confidence = 1.0 if mode == DISCRIMINATIVE else 0.5
        return cls(min_support=min_support, min_confidence=min_confidence, mode=mode)

    def effective_min_support(self, n_transactions: int) -> int:
        if self.support_fraction is not None:
            import math
            return max(1, math.ceil(self.support_fraction * n_transactions))
        return self.min_support

    def to_dict(self) -> dict:
        return {
            "min_support": self.min_support,
            "min_confidence": self.min_confidence,
            "mode": self.mode,
            "max_itemset_size": self.max_itemset_size,
            "score_threshold": self.score_threshold,
            "support_fraction": self.support_fraction,
            "top_k": self.top_k,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MiningConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


@dataclass(frozen=True)
class Prediction:
    label: ClassLabel
    score: Optional[float] = None  # positive-label score


@dataclass(frozen=True)
class BlackBoxPredictions:
    """Per-instance predicted labels (and optional positive-class scores)
    of the opaque model; the fidelity ground truth."""

    by_id: Mapping  # instance_id -> Prediction

    def __contains__(self, instance_id) -> bool:
        return instance_id in self.by_id

    def __getitem__(self, instance_id) -> Prediction:
        return self.by_id[instance_id]

    def __len__(self) -> int:
        return len(self.by_id)

    def require(self, instance_id) -> Prediction:
        try:
            return self.by_id[instance_id]
        except KeyError:
            raise IntegrityError(f"no black-box prediction for instance {instance_id!r}") from None


@dataclass(frozen=True)
class Dataset:
    """Raw tabular split: (instance_id, feature value mapping) rows, plus an
    optional label column used only to train the reference black box."""

    instances: tuple  # of (instance_id, dict)
    split: str = "train"
    labels: Optional[Mapping] = None  # instance_id -> label name

    def __len__(self) -> int:
        return len(self.instances)

    def ids(self) -> list:
        return [iid for iid, _ in self.instances]

    def validate(self, schema: FeatureSchema) -> None:
        import math
        for iid, values in self.instances:
            for spec in schema.features:
                if spec.name not in values:
                    raise SchemaError(f"instance {iid!r} missing feature {spec.name!r}")
                v = values[spec.name]
                if spec.kind == "categorical":
                    if str(v) not in [str(x) for x in spec.values]:
                        raise UnknownCategoryError(spec.name, str(v))
                else:
                    if not math.isfinite(float(v)):
                        raise SchemaError(f"instance {iid!r}: non-finite value for {spec.name!r}")
