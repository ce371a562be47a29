"""Reader for the pipeline's schema JSON and its rendered item vocabulary.

The bridge talks to the aggregation pipeline only through files, so this is
an independent parser of the same schema format, plus the item-name
rendering needed to keep exported explanations inside the pipeline's
vocabulary.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional, Tuple


class BridgeError(Exception):
    """Input or configuration problem the operator has to fix."""


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # "categorical" | "continuous"
    values: Tuple[str, ...] = ()
    edges: Optional[Tuple[float, ...]] = None

    def item_for(self, value) -> str:
        """Rendered item name for a raw value of this feature."""
        if self.kind == "categorical":
            token = str(value)
            if token not in self.values:
                raise BridgeError(
                    f"feature {self.name!r}: value {token!r} not in schema values")
            return f"{self.name}={token}"
        if self.edges is None:
            raise BridgeError(
                f"feature {self.name!r} has no bin edges; pass a schema with "
                "fitted bins (run the pipeline's preprocess step first)")
        return f"{self.name}=bin{bisect_right(self.edges, float(value))}"

    def all_items(self) -> list:
        if self.kind == "categorical":
            return [f"{self.name}={v}" for v in self.values]
        n_bins = len(self.edges) + 1 if self.edges is not None else 0
        return [f"{self.name}=bin{i}" for i in range(n_bins)]


@dataclass(frozen=True)
class Schema:
    features: Tuple[Feature, ...]
    classes: Tuple[str, str]  # (negative, positive) by index
    positive: str

    @property
    def negative(self) -> str:
        return next(c for c in self.classes if c != self.positive)

    def feature(self, name: str) -> Feature:
        for f in self.features:
            if f.name == name:
                return f
        raise BridgeError(f"unknown feature {name!r}")

    def vocabulary(self) -> set:
        return {item for f in self.features for item in f.all_items()}

    def validate_items(self, items) -> None:
        """Raise unless every item name is in the schema vocabulary."""
        unknown = sorted(set(items) - self.vocabulary())
        if unknown:
            raise BridgeError(f"items outside the schema vocabulary: {unknown}")


def load_schema(path) -> Schema:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    classes = data.get("classes", [])
    if len(classes) != 2:
        raise BridgeError(f"binary tasks only: need exactly 2 classes, got {len(classes)}")
    feats = []
    for fd in data["features"]:
        if fd["kind"] == "categorical":
            feats.append(Feature(fd["name"], "categorical",
                                 tuple(str(v) for v in fd["values"])))
        else:
            edges = fd.get("edges")
            feats.append(Feature(fd["name"], "continuous",
                                 edges=tuple(edges) if edges is not None else None))
    return Schema(tuple(feats), (classes[0], classes[1]),
                  data.get("positive", classes[1]))
