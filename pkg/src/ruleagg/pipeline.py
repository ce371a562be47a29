"""End-to-end pipeline: itemize -> mine -> filter -> evaluate.

Handles dev-set confidence tuning, optional synthesis of predictions and
explanations via the reference models, and emission of a run manifest with
content hashes so every run is reproducible bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import __version__
from .evaluate import fidelity, fit
from .filtering import RuleSet, filter_orientation, prune_subsumed, save_rules
from .itemsets import (
    generate_explanation_itemsets,
    read_explanations,
    read_predictions,
    write_explanations,
    write_predictions,
    write_transactions,
)
from .mining import derive_rules, frequent_itemsets
from .model import (
    BlackBoxPredictions,
    Dataset,
    FeatureSchema,
    FitError,
    MiningConfig,
    load_schema,
    save_schema,
)
from .preprocess import encode_dataset, fit_bins, load_csv
from .reference import explain_dataset, predictions_for, train_tree


@dataclass(frozen=True)
class PipelineConfig:
    schema: str
    train: str
    dev: str
    test: str
    out_dir: str
    dev_predictions: Optional[str] = None
    test_predictions: Optional[str] = None
    explanations: Optional[str] = None
    mining: MiningConfig = field(default_factory=MiningConfig)
    confidence_grid: Optional[tuple] = None
    seed: int = 0
    use_reference_models: bool = False
    n_bins: int = 5
    tree_max_depth: int = 6
    tree_min_leaf: int = 5
    explainer_samples: int = 20

    def to_dict(self) -> dict:
        d = {
            "schema": self.schema,
            "train": self.train,
            "dev": self.dev,
            "test": self.test,
            "out_dir": self.out_dir,
            "dev_predictions": self.dev_predictions,
            "test_predictions": self.test_predictions,
            "explanations": self.explanations,
            "mining": self.mining.to_dict(),
            "confidence_grid": list(self.confidence_grid) if self.confidence_grid else None,
            "seed": self.seed,
            "use_reference_models": self.use_reference_models,
            "n_bins": self.n_bins,
            "tree_max_depth": self.tree_max_depth,
            "tree_min_leaf": self.tree_min_leaf,
            "explainer_samples": self.explainer_samples,
        }
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        mining = MiningConfig.from_dict(data.pop("mining", {}))
        grid = data.pop("confidence_grid", None)
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(mining=mining,
                   confidence_grid=tuple(grid) if grid else None,
                   **known)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def select_confidence(
    frequents,
    grid: Sequence[float],
    config: MiningConfig,
    dev_encoded,
    dev_predictions: BlackBoxPredictions,
    schema: FeatureSchema,
):
    """Grid search over confidence thresholds, selecting the one maximizing
    dev-split fidelity AUC; ties go to the higher threshold (fewer rules).
    Returns (chosen confidence, its RuleSet, per-threshold details)."""
    details = []
    best = None
    for conf in sorted(set(grid)):
        rules = derive_rules(frequents, conf, config.mode)
        ruleset = prune_subsumed(filter_orientation(rules, config.mode),
                                 replace(config, min_confidence=conf))
        if not ruleset.rules:
            details.append({"min_confidence": conf, "n_rules": 0, "dev_auc": None})
            continue
        clf = fit(ruleset, dev_encoded, dev_predictions, schema)
        dev_auc = fidelity(clf, dev_encoded, dev_predictions).auc
        details.append({"min_confidence": conf, "n_rules": len(ruleset.rules),
                        "dev_auc": dev_auc})
        # >= : later (higher) thresholds win ties
        if best is None or dev_auc >= best[0]:
            best = (dev_auc, conf, ruleset)
    if best is None:
        raise FitError("no rules survive any confidence threshold in the grid")
    return best[1], best[2], details


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute the full pipeline and write schema, transactions, rules,
    fidelity report and manifest into ``config.out_dir``."""
    os.makedirs(config.out_dir, exist_ok=True)
    raw_schema = load_schema(config.schema)
    train = load_csv(config.train, raw_schema, split="train")
    # bin edges come from the train split only (leakage guard)
    schema = fit_bins(train, raw_schema, n_bins=config.n_bins)
    dev = load_csv(config.dev, schema, split="dev")
    test = load_csv(config.test, schema, split="test")

    schema_out = os.path.join(config.out_dir, "schema.json")
    save_schema(schema, schema_out)

    train_encoded = encode_dataset(train, schema)
    dev_encoded = encode_dataset(dev, schema)
    test_encoded = encode_dataset(test, schema)

    if config.use_reference_models:
        if not train.labels:
            raise FitError("reference models need a 'label' column in the train CSV")
        labels = [schema.label(train.labels[iid]) for iid in train.ids()]
        tree = train_tree(train_encoded, labels, schema,
                          max_depth=config.tree_max_depth,
                          min_leaf=config.tree_min_leaf, seed=config.seed)
        dev_predictions = predictions_for(tree, dev_encoded)
        test_predictions = predictions_for(tree, test_encoded)
        explanations = explain_dataset(tree, dev_encoded, train_encoded, schema,
                                       n_samples=config.explainer_samples,
                                       seed=config.seed)
        write_predictions(dev_predictions,
                          os.path.join(config.out_dir, "dev_predictions.jsonl"))
        write_predictions(test_predictions,
                          os.path.join(config.out_dir, "test_predictions.jsonl"))
        write_explanations(explanations,
                           os.path.join(config.out_dir, "explanations.jsonl"))
    else:
        if not (config.dev_predictions and config.test_predictions and config.explanations):
            raise FitError("need dev/test predictions and explanations, "
                           "or --use-reference-models")
        dev_predictions = read_predictions(config.dev_predictions, schema)
        test_predictions = read_predictions(config.test_predictions, schema)
        explanations = read_explanations(config.explanations, schema)

    counters = Counter()
    transactions = generate_explanation_itemsets(
        dev, explanations, dev_predictions, schema, config.mining, counters=counters)
    write_transactions(transactions, os.path.join(config.out_dir, "transactions.jsonl"))

    min_support = config.mining.effective_min_support(len(transactions))
    frequents = frequent_itemsets(transactions, min_support,
                                  max_size=config.mining.max_itemset_size)

    grid = config.confidence_grid or (config.mining.min_confidence,)
    chosen_conf, ruleset, tuning = select_confidence(
        frequents, grid, config.mining, dev_encoded, dev_predictions, schema)

    clf = fit(ruleset, dev_encoded, dev_predictions, schema)
    report = fidelity(clf, test_encoded, test_predictions)

    rules_out = os.path.join(config.out_dir, "rules.json")
    save_rules(ruleset, rules_out, schema)
    report_out = os.path.join(config.out_dir, "report.json")
    with open(report_out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    inputs = {"schema": config.schema, "train": config.train,
              "dev": config.dev, "test": config.test}
    if not config.use_reference_models:
        inputs.update({"dev_predictions": config.dev_predictions,
                       "test_predictions": config.test_predictions,
                       "explanations": config.explanations})
    manifest = {
        "version": __version__,
        "config": config.to_dict(),
        "seed": config.seed,
        "input_hashes": {k: _sha256(v) for k, v in sorted(inputs.items())},
        "n_transactions": len(transactions),
        "n_explanations": len(explanations),
        "dropped_empty": counters.get("dropped_empty", 0),
        "effective_min_support": min_support,
        "selected_min_confidence": chosen_conf,
        "confidence_tuning": tuning,
    }
    manifest_out = os.path.join(config.out_dir, "manifest.json")
    with open(manifest_out, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {
        "schema": schema_out,
        "rules": rules_out,
        "report": report_out,
        "manifest": manifest_out,
        "ruleset": ruleset,
        "fidelity": report,
        "selected_min_confidence": chosen_conf,
    }
