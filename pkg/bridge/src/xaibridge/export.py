"""Train the black box and export predictions and explanations.

Outputs per run: train/dev/test split CSVs, dev and test prediction JSONL,
dev explanation JSONL, and a manifest recording the split fractions, the
cross-validated hyperparameters and the skip count.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from sklearn.compose import ColumnTransformer
from sklearn.ensemble import HistGradientBoostingClassifier
from sklearn.model_selection import GridSearchCV
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import OneHotEncoder

from .explain import get_explainer
from .schema import BridgeError, Schema, load_schema

log = logging.getLogger("xaibridge")

DEFAULT_GRID = {
    "model__learning_rate": [0.05, 0.1],
    "model__max_iter": [100, 200],
    "model__l2_regularization": [0.0, 1.0],
}


@dataclass(frozen=True)
class ExportJob:
    dataset: str
    schema: str
    out_dir: str
    explainer: str
    seed: int = 0
    label_column: str = "label"
    split_fractions: Tuple[float, float, float] = (0.6, 0.2, 0.2)
    explainer_samples: int = 20
    param_grid: dict = field(default_factory=lambda: dict(DEFAULT_GRID))
    cv_folds: int = 5


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def load_dataset(job: ExportJob, schema: Schema) -> pd.DataFrame:
    frame = pd.read_csv(job.dataset, dtype=str)
    if job.label_column not in frame.columns:
        raise BridgeError(f"{job.dataset}: missing label column {job.label_column!r}")
    for feature in schema.features:
        if feature.name not in frame.columns:
            raise BridgeError(f"{job.dataset}: missing feature column {feature.name!r}")
        if feature.kind == "continuous":
            frame[feature.name] = frame[feature.name].astype(float)
    targets = set(frame[job.label_column].unique())
    if targets != set(schema.classes):
        raise BridgeError(
            f"target must be binary over {sorted(schema.classes)}, got {sorted(targets)}")
    if "instance_id" not in frame.columns:
        frame.insert(0, "instance_id", [f"i{k:06d}" for k in range(len(frame))])
    return frame


def split_dataset(frame: pd.DataFrame, job: ExportJob):
    f_train, f_dev, f_test = job.split_fractions
    if abs(f_train + f_dev + f_test - 1.0) > 1e-9:
        raise BridgeError("split fractions must sum to 1")
    order = np.random.RandomState(job.seed).permutation(len(frame))
    n_train = int(round(f_train * len(frame)))
    n_dev = int(round(f_dev * len(frame)))
    parts = {
        "train": frame.iloc[order[:n_train]],
        "dev": frame.iloc[order[n_train:n_train + n_dev]],
        "test": frame.iloc[order[n_train + n_dev:]],
    }
    for name, part in parts.items():
        if len(part) == 0:
            raise BridgeError(f"{name} split is empty; dataset too small")
    return parts


def train_black_box(job: ExportJob, schema: Schema, train: pd.DataFrame):
    """Boosted trees over one-hot categoricals and raw continuous values,
    tuned by grid search with cross-validation on the train split."""
    categorical = [f.name for f in schema.features if f.kind == "categorical"]
    continuous = [f.name for f in schema.features if f.kind == "continuous"]
    encode = ColumnTransformer([
        ("onehot", OneHotEncoder(handle_unknown="ignore"), categorical),
        ("passthrough", "passthrough", continuous),
    ])
    pipeline = Pipeline([
        ("encode", encode),
        ("model", HistGradientBoostingClassifier(random_state=job.seed)),
    ])
    search = GridSearchCV(pipeline, job.param_grid, cv=job.cv_folds,
                          scoring="roc_auc", n_jobs=1)
    names = [f.name for f in schema.features]
    search.fit(train[names], train[job.label_column])
    return search.best_estimator_, search.best_params_, float(search.best_score_)


def _write_predictions(model, schema: Schema, part: pd.DataFrame, path) -> None:
    names = [f.name for f in schema.features]
    idx = list(model.classes_).index(schema.positive)
    labels = model.predict(part[names])
    scores = model.predict_proba(part[names])[:, idx]
    records = sorted(
        zip(part["instance_id"], labels, scores), key=lambda r: r[0])
    with open(path, "w", encoding="utf-8") as fh:
        for iid, label, score in records:
            fh.write(json.dumps({"instance_id": iid, "label": str(label),
                                 "score": float(score)}, sort_keys=True) + "\n")


def export_explanations(model, schema: Schema, job: ExportJob,
                        dev: pd.DataFrame, train: pd.DataFrame, path) -> int:
    """Explain every dev instance; failures are skipped and counted. Returns
    the skip count; raises when nothing could be explained."""
    explain = get_explainer(job.explainer)
    names = [f.name for f in schema.features]
    predicted = dict(zip(dev["instance_id"], model.predict(dev[names])))
    records = []
    skipped = 0
    for _, row in dev.sort_values("instance_id").iterrows():
        iid = row["instance_id"]
        try:
            scores = explain(model, schema, row, train,
                             job.explainer_samples, job.seed, iid)
            schema.validate_items(scores)
        except Exception as exc:
            skipped += 1
            log.warning("skipping %s: %s", iid, exc)
            continue
        records.append({"instance_id": iid, "kind": "score",
                        "label": str(predicted[iid]),
                        "scores": {k: float(v) for k, v in sorted(scores.items())}})
    if not records:
        raise BridgeError(f"all {skipped} explanation attempts failed")
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return skipped


def run_export(job: ExportJob) -> dict:
    schema = load_schema(job.schema)
    frame = load_dataset(job, schema)
    parts = split_dataset(frame, job)
    os.makedirs(job.out_dir, exist_ok=True)
    columns = ["instance_id"] + [f.name for f in schema.features] + [job.label_column]
    for name, part in parts.items():
        part[columns].rename(columns={job.label_column: "label"}).to_csv(
            os.path.join(job.out_dir, f"{name}.csv"), index=False)
    model, best_params, cv_score = train_black_box(job, schema, parts["train"])
    for name in ("dev", "test"):
        _write_predictions(model, schema, parts[name],
                           os.path.join(job.out_dir, f"{name}_predictions.jsonl"))
    skipped = export_explanations(
        model, schema, job, parts["dev"], parts["train"],
        os.path.join(job.out_dir, "explanations.jsonl"))
    manifest = {
        "dataset": job.dataset,
        "dataset_sha256": _sha256(job.dataset),
        "schema": job.schema,
        "explainer": job.explainer,
        "seed": job.seed,
        "split_fractions": list(job.split_fractions),
        "split_sizes": {name: len(part) for name, part in parts.items()},
        "best_params": best_params,
        "cv_auc": cv_score,
        "explainer_samples": job.explainer_samples,
        "skipped_explanations": skipped,
    }
    with open(os.path.join(job.out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
