import json
import random

import pytest


@pytest.fixture(scope="session")
def synthetic_workspace(tmp_path_factory):
    """CSV + schema for a concept the boosted trees learn instantly:
    positive iff color is red; shape and size are noise."""
    root = tmp_path_factory.mktemp("bridge-data")
    rng = random.Random(5)
    rows = ["instance_id,color,shape,size,label"]
    for k in range(400):
        color = rng.choice(["red", "blue"])
        shape = rng.choice(["circle", "square"])
        size = round(rng.uniform(0.0, 10.0), 3)
        label = "good" if color == "red" else "bad"
        rows.append(f"i{k:04d},{color},{shape},{size},{label}")
    dataset = root / "toy.csv"
    dataset.write_text("\n".join(rows) + "\n")
    schema = root / "schema.json"
    schema.write_text(json.dumps({
        "features": [
            {"name": "color", "kind": "categorical", "values": ["red", "blue"]},
            {"name": "shape", "kind": "categorical", "values": ["circle", "square"]},
            {"name": "size", "kind": "continuous", "edges": [2.0, 4.0, 6.0, 8.0]},
        ],
        "classes": ["bad", "good"],
        "positive": "good",
    }))
    return {"root": root, "dataset": dataset, "schema": schema}


@pytest.fixture
def small_grid():
    return {"model__learning_rate": [0.1], "model__max_iter": [50],
            "model__l2_regularization": [0.0]}
