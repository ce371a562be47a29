import pytest

from ruleagg.model import (
    ClassLabel,
    FeatureSchema,
    FeatureSpec,
)


@pytest.fixture
def credit_schema():
    """Small categorical schema in the style of a credit-scoring task."""
    feats = (
        FeatureSpec("credit_history", "categorical",
                    ("critical/other existing credit", "no credits/all paid",
                     "existing paid", "all paid")),
        FeatureSpec("purpose", "categorical", ("used car", "new car", "education")),
        FeatureSpec("age", "continuous", edges=(25.0, 35.0, 45.0, 55.0)),
    )
    labels = (ClassLabel("bad", 0), ClassLabel("good", 1))
    return FeatureSchema(feats, labels, labels[1])


@pytest.fixture
def binary_schema():
    feats = (
        FeatureSpec("a", "categorical", ("0", "1")),
        FeatureSpec("b", "categorical", ("0", "1")),
        FeatureSpec("c", "categorical", ("0", "1")),
    )
    labels = (ClassLabel("neg", 0), ClassLabel("pos", 1))
    return FeatureSchema(feats, labels, labels[1])
