import json

import pytest
from hypothesis import given, strategies as st

from ruleagg.model import (
    CHARACTERISTIC,
    DISCRIMINATIVE,
    AssociationRule,
    ClassLabel,
    FeatureSchema,
    FeatureSpec,
    Item,
    MiningConfig,
    SchemaError,
    canonical_render,
    class_item,
    parse_rule,
    schema_from_dict,
    schema_to_dict,
)


class TestItem:
    def test_render_condition(self):
        assert Item("purpose", "used car").render() == "purpose=used car"

    def test_render_class(self, credit_schema):
        assert class_item(credit_schema.positive_label).render() == "good"

    def test_total_order_is_lexicographic(self):
        items = [Item("b", "1"), Item("a", "2"), Item("a", "10")]
        assert sorted(items) == [Item("a", "10"), Item("a", "2"), Item("b", "1")]

    def test_parse_value_containing_equals(self, credit_schema):
        schema = FeatureSchema(
            (FeatureSpec("checking_status", "categorical", (">=200", "<0")),),
            credit_schema.class_labels, credit_schema.positive_label)
        item = schema.parse_item("checking_status=>=200")
        assert item == Item("checking_status", ">=200")


class TestSchema:
    def test_three_classes_rejected(self):
        with pytest.raises(SchemaError, match="2 classes"):
            schema_from_dict({"features": [], "classes": ["a", "b", "c"]})

    def test_duplicate_feature_names_rejected(self):
        feats = (FeatureSpec("x", "categorical", ("1",)),
                 FeatureSpec("x", "categorical", ("2",)))
        labels = (ClassLabel("n", 0), ClassLabel("p", 1))
        with pytest.raises(SchemaError, match="unique"):
            FeatureSchema(feats, labels, labels[1])

    def test_json_round_trip(self, credit_schema):
        data = json.loads(json.dumps(schema_to_dict(credit_schema)))
        assert schema_from_dict(data) == credit_schema

    def test_positive_defaults_to_second_label(self):
        schema = schema_from_dict({
            "features": [{"name": "x", "kind": "categorical", "values": ["1"]}],
            "classes": ["neg", "pos"],
        })
        assert schema.positive_label.name == "pos"

    def test_item_enumeration_covers_bins_and_values(self, credit_schema):
        items = credit_schema.all_items()
        assert Item("age", "bin0") in items and Item("age", "bin4") in items
        assert Item("purpose", "education") in items
        assert len([i for i in items if i.is_class]) == 2


class TestAssociationRule:
    def test_characteristic_shape_enforced(self, credit_schema):
        good = class_item(credit_schema.positive_label)
        with pytest.raises(ValueError, match="shape"):
            AssociationRule.from_counts(
                {Item("purpose", "used car")}, {good}, 5, 10, CHARACTERISTIC)

    def test_empty_side_rejected(self, credit_schema):
        good = class_item(credit_schema.positive_label)
        with pytest.raises(ValueError, match="non-empty"):
            AssociationRule.from_counts({good}, set(), 5, 10, CHARACTERISTIC)

    def test_confidence_is_count_ratio(self, credit_schema):
        good = class_item(credit_schema.positive_label)
        rule = AssociationRule.from_counts(
            {good}, {Item("purpose", "used car")}, 6, 8, CHARACTERISTIC)
        assert rule.confidence == 0.75


class TestCanonicalRender:
    def test_paper_style_example(self, credit_schema):
        good = class_item(credit_schema.positive_label)
        rule = AssociationRule.from_counts(
            {good}, {Item("credit_history", "critical/other existing credit")},
            12, 12, CHARACTERISTIC)
        text = canonical_render(rule, credit_schema)
        assert text == ("good → credit_history=critical/other existing credit "
                        "(conf=1.000, sup=12/12)")

    def test_unknown_item_raises(self, credit_schema):
        good = class_item(credit_schema.positive_label)
        rule = AssociationRule.from_counts(
            {good}, {Item("nope", "x")}, 1, 1, CHARACTERISTIC)
        with pytest.raises(SchemaError):
            canonical_render(rule, credit_schema)

    def test_deterministic(self, credit_schema):
        good = class_item(credit_schema.positive_label)
        rule = AssociationRule.from_counts(
            {Item("purpose", "used car"), Item("age", "bin2")}, {good},
            3, 4, DISCRIMINATIVE)
        assert canonical_render(rule, credit_schema) == canonical_render(rule, credit_schema)

    def test_round_trip(self, credit_schema):
        good = class_item(credit_schema.positive_label)
        rule = AssociationRule.from_counts(
            {good}, {Item("purpose", "used car"), Item("age", "bin3")},
            7, 9, CHARACTERISTIC)
        assert parse_rule(canonical_render(rule, credit_schema), credit_schema) == rule


def _render_schema():
    feats = (
        FeatureSpec("credit_history", "categorical",
                    ("critical/other existing credit", "no credits/all paid")),
        FeatureSpec("purpose", "categorical", ("used car", "new car", "education")),
        FeatureSpec("age", "continuous", edges=(25.0, 35.0, 45.0, 55.0)),
    )
    labels = (ClassLabel("bad", 0), ClassLabel("good", 1))
    return FeatureSchema(feats, labels, labels[1])


RENDER_SCHEMA = _render_schema()


@st.composite
def random_rules(draw, schema):
    condition_pool = [i for i in schema.all_items() if not i.is_class]
    conditions = draw(st.sets(st.sampled_from(condition_pool), min_size=1, max_size=4))
    label = draw(st.sampled_from(list(schema.class_labels)))
    mode = draw(st.sampled_from([CHARACTERISTIC, DISCRIMINATIVE]))
    denom = draw(st.integers(min_value=1, max_value=100))
    sup = draw(st.integers(min_value=0, max_value=denom))
    cls = {class_item(label)}
    if mode == CHARACTERISTIC:
        return AssociationRule.from_counts(cls, conditions, sup, denom, mode)
    return AssociationRule.from_counts(conditions, cls, sup, denom, mode)


class TestRoundTripProperty:
    @given(rule=random_rules(RENDER_SCHEMA))
    def test_parse_inverts_render(self, rule):
        assert parse_rule(canonical_render(rule, RENDER_SCHEMA), RENDER_SCHEMA) == rule


class TestMiningConfig:
    def test_defaults_by_explanation_kind(self):
        assert MiningConfig.default_for("score").min_support == 10
        assert MiningConfig.default_for("rule").min_support == 4
        assert MiningConfig.default_for("score").score_threshold == 0.01
        assert MiningConfig.default_for("score").mode == CHARACTERISTIC
        assert MiningConfig.default_for("score", DISCRIMINATIVE).min_confidence == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            MiningConfig(min_support=0)
        with pytest.raises(ValueError):
            MiningConfig(min_confidence=0.0)
        with pytest.raises(ValueError):
            MiningConfig(mode="sideways")

    def test_fractional_support_override(self):
        cfg = MiningConfig(min_support=10, support_fraction=0.05)
        assert cfg.effective_min_support(200) == 10
        assert cfg.effective_min_support(50) == 3

    def test_round_trips_through_dict(self):
        cfg = MiningConfig(min_support=4, min_confidence=0.9, mode=DISCRIMINATIVE)
        assert MiningConfig.from_dict(cfg.to_dict()) == cfg
