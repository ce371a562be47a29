"""Rule orientation filtering and subset pruning.

Produces the final compact rule set: keep the requested orientation, then
drop any rule whose conditions strictly contain another same-class rule's
conditions when the shorter rule's confidence is at least as high.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .model import (
    AssociationRule,
    FeatureSchema,
    MiningConfig,
    canonical_render,
)


@dataclass(frozen=True)
class RuleSet:
    mode: str
    rules: tuple
    config: Optional[MiningConfig] = None
    # audit trail: (removed rule, subsuming rule) pairs from prune_subsumed
    pruned: tuple = ()

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


def filter_orientation(rules: Sequence[AssociationRule], mode: str) -> list:
    """Keep exactly the rules of the requested orientation; pure filter."""
    return [r for r in rules if r.mode == mode]


def prune_subsumed(
    rules: Sequence[AssociationRule],
    config: Optional[MiningConfig] = None,
) -> RuleSet:
    """Remove every rule dominated by a same-class rule with a strict subset
    of its conditions and confidence >= its own.

    Equal-confidence ties remove the superset rule, so duplicated information
    never survives. Scanning pairs in condition-set-size order reaches the
    fixpoint in one pass: domination by a removed rule implies domination by
    the rule that removed it or by a surviving subset rule.
    """
    if rules:
        modes = {r.mode for r in rules}
        if len(modes) > 1:
            raise ValueError(f"mixed rule modes: {sorted(modes)}")
        mode = modes.pop()
    else:
        mode = config.mode if config is not None else "characteristic"

    ordered = sorted(rules, key=lambda r: (len(r.conditions),) + r.sort_key())
    kept = []
    pruned = []
    for rule in ordered:
        dominator = next(
            (k for k in kept
             if k.class_item == rule.class_item
             and k.conditions < rule.conditions
             and k.confidence >= rule.confidence),
            None,
        )
        if dominator is None:
            kept.append(rule)
        else:
            pruned.append((rule, dominator))
    kept.sort(key=AssociationRule.sort_key)
    return RuleSet(mode, tuple(kept), config=config, pruned=tuple(pruned))


# ---------------------------------------------------------------------------
# Rule dump format (JSON)
# ---------------------------------------------------------------------------

def _rule_record(rule: AssociationRule) -> dict:
    return {
        "mode": rule.mode,
        "antecedent": sorted(i.render() for i in rule.antecedent),
        "consequent": sorted(i.render() for i in rule.consequent),
        "support": rule.support_count,
        "antecedent_support": rule.antecedent_support,
        "confidence": rule.confidence,
    }


def rules_to_dicts(rules: Sequence[AssociationRule]) -> list:
    return [_rule_record(r) for r in rules]


def ruleset_to_dicts(ruleset: RuleSet, schema: Optional[FeatureSchema] = None) -> list:
    """Kept rules first, then the pruned ones annotated with ``pruned_by``."""
    out = rules_to_dicts(ruleset.rules)
    for rule, by in ruleset.pruned:
        rec = _rule_record(rule)
        rec["pruned_by"] = canonical_render(by, schema) if schema is not None else \
            " & ".join(i.render() for i in sorted(by.antecedent)) + " → " + \
            " & ".join(i.render() for i in sorted(by.consequent))
        out.append(rec)
    return out


def rule_from_dict(rec: dict, schema: FeatureSchema) -> AssociationRule:
    antecedent = frozenset(schema.parse_item(t) for t in rec["antecedent"])
    consequent = frozenset(schema.parse_item(t) for t in rec["consequent"])
    return AssociationRule.from_counts(
        antecedent, consequent, rec["support"], rec["antecedent_support"], rec["mode"])


def save_rules(ruleset: RuleSet, path, schema: Optional[FeatureSchema] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ruleset_to_dicts(ruleset, schema), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_rules(path, schema: FeatureSchema) -> RuleSet:
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    rules = tuple(rule_from_dict(r, schema) for r in records if "pruned_by" not in r)
    mode = rules[0].mode if rules else "characteristic"
    return RuleSet(mode, rules)
