"""Apriori frequent-itemset mining and class-linked rule derivation.

The miner is generic over orderable hashable items; the pipeline feeds it
explanation itemsets. Mining runs over the full vocabulary (conditions and
class items) so that condition-only supports are available as discriminative
confidence denominators.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import CHARACTERISTIC, DISCRIMINATIVE, MODES, AssociationRule


@dataclass(frozen=True)
class FrequentItemset:
    items: frozenset
    support_count: int


def _as_itemset(transaction) -> frozenset:
    items = getattr(transaction, "items", transaction)
    return items if isinstance(items, frozenset) else frozenset(items)


def frequent_itemsets(
    transactions: Sequence,
    min_support: int,
    max_size: Optional[int] = None,
) -> list:
    """All itemsets with support >= min_support (and size <= max_size),
    with exact multiset support counts, via level-wise join + prune."""
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    rows = [_as_itemset(t) for t in transactions]

    counts = Counter()
    for row in rows:
        counts.update(row)
    frequents = {}
    level = sorted((item,) for item, c in counts.items() if c >= min_support)
    for cand in level:
        frequents[frozenset(cand)] = counts[cand[0]]

    k = 2
    while level and (max_size is None or k <= max_size):
        prev = set(level)
        candidates = []
        # join: two (k-1)-tuples sharing their first k-2 items
        for i, a in enumerate(level):
            for b in level[i + 1:]:
                if a[:-1] != b[:-1]:
                    break  # level is sorted, no later b can share the prefix
                cand = a + (b[-1],)
                # prune: every (k-1)-subset must be frequent
                if all(cand[:j] + cand[j + 1:] in prev for j in range(k)):
                    candidates.append(cand)
        if not candidates:
            break
        cand_sets = {cand: frozenset(cand) for cand in candidates}
        cand_counts = Counter()
        for row in rows:
            for cand, cset in cand_sets.items():
                if cset <= row:
                    cand_counts[cand] += 1
        level = sorted(cand for cand in candidates if cand_counts[cand] >= min_support)
        for cand in level:
            frequents[cand_sets[cand]] = cand_counts[cand]
        k += 1

    return sorted(
        (FrequentItemset(items, sup) for items, sup in frequents.items()),
        key=lambda f: (len(f.items), tuple(sorted(f.items))),
    )


def derive_rules(
    frequents: Sequence[FrequentItemset],
    min_confidence: float,
    mode: str = CHARACTERISTIC,
) -> list:
    """One rule per frequent itemset containing exactly one class item.

    Characteristic: class -> conditions with confidence sup(itemset)/sup(class).
    Discriminative: conditions -> class with confidence sup(itemset)/sup(conditions).
    Confidence comparisons use exact count ratios.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    support = {f.items: f.support_count for f in frequents}
    rules = []
    for f in frequents:
        class_items = frozenset(i for i in f.items if i.is_class)
        if len(class_items) != 1:
            continue
        conditions = f.items - class_items
        if not conditions:
            continue
        if mode == CHARACTERISTIC:
            antecedent, consequent, denom_key = class_items, conditions, class_items
        else:
            antecedent, consequent, denom_key = conditions, class_items, conditions
        denom = support.get(denom_key)
        assert denom is not None and denom > 0, "downward closure violated"
        if Fraction(f.support_count, denom) >= min_confidence:
            rules.append(AssociationRule.from_counts(
                antecedent, consequent, f.support_count, denom, mode))
    return sorted(rules, key=AssociationRule.sort_key)
