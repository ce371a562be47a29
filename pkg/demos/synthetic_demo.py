"""End-to-end walkthrough on synthetic data, no files needed.

Generates a noisy 3-of-7 voting concept, trains the built-in tree black box,
explains its predictions, aggregates the explanations into characteristic
rules and reports how faithful the rule set is to the black box.
"""

from ruleagg.evaluate import fidelity, fit
from ruleagg.filtering import filter_orientation, prune_subsumed
from ruleagg.itemsets import generate_explanation_itemsets
from ruleagg.mining import derive_rules, frequent_itemsets
from ruleagg.model import CHARACTERISTIC, MiningConfig, canonical_render
from ruleagg.preprocess import encode_dataset
from ruleagg.reference import explain_dataset, predictions_for, train_tree
from ruleagg.synth import generate_m_of_n


def main():
    schema, train = generate_m_of_n(2000, seed=1, split="train")
    _, dev = generate_m_of_n(1000, seed=2, split="dev")
    _, test = generate_m_of_n(1000, seed=3, split="test")
    train_enc = encode_dataset(train, schema)
    dev_enc = encode_dataset(dev, schema)
    test_enc = encode_dataset(test, schema)

    labels = [schema.label(train.labels[iid]) for iid in train.ids()]
    tree = train_tree(train_enc, labels, schema, max_depth=6, min_leaf=5, seed=0)
    dev_preds = predictions_for(tree, dev_enc)
    test_preds = predictions_for(tree, test_enc)
    explanations = explain_dataset(tree, dev_enc, train_enc, schema,
                                   n_samples=20, seed=0)

    config = MiningConfig(min_support=10, min_confidence=0.8, mode=CHARACTERISTIC)
    transactions = generate_explanation_itemsets(
        dev, explanations, dev_preds, schema, config)
    print(f"{len(explanations)} local explanations -> "
          f"{len(transactions)} transactions")

    frequents = frequent_itemsets(transactions, config.min_support,
                                  config.max_itemset_size)
    rules = derive_rules(frequents, config.min_confidence, config.mode)
    ruleset = prune_subsumed(filter_orientation(rules, config.mode), config)
    print(f"{len(rules)} rules mined, {len(ruleset.rules)} kept after pruning:")
    for rule in ruleset.rules:
        print("  " + canonical_render(rule, schema))

    clf = fit(ruleset, dev_enc, dev_preds, schema)
    report = fidelity(clf, test_enc, test_preds)
    print(f"fidelity to the black box on test: accuracy={report.accuracy:.3f} "
          f"auc={report.auc:.3f} f1={report.f1:.3f} coverage={report.coverage:.3f}")


if __name__ == "__main__":
    main()
