"""Batch pipeline driver.

Subcommands expose each stage (preprocess, itemize, mine, filter, evaluate)
plus a full run; flags override config-file values which override defaults.
Exit codes: 0 success, 2 input/validation error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from dataclasses import replace

from .evaluate import fidelity, fit
from .filtering import filter_orientation, load_rules, prune_subsumed, save_rules
from .itemsets import (
    generate_explanation_itemsets,
    read_explanations,
    read_predictions,
    read_transactions,
    write_transactions,
)
from .mining import derive_rules, frequent_itemsets
from .model import (
    FitError,
    IntegrityError,
    MiningConfig,
    SchemaError,
    load_schema,
    save_schema,
)
from .pipeline import PipelineConfig, run_pipeline
from .preprocess import encode_dataset, fit_bins, load_csv


def _add_mining_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-support", type=int, default=None)
    p.add_argument("--min-confidence", type=float, default=None)
    p.add_argument("--mode", choices=["characteristic", "discriminative"], default=None)
    p.add_argument("--max-size", type=int, default=None, dest="max_itemset_size")
    p.add_argument("--score-threshold", type=float, default=None)


def _mining_config(args, base: MiningConfig = None) -> MiningConfig:
    cfg = base or MiningConfig()
    overrides = {}
    for name in ("min_support", "min_confidence", "mode", "max_itemset_size",
                 "score_threshold"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return replace(cfg, **overrides) if overrides else cfg


def cmd_preprocess(args) -> int:
    schema = load_schema(args.schema)
    train = load_csv(args.train, schema, split="train")
    fitted = fit_bins(train, schema, n_bins=args.n_bins)
    save_schema(fitted, args.out)
    print(f"wrote fitted schema to {args.out}")
    return 0


def cmd_itemize(args) -> int:
    schema = load_schema(args.schema)
    dataset = load_csv(args.data, schema, split="dev")
    explanations = read_explanations(args.explanations, schema)
    predictions = read_predictions(args.predictions, schema)
    counters = Counter()
    config = _mining_config(args)
    transactions = generate_explanation_itemsets(
        dataset, explanations, predictions, schema, config, counters=counters)
    write_transactions(transactions, args.out)
    print(f"wrote {len(transactions)} transactions to {args.out} "
          f"({counters.get('dropped_empty', 0)} explanations dropped as empty)")
    return 0


def cmd_mine(args) -> int:
    schema = load_schema(args.schema)
    transactions = read_transactions(args.transactions, schema)
    config = _mining_config(args)
    frequents = frequent_itemsets(transactions,
                                  config.effective_min_support(len(transactions)),
                                  max_size=config.max_itemset_size)
    rules = derive_rules(frequents, config.min_confidence, config.mode)
    from .filtering import RuleSet
    save_rules(RuleSet(config.mode, tuple(rules), config=config), args.out, schema)
    print(f"wrote {len(rules)} rules to {args.out}")
    return 0


def cmd_filter(args) -> int:
    schema = load_schema(args.schema)
    ruleset = load_rules(args.rules, schema)
    config = _mining_config(args)
    kept = filter_orientation(ruleset.rules, config.mode)
    pruned = prune_subsumed(kept, config)
    save_rules(pruned, args.out, schema)
    print(f"kept {len(pruned.rules)} rules "
          f"({len(pruned.pruned)} pruned as subsumed) in {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    schema = load_schema(args.schema)
    ruleset = load_rules(args.rules, schema)
    dev = load_csv(args.dev, schema, split="dev")
    test = load_csv(args.test, schema, split="test")
    dev_predictions = read_predictions(args.dev_predictions, schema)
    test_predictions = read_predictions(args.test_predictions, schema)
    clf = fit(ruleset, encode_dataset(dev, schema), dev_predictions, schema)
    report = fidelity(clf, encode_dataset(test, schema), test_predictions)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote fidelity report to {args.out}")
    return 0


def cmd_run(args) -> int:
    if args.config:
        base_dir = os.path.dirname(os.path.abspath(args.config))
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        for key in ("schema", "train", "dev", "test", "dev_predictions",
                    "test_predictions", "explanations", "out_dir"):
            if data.get(key) and not os.path.isabs(data[key]):
                data[key] = os.path.join(base_dir, data[key])
        config = PipelineConfig.from_dict(data)
    else:
        required = ("schema", "train", "dev", "test", "out_dir")
        missing = [k for k in required if getattr(args, k, None) is None]
        if missing:
            raise SchemaError(f"missing required flags (or --config): {missing}")
        config = PipelineConfig(
            schema=args.schema, train=args.train, dev=args.dev, test=args.test,
            out_dir=args.out_dir, dev_predictions=args.dev_predictions,
            test_predictions=args.test_predictions, explanations=args.explanations,
        )
    # flags > config file > defaults
    config = replace(config, mining=_mining_config(args, config.mining))
    if args.confidence_grid is not None:
        grid = tuple(float(x) for x in args.confidence_grid.split(","))
        config = replace(config, confidence_grid=grid)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.use_reference_models:
        config = replace(config, use_reference_models=True)
    if args.out_dir is not None:
        config = replace(config, out_dir=args.out_dir)
    result = run_pipeline(config)
    report = result["fidelity"]
    print(f"rules: {result['rules']}  report: {result['report']}")
    print(f"n_rules={report.n_rules} accuracy={report.accuracy:.3f} "
          f"auc={report.auc:.3f} f1={report.f1:.3f} coverage={report.coverage:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruleagg",
        description="Aggregate local black-box explanations into general "
                    "association rules and measure their fidelity.",
    )
    parser.add_argument("--json-errors", action="store_true",
                        help="emit machine-parsable JSON errors on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="fit bin edges on the train split")
    p.add_argument("--schema", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-bins", type=int, default=5)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("itemize", help="turn explanations into transactions")
    p.add_argument("--schema", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--explanations", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    _add_mining_flags(p)
    p.set_defaults(func=cmd_itemize)

    p = sub.add_parser("mine", help="mine association rules from transactions")
    p.add_argument("--schema", required=True)
    p.add_argument("--transactions", required=True)
    p.add_argument("--out", required=True)
    _add_mining_flags(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("filter", help="orientation filter + subset pruning")
    p.add_argument("--schema", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--out", required=True)
    _add_mining_flags(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("evaluate", help="fidelity of a rule set to the black box")
    p.add_argument("--schema", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--dev-predictions", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--test-predictions", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline with optional confidence tuning")
    p.add_argument("--config", default=None, help="JSON pipeline config file")
    p.add_argument("--schema")
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--test")
    p.add_argument("--dev-predictions")
    p.add_argument("--test-predictions")
    p.add_argument("--explanations")
    p.add_argument("--out-dir")
    p.add_argument("--confidence-grid", default=None,
                   help="comma-separated confidence thresholds to tune over")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--use-reference-models", action="store_true")
    _add_mining_flags(p)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, IntegrityError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        _report_error(args, exc, code=2)
        return 2
    except (FitError, ValueError, OSError) as exc:
        _report_error(args, exc, code=3)
        return 3


def _report_error(args, exc, code: int) -> None:
    if getattr(args, "json_errors", False):
        payload = {"error": type(exc).__name__, "message": str(exc),
                   "stage": getattr(args, "command", None), "exit_code": code}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
