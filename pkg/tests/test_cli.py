import json

import pytest

from ruleagg.cli import main
from ruleagg.filtering import RuleSet, load_rules, save_rules
from ruleagg.model import (
    CHARACTERISTIC,
    ClassLabel,
    FeatureSchema,
    FeatureSpec,
    load_schema,
    save_schema,
)
from ruleagg.preprocess import save_csv
from ruleagg.synth import generate_single_rule


@pytest.fixture
def workspace(tmp_path):
    """Schema JSON plus train/dev/test CSVs for the one-rule concept."""
    schema, train = generate_single_rule(200, seed=1, split="train")
    _, dev = generate_single_rule(120, seed=2, split="dev")
    _, test = generate_single_rule(120, seed=3, split="test")
    paths = {"schema": tmp_path / "schema.json"}
    save_schema(schema, paths["schema"])
    for name, ds in (("train", train), ("dev", dev), ("test", test)):
        paths[name] = tmp_path / f"{name}.csv"
        save_csv(ds, schema, paths[name])
    paths["out"] = tmp_path / "out"
    return paths


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestPreprocess:
    def _continuous_workspace(self, tmp_path):
        schema = FeatureSchema(
            (FeatureSpec("age", "continuous"),),
            (ClassLabel("neg", 0), ClassLabel("pos", 1)),
            ClassLabel("pos", 1),
        )
        schema_path = tmp_path / "schema.json"
        save_schema(schema, schema_path)
        train_path = tmp_path / "train.csv"
        train_path.write_text(
            "instance_id,age\n" + "".join(f"t{i},{20 + i * 5}\n" for i in range(9)))
        return schema_path, train_path

    def test_fits_edges_deterministically(self, tmp_path):
        schema_path, train_path = self._continuous_workspace(tmp_path)
        out1, out2 = tmp_path / "fit1.json", tmp_path / "fit2.json"
        for out in (out1, out2):
            assert run_cli("preprocess", "--schema", schema_path,
                           "--train", train_path, "--out", out) == 0
        assert out1.read_bytes() == out2.read_bytes()
        fitted = load_schema(out1)
        assert fitted.feature("age").edges == (28.0, 36.0, 44.0, 52.0)

    def test_missing_column_exit_2_names_column(self, tmp_path, capsys):
        schema_path, _ = self._continuous_workspace(tmp_path)
        bad = tmp_path / "bad.csv"
        bad.write_text("instance_id,height\nt0,1.8\n")
        assert run_cli("preprocess", "--schema", schema_path,
                       "--train", bad, "--out", tmp_path / "x.json") == 2
        assert "age" in capsys.readouterr().err


class TestRun:
    def test_full_run_writes_artifacts(self, workspace):
        code = run_cli("run", "--schema", workspace["schema"],
                       "--train", workspace["train"], "--dev", workspace["dev"],
                       "--test", workspace["test"], "--out-dir", workspace["out"],
                       "--use-reference-models", "--seed", "0",
                       "--min-support", "10", "--min-confidence", "0.9")
        assert code == 0
        for name in ("schema.json", "transactions.jsonl", "rules.json",
                     "report.json", "manifest.json"):
            assert (workspace["out"] / name).exists()
        manifest = json.loads((workspace["out"] / "manifest.json").read_text())
        assert manifest["selected_min_confidence"] == 0.9
        assert "input_hashes" in manifest

    def test_stage_composition_matches_full_run(self, workspace, tmp_path):
        common = ("--min-support", "10", "--min-confidence", "0.9")
        assert run_cli("run", "--schema", workspace["schema"],
                       "--train", workspace["train"], "--dev", workspace["dev"],
                       "--test", workspace["test"], "--out-dir", workspace["out"],
                       "--use-reference-models", "--seed", "0", *common) == 0
        out = workspace["out"]
        # replay the same run stage by stage from the emitted intermediates
        stage = tmp_path / "stage"
        stage.mkdir()
        assert run_cli("itemize", "--schema", out / "schema.json",
                       "--data", workspace["dev"],
                       "--explanations", out / "explanations.jsonl",
                       "--predictions", out / "dev_predictions.jsonl",
                       "--out", stage / "transactions.jsonl", *common) == 0
        assert (stage / "transactions.jsonl").read_bytes() == \
            (out / "transactions.jsonl").read_bytes()
        assert run_cli("mine", "--schema", out / "schema.json",
                       "--transactions", stage / "transactions.jsonl",
                       "--out", stage / "mined.json", *common) == 0
        assert run_cli("filter", "--schema", out / "schema.json",
                       "--rules", stage / "mined.json",
                       "--out", stage / "rules.json", *common) == 0
        stage_rules = load_rules(stage / "rules.json", load_schema(out / "schema.json"))
        run_rules = load_rules(out / "rules.json", load_schema(out / "schema.json"))
        assert stage_rules.rules == run_rules.rules
        assert run_cli("evaluate", "--schema", out / "schema.json",
                       "--rules", stage / "rules.json",
                       "--dev", workspace["dev"],
                       "--dev-predictions", out / "dev_predictions.jsonl",
                       "--test", workspace["test"],
                       "--test-predictions", out / "test_predictions.jsonl",
                       "--out", stage / "report.json") == 0
        assert (stage / "report.json").read_bytes() == (out / "report.json").read_bytes()

    def test_mode_switch_changes_rule_shape(self, workspace, tmp_path):
        assert run_cli("run", "--schema", workspace["schema"],
                       "--train", workspace["train"], "--dev", workspace["dev"],
                       "--test", workspace["test"], "--out-dir", workspace["out"],
                       "--use-reference-models", "--seed", "0",
                       "--min-support", "10", "--min-confidence", "0.9") == 0
        out = workspace["out"]
        for mode in ("characteristic", "discriminative"):
            assert run_cli("mine", "--schema", out / "schema.json",
                           "--transactions", out / "transactions.jsonl",
                           "--out", tmp_path / f"{mode}.json",
                           "--min-support", "10", "--min-confidence", "0.5",
                           "--mode", mode) == 0
        schema = load_schema(out / "schema.json")
        char = load_rules(tmp_path / "characteristic.json", schema)
        disc = load_rules(tmp_path / "discriminative.json", schema)
        assert char.rules and disc.rules
        assert all(r.antecedent == frozenset({r.class_item}) for r in char.rules)
        assert all(r.consequent == frozenset({r.class_item}) for r in disc.rules)

    def test_missing_flags_exit_2(self, capsys):
        assert run_cli("run", "--out-dir", "/tmp/nope") == 2
        assert "missing required flags" in capsys.readouterr().err

    def test_config_file_with_flag_override(self, workspace):
        config = {
            "schema": str(workspace["schema"]),
            "train": str(workspace["train"]),
            "dev": str(workspace["dev"]),
            "test": str(workspace["test"]),
            "out_dir": str(workspace["out"]),
            "use_reference_models": True,
            "mining": {"min_support": 10, "min_confidence": 0.5},
        }
        config_path = workspace["schema"].parent / "config.json"
        config_path.write_text(json.dumps(config))
        # the flag must beat the config-file value
        assert run_cli("run", "--config", config_path, "--min-confidence", "0.9") == 0
        manifest = json.loads((workspace["out"] / "manifest.json").read_text())
        assert manifest["config"]["mining"]["min_confidence"] == 0.9


class TestErrors:
    def test_missing_input_file_exit_2(self, workspace, capsys):
        assert run_cli("preprocess", "--schema", workspace["schema"],
                       "--train", workspace["schema"].parent / "absent.csv",
                       "--out", workspace["schema"].parent / "x.json") == 2
        assert "absent.csv" in capsys.readouterr().err

    def test_empty_ruleset_evaluate_exit_3(self, workspace, tmp_path, capsys):
        schema = load_schema(workspace["schema"])
        rules_path = tmp_path / "empty_rules.json"
        save_rules(RuleSet(CHARACTERISTIC, ()), rules_path, schema)
        preds = tmp_path / "preds.jsonl"
        lines = []
        for split in ("dev", "test"):
            for i in range(120):
                lines.append(json.dumps({"instance_id": f"{split}{i:05d}",
                                         "label": "pos", "score": 1.0}))
        preds.write_text("\n".join(lines) + "\n")
        assert run_cli("evaluate", "--schema", workspace["schema"],
                       "--rules", rules_path,
                       "--dev", workspace["dev"], "--dev-predictions", preds,
                       "--test", workspace["test"], "--test-predictions", preds,
                       "--out", tmp_path / "report.json") == 3

    def test_json_errors_flag_emits_parsable_payload(self, workspace, capsys):
        code = run_cli("--json-errors", "preprocess",
                       "--schema", workspace["schema"],
                       "--train", workspace["schema"].parent / "absent.csv",
                       "--out", workspace["schema"].parent / "x.json")
        assert code == 2
        payload = json.loads(capsys.readouterr().err)
        assert payload["exit_code"] == 2
        assert payload["stage"] == "preprocess"
        assert "absent.csv" in payload["message"]
