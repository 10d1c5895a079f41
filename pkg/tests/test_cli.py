"""Command-line pipeline: exit codes, manifests, end-to-end runs."""

import json
from pathlib import Path

import pytest

from kgbench.cli import main
from conftest import build_equivalence_kg


def write_split_files(kg, directory: Path) -> dict[str, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for split in ("train", "valid", "test"):
        triples = kg.triples(split)
        if not triples:
            continue
        path = directory / f"{split}.tsv"
        with path.open("w", encoding="utf-8") as fh:
            for t in triples:
                fh.write(
                    f"{kg.entities.label(t.head)}\t{kg.relations.label(t.relation)}\t{kg.entities.label(t.tail)}\n"
                )
        paths[split] = path
    return paths


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    kg = build_equivalence_kg()
    paths = write_split_files(kg, root)
    return root, paths


class TestExitCodes:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "SUBCOMMAND" in capsys.readouterr().out

    def test_no_subcommand_prints_help(self, capsys):
        assert main([]) == 0

    def test_missing_required_flag_is_usage_error(self, capsys):
        assert main(["eval-kbc"]) == 1
        assert "scorer" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self):
        assert main(["ingest", "--bogus"]) == 1

    def test_data_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("no tabs at all\n", encoding="utf-8")
        assert main(["ingest", "--train", str(bad), "--out", str(tmp_path / "kg")]) == 2


class TestPipeline:
    def test_full_pipeline_rule_scorer_perfect(self, dataset_dir, tmp_path):
        data_root, paths = dataset_dir
        kg_dir = tmp_path / "kg"
        assert (
            main(
                [
                    "ingest",
                    "--train", str(paths["train"]),
                    "--test", str(paths["test"]),
                    "--out", str(kg_dir),
                ]
            )
            == 0
        )
        rules_path = tmp_path / "rules.tsv"
        assert (
            main(
                [
                    "mine-rules",
                    "--kg", str(kg_dir),
                    "--target", "r2",
                    "--max-body", "2",
                    "--min-coverage", "5",
                    "--out", str(rules_path),
                ]
            )
            == 0
        )
        assert rules_path.read_text().splitlines()[0].startswith("1.0\t1000\tr2(X,Y) :- r1(X,Y).")
        report_path = tmp_path / "eval" / "rules.json"
        assert (
            main(
                [
                    "eval-kbc",
                    "--kg", str(kg_dir),
                    "--scorer", str(rules_path),
                    "--split", "test",
                    "--rank", "expected",
                    "--out", str(report_path),
                ]
            )
            == 0
        )
        payload = json.loads(report_path.read_text())
        assert payload["hits"]["1"] == 1.0
        assert payload["metadata"]["scorer_kind"] == "rules"
        assert payload["metadata"]["candidate_set_size"] == 200

    def test_train_subcommand_and_model_eval(self, dataset_dir, tmp_path):
        data_root, paths = dataset_dir
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(paths["train"]), "--test", str(paths["test"]), "--out", str(kg_dir)])
        ckpt_dir = tmp_path / "ckpts"
        assert (
            main(
                [
                    "train",
                    "--kg", str(kg_dir),
                    "--model", "transe",
                    "--dim", "10",
                    "--epochs", "20",
                    "--checkpoint-every", "20",
                    "--lr", "0.5",
                    "--batch-size", "64",
                    "--negatives", "5",
                    "--seed", "1",
                    "--out", str(ckpt_dir),
                ]
            )
            == 0
        )
        ckpt = ckpt_dir / "transe_d10_s1_e20.kge"
        assert ckpt.exists()
        out = tmp_path / "eval" / "model.json"
        assert (
            main(
                [
                    "eval-kbc",
                    "--kg", str(kg_dir),
                    "--scorer", str(ckpt),
                    "--split", "test",
                    "--out", str(out),
                ]
            )
            == 0
        )
        payload = json.loads(out.read_text())
        assert payload["metadata"]["scorer_kind"] == "embedding"
        assert 0.0 <= payload["mrr"] <= 1.0

    def test_per_query_and_rank_modes(self, dataset_dir, tmp_path):
        data_root, paths = dataset_dir
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(paths["train"]), "--test", str(paths["test"]),
              "--sorted-vocab", "--out", str(kg_dir)])
        rules_path = tmp_path / "rules.tsv"
        main(["mine-rules", "--kg", str(kg_dir), "--target", "r2", "--max-body", "1",
              "--min-coverage", "5", "--out", str(rules_path)])
        out = tmp_path / "perq.json"
        assert (
            main(["eval-kbc", "--kg", str(kg_dir), "--scorer", str(rules_path),
                  "--rank", "optimistic", "--per-query", "--out", str(out)])
            == 0
        )
        payload = json.loads(out.read_text())
        assert payload["rank_mode"] == "optimistic"
        assert len(payload["queries"]) == payload["n_queries"]
        q = payload["queries"][0]
        assert q["optimistic"] <= q["expected"] <= q["pessimistic"]
        # sorted vocab: entity 0 is the lexicographically first label
        ents = (kg_dir / "entities.tsv").read_text().splitlines()
        labels = [l.split("\t")[1] for l in ents]
        assert labels == sorted(labels)

    def test_apply_rules_alias(self, dataset_dir, tmp_path):
        data_root, paths = dataset_dir
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(paths["train"]), "--test", str(paths["test"]), "--out", str(kg_dir)])
        rules_path = tmp_path / "rules.tsv"
        main(["mine-rules", "--kg", str(kg_dir), "--target", "r2", "--max-body", "1",
              "--min-coverage", "5", "--out", str(rules_path)])
        out = tmp_path / "applied.json"
        assert main(["apply-rules", "--kg", str(kg_dir), "--rules", str(rules_path), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["hits"]["1"] == 1.0

    def test_mine_rules_writes_analytics(self, dataset_dir, tmp_path):
        data_root, paths = dataset_dir
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(paths["train"]), "--test", str(paths["test"]), "--out", str(kg_dir)])
        rules_path = tmp_path / "rules.tsv"
        main(["mine-rules", "--kg", str(kg_dir), "--target", "r2", "--max-body", "1",
              "--min-coverage", "5", "--out", str(rules_path)])
        analytics = json.loads((tmp_path / "rules_analytics.json").read_text())
        assert analytics["relations_per_theory_histogram"] == {"1": 1}
        assert "connected_relations_histogram" in analytics
        assert analytics["precision_vs_coverage"] == [[1.0, 1000]]

    def test_train_export_features(self, dataset_dir, tmp_path):
        data_root, paths = dataset_dir
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(paths["train"]), "--out", str(kg_dir)])
        csv_path = tmp_path / "features.csv"
        assert (
            main(
                [
                    "train", "--kg", str(kg_dir), "--model", "complex", "--dim", "5",
                    "--epochs", "0", "--checkpoint-every", "0", "--out", str(tmp_path / "ck"),
                    "--export-features", str(csv_path),
                ]
            )
            == 0
        )
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "entity," + ",".join(f"f{i}" for i in range(10))
        assert len(lines) == 201

    def test_reify_subcommand(self, tmp_path):
        facts = tmp_path / "facts.pl"
        facts.write_text("bond(m1,a1,a2,7).\nfriends(marc,eve)\n", encoding="utf-8")
        out = tmp_path / "triples.tsv"
        assert main(["reify", "--facts", str(facts), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert "bond#0\tbond_1\tm1" in lines
        assert "marc\tfriends\teve" in lines

    def test_analyze_subcommand(self, tmp_path):
        train = tmp_path / "train.tsv"
        train.write_text("a\tr\tb\nb\tr\tc\nc\tr\ta\n", encoding="utf-8")
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(train), "--out", str(kg_dir)])
        out = tmp_path / "profile.json"
        assert main(["analyze", "--kg", str(kg_dir), "--mode", "both", "--table", "--out", str(out)]) == 0
        profile = json.loads(out.read_text())
        assert profile["uninformed"]["n_components"] == 1
        assert profile["meta"]["edge_reduction"] == 0.0
        assert (tmp_path / "profile.txt").exists()

    def test_classify_subcommand(self, tmp_path):
        lines = []
        for i in range(12):
            lines.append(f"a{i}\tr1\thub_a")
            lines.append(f"a{i}\tr2\ta{(i + 1) % 12}")
            lines.append(f"b{i}\tr3\thub_b")
            lines.append(f"b{i}\tr2\tb{(i + 1) % 12}")
        train = tmp_path / "train.tsv"
        train.write_text("\n".join(lines) + "\n", encoding="utf-8")
        labels = tmp_path / "labels.tsv"
        labels.write_text(
            "\n".join([f"a{i}\tpos" for i in range(12)] + [f"b{i}\tneg" for i in range(12)]) + "\n",
            encoding="utf-8",
        )
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(train), "--out", str(kg_dir)])
        report = tmp_path / "diff.json"
        code = main(
            [
                "classify",
                "--kg", str(kg_dir),
                "--labels", str(labels),
                "--features", "transe",
                "--dims", "10",
                "--epochs", "20",
                "--checkpoint-every", "20",
                "--outer-folds", "3",
                "--inner-folds", "2",
                "--seed", "0",
                "--report", str(report),
            ]
        )
        assert code == 0
        payload = json.loads(report.read_text())
        assert "distributional" in payload
        assert "symbolic" in payload
        assert len(payload["accuracy_difference"]["per_fold"]) == 3

    def test_report_subcommand_determinism(self, tmp_path):
        results = {
            "kbc": {
                "FB15-237": {
                    "DistMult": {"hits@1": 0.155, "hits@3": 0.263, "hits@10": 0.419},
                    "ConvE": {"hits@1": 0.327, "hits@3": 0.356, "hits@10": 0.501},
                }
            }
        }
        src = tmp_path / "results.json"
        src.write_text(json.dumps(results), encoding="utf-8")
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(["report", "--results", str(src), "--out", str(out1)]) == 0
        assert main(["report", "--results", str(src), "--out", str(out2)]) == 0
        assert (out1 / "report.txt").read_bytes() == (out2 / "report.txt").read_bytes()
        text = (out1 / "report.txt").read_text()
        assert ".155 .263 .419" in text
        assert ".327 .356 .501" in text

    def test_report_schema_violation_exit_2(self, tmp_path):
        src = tmp_path / "results.json"
        src.write_text(json.dumps({"classification": [{"dataset": "only"}]}), encoding="utf-8")
        assert main(["report", "--results", str(src), "--out", str(tmp_path / "out")]) == 2


class TestManifest:
    def test_digest_changes_iff_input_changes(self, tmp_path):
        train = tmp_path / "train.tsv"
        train.write_text("a\tr\tb\n", encoding="utf-8")
        kg1 = tmp_path / "kg1"
        main(["ingest", "--train", str(train), "--out", str(kg1)])
        m1 = json.loads((kg1 / "manifest.json").read_text())

        kg2 = tmp_path / "kg2"
        main(["ingest", "--train", str(train), "--out", str(kg2)])
        m2 = json.loads((kg2 / "manifest.json").read_text())
        assert m1["inputs"] == m2["inputs"]

        train.write_text("a\tr\tb\nc\tr\td\n", encoding="utf-8")
        kg3 = tmp_path / "kg3"
        main(["ingest", "--train", str(train), "--out", str(kg3)])
        m3 = json.loads((kg3 / "manifest.json").read_text())
        assert m1["inputs"] != m3["inputs"]

    def test_manifest_records_version_and_config(self, tmp_path):
        train = tmp_path / "train.tsv"
        train.write_text("a\tr\tb\n", encoding="utf-8")
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(train), "--out", str(kg_dir)])
        manifest = json.loads((kg_dir / "manifest.json").read_text())
        from kgbench import __version__

        assert manifest["version"] == __version__
        assert manifest["command"] == "ingest"


class TestConfigFile:
    def test_config_provides_defaults_flags_override(self, tmp_path):
        train = tmp_path / "train.tsv"
        train.write_text("a\tr1\tb\na\tr2\tb\nc\tr1\td\nc\tr2\td\n", encoding="utf-8")
        kg_dir = tmp_path / "kg"
        main(["ingest", "--train", str(train), "--out", str(kg_dir)])
        cfg = tmp_path / "run.cfg"
        cfg.write_text("min_coverage=2\nmax_body=1\n", encoding="utf-8")
        out = tmp_path / "rules.tsv"
        assert (
            main(
                ["mine-rules", "--config", str(cfg), "--kg", str(kg_dir), "--target", "r2", "--out", str(out)]
            )
            == 0
        )
        assert "r2(X,Y) :- r1(X,Y)." in out.read_text()
        # flag overrides the config value: min coverage 5 kills the rule
        out2 = tmp_path / "rules2.tsv"
        main(
            [
                "mine-rules", "--config", str(cfg), "--kg", str(kg_dir), "--target", "r2",
                "--min-coverage", "5", "--out", str(out2),
            ]
        )
        assert out2.read_text() == ""

    def test_env_var_dataset_root(self, tmp_path, monkeypatch):
        root = tmp_path / "datasets"
        root.mkdir()
        (root / "train.tsv").write_text("a\tr\tb\n", encoding="utf-8")
        monkeypatch.setenv("KGBENCH_DATA", str(root))
        kg_dir = tmp_path / "kg"
        assert main(["ingest", "--train", "train.tsv", "--out", str(kg_dir)]) == 0
