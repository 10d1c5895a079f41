"""Report rendering fidelity and byte stability."""

import logging

import pytest

from kgbench.errors import DataError
from kgbench.report import (
    classification_csv,
    fmt_cell,
    fmt_rate,
    render_kbc_table,
    render_profile_table,
    render_report,
    validate_results,
)

PUBLISHED_KBC = {
    "FB15-237": {
        "TILDE": {"hits@1": 0.12, "hits@3": 0.27, "hits@10": 0.28},
        "ConvE": {"hits@1": 0.327, "hits@3": 0.356, "hits@10": 0.501},
        "Complex": {"hits@1": 0.158, "hits@3": 0.275, "hits@10": 0.428},
        "DistMult": {"hits@1": 0.155, "hits@3": 0.263, "hits@10": 0.419},
        "R-GCN": {"hits@1": 0.153, "hits@3": 0.258, "hits@10": 0.417},
    },
    "WN18-RR": {
        "TILDE": {"hits@1": 0.16, "hits@3": 0.16, "hits@10": 0.16},
        "ConvE": {"hits@1": 0.40, "hits@3": 0.44, "hits@10": 0.52},
        "DistMult": {"hits@1": 0.39, "hits@3": 0.44, "hits@10": 0.49},
        "R-GCN": {"hits@1": None, "hits@3": None, "hits@10": None},
    },
}


class TestFormatting:
    def test_leading_dot_rates(self):
        assert fmt_rate(0.155) == ".155"
        assert fmt_rate(0.5) == ".500"
        assert fmt_rate(-0.66) == "-.660"
        assert fmt_rate(1.0) == "1.000"
        assert fmt_rate(None) == "--"

    def test_mean_std_cell(self):
        assert fmt_cell(2.1, 5.64) == "2.10(5.64)"
        assert fmt_cell(-0.66, 0.02) == "-0.66(0.02)"
        assert fmt_cell(None, None) == "--"


class TestKbcTable:
    def test_published_fixture_rows(self):
        table = render_kbc_table(PUBLISHED_KBC)
        distmult_rows = [l for l in table.splitlines() if l.startswith("DistMult")]
        assert any(".155 .263 .419" in row for row in distmult_rows)
        conve_rows = [l for l in table.splitlines() if l.startswith("ConvE")]
        assert any(".327 .356 .501" in row for row in conve_rows)

    def test_missing_values_render_as_dashes(self):
        table = render_kbc_table(PUBLISHED_KBC)
        rgcn = [l for l in table.splitlines() if l.startswith("R-GCN")]
        assert any("-- -- --" in row for row in rgcn)


class TestRenderReport:
    def test_byte_identical_reruns(self, tmp_path):
        results = {"kbc": PUBLISHED_KBC, "classification": [
            {"dataset": "Hepatitis", "classifier": "decision_tree", "embedding": "DistMult", "acc_diff": 0.09}
        ]}
        render_report(results, tmp_path / "one")
        render_report(results, tmp_path / "two")
        for name in ("report.txt", "report.json", "classification.csv"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

    def test_empty_results_header_only(self, tmp_path, caplog):
        with caplog.at_level(logging.WARNING):
            written = render_report({}, tmp_path)
        assert any("empty" in rec.message for rec in caplog.records)
        assert (tmp_path / "classification.csv").read_text() == "dataset,classifier,embedding,acc_diff\n"

    def test_schema_violation(self):
        with pytest.raises(DataError, match="schema"):
            validate_results({"classification": [{"dataset": "x"}]})
        with pytest.raises(DataError, match="schema"):
            validate_results({"kbc": {"ds": {"m": {"hits@1": "high"}}}})

    def test_rules_histograms_written(self, tmp_path):
        results = {
            "rules": {
                "connected_relations_histogram": {"0-9": 3, "10-19": 1},
                "relations_per_theory_histogram": {"1": 5, "2": 2},
                "coverage_bins": {"0-49": 4, ">400": 1},
                "precision_vs_coverage": [[0.9, 12], [1.0, 500]],
            }
        }
        render_report(results, tmp_path)
        assert (tmp_path / "rule_coverage_bins.csv").read_text() == "bin,count\n0-49,4\n>400,1\n"
        scatter = (tmp_path / "precision_vs_coverage.csv").read_text().splitlines()
        assert scatter[0] == "precision,coverage"
        assert scatter[2] == "1.000000,500"

    def test_classification_csv_columns(self):
        rows = [{"dataset": "d", "classifier": "knn", "embedding": "TransE", "acc_diff": -0.02}]
        assert classification_csv(rows).splitlines()[1] == "d,knn,TransE,-0.0200"


class TestProfileTable:
    def test_renders_undefined_as_dashes(self):
        profile = {
            "informed": {
                "n_nodes": 3,
                "n_edges": 3,
                "n_components": 1,
                "component_size": {"mean": 3.0, "std": 0.0, "n": 1},
                "properties": {
                    "average_degree": {"mean": 2.0, "std": 0.0, "n": 3},
                    "degree_assortativity": None,
                },
            },
            "meta": {
                "n_attributes": 1,
                "n_relations": 2,
                "edge_reduction": 0.87,
                "degree_proportion": 0.12,
            },
        }
        table = render_profile_table(profile)
        assert "--" in table
        assert ".870" in table
        assert "2.00(0.00)" in table
