"""Deterministic report rendering: text tables in the per-dataset layout,
machine-readable JSON and plot-ready CSVs.

Rendering is byte-stable for identical inputs: fixed float formats, sorted
or insertion-ordered iteration only, and newline-normalized output.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import jsonschema

from .errors import DataError
from .graphs import PROPERTY_ORDER

log = logging.getLogger(__name__)

_HITS_COLUMNS = ("hits@1", "hits@3", "hits@10")

RESULTS_SCHEMA = {
    "type": "object",
    "additionalProperties": True,
    "properties": {
        "kbc": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "properties": {k: {"type": ["number", "null"]} for k in _HITS_COLUMNS},
                    "additionalProperties": True,
                },
            },
        },
        "classification": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["dataset", "classifier", "embedding", "acc_diff"],
                "properties": {
                    "dataset": {"type": "string"},
                    "classifier": {"type": "string"},
                    "embedding": {"type": "string"},
                    "acc_diff": {"type": "number"},
                },
            },
        },
        "rules": {
            "type": "object",
            "properties": {
                "connected_relations_histogram": {"type": "object"},
                "relations_per_theory_histogram": {"type": "object"},
                "coverage_bins": {"type": "object"},
                "precision_vs_coverage": {"type": "array"},
            },
            "additionalProperties": True,
        },
        "profile": {"type": "object"},
    },
}


def validate_results(results: dict) -> None:
    try:
        jsonschema.validate(results, RESULTS_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise DataError(f"results do not match the report schema: {exc.message}") from None


def fmt_rate(v: float | None) -> str:
    """Leading-dot 3-decimal rate rendering: 0.155 -> \".155\"."""
    if v is None:
        return "--"
    s = f"{v:.3f}"
    if s.startswith("0."):
        return s[1:]
    if s.startswith("-0."):
        return "-" + s[2:]
    return s


def fmt_cell(mean: float | None, std: float | None) -> str:
    """mean(std) cell, \"--\" for undefined."""
    if mean is None:
        return "--"
    return f"{mean:.2f}({(std or 0.0):.2f})"


def render_kbc_table(kbc: dict) -> str:
    """Per-dataset completion table with Hits@1, Hits@3, Hits@10 columns."""
    lines = []
    name_width = max([len(m) for ds in kbc.values() for m in ds] + [8])
    for dataset, methods in kbc.items():
        lines.append(f"== {dataset} ==")
        lines.append(" ".join([f"{'method':<{name_width}}", "Hits@1", "Hits@3", "Hits@10"]))
        for method, vals in methods.items():
            cells = " ".join(fmt_rate(vals.get(k)) for k in _HITS_COLUMNS)
            lines.append(f"{method:<{name_width}} {cells}")
        lines.append("")
    return "\n".join(lines)


def render_profile_table(profile: dict) -> str:
    """Property table with mean(std) cells per graph mode."""
    modes = [m for m in ("informed", "uninformed") if m in profile]
    lines = []
    header = f"{'statistic':<32}" + "".join(f"{m:>20}" for m in modes)
    lines.append(header)
    for prop in PROPERTY_ORDER:
        row = f"{prop:<32}"
        for m in modes:
            stat = profile[m]["properties"].get(prop)
            cell = fmt_cell(stat["mean"], stat["std"]) if stat else "--"
            row += f"{cell:>20}"
        lines.append(row)
    for label, key in (
        ("number of components", "n_components"),
        ("nodes", "n_nodes"),
        ("edges", "n_edges"),
    ):
        row = f"{label:<32}"
        for m in modes:
            row += f"{profile[m][key]:>20}"
        lines.append(row)
    row = f"{'average component size':<32}"
    for m in modes:
        stat = profile[m].get("component_size")
        row += f"{fmt_cell(stat['mean'], stat['std']) if stat else '--':>20}"
    lines.append(row)
    meta = profile.get("meta")
    if meta:
        lines.append("")
        lines.append(f"{'number of attributes':<32}{meta['n_attributes']:>20}")
        lines.append(f"{'number of relations':<32}{meta['n_relations']:>20}")
        lines.append(f"{'edge reduction':<32}{fmt_rate(meta['edge_reduction']):>20}")
        lines.append(f"{'degree proportion':<32}{fmt_rate(meta['degree_proportion']):>20}")
    lines.append("")
    lines.append("note: reified hub nodes count as entities in all statistics")
    return "\n".join(lines) + "\n"


def classification_csv(rows: list[dict]) -> str:
    """Bubble-plot data: one row per dataset x classifier x embedding."""
    out = ["dataset,classifier,embedding,acc_diff"]
    for row in rows:
        out.append(
            f"{row['dataset']},{row['classifier']},{row['embedding']},{row['acc_diff']:.4f}"
        )
    return "\n".join(out) + "\n"


def histogram_csv(hist: dict, key_name: str) -> str:
    out = [f"{key_name},count"]
    for k, v in hist.items():
        out.append(f"{k},{v}")
    return "\n".join(out) + "\n"


def scatter_csv(points: list) -> str:
    out = ["precision,coverage"]
    for p in points:
        conf, cov = p[0], p[1]
        out.append(f"{conf:.6f},{int(cov)}")
    return "\n".join(out) + "\n"


def render_report(results: dict, out_dir: Path) -> list[Path]:
    """Validate and render everything present in `results` into `out_dir`.

    Writes report.txt plus one CSV per plottable block; empty results
    produce header-only artifacts with a warning. Returns written paths.
    """
    validate_results(results)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    text_blocks: list[str] = []

    if not any(k in results for k in ("kbc", "classification", "rules", "profile")):
        log.warning("empty results: writing header-only artifacts")

    kbc = results.get("kbc", {})
    if kbc:
        text_blocks.append(render_kbc_table(kbc))
    cls_rows = results.get("classification", [])
    path = out_dir / "classification.csv"
    path.write_text(classification_csv(cls_rows), encoding="utf-8")
    written.append(path)

    rules = results.get("rules", {})
    for key, fname in (
        ("connected_relations_histogram", "connected_relations.csv"),
        ("relations_per_theory_histogram", "relations_per_theory.csv"),
        ("coverage_bins", "rule_coverage_bins.csv"),
    ):
        if key in rules:
            path = out_dir / fname
            path.write_text(histogram_csv(rules[key], "bin"), encoding="utf-8")
            written.append(path)
    if "precision_vs_coverage" in rules:
        path = out_dir / "precision_vs_coverage.csv"
        path.write_text(scatter_csv(rules["precision_vs_coverage"]), encoding="utf-8")
        written.append(path)

    profile = results.get("profile")
    if profile:
        text_blocks.append(render_profile_table(profile))

    report_txt = out_dir / "report.txt"
    report_txt.write_text("\n".join(text_blocks) if text_blocks else "", encoding="utf-8")
    written.append(report_txt)

    report_json = out_dir / "report.json"
    report_json.write_text(
        json.dumps(results, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append(report_json)
    return written
