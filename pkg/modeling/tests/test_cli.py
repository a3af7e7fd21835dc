"""Modeling CLI: report files, summary assembly, exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from ecoforge_models.cli import main

from conftest import synth_feature_frame, write_feature_csv


def run_cli(*args: str, capsys) -> tuple[int, str, str]:
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def features_csv(tmp_path) -> Path:
    frame = synth_feature_frame(
        1200, seed=31,
        effects={"ecosystem_prs_submitted": 1.4, "ctrl_is_newcomer": -0.7},
    )
    return write_feature_csv(tmp_path / "features.csv", frame)


def test_regress_writes_one_report_per_variant_subset(features_csv, tmp_path, capsys):
    out = tmp_path / "reports"
    code, stdout, _ = run_cli(
        "regress", "--features", str(features_csv), "--out", str(out),
        "--seed", "2", capsys=capsys,
    )
    assert code == 0
    files = sorted(p.name for p in out.glob("mixed_logit_*.json"))
    assert len(files) == 9  # 3 variants x 3 subsets
    report = json.loads((out / "mixed_logit_ecosystem_all.json").read_text())
    assert report["metadata"]["method"].startswith("Laplace")
    assert "ecosystem_prs_submitted" in report["coefficients"]


def test_forest_and_ablate_and_summary(features_csv, tmp_path, capsys):
    out = tmp_path / "reports"
    code, _, _ = run_cli(
        "forest", "--features", str(features_csv), "--subset", "all",
        "--trees", "40", "--out", str(out), capsys=capsys,
    )
    assert code == 0
    code, stdout, _ = run_cli(
        "ablate", "--features", str(features_csv),
        "--groups", "control", "--groups", "ecosystem", "--groups", "all_variables",
        "--subset", "all", "--trees", "25", "--seed", "4",
        "--out", str(out), capsys=capsys,
    )
    assert code == 0
    assert "baseline=" in stdout
    code, _, _ = run_cli(
        "regress", "--features", str(features_csv), "--variant", "ecosystem",
        "--subset", "all", "--out", str(out), capsys=capsys,
    )
    assert code == 0
    summary = tmp_path / "summary.md"
    code, _, _ = run_cli(
        "summarize", "--reports", str(out), "--out", str(summary), capsys=capsys,
    )
    assert code == 0
    text = summary.read_text()
    assert "## Mixed-effects logistic regression" in text
    assert "## Inverse ablation" in text
    assert "| *Baseline (merged fraction)* |" in text
    assert "Ecosystem model" in text
    assert "All variables" in text
    assert "## Random-forest importances" in text


def test_ablate_rejects_single_class_subset(tmp_path, capsys):
    frame = synth_feature_frame(300, seed=5)
    frame["label_merged"] = 1
    path = write_feature_csv(tmp_path / "degenerate.csv", frame)
    code, _, err = run_cli(
        "ablate", "--features", str(path), "--groups", "control",
        "--subset", "all", "--trees", "10", "--out", str(tmp_path / "r"),
        capsys=capsys,
    )
    assert code == 2
    assert "single outcome class" in err


def test_usage_errors_exit_one(tmp_path, capsys):
    assert run_cli("regress", capsys=capsys)[0] == 1
    assert run_cli(
        "ablate", "--features", "nope.csv", "--out", str(tmp_path), capsys=capsys
    )[0] == 1  # nonexistent path fails click validation
