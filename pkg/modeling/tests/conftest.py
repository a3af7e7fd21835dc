"""Fixtures: synthetic feature CSVs built directly at the file interface."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent))

SCOPES = ("intra_project", "ecosystem", "downstream", "upstream", "non_dependency")
TYPES = (
    "prs_submitted",
    "pr_merge_ratio",
    "pr_comments",
    "issues_submitted",
    "issue_comments",
)
CONTRIBUTION_COLUMNS = [f"{s}_{t}" for s in SCOPES for t in TYPES]
CONTROL_COLUMNS = [
    "ctrl_commit_count",
    "ctrl_age_minutes",
    "ctrl_integrator_experience",
    "ctrl_self_integrated",
    "ctrl_has_comments",
    "ctrl_external_comment",
    "ctrl_has_hash_reference",
    "ctrl_is_newcomer",
]
FEATURE_COLUMNS = CONTRIBUTION_COLUMNS + CONTROL_COLUMNS + ["centrality", "direct_collab"]
CSV_COLUMNS = ["pr_id", "project", "submitter"] + FEATURE_COLUMNS + ["label_merged"]

BOOLEAN_COLUMNS = {
    "ctrl_self_integrated",
    "ctrl_has_comments",
    "ctrl_external_comment",
    "ctrl_has_hash_reference",
    "ctrl_is_newcomer",
}


def synth_feature_frame(
    n: int,
    seed: int,
    n_projects: int = 25,
    effects: dict[str, float] | None = None,
    intercept: float = 0.8,
    project_sigma: float = 0.5,
) -> pd.DataFrame:
    """A matrix that looks like pipeline output: [0,1] features, 0/1 label.

    The label follows a logistic model over the named columns so estimator
    tests have exact ground truth on this design.
    """
    rng = np.random.default_rng(seed)
    frame = pd.DataFrame()
    frame["pr_id"] = [f"pr-{i:06d}" for i in range(n)]
    projects = rng.integers(0, n_projects, n)
    frame["project"] = [f"org/p{j:03d}" for j in projects]
    frame["submitter"] = [f"u{int(v):04d}" for v in rng.integers(0, max(n // 8, 4), n)]
    for column in FEATURE_COLUMNS:
        if column in BOOLEAN_COLUMNS:
            frame[column] = rng.binomial(1, 0.35, n).astype(float)
        else:
            frame[column] = np.round(rng.random(n), 9)
    effects = effects or {}
    eta = np.full(n, intercept)
    for column, coef in effects.items():
        eta += coef * frame[column].to_numpy()
    eta += rng.normal(0.0, project_sigma, n_projects)[projects]
    frame["label_merged"] = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(int)
    return frame


def write_feature_csv(path: Path, frame: pd.DataFrame) -> Path:
    frame = frame[CSV_COLUMNS]
    frame.to_csv(path, index=False)
    metadata = {
        "columns": CSV_COLUMNS,
        "id_columns": ["pr_id", "project", "submitter"],
        "label_column": "label_merged",
        "config": {"rng_seed": 0},
    }
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fp:
        json.dump(metadata, fp, indent=2)
    return path


@pytest.fixture
def small_table(tmp_path):
    from ecoforge_models import FeatureTable

    frame = synth_feature_frame(
        1500, seed=11,
        effects={"ecosystem_prs_submitted": 1.2, "ctrl_is_newcomer": -0.8},
    )
    path = write_feature_csv(tmp_path / "features.csv", frame)
    return FeatureTable.load(path)
