"""Feature-matrix loading and variable-set definitions.

The only interface to the feature pipeline is its CSV plus the sidecar
metadata JSON; column names and the screen's dropped list come from there.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

LABEL = "label_merged"
PROJECT = "project"

CONTROLS = (
    "ctrl_is_newcomer",
    "ctrl_self_integrated",
    "ctrl_has_comments",
    "ctrl_has_hash_reference",
    "ctrl_external_comment",
    "ctrl_age_minutes",
    "ctrl_commit_count",
)
# Integrator experience stays out of the regressions (multicollinear with
# intra-project contributions) but participates in the forests.
FOREST_ONLY_CONTROL = "ctrl_integrator_experience"

SCOPES = ("intra_project", "ecosystem", "downstream", "upstream", "non_dependency")
TYPES = (
    "prs_submitted",
    "pr_merge_ratio",
    "pr_comments",
    "issues_submitted",
    "issue_comments",
)

INTRA_REPRESENTATIVE = "intra_project_issues_submitted"
ECO_REPRESENTATIVES = {
    "ecosystem": "ecosystem_prs_submitted",
    "downstream": "downstream_prs_submitted",
    "upstream": "upstream_prs_submitted",
    "non_dependency": "non_dependency_prs_submitted",
}
COLLAB = ("centrality", "direct_collab")


class Variant(enum.Enum):
    ECOSYSTEM = "ecosystem"
    DEPENDENCY = "dependency"
    COLLABORATIVE = "collaborative"


class Subset(enum.Enum):
    ALL = "all"
    NEWCOMER = "newcomer"
    NON_NEWCOMER = "non_newcomer"


def variant_columns(variant: Variant, subset: Subset) -> list[str]:
    """Regression design per model variant, mirroring the report tables.

    The collaborative variant omits the newcomer and self-integration
    controls; the newcomer flag also drops out of the newcomer splits,
    where it is constant.
    """
    controls = list(CONTROLS)
    if variant is Variant.COLLABORATIVE:
        controls.remove("ctrl_is_newcomer")
        controls.remove("ctrl_self_integrated")
    elif subset is not Subset.ALL:
        controls.remove("ctrl_is_newcomer")
    if variant is Variant.ECOSYSTEM:
        extra = [INTRA_REPRESENTATIVE, ECO_REPRESENTATIVES["ecosystem"]]
    elif variant is Variant.DEPENDENCY:
        extra = [
            INTRA_REPRESENTATIVE,
            ECO_REPRESENTATIVES["non_dependency"],
            ECO_REPRESENTATIVES["downstream"],
            ECO_REPRESENTATIVES["upstream"],
        ]
    else:
        extra = [INTRA_REPRESENTATIVE, *COLLAB]
    return controls + extra


def contribution_group(scope: str) -> list[str]:
    return [f"{scope}_{kind}" for kind in TYPES]


ABLATION_GROUPS: dict[str, list[str]] = {
    "control": list(CONTROLS) + [FOREST_ONLY_CONTROL],
    "intra_project": contribution_group("intra_project"),
    "ecosystem": contribution_group("ecosystem"),
    "non_dependency": contribution_group("non_dependency"),
    "downstream": contribution_group("downstream"),
    "upstream": contribution_group("upstream"),
    "collaboration": list(COLLAB),
}
ABLATION_GROUPS["combined_intra"] = (
    ABLATION_GROUPS["control"] + ABLATION_GROUPS["intra_project"]
)
ABLATION_GROUPS["combined_ecosystem"] = (
    ABLATION_GROUPS["ecosystem"]
    + ABLATION_GROUPS["non_dependency"]
    + ABLATION_GROUPS["downstream"]
    + ABLATION_GROUPS["upstream"]
    + ABLATION_GROUPS["collaboration"]
)
ABLATION_GROUPS["all_variables"] = (
    ABLATION_GROUPS["combined_intra"] + ABLATION_GROUPS["combined_ecosystem"]
)
ABLATION_ORDER = (
    "control",
    "intra_project",
    "combined_intra",
    "ecosystem",
    "non_dependency",
    "downstream",
    "upstream",
    "collaboration",
    "combined_ecosystem",
    "all_variables",
)


@dataclass
class FeatureTable:
    """Loaded matrix plus the pipeline's metadata."""

    frame: pd.DataFrame
    metadata: dict

    @classmethod
    def load(cls, csv_path: str | Path, meta_path: str | Path | None = None) -> "FeatureTable":
        csv_path = Path(csv_path)
        if meta_path is None:
            meta_path = Path(str(csv_path) + ".meta.json")
        frame = pd.read_csv(csv_path, dtype={"pr_id": str, PROJECT: str, "submitter": str})
        if LABEL not in frame.columns:
            raise ValueError(f"feature CSV has no {LABEL} column")
        with open(meta_path, "r", encoding="utf-8") as fp:
            metadata = json.load(fp)
        expected = metadata.get("columns")
        if expected and list(frame.columns) != list(expected):
            raise ValueError("feature CSV columns do not match metadata")
        return cls(frame=frame, metadata=metadata)

    @property
    def feature_columns(self) -> list[str]:
        skip = set(self.metadata.get("id_columns", ("pr_id", PROJECT, "submitter")))
        skip.add(LABEL)
        return [c for c in self.frame.columns if c not in skip]

    def subset(self, subset: Subset) -> pd.DataFrame:
        if subset is Subset.ALL:
            return self.frame
        newcomer = self.frame["ctrl_is_newcomer"] > 0.5
        part = self.frame[newcomer if subset is Subset.NEWCOMER else ~newcomer]
        return part

    def design(self, columns: list[str], subset: Subset = Subset.ALL):
        """(X, y, project codes) for the requested columns and subset."""
        part = self.subset(subset)
        missing = [c for c in columns if c not in part.columns]
        if missing:
            raise ValueError(f"missing feature columns: {missing}")
        X = part[columns].to_numpy(dtype=np.float64)
        y = part[LABEL].to_numpy(dtype=np.float64)
        projects = pd.Categorical(part[PROJECT]).codes.astype(np.int64)
        return X, y, projects

    def check_subset_partition(self) -> None:
        n_all = len(self.subset(Subset.ALL))
        n_new = len(self.subset(Subset.NEWCOMER))
        n_old = len(self.subset(Subset.NON_NEWCOMER))
        if n_new + n_old != n_all:
            raise AssertionError(
                f"subset sizes do not partition: {n_new} + {n_old} != {n_all}"
            )


def merged_fraction(y: np.ndarray) -> float:
    return float(np.mean(y)) if len(y) else 0.0


def always_merge_f1(fraction: float) -> float:
    """F1 of the classifier that predicts merged for everything."""
    if fraction <= 0.0:
        return 0.0
    return 2.0 * fraction / (fraction + 1.0)
