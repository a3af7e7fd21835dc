"""Matrix-stage passes: transforms, screening, outliers, sampling, export.

The assembled feature rows become a numeric matrix with a fixed column
registry. Long-tailed columns get an add-one log transform, everything is
min-max scaled, multicollinearity is screened with VIF + Spearman and
resolved by a fixed keep-one-per-group rule, influential rows are dropped
by Cook's distance from a plain logistic fit, and oversized projects are
subsampled to a cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .features import ECOSYSTEM, SCOPE_KEYS, FeatureRow

CONTRIBUTION_TYPES = (
    "prs_submitted",
    "pr_merge_ratio",
    "pr_comments",
    "issues_submitted",
    "issue_comments",
)
CONTRIBUTION_COLUMNS = tuple(
    f"{scope}_{kind}" for scope in SCOPE_KEYS for kind in CONTRIBUTION_TYPES
)
CONTROL_COLUMNS = (
    "ctrl_commit_count",
    "ctrl_age_minutes",
    "ctrl_integrator_experience",
    "ctrl_self_integrated",
    "ctrl_has_comments",
    "ctrl_external_comment",
    "ctrl_has_hash_reference",
    "ctrl_is_newcomer",
)
COLLAB_COLUMNS = ("centrality", "direct_collab")
FEATURE_COLUMNS = CONTRIBUTION_COLUMNS + CONTROL_COLUMNS + COLLAB_COLUMNS
ID_COLUMNS = ("pr_id", "project", "submitter")
LABEL_COLUMN = "label_merged"
CSV_COLUMNS = ID_COLUMNS + FEATURE_COLUMNS + (LABEL_COLUMN,)

# Columns with long-tailed distributions, transformed x -> ln(x + 1):
# every count, the PR age, and both collaboration metrics. The list is
# static so the transform never depends on the data at hand.
LOG_COLUMNS = tuple(
    col
    for col in FEATURE_COLUMNS
    if col.endswith(("prs_submitted", "pr_comments", "issues_submitted", "issue_comments"))
    or col
    in ("ctrl_commit_count", "ctrl_age_minutes", "ctrl_integrator_experience")
    + COLLAB_COLUMNS
)

# The keep-one-variable-per-contribution-group resolution: submitted
# issues represent intra-project contributions (newcomers have zero
# intra-project PRs by definition), submitted PRs represent every
# ecosystem-level group.
SCREEN_KEEP = {
    "intra_project": "intra_project_issues_submitted",
    ECOSYSTEM: f"{ECOSYSTEM}_prs_submitted",
    "downstream": "downstream_prs_submitted",
    "upstream": "upstream_prs_submitted",
    "non_dependency": "non_dependency_prs_submitted",
}
SCREEN_DROPPED = tuple(
    f"{scope}_{kind}"
    for scope in SCOPE_KEYS
    for kind in CONTRIBUTION_TYPES
    if f"{scope}_{kind}" != SCREEN_KEEP[scope]
)


def rows_to_matrix(rows: Sequence[FeatureRow]) -> np.ndarray:
    """Raw numeric matrix in FEATURE_COLUMNS order (booleans as 0/1)."""
    out = np.empty((len(rows), len(FEATURE_COLUMNS)), dtype=np.float64)
    for i, row in enumerate(rows):
        values = []
        for scope in SCOPE_KEYS:
            c = row.contributions[scope]
            values.extend(
                (c.prs_submitted, c.pr_merge_ratio, c.pr_comments,
                 c.issues_submitted, c.issue_comments)
            )
        ctrl = row.controls
        values.extend(
            (
                ctrl.commit_count,
                ctrl.age_minutes,
                ctrl.integrator_experience,
                float(ctrl.self_integrated),
                float(ctrl.has_comments),
                float(ctrl.external_comment),
                float(ctrl.has_hash_reference),
                float(ctrl.is_newcomer),
            )
        )
        values.extend((row.centrality, row.direct_collab))
        out[i] = values
    return out


def labels_from_rows(rows: Sequence[FeatureRow]) -> np.ndarray:
    return np.array([1.0 if row.merged else 0.0 for row in rows], dtype=np.float64)


@dataclass
class TransformMetadata:
    log_columns: list[str]
    minmax: dict[str, tuple[float, float]]
    constant_columns: list[str] = field(default_factory=list)


def transform_matrix(
    matrix: np.ndarray, columns: Sequence[str] = FEATURE_COLUMNS
) -> tuple[np.ndarray, TransformMetadata]:
    """Apply ln(x+1) to long-tailed columns, then min-max scale everything.

    Constant columns scale to all-zeros and are reported as diagnostics
    rather than failing the run.
    """
    if matrix.shape[0] == 0:
        raise ValueError("empty matrix")
    out = matrix.astype(np.float64, copy=True)
    log_set = set(LOG_COLUMNS)
    applied_log = []
    for j, col in enumerate(columns):
        if col in log_set:
            if np.any(out[:, j] < 0):
                raise ValueError(f"negative value in count column {col}")
            out[:, j] = np.log1p(out[:, j])
            applied_log.append(col)
    minmax: dict[str, tuple[float, float]] = {}
    constant: list[str] = []
    for j, col in enumerate(columns):
        lo = float(out[:, j].min())
        hi = float(out[:, j].max())
        minmax[col] = (lo, hi)
        if hi > lo:
            out[:, j] = (out[:, j] - lo) / (hi - lo)
        else:
            out[:, j] = 0.0
            constant.append(col)
    return out, TransformMetadata(
        log_columns=applied_log, minmax=minmax, constant_columns=constant
    )


@dataclass
class ScreenReport:
    vif: dict[str, float]
    flagged: dict[str, list[str]]
    dropped: list[str]
    retained: list[str]


def _vif_values(matrix: np.ndarray, columns: Sequence[str]) -> dict[str, float]:
    n, k = matrix.shape
    vif: dict[str, float] = {}
    ones = np.ones((n, 1))
    for j, col in enumerate(columns):
        y = matrix[:, j]
        others = np.hstack([ones, np.delete(matrix, j, axis=1)])
        coef, _, _, _ = np.linalg.lstsq(others, y, rcond=None)
        resid = y - others @ coef
        ss_res = float(resid @ resid)
        centered = y - y.mean()
        ss_tot = float(centered @ centered)
        if ss_tot <= 0.0:
            vif[col] = float("inf")
            continue
        r2 = 1.0 - ss_res / ss_tot
        if 1.0 - r2 < 1e-12:
            vif[col] = float("inf")
        else:
            vif[col] = 1.0 / (1.0 - r2)
    return vif


def multicollinearity_screen(
    matrix: np.ndarray,
    columns: Sequence[str] = FEATURE_COLUMNS,
    vif_threshold: float = 5.0,
    spearman_threshold: float = 0.5,
) -> ScreenReport:
    """VIF + Spearman report, resolved by the fixed keep-one rule.

    The report lists, for each column with VIF at or above the threshold,
    the partner columns it rank-correlates with at |rho| at or above the
    Spearman threshold. The resolution itself is static: one contribution
    variable per scope group survives (see SCREEN_KEEP); everything else
    in those groups is dropped regardless of the measured values, keeping
    the retained set deterministic across corpora.
    """
    columns = list(columns)
    vif = _vif_values(matrix, columns)
    flagged: dict[str, list[str]] = {}
    high = [col for col in columns if vif[col] >= vif_threshold]
    if high:
        rho = stats.spearmanr(matrix, axis=0).statistic
        if np.isscalar(rho):  # two-column matrices collapse to a scalar
            rho = np.array([[1.0, rho], [rho, 1.0]])
        col_index = {col: j for j, col in enumerate(columns)}
        for col in high:
            j = col_index[col]
            partners = [
                other
                for other in columns
                if other != col and abs(rho[j, col_index[other]]) >= spearman_threshold
            ]
            flagged[col] = partners
    dropped = [col for col in SCREEN_DROPPED if col in columns]
    retained = [col for col in columns if col not in set(dropped)]
    return ScreenReport(vif=vif, flagged=flagged, dropped=dropped, retained=retained)


@dataclass
class CooksResult:
    kept: np.ndarray  # indices into the input rows
    dropped: np.ndarray
    threshold: float
    distances: np.ndarray
    n: int
    k: int

    @property
    def drop_fraction(self) -> float:
        return len(self.dropped) / self.n if self.n else 0.0


def cooks_threshold(n: int, k: int, multiplier: float = 4.0) -> float:
    """Influence cut-off: multiplier / (n - k - 1)."""
    denom = n - k - 1
    if denom <= 0:
        raise ValueError(f"too few rows ({n}) for {k} predictors")
    return multiplier / denom


def _irls_logistic(
    X: np.ndarray, y: np.ndarray, max_iter: int = 100, tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fit a plain logistic regression; returns (beta, fitted pi, weights)."""
    n, p = X.shape
    beta = np.zeros(p)
    for _ in range(max_iter):
        eta = np.clip(X @ beta, -30.0, 30.0)
        pi = 1.0 / (1.0 + np.exp(-eta))
        w = np.clip(pi * (1.0 - pi), 1e-10, None)
        z = eta + (y - pi) / w
        Xw = X * w[:, None]
        try:
            beta_new = np.linalg.solve(X.T @ Xw, Xw.T @ z)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(
                "fixed-effects logistic regression (Cook's screen): singular system"
            ) from exc
        if np.max(np.abs(beta_new - beta)) < tol:
            beta = beta_new
            eta = np.clip(X @ beta, -30.0, 30.0)
            pi = 1.0 / (1.0 + np.exp(-eta))
            w = np.clip(pi * (1.0 - pi), 1e-10, None)
            return beta, pi, w
        beta = beta_new
    raise RuntimeError(
        "fixed-effects logistic regression (Cook's screen) did not converge"
    )


def cooks_outlier_filter(
    matrix: np.ndarray, labels: np.ndarray, cooks_multiplier: float = 4.0
) -> CooksResult:
    """Drop rows whose Cook's distance exceeds multiplier/(n − k − 1).

    The distances come from the final weighted least-squares step of an
    IRLS logistic fit: D_i = r_i^2 h_ii / (p (1 − h_ii)^2) with Pearson
    residuals r and hat diagonal h.
    """
    n, k = matrix.shape
    threshold = cooks_threshold(n, k, cooks_multiplier)
    X = np.hstack([np.ones((n, 1)), matrix])
    beta, pi, w = _irls_logistic(X, labels)
    p = k + 1
    A = X.T @ (X * w[:, None])
    try:
        T = np.linalg.solve(A, X.T)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            "fixed-effects logistic regression (Cook's screen): singular system"
        ) from exc
    h = np.clip(w * np.einsum("ij,ji->i", X, T), 0.0, 1.0 - 1e-12)
    pearson = (labels - pi) / np.sqrt(w)
    distances = (pearson**2 * h) / (p * (1.0 - h) ** 2)
    dropped = np.flatnonzero(distances > threshold)
    kept = np.flatnonzero(distances <= threshold)
    return CooksResult(
        kept=kept, dropped=dropped, threshold=threshold, distances=distances, n=n, k=k
    )


def cap_sampling(
    rows: Sequence[FeatureRow], cap: int, cap_fraction: float, rng_seed: int
) -> list[FeatureRow]:
    """Subsample the busiest projects down to `cap` rows each.

    Projects in the top `cap_fraction` share by row count (at least one
    when any exist) are uniformly subsampled without replacement; all
    other projects pass through untouched. The surviving rows keep their
    original order, and the same seed always selects the same rows.
    """
    counts: dict[str, int] = {}
    for row in rows:
        counts[row.project] = counts.get(row.project, 0) + 1
    if not counts:
        return list(rows)
    n_top = int(np.ceil(cap_fraction * len(counts)))
    ranked = sorted(counts, key=lambda project: (-counts[project], project))
    top = ranked[:n_top]
    rng = np.random.default_rng(rng_seed)
    keep_mask = np.ones(len(rows), dtype=bool)
    row_positions: dict[str, list[int]] = {}
    for i, row in enumerate(rows):
        row_positions.setdefault(row.project, []).append(i)
    for project in top:  # ranked order keeps draws deterministic
        positions = row_positions[project]
        if len(positions) <= cap:
            continue
        chosen = rng.choice(len(positions), size=cap, replace=False)
        selected = set(chosen.tolist())
        for local_idx, global_idx in enumerate(positions):
            if local_idx not in selected:
                keep_mask[global_idx] = False
    return [row for row, keep in zip(rows, keep_mask) if keep]


def format_value(value: float) -> str:
    """Nine significant digits; integers stay integral."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return format(value, ".9g")


def write_csv(
    path: str,
    rows: Sequence[FeatureRow],
    matrix: np.ndarray,
    labels: np.ndarray,
) -> None:
    """Write the transformed matrix with identifier and label columns."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, row in enumerate(rows):
            cells = [row.pr_id, row.project, row.submitter]
            cells.extend(format_value(v) for v in matrix[i])
            cells.append(str(int(labels[i])))
            writer.writerow(cells)
