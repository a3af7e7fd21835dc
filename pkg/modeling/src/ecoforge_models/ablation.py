"""Inverse ablation: per-variable-group cross-validated F1 scores.

Folds are stratified by label within each project so every fold carries
the same project mix and class balance the full matrix has.
"""

from __future__ import annotations

import numpy as np
from sklearn.metrics import f1_score

from .forest import DEFAULT_TREES, make_forest
from .io import (
    ABLATION_GROUPS,
    ABLATION_ORDER,
    FeatureTable,
    Subset,
    always_merge_f1,
    merged_fraction,
)
from .reports import ModelReport


def stratified_project_folds(
    projects: np.ndarray, labels: np.ndarray, n_folds: int, rng_seed: int
) -> np.ndarray:
    """Fold assignment per row, stratified by (project, label) cells.

    Rows of each cell are shuffled then dealt round-robin from a rotating
    offset, so fold sizes differ by at most one row per cell. Raises when
    any training fold would end up single-class.
    """
    rng = np.random.default_rng(rng_seed)
    folds = np.empty(len(labels), dtype=np.int64)
    offset = 0
    order = np.lexsort((labels, projects))
    boundaries = np.flatnonzero(
        np.diff(projects[order]) != 0
    )
    cell_starts = [0]
    for b in boundaries:
        cell_starts.append(b + 1)
    # Split each project run further by label.
    for start, stop in zip(cell_starts, cell_starts[1:] + [len(order)]):
        run = order[start:stop]
        for value in (0.0, 1.0):
            cell = run[labels[run] == value]
            if len(cell) == 0:
                continue
            cell = cell.copy()
            rng.shuffle(cell)
            for i, row in enumerate(cell):
                folds[row] = (offset + i) % n_folds
            offset += len(cell)
    for fold in range(n_folds):
        train_labels = labels[folds != fold]
        if len(np.unique(train_labels)) < 2:
            raise ValueError(
                f"training fold {fold} is single-class; "
                "stratified folding impossible on this subset"
            )
    return folds


def cross_validated_f1(
    X: np.ndarray,
    y: np.ndarray,
    folds: np.ndarray,
    n_folds: int,
    rng_seed: int,
    n_estimators: int,
) -> list[float]:
    scores = []
    for fold in range(n_folds):
        train = folds != fold
        test = ~train
        clf = make_forest(rng_seed + fold, n_estimators)
        clf.fit(X[train], y[train])
        predictions = clf.predict(X[test])
        assert set(np.unique(predictions)) <= {0.0, 1.0}
        scores.append(float(f1_score(y[test], predictions)))
    return scores


def inverse_ablation(
    table: FeatureTable,
    groups: list[str] | None = None,
    folds: int = 5,
    rng_seed: int = 0,
    subsets: tuple[Subset, ...] = (Subset.ALL, Subset.NEWCOMER, Subset.NON_NEWCOMER),
    n_estimators: int = DEFAULT_TREES,
) -> list[ModelReport]:
    """One report per (group, subset) with fold F1 mean/std and baseline."""
    if groups is None:
        groups = list(ABLATION_ORDER)
    unknown = [g for g in groups if g not in ABLATION_GROUPS]
    if unknown:
        raise ValueError(f"unknown ablation groups: {unknown}")
    reports: list[ModelReport] = []
    for subset in subsets:
        all_columns = table.feature_columns
        X_full, y, projects = table.design(all_columns, subset)
        if len(np.unique(y)) < 2:
            raise ValueError(f"subset {subset.value} has a single outcome class")
        assignment = stratified_project_folds(projects, y, folds, rng_seed)
        fraction = merged_fraction(y)
        column_index = {name: j for j, name in enumerate(all_columns)}
        for group in groups:
            columns = [c for c in ABLATION_GROUPS[group] if c in column_index]
            X = X_full[:, [column_index[c] for c in columns]]
            scores = cross_validated_f1(
                X, y, assignment, folds, rng_seed, n_estimators
            )
            report = ModelReport(
                kind="ablation",
                variant=None,
                group=group,
                subset=subset.value,
                n_rows=len(y),
                baseline=fraction,
                f1_mean=float(np.mean(scores)),
                f1_std=float(np.std(scores)),
                fold_f1=scores,
                always_merge_f1=always_merge_f1(fraction),
                metadata={
                    "folds": folds,
                    "seed": rng_seed,
                    "n_estimators": n_estimators,
                    "columns": columns,
                },
            )
            report.validate()
            reports.append(report)
    return reports
