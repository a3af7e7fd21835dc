"""Random-forest predictive strength with mean-decrease-in-Gini importance."""

from __future__ import annotations

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .io import FeatureTable, Subset, merged_fraction
from .reports import ModelReport

DEFAULT_TREES = 500


def make_forest(rng_seed: int, n_estimators: int = DEFAULT_TREES) -> RandomForestClassifier:
    """Fixed hyperparameters: unlimited depth, sqrt(k) features per split."""
    return RandomForestClassifier(
        n_estimators=n_estimators,
        max_depth=None,
        max_features="sqrt",
        random_state=rng_seed,
        n_jobs=1,
    )


def fit_random_forest(
    table: FeatureTable,
    subset: Subset = Subset.ALL,
    rng_seed: int = 0,
    n_estimators: int = DEFAULT_TREES,
    columns: list[str] | None = None,
) -> ModelReport:
    """Gini importances over all feature columns, normalized to sum 1."""
    if columns is None:
        columns = table.feature_columns
    X, y, _ = table.design(columns, subset)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError(
            f"subset {subset.value} has a single outcome class; nothing to fit"
        )
    clf = make_forest(rng_seed, n_estimators)
    clf.fit(X, y)
    raw = clf.feature_importances_
    total = raw.sum()
    if total <= 0:
        raise ValueError("degenerate forest: zero total importance")
    normalized = raw / total
    report = ModelReport(
        kind="random_forest",
        variant=None,
        subset=subset.value,
        n_rows=len(y),
        baseline=merged_fraction(y),
        importances={name: float(v) for name, v in zip(columns, normalized)},
        metadata={
            "n_estimators": n_estimators,
            "max_depth": None,
            "max_features": "sqrt",
            "seed": rng_seed,
            "columns": list(columns),
        },
    )
    report.validate()
    return report
