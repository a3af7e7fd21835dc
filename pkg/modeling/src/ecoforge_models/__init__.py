"""Statistical models over ecoforge feature matrices."""

from .ablation import inverse_ablation, stratified_project_folds
from .forest import fit_random_forest
from .io import (
    ABLATION_GROUPS,
    ABLATION_ORDER,
    FeatureTable,
    Subset,
    Variant,
    always_merge_f1,
    variant_columns,
)
from .mixedlogit import fit_mixed_logit
from .reports import Coefficient, ModelReport
from .summary import write_summary

__version__ = "0.1.0"
