"""Report containers and JSON serialization."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class Coefficient:
    estimate: float
    std_error: float
    p_value: float

    @property
    def significant(self) -> bool:
        """Star convention: p < .001."""
        return self.p_value < 0.001


@dataclass
class ModelReport:
    kind: str  # "mixed_logit" | "random_forest" | "ablation"
    variant: str | None
    subset: str
    n_rows: int
    baseline: float  # merged fraction of the evaluated subset
    coefficients: dict[str, Coefficient] = field(default_factory=dict)
    importances: dict[str, float] = field(default_factory=dict)
    f1_mean: float | None = None
    f1_std: float | None = None
    fold_f1: list[float] = field(default_factory=list)
    group: str | None = None
    always_merge_f1: float | None = None
    metadata: dict = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def validate(self) -> None:
        for name, coef in self.coefficients.items():
            if not 0.0 <= coef.p_value <= 1.0:
                raise AssertionError(f"p-value out of range for {name}")
        if self.importances:
            total = sum(self.importances.values())
            if abs(total - 1.0) > 1e-9:
                raise AssertionError(f"importances sum to {total}, not 1")
        if self.f1_mean is not None and not 0.0 <= self.f1_mean <= 1.0:
            raise AssertionError("F1 out of [0, 1]")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["coefficients"] = {
            name: {**asdict(coef), "significant": coef.significant}
            for name, coef in self.coefficients.items()
        }
        return data

    def write(self, directory: str | Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        parts = [self.kind]
        if self.variant:
            parts.append(self.variant)
        if self.group:
            parts.append(self.group)
        parts.append(self.subset)
        path = directory / ("_".join(parts) + ".json")
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(self.to_dict(), fp, indent=2, sort_keys=True)
            fp.write("\n")
        return path


def load_report(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fp:
        return json.load(fp)
