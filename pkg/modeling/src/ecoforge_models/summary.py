"""Combined Markdown summary of regression and ablation reports."""

from __future__ import annotations

from pathlib import Path

from .io import ABLATION_ORDER, Subset, Variant
from .reports import load_report

COEFFICIENT_ROWS = (
    ("ctrl_is_newcomer", "PR submitter is a newcomer"),
    ("ctrl_self_integrated", "PR is self-integrated"),
    ("ctrl_has_comments", "PR has comments"),
    ("ctrl_has_hash_reference", 'PR description contains "#"'),
    ("ctrl_external_comment", "PR has comment from external contributor"),
    ("ctrl_age_minutes", "PR age in minutes"),
    ("ctrl_commit_count", "PR commit count"),
    ("intra_project_issues_submitted", "Intra-project contr."),
    ("ecosystem_prs_submitted", "Ecosystem contr."),
    ("non_dependency_prs_submitted", "Non-dependency contr."),
    ("downstream_prs_submitted", "Downstream contr."),
    ("upstream_prs_submitted", "Upstream contr."),
    ("centrality", "Eco. community standing"),
    ("direct_collab", "Direct collaboration"),
)

GROUP_LABELS = {
    "control": "Control",
    "intra_project": "Intra-project contributions",
    "combined_intra": "Combined (control + intra)",
    "ecosystem": "Ecosystem contributions",
    "non_dependency": "Non-dependency contributions",
    "downstream": "Downstream contributions",
    "upstream": "Upstream contributions",
    "collaboration": "Collaboration variables",
    "combined_ecosystem": "Combined (ecosystem groups)",
    "all_variables": "All variables",
}


def _fmt_coef(entry: dict | None) -> str:
    if entry is None:
        return "n/a"
    star = "\\*" if entry["significant"] else ""
    return f"{entry['estimate']:.3f}{star} ({entry['std_error']:.3f})"


def _fmt_f1(report: dict | None) -> str:
    if report is None:
        return "n/a"
    return f"{report['f1_mean']:.3f} ({report['f1_std']:.4f})"


def _regression_table(reports: dict, subset: Subset) -> list[str]:
    variants = [v for v in Variant if (v.value, subset.value) in reports]
    if not variants:
        return []
    lines = [
        "| Variable | " + " | ".join(f"{v.value.capitalize()} model" for v in variants) + " |",
        "|---|" + "---|" * len(variants),
    ]
    for column, label in COEFFICIENT_ROWS:
        cells = []
        any_present = False
        for variant in variants:
            report = reports[(variant.value, subset.value)]
            entry = report["coefficients"].get(column)
            if entry is not None:
                any_present = True
            cells.append(_fmt_coef(entry))
        if any_present:
            lines.append(f"| {label} | " + " | ".join(cells) + " |")
    lines.append("")
    sample = reports[(variants[0].value, subset.value)]
    lines.append(
        f"Coef. (std. err.); \\* p < .001. Method: {sample['metadata']['method']}."
    )
    return lines


def _ablation_table(reports: dict) -> list[str]:
    subsets = [s for s in Subset if any(key[1] == s.value for key in reports)]
    if not subsets:
        return []
    header = "| Variable group | " + " | ".join(
        {"all": "All data", "newcomer": "Newcomer", "non_newcomer": "Non-newcomer"}[
            s.value
        ]
        for s in subsets
    ) + " |"
    lines = [header, "|---|" + "---|" * len(subsets)]
    baseline_cells = []
    trivial_cells = []
    for s in subsets:
        candidates = [r for key, r in reports.items() if key[1] == s.value]
        if candidates:
            baseline_cells.append(f"{candidates[0]['baseline']:.3f}")
            trivial_cells.append(f"{candidates[0]['always_merge_f1']:.3f}")
        else:
            baseline_cells.append("n/a")
            trivial_cells.append("n/a")
    lines.append("| *Baseline (merged fraction)* | " + " | ".join(baseline_cells) + " |")
    lines.append("| *Always-merge F1* | " + " | ".join(trivial_cells) + " |")
    for group in ABLATION_ORDER:
        row = [GROUP_LABELS.get(group, group)]
        present = False
        for s in subsets:
            report = reports.get((group, s.value))
            if report is not None:
                present = True
            row.append(_fmt_f1(report))
        if present:
            lines.append("| " + " | ".join(row) + " |")
    lines.append("")
    lines.append("F1 mean (std) over cross-validation folds.")
    return lines


def write_summary(report_dir: str | Path, out_path: str | Path) -> None:
    """Collect every JSON report in a directory into one Markdown file."""
    report_dir = Path(report_dir)
    regression: dict[tuple[str, str], dict] = {}
    ablation: dict[tuple[str, str], dict] = {}
    forests: list[dict] = []
    for path in sorted(report_dir.glob("*.json")):
        data = load_report(path)
        if data.get("kind") == "mixed_logit":
            regression[(data["variant"], data["subset"])] = data
        elif data.get("kind") == "ablation":
            ablation[(data["group"], data["subset"])] = data
        elif data.get("kind") == "random_forest":
            forests.append(data)

    lines: list[str] = ["# Model summary", ""]
    if regression:
        lines.append("## Mixed-effects logistic regression")
        for subset, title in (
            (Subset.ALL, "All data points"),
            (Subset.NEWCOMER, "Newcomer submissions"),
            (Subset.NON_NEWCOMER, "Non-newcomer submissions"),
        ):
            table = _regression_table(regression, subset)
            if table:
                lines.append("")
                lines.append(f"### {title}")
                lines.append("")
                lines.extend(table)
        lines.append("")
    if ablation:
        lines.append("## Inverse ablation (random forest, cross-validated F1)")
        lines.append("")
        lines.extend(_ablation_table(ablation))
        lines.append("")
    if forests:
        lines.append("## Random-forest importances (mean decrease in Gini)")
        lines.append("")
        for data in forests:
            top = sorted(
                data["importances"].items(), key=lambda kv: -kv[1]
            )[:10]
            lines.append(
                f"### Subset: {data['subset']} "
                f"(n = {data['n_rows']}, trees = {data['metadata']['n_estimators']})"
            )
            lines.append("")
            lines.append("| Feature | Importance |")
            lines.append("|---|---|")
            for name, value in top:
                lines.append(f"| {name} | {value:.4f} |")
            lines.append("")
    with open(out_path, "w", encoding="utf-8") as fp:
        fp.write("\n".join(lines).rstrip() + "\n")
