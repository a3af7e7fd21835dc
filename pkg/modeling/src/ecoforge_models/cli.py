"""CLI for fitting models on an exported feature matrix."""

from __future__ import annotations

import sys

import click

from .ablation import inverse_ablation
from .forest import DEFAULT_TREES, fit_random_forest
from .io import ABLATION_ORDER, FeatureTable, Subset, Variant
from .mixedlogit import fit_mixed_logit
from .summary import write_summary

_SUBSETS = {s.value: s for s in Subset}
_VARIANTS = {v.value: v for v in Variant}


def _load(features: str) -> FeatureTable:
    table = FeatureTable.load(features)
    table.check_subset_partition()
    return table


@click.group()
def cli() -> None:
    """Statistical models over ecoforge feature matrices."""


@cli.command("regress")
@click.option("--features", required=True, type=click.Path(exists=True))
@click.option("--variant", type=click.Choice([*_VARIANTS, "each"]), default="each",
              show_default=True)
@click.option("--subset", type=click.Choice([*_SUBSETS, "each"]), default="each",
              show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_regress(features, variant, subset, seed, out_dir):
    """Mixed-effects logistic regression reports."""
    table = _load(features)
    variants = list(Variant) if variant == "each" else [_VARIANTS[variant]]
    subsets = list(Subset) if subset == "each" else [_SUBSETS[subset]]
    for v in variants:
        for s in subsets:
            report = fit_mixed_logit(table, v, s, seed=seed)
            path = report.write(out_dir)
            flag = "" if report.metadata["converged"] else " [not converged]"
            click.echo(f"regress {v.value}/{s.value}: n={report.n_rows}{flag} -> {path}")


@cli.command("forest")
@click.option("--features", required=True, type=click.Path(exists=True))
@click.option("--subset", type=click.Choice([*_SUBSETS, "each"]), default="each",
              show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--trees", default=DEFAULT_TREES, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_forest(features, subset, seed, trees, out_dir):
    """Random-forest Gini importance reports."""
    table = _load(features)
    subsets = list(Subset) if subset == "each" else [_SUBSETS[subset]]
    for s in subsets:
        report = fit_random_forest(table, s, rng_seed=seed, n_estimators=trees)
        path = report.write(out_dir)
        top = max(report.importances, key=report.importances.get)
        click.echo(
            f"forest {s.value}: n={report.n_rows} top={top} "
            f"({report.importances[top]:.3f}) -> {path}"
        )


@cli.command("ablate")
@click.option("--features", required=True, type=click.Path(exists=True))
@click.option("--groups", multiple=True,
              type=click.Choice(list(ABLATION_ORDER)),
              help="Variable groups (default: all).")
@click.option("--subset", type=click.Choice([*_SUBSETS, "each"]), default="each",
              show_default=True)
@click.option("--folds", default=5, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--trees", default=DEFAULT_TREES, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_ablate(features, groups, subset, folds, seed, trees, out_dir):
    """Inverse-ablation F1 study."""
    table = _load(features)
    subsets = tuple(Subset) if subset == "each" else (_SUBSETS[subset],)
    reports = inverse_ablation(
        table,
        groups=list(groups) or None,
        folds=folds,
        rng_seed=seed,
        subsets=subsets,
        n_estimators=trees,
    )
    for report in reports:
        path = report.write(out_dir)
        click.echo(
            f"ablate {report.group}/{report.subset}: "
            f"F1={report.f1_mean:.3f}±{report.f1_std:.4f} "
            f"baseline={report.baseline:.3f} -> {path}"
        )


@cli.command("summarize")
@click.option("--reports", "report_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_summarize(report_dir, out_path):
    """Combine JSON reports into one Markdown summary."""
    write_summary(report_dir, out_path)
    click.echo(f"summary -> {out_path}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except (ValueError, AssertionError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
