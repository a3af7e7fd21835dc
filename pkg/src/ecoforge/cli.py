"""Command-line pipeline orchestration.

Subcommands: ingest (raw logs -> canonical corpus), features (corpus ->
analysis matrix), metric (single collaboration-metric audit), synth
(synthetic corpus generation), layers (per-layer edge-count dump).

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import depgraph as dg
from . import events as ev
from . import matrix as mx
from . import synth as sy
from .collabgraph import LAYERS, build_graph, layer_weights, link_strength, second_order_centrality
from .features import PipelineConfig, assemble_matrix
from .workspace import Workspace, WorkspaceLockedError, config_digest, file_digest


class DataError(click.ClickException):
    exit_code = 2


def _load_corpus(workspace: Workspace) -> tuple[list[ev.ActivityEvent], dg.DependencyGraph]:
    events_path = os.path.join(workspace.corpus_dir, "events.ndjson")
    deps_path = os.path.join(workspace.corpus_dir, "deps.csv")
    if not os.path.exists(events_path):
        raise DataError(f"no ingested corpus at {events_path}; run ingest first")
    with open(events_path, "r", encoding="utf-8") as fp:
        parsed = ev.parse_events(fp)
    if parsed.diagnostics:
        raise DataError(
            f"canonical corpus is corrupt: {parsed.diagnostics[0]} "
            f"({parsed.error_count} problems)"
        )
    if not os.path.exists(deps_path):
        raise DataError(f"missing dependency manifest at {deps_path}")
    with open(deps_path, "r", encoding="utf-8") as fp:
        manifest = dg.build_dependency_graph(fp)
    return parsed.events, manifest.graph


@click.group()
def cli() -> None:
    """Ecosystem-wide contribution and collaboration analytics."""


@cli.command("ingest")
@click.option("--events", "event_paths", multiple=True, required=True,
              type=click.Path(), help="NDJSON activity log (repeatable).")
@click.option("--deps", "deps_path", required=True, type=click.Path(),
              help="CSV dependency manifest (dependent,dependency).")
@click.option("--bots", "bot_paths", multiple=True, type=click.Path(),
              help="Newline-delimited bot login list (repeatable).")
@click.option("--ghost-login", default=ev.DEFAULT_GHOST_LOGIN, show_default=True,
              help="Sentinel login that inherits deleted accounts.")
@click.option("--heavy-user-threshold", default=ev.DEFAULT_HEAVY_USER_THRESHOLD,
              show_default=True, type=int,
              help="Closed-PR count above which a user lands on the review list.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Workspace directory.")
def cmd_ingest(event_paths, deps_path, bot_paths, ghost_login, heavy_user_threshold, out_dir):
    """Parse, validate, and filter raw logs into a canonical corpus."""
    workspace = Workspace(out_dir)
    for path in list(event_paths) + [deps_path] + list(bot_paths):
        if not os.path.exists(path):
            raise DataError(f"input does not exist: {path}")
    cfg = ev.FilterConfig(
        bot_lists=tuple(bot_paths),
        heavy_user_threshold=heavy_user_threshold,
        ghost_login=ghost_login,
    )
    config = {
        "stage": "ingest",
        "ghost_login": ghost_login,
        "heavy_user_threshold": heavy_user_threshold,
    }
    cfg_digest = config_digest(config)
    inputs = {path: file_digest(path) for path in [*event_paths, deps_path, *bot_paths]}

    try:
        with workspace.lock():
            if workspace.up_to_date("ingest", inputs, cfg_digest):
                click.echo("ingest: up to date")
                return
            parsed_events: list[ev.ActivityEvent] = []
            parse_diagnostics: list[str] = []
            for path in event_paths:
                with open(path, "r", encoding="utf-8") as fp:
                    result = ev.parse_events(fp)
                parsed_events.extend(result.events)
                parse_diagnostics.extend(f"{path}: {d}" for d in result.diagnostics)
            try:
                bot_report = ev.detect_bots(parsed_events, cfg)
            except ev.BotListError as exc:
                raise DataError(str(exc)) from exc
            filtered = ev.filter_activities(parsed_events, cfg, bot_report.bots)

            with open(deps_path, "r", encoding="utf-8") as fp:
                manifest = dg.build_dependency_graph(fp)

            events_out = os.path.join(workspace.corpus_dir, "events.ndjson")
            deps_out = os.path.join(workspace.corpus_dir, "deps.csv")
            report_out = os.path.join(workspace.corpus_dir, "report.json")
            with open(events_out, "w", encoding="utf-8", newline="\n") as fp:
                for event in filtered.retained:
                    fp.write(json.dumps(ev.event_to_record(event), sort_keys=True) + "\n")
            with open(deps_out, "w", encoding="utf-8", newline="\n") as fp:
                fp.write("dependent,dependency\n")
                for dependent, dependency in sorted(manifest.graph.edges):
                    fp.write(f"{dependent},{dependency}\n")
            report = {
                "config_digest": cfg_digest,
                "parsed": len(parsed_events),
                "parse_errors": len(parse_diagnostics),
                "parse_diagnostics": parse_diagnostics[:200],
                "retained": len(filtered.retained),
                "removed": filtered.removed_counts,
                "bots_known": sorted(bot_report.bots),
                "heavy_user_review_list": sorted(bot_report.review_list),
                "dependency_edges": len(manifest.graph.edges),
                "dependency_diagnostics": manifest.diagnostics[:200],
            }
            with open(report_out, "w", encoding="utf-8", newline="\n") as fp:
                json.dump(report, fp, indent=2, sort_keys=True)
                fp.write("\n")
            workspace.record("ingest", inputs, cfg_digest,
                             [events_out, deps_out, report_out])
    except WorkspaceLockedError as exc:
        raise DataError(str(exc)) from exc
    click.echo(
        f"ingest: parsed={len(parsed_events)} retained={len(filtered.retained)} "
        f"removed={filtered.removed_total} parse_errors={len(parse_diagnostics)} "
        f"review_list={len(bot_report.review_list)}"
    )


@cli.command("features")
@click.option("--workspace", "ws_dir", required=True, type=click.Path(),
              help="Workspace directory with an ingested corpus.")
@click.option("--window-days", default=90, show_default=True, type=int)
@click.option("--cap", default=688, show_default=True, type=int)
@click.option("--cap-fraction", default=0.02, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--threads", default=1, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output CSV; metadata lands next to it as <out>.meta.json.")
def cmd_features(ws_dir, window_days, cap, cap_fraction, seed, threads, out_path):
    """Compute the analysis-ready feature matrix from an ingested corpus."""
    workspace = Workspace(ws_dir)
    try:
        cfg = PipelineConfig(
            window_days=window_days, cap=cap, cap_fraction=cap_fraction, rng_seed=seed
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    config = {"stage": "features", **cfg.as_dict()}
    cfg_digest = config_digest(config)
    # The stage identity also covers where the outputs land; --threads is
    # deliberately excluded because results are identical by contract.
    stage_digest = config_digest({**config, "out": os.path.abspath(out_path)})

    try:
        with workspace.lock():
            events_path = os.path.join(workspace.corpus_dir, "events.ndjson")
            deps_path = os.path.join(workspace.corpus_dir, "deps.csv")
            meta_path = out_path + ".meta.json"
            if not os.path.exists(events_path):
                raise DataError(f"no ingested corpus at {events_path}; run ingest first")
            inputs = {
                events_path: file_digest(events_path),
                deps_path: file_digest(deps_path),
            }
            if workspace.up_to_date("features", inputs, stage_digest):
                click.echo("features: up to date")
                return
            events, graph = _load_corpus(workspace)
            assembled = assemble_matrix(events, graph, cfg, threads=threads)
            if not assembled.rows:
                raise DataError("corpus contains no closed pull requests")
            capped = mx.cap_sampling(assembled.rows, cfg.cap, cfg.cap_fraction, cfg.rng_seed)
            raw = mx.rows_to_matrix(capped)
            labels = mx.labels_from_rows(capped)
            transformed, transform_meta = mx.transform_matrix(raw)
            screen = mx.multicollinearity_screen(
                transformed,
                vif_threshold=cfg.vif_threshold,
                spearman_threshold=cfg.spearman_threshold,
            )
            predictor_idx = [
                mx.FEATURE_COLUMNS.index(col) for col in screen.retained
            ]
            cooks = mx.cooks_outlier_filter(
                transformed[:, predictor_idx], labels, cfg.cooks_multiplier
            )
            final_rows = [capped[i] for i in cooks.kept]
            final_matrix = transformed[cooks.kept]
            final_labels = labels[cooks.kept]
            mx.write_csv(out_path, final_rows, final_matrix, final_labels)
            metadata = {
                "config": config,
                "config_digest": cfg_digest,
                "columns": list(mx.CSV_COLUMNS),
                "id_columns": list(mx.ID_COLUMNS),
                "label_column": mx.LABEL_COLUMN,
                "log_transformed": transform_meta.log_columns,
                "minmax": {c: list(v) for c, v in transform_meta.minmax.items()},
                "constant_columns": transform_meta.constant_columns,
                "layer_weights": assembled.weights.as_dict(),
                "screen": {
                    "vif": {c: (v if v != float("inf") else "inf")
                            for c, v in screen.vif.items()},
                    "flagged": screen.flagged,
                    "dropped": screen.dropped,
                    "retained": screen.retained,
                },
                "cooks": {
                    "threshold": cooks.threshold,
                    "n": cooks.n,
                    "k": cooks.k,
                    "dropped_rows": int(len(cooks.dropped)),
                    "drop_fraction": cooks.drop_fraction,
                    "predictors": screen.retained,
                },
                "rows": {
                    "assembled": len(assembled.rows),
                    "after_cap": len(capped),
                    "after_cooks": len(final_rows),
                },
                "missing_integrator": assembled.diagnostics.missing_integrator,
            }
            with open(meta_path, "w", encoding="utf-8", newline="\n") as fp:
                json.dump(metadata, fp, indent=2, sort_keys=True)
                fp.write("\n")
            workspace.record("features", inputs, stage_digest, [out_path, meta_path])
    except WorkspaceLockedError as exc:
        raise DataError(str(exc)) from exc
    click.echo(
        f"features: rows={len(final_rows)} (assembled={len(assembled.rows)}, "
        f"capped={len(capped)}, cooks_dropped={len(cooks.dropped)}) -> {out_path}"
    )


@cli.command("metric")
@click.option("--workspace", "ws_dir", required=True, type=click.Path())
@click.option("--user", required=True)
@click.option("--project", required=True)
@click.option("--at", "at_ts", required=True, help="ISO-8601 UTC query time.")
@click.option("--kind", type=click.Choice(["centrality", "strength"]), required=True)
@click.option("--other", default=None, help="Partner user (strength only).")
@click.option("--window-days", default=None, type=int,
              help="Optional window bound; default is all history.")
def cmd_metric(ws_dir, user, project, at_ts, kind, other, window_days):
    """Evaluate one collaboration metric (audit tool)."""
    workspace = Workspace(ws_dir)
    try:
        t = ev.parse_timestamp(at_ts)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    events, _ = _load_corpus(workspace)
    graph = build_graph(events)
    try:
        weights = layer_weights(graph)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    window_start = None if window_days is None else t - window_days * 86_400
    if user not in graph.vertices:
        click.echo(f"warning: user {user!r} not in collaboration graph", err=True)
    if kind == "strength":
        if other is None:
            raise click.UsageError("--other is required for strength")
        if other == user:
            click.echo("warning: strength of a user with themselves is 0", err=True)
        value = link_strength(graph, weights, user, other, project, t, window_start)
    else:
        value = second_order_centrality(graph, weights, user, project, t, window_start)
    click.echo(format(value, ".9g"))


@cli.command("layers")
@click.option("--workspace", "ws_dir", required=True, type=click.Path())
def cmd_layers(ws_dir):
    """Dump per-layer edge counts and normalized weights."""
    workspace = Workspace(ws_dir)
    events, _ = _load_corpus(workspace)
    graph = build_graph(events)
    try:
        weights = layer_weights(graph)
        weight_map = weights.as_dict()
    except ValueError:
        weight_map = {layer.value: 0.0 for layer in LAYERS}
    for layer in LAYERS:
        click.echo(
            f"{layer.value}: edges={graph.layer_size(layer)} "
            f"weight={format(weight_map[layer.value], '.9g')}"
        )


@cli.command("synth")
@click.option("--users", default=200, show_default=True, type=int)
@click.option("--projects", default=40, show_default=True, type=int)
@click.option("--days", default=365, show_default=True, type=int)
@click.option("--target-prs", default=10_000, show_default=True, type=int)
@click.option("--effect-profile", "profile_path", default=None, type=click.Path(),
              help="JSON acceptance model; defaults to an intercept-only model.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_synth(users, projects, days, target_prs, profile_path, seed, out_dir):
    """Generate a synthetic corpus with a declared acceptance model."""
    if profile_path is None:
        profile = sy.EffectProfile()
    else:
        if not os.path.exists(profile_path):
            raise DataError(f"effect profile does not exist: {profile_path}")
        try:
            profile = sy.EffectProfile.load(profile_path)
        except (ValueError, json.JSONDecodeError) as exc:
            raise DataError(f"invalid effect profile: {exc}") from exc
    cfg = sy.SynthConfig(
        users=users, projects=projects, days=days, target_prs=target_prs, seed=seed
    )
    try:
        corpus = sy.generate_corpus(cfg, profile)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    paths = sy.write_corpus(out_dir, corpus, profile, cfg)
    click.echo(
        f"synth: events={len(corpus['events'])} prs={len(corpus['truth'])} "
        f"merged_fraction={corpus['merged_fraction']:.4f} -> {paths['events']}"
    )


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except DataError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
