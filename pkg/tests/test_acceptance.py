"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -s` to see the verdict lines.
The long-running corpus checks are marked slow but still run by default.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from ecoforge.cli import main as cli_main
from ecoforge.collabgraph import (
    LAYERS,
    CollabEdge,
    build_graph,
    layer_weights,
    link_strength,
    second_order_centrality,
)
from ecoforge.depgraph import DependencyGraph
from ecoforge.events import FilterConfig, filter_activities, parse_events
from ecoforge.features import PipelineConfig, assemble_matrix, contribution_counts
from ecoforge.matrix import cap_sampling, cooks_threshold

from conftest import graph_from_edges, random_edges
from oracles import brute_link_strength, brute_second_order_centrality


def _verdict(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: {status}{suffix}")
    assert passed, f"{name}{suffix}"


@pytest.fixture(scope="module")
def synthetic_workspace(tmp_path_factory):
    """10k-PR synthetic corpus, ingested once for the corpus-level criteria."""
    root = tmp_path_factory.mktemp("acceptance")
    corpus_dir = root / "corpus"
    ws = root / "ws"
    code = cli_main([
        "synth", "--users", "400", "--projects", "60", "--days", "400",
        "--target-prs", "10000", "--seed", "20240101", "--out", str(corpus_dir),
    ])
    assert code == 0
    code = cli_main([
        "ingest",
        "--events", str(corpus_dir / "events.ndjson"),
        "--deps", str(corpus_dir / "deps.csv"),
        "--bots", str(corpus_dir / "bots.txt"),
        "--out", str(ws),
    ])
    assert code == 0
    return root


def test_oracle_equivalence_1000_random_graphs():
    """Optimized metrics equal the brute-force transcription, fast enough."""
    rng = np.random.default_rng(424242)
    started = time.perf_counter()
    graphs = 0
    worst = 0.0
    while graphs < 1000:
        edges = random_edges(rng, n_users=20, max_edges=200, n_projects=6)
        graph = graph_from_edges(edges)
        try:
            weights = layer_weights(graph)
        except ValueError:
            continue
        users = sorted(graph.vertices)
        u = users[int(rng.integers(len(users)))]
        v = users[int(rng.integers(len(users)))]
        focal = f"p{int(rng.integers(6))}"
        t = int(rng.integers(1, 1100))
        fast_c = second_order_centrality(graph, weights, u, focal, t)
        slow_c = brute_second_order_centrality(edges, weights, u, focal, t)
        fast_s = link_strength(graph, weights, u, v, focal, t)
        slow_s = brute_link_strength(edges, weights, u, v, focal, t)
        for fast, slow in ((fast_c, slow_c), (fast_s, slow_s)):
            scale = max(abs(fast), abs(slow), 1e-30)
            worst = max(worst, abs(fast - slow) / scale)
        assert fast_c == pytest.approx(slow_c, rel=1e-9, abs=1e-12)
        assert fast_s == pytest.approx(slow_s, rel=1e-9, abs=1e-12)
        graphs += 1
    elapsed = time.perf_counter() - started
    _verdict(
        "appendix-oracle-equivalence",
        graphs >= 1000 and elapsed < 60.0,
        f"{graphs} graphs, worst rel err {worst:.2e}, {elapsed:.1f}s",
    )


def test_paper_worked_examples():
    """The 9-1=8 ecosystem count and both dependency-split scenarios."""
    from conftest import make_pr

    t0 = 1_600_000_000
    day = 86_400
    events = []
    seq = 0
    for project, count in (("A", 1), ("B", 3), ("C", 5)):
        for _ in range(count):
            seq += 1
            events.append(
                make_pr(f"pr-{seq}", project, "dev", t0 - 40 * day,
                        t0 - 30 * day + seq, merged=True, integrator="m")
            )
    no_deps = DependencyGraph.from_pairs([])
    counts = contribution_counts(events, no_deps, "dev", "A", t0, 90)
    ok = counts["ecosystem"].prs_submitted == 8
    ok &= counts["intra_project"].prs_submitted == 1

    graph = DependencyGraph.from_pairs([("B", "A")])
    focal_a = contribution_counts(events, graph, "dev", "A", t0, 90)
    ok &= focal_a["downstream"].prs_submitted == 3
    ok &= focal_a["upstream"].prs_submitted == 0
    ok &= focal_a["non_dependency"].prs_submitted == 5

    focal_b = contribution_counts(events, graph, "dev", "B", t0, 90)
    ok &= focal_b["upstream"].prs_submitted == 1
    ok &= focal_b["downstream"].prs_submitted == 0
    ok &= focal_b["non_dependency"].prs_submitted == 5
    _verdict("paper-worked-examples", ok)


def test_temporal_causality_200_trials():
    """Future-timestamped edges never change any metric query, bitwise."""
    rng = np.random.default_rng(77007)
    trials = 0
    while trials < 200:
        edges = random_edges(rng, n_users=12, max_edges=120)
        graph = graph_from_edges(edges)
        try:
            weights = layer_weights(graph)
        except ValueError:
            continue
        users = sorted(graph.vertices)
        if len(users) < 2:
            continue
        t = int(rng.integers(200, 1000))
        queries = []
        for _ in range(5):
            u = users[int(rng.integers(len(users)))]
            v = users[int(rng.integers(len(users)))]
            focal = f"p{int(rng.integers(6))}"
            queries.append((u, v, focal))
        before = [
            (
                second_order_centrality(graph, weights, u, focal, t),
                link_strength(graph, weights, u, v, focal, t),
            )
            for u, v, focal in queries
        ]
        extended = {layer: list(edges[layer]) for layer in LAYERS}
        n_future = int(rng.integers(1, 15))
        for _ in range(n_future):
            layer = LAYERS[int(rng.integers(len(LAYERS)))]
            a, b = rng.choice(len(users), size=2, replace=False)
            extended[layer].append(
                CollabEdge(users[int(a)], users[int(b)],
                           f"p{int(rng.integers(6))}", t + int(rng.integers(0, 500)))
            )
        bigger = graph_from_edges(extended)
        after = [
            (
                second_order_centrality(bigger, weights, u, focal, t),
                link_strength(bigger, weights, u, v, focal, t),
            )
            for u, v, focal in queries
        ]
        assert after == before  # exact float equality, not approx
        trials += 1
    _verdict("temporal-causality", trials == 200, f"{trials} trials bit-identical")


@pytest.mark.slow
def test_scope_sum_identity_and_weights_on_synthetic_corpus(synthetic_workspace):
    """Ecosystem counts decompose exactly on all rows of a 10k-PR corpus."""
    ws = synthetic_workspace / "ws"
    with open(ws / "corpus" / "events.ndjson", "r", encoding="utf-8") as fp:
        parsed = parse_events(fp)
    assert parsed.diagnostics == []
    filtered = filter_activities(parsed.events, FilterConfig(), set())
    with open(ws / "corpus" / "deps.csv", "r", encoding="utf-8") as fp:
        from ecoforge.depgraph import build_dependency_graph

        dep_graph = build_dependency_graph(fp).graph
    assembled = assemble_matrix(filtered.retained, dep_graph, PipelineConfig())
    n_rows = len(assembled.rows)
    violations = 0
    for row in assembled.rows:
        for field in ("prs_submitted", "prs_merged", "pr_comments",
                      "issues_submitted", "issue_comments"):
            eco = getattr(row.contributions["ecosystem"], field)
            parts = sum(
                getattr(row.contributions[s], field)
                for s in ("downstream", "upstream", "non_dependency")
            )
            if eco != parts:
                violations += 1
    weight_sum = sum(assembled.weights.weights.values())
    weights_ok = abs(weight_sum - 1.0) <= 1e-12

    # Layer weights on freshly generated random graphs as well.
    rng = np.random.default_rng(5150)
    for _ in range(200):
        edges = random_edges(rng)
        graph = graph_from_edges(edges)
        try:
            w = layer_weights(graph)
        except ValueError:
            continue
        if abs(sum(w.weights.values()) - 1.0) > 1e-12:
            weights_ok = False
    _verdict(
        "scope-sum-identity",
        n_rows >= 9000 and violations == 0 and weights_ok,
        f"{n_rows} rows, {violations} violations, weight sum dev "
        f"{abs(weight_sum - 1.0):.1e}",
    )


@pytest.mark.slow
def test_determinism_and_runtime(synthetic_workspace, tmp_path):
    """Byte-identical CSV across reruns and thread counts; under 5 minutes."""
    ws = synthetic_workspace / "ws"
    outputs = []
    elapsed = []
    for name, threads in (("run1", "1"), ("run2", "1"), ("run8", "8")):
        out = tmp_path / f"{name}.csv"
        started = time.perf_counter()
        code = cli_main([
            "features", "--workspace", str(ws), "--seed", "31337",
            "--threads", threads, "--out", str(out),
        ])
        elapsed.append(time.perf_counter() - started)
        assert code == 0
        outputs.append(out.read_bytes())
    identical = outputs[0] == outputs[1] == outputs[2]
    fast_enough = max(elapsed) < 300.0
    _verdict(
        "feature-determinism",
        identical and fast_enough,
        f"max stage time {max(elapsed):.1f}s, csv bytes "
        f"{'identical' if identical else 'DIFFER'}",
    )


def test_cooks_threshold_and_cap_sampling():
    """Threshold arithmetic and the exact 688-row cap."""
    ok = cooks_threshold(1000, 10) == 4.0 / 989.0
    ok &= abs(cooks_threshold(1000, 10) - 0.0040445) < 5e-8

    from conftest import make_pr

    t0 = 1_600_000_000
    events = []
    for i in range(10_000):
        events.append(
            make_pr(f"pr-{i}", "whale/monorepo", f"u{i % 29}", t0 - 86_400,
                    t0 - 86_400 + i, merged=bool(i % 4), integrator="m")
        )
    for i in range(120):
        events.append(
            make_pr(f"pr-small-{i}", "tiny/repo", f"u{i % 7}", t0 - 86_400,
                    t0 - 3600 + i, merged=True, integrator="m")
        )
    assembled = assemble_matrix(
        events, DependencyGraph.from_pairs([]), PipelineConfig(rng_seed=8)
    )
    sampled = cap_sampling(assembled.rows, cap=688, cap_fraction=0.02, rng_seed=8)
    by_project: dict[str, int] = {}
    for row in sampled:
        by_project[row.project] = by_project.get(row.project, 0) + 1
    ok &= by_project["whale/monorepo"] == 688
    ok &= by_project["tiny/repo"] == 120
    _verdict(
        "cooks-threshold-and-cap",
        bool(ok),
        f"cap kept {by_project['whale/monorepo']} of 10000",
    )
