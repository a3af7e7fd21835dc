"""Shared fixtures: tiny corpus builders and random-graph generators."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ecoforge.collabgraph import LAYERS, CollabEdge, MultiLayerTemporalGraph
from ecoforge.events import ActivityEvent, Comment, Review


def make_pr(
    id: str,
    project: str,
    submitter: str,
    created_at: int,
    closed_at: int | None,
    merged: bool | None = False,
    integrator: str | None = None,
    commit_count: int | None = 1,
    comments: tuple[Comment, ...] = (),
    reviews: tuple[Review, ...] = (),
    **kwargs,
) -> ActivityEvent:
    return ActivityEvent(
        kind="pull_request",
        id=id,
        project=project,
        submitter=submitter,
        created_at=created_at,
        closed_at=closed_at,
        merged=merged,
        integrator=integrator,
        commit_count=commit_count,
        comments=comments,
        reviews=reviews,
        **kwargs,
    )


def make_issue(
    id: str,
    project: str,
    submitter: str,
    created_at: int,
    closed_at: int | None,
    comments: tuple[Comment, ...] = (),
    **kwargs,
) -> ActivityEvent:
    return ActivityEvent(
        kind="issue",
        id=id,
        project=project,
        submitter=submitter,
        created_at=created_at,
        closed_at=closed_at,
        comments=comments,
        **kwargs,
    )


def random_edges(
    rng: np.random.Generator, n_users: int = 20, max_edges: int = 200, n_projects: int = 6
) -> dict:
    """Random multilayer edge sets for oracle-equivalence tests."""
    users = [f"u{i}" for i in range(n_users)]
    projects = [f"p{i}" for i in range(n_projects)]
    n_edges = int(rng.integers(0, max_edges + 1))
    edges = {layer: [] for layer in LAYERS}
    for _ in range(n_edges):
        layer = LAYERS[int(rng.integers(len(LAYERS)))]
        a, b = rng.choice(n_users, size=2, replace=False)
        edges[layer].append(
            CollabEdge(
                u=users[int(a)],
                v=users[int(b)],
                project=projects[int(rng.integers(n_projects))],
                t=int(rng.integers(0, 1000)),
            )
        )
    return edges


def graph_from_edges(edges: dict) -> MultiLayerTemporalGraph:
    return MultiLayerTemporalGraph(edges)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
