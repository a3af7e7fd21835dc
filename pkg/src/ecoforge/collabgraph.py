"""Undirected temporal multi-layer collaboration graph and its metrics.

Five layers connect users who reviewed, commented on, or discussed the
same activities. Each edge is an undirected ⟨u, v, project, t⟩ instance;
multi-edges are kept (the same pair collaborating twice yields two edge
instances and both count). Two metrics run over the graph:

* link strength — weighted count of prior ecosystem collaborations
  between two specific users (direct collaboration);
* second-order degree centrality — average prior activity of a user's
  collaborators, summed over all ordered layer pairs (community standing).

Both metrics see only edges strictly before the query time, skip edges
inside the focal project at first order, and optionally honor a lower
window bound applied to every edge they touch.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .events import ISSUE, PULL_REQUEST, ActivityEvent


class Layer(enum.Enum):
    PR_REVIEW = "pr_review"
    PR_COMMENT = "pr_comment"
    PR_DISCUSSION = "pr_discussion"
    ISSUE_COMMENT = "issue_comment"
    ISSUE_DISCUSSION = "issue_discussion"


LAYERS: tuple[Layer, ...] = tuple(Layer)


@dataclass(frozen=True)
class CollabEdge:
    u: str
    v: str
    project: str
    t: int


class _Adjacency:
    """Time-sorted incident edges of one user in one layer."""

    __slots__ = ("times", "partners", "projects")

    def __init__(self) -> None:
        self.times: list[int] = []
        self.partners: list[str] = []
        self.projects: list[str] = []

    def append(self, t: int, partner: str, project: str) -> None:
        self.times.append(t)
        self.partners.append(partner)
        self.projects.append(project)

    def count_before(self, t: int, start: int | None) -> int:
        """Number of incident edge instances with start <= t' < t."""
        hi = bisect.bisect_left(self.times, t)
        lo = 0 if start is None else bisect.bisect_left(self.times, start, 0, hi)
        return hi - lo


class MultiLayerTemporalGraph:
    """Immutable container; all metric queries are pure reads."""

    def __init__(self, edges_by_layer: Mapping[Layer, Sequence[CollabEdge]]):
        self.edges_by_layer: dict[Layer, list[CollabEdge]] = {}
        self._adj: dict[Layer, dict[str, _Adjacency]] = {}
        vertices: set[str] = set()
        for layer in LAYERS:
            edges = sorted(edges_by_layer.get(layer, ()), key=lambda e: e.t)
            for edge in edges:
                if edge.u == edge.v:
                    raise ValueError(f"self-loop edge: {edge}")
            self.edges_by_layer[layer] = edges
            index: dict[str, _Adjacency] = {}
            for edge in edges:
                vertices.add(edge.u)
                vertices.add(edge.v)
                for a, b in ((edge.u, edge.v), (edge.v, edge.u)):
                    adj = index.get(a)
                    if adj is None:
                        adj = index[a] = _Adjacency()
                    adj.append(edge.t, b, edge.project)
            self._adj[layer] = index
        self.vertices = frozenset(vertices)

    def layer_size(self, layer: Layer) -> int:
        return len(self.edges_by_layer[layer])

    def adjacency(self, layer: Layer, user: str) -> _Adjacency | None:
        return self._adj[layer].get(user)


def build_graph(events: Sequence[ActivityEvent]) -> MultiLayerTemporalGraph:
    """Derive collaboration edges from filtered activities.

    Per activity: review edges connect each reviewer (and the integrator,
    at close time) to the submitter; comment edges connect each comment
    author to the submitter at comment time; discussion edges connect
    every unordered pair of distinct comment authors once per activity,
    timestamped at the later of the pair's first comments. Self-pairs are
    skipped everywhere.
    """
    edges: dict[Layer, list[CollabEdge]] = {layer: [] for layer in LAYERS}
    for event in events:
        if event.closed_at is None:
            continue
        submitter = event.submitter
        project = event.project
        if event.kind == PULL_REQUEST:
            comment_layer, discussion_layer = Layer.PR_COMMENT, Layer.PR_DISCUSSION
            for review in event.reviews:
                if review.reviewer != submitter:
                    edges[Layer.PR_REVIEW].append(
                        CollabEdge(review.reviewer, submitter, project, review.at)
                    )
            if event.integrator is not None and event.integrator != submitter:
                edges[Layer.PR_REVIEW].append(
                    CollabEdge(event.integrator, submitter, project, event.closed_at)
                )
        elif event.kind == ISSUE:
            comment_layer, discussion_layer = (
                Layer.ISSUE_COMMENT,
                Layer.ISSUE_DISCUSSION,
            )
        else:
            continue

        first_comment_at: dict[str, int] = {}
        for comment in event.comments:
            if comment.author != submitter:
                edges[comment_layer].append(
                    CollabEdge(comment.author, submitter, project, comment.at)
                )
            if comment.author not in first_comment_at:
                first_comment_at[comment.author] = comment.at
        authors = list(first_comment_at)
        for i in range(len(authors)):
            for j in range(i + 1, len(authors)):
                a, b = authors[i], authors[j]
                edges[discussion_layer].append(
                    CollabEdge(
                        a, b, project, max(first_comment_at[a], first_comment_at[b])
                    )
                )
    return MultiLayerTemporalGraph(edges)


@dataclass(frozen=True)
class LayerWeights:
    weights: Mapping[Layer, float]

    def __getitem__(self, layer: Layer) -> float:
        return self.weights[layer]

    def as_dict(self) -> dict[str, float]:
        return {layer.value: self.weights[layer] for layer in LAYERS}


def layer_weights(graph: MultiLayerTemporalGraph) -> LayerWeights:
    """Weigh layers inverse-proportionally to their edge counts.

    Raw weight per non-empty layer is 1 − |Eλ|/Σ|Eμ|, then normalized to
    sum to 1. Empty layers carry no edges and get weight 0; a single
    non-empty layer (where the raw weight degenerates to 0) gets 1.
    """
    sizes = {layer: graph.layer_size(layer) for layer in LAYERS}
    total = sum(sizes.values())
    if total == 0:
        raise ValueError("empty graph")
    populated = [layer for layer in LAYERS if sizes[layer] > 0]
    if len(populated) == 1:
        weights = {layer: 0.0 for layer in LAYERS}
        weights[populated[0]] = 1.0
        return LayerWeights(weights)
    raw = {layer: 1.0 - sizes[layer] / total for layer in populated}
    norm = sum(raw.values())
    weights = {layer: 0.0 for layer in LAYERS}
    for layer in populated:
        weights[layer] = raw[layer] / norm
    return LayerWeights(weights)


def _eligible_occurrences(
    adj: _Adjacency | None, focal: str, t: int, window_start: int | None
) -> Iterable[tuple[str, int]]:
    """First-order neighbor occurrences: t' < t, outside the focal project."""
    if adj is None:
        return
    hi = bisect.bisect_left(adj.times, t)
    lo = 0 if window_start is None else bisect.bisect_left(adj.times, window_start, 0, hi)
    for i in range(lo, hi):
        if adj.projects[i] != focal:
            yield adj.partners[i], adj.times[i]


def link_strength(
    graph: MultiLayerTemporalGraph,
    weights: LayerWeights,
    u: str,
    v: str,
    focal: str,
    t: int,
    window_start: int | None = None,
) -> float:
    """Weighted count of u–v edges before t outside the focal project."""
    if u == v:
        return 0.0
    total = 0.0
    for layer in LAYERS:
        w = weights[layer]
        if w == 0.0:
            continue
        count = 0
        for partner, _t in _eligible_occurrences(
            graph.adjacency(layer, u), focal, t, window_start
        ):
            if partner == v:
                count += 1
        if count:
            total += w * count
    return total


def second_order_centrality(
    graph: MultiLayerTemporalGraph,
    weights: LayerWeights,
    u: str,
    focal: str,
    t: int,
    window_start: int | None = None,
) -> float:
    """Average prior activity of u's collaborators over all layer pairs.

    For each first-order layer λ the eligible neighbor occurrences ⟨v, t'⟩
    (strictly before t, outside the focal project) are enumerated; each
    contributes the count of v's μ-edges strictly before t' (any project,
    self-loops excluded by construction) for every second-order layer μ.
    The occurrence average per (λ, μ) is weighted by wλ·wμ and summed.
    A user collaborating with the same neighbor twice contributes two
    occurrences; edge instances, not distinct pairs, are counted.
    """
    total = 0.0
    for lam in LAYERS:
        w_lam = weights[lam]
        occurrences = list(
            _eligible_occurrences(graph.adjacency(lam, u), focal, t, window_start)
        )
        if not occurrences or w_lam == 0.0:
            continue
        acc = 0.0
        for v, t_prime in occurrences:
            inner = 0.0
            for mu in LAYERS:
                w_mu = weights[mu]
                if w_mu == 0.0:
                    continue
                adj = graph.adjacency(mu, v)
                if adj is not None:
                    inner += w_mu * adj.count_before(t_prime, window_start)
            acc += inner
        total += w_lam * (acc / len(occurrences))
    return total
