"""Per-pull-request feature computation.

Contribution counts bucket a submitter's prior activities by dependency
scope inside a sliding window anchored at the focal PR's close time;
control variables reproduce the standard pull-request decision factors;
collaboration metrics query the multilayer graph with the same window.
"""

from __future__ import annotations

import bisect
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .collabgraph import (
    LayerWeights,
    MultiLayerTemporalGraph,
    build_graph,
    layer_weights,
    link_strength,
    second_order_centrality,
)
from .depgraph import DependencyGraph, Scope
from .events import PULL_REQUEST, ActivityEvent

SECONDS_PER_DAY = 86_400

ECOSYSTEM = "ecosystem"
SCOPE_KEYS = (
    Scope.INTRA_PROJECT.value,
    ECOSYSTEM,
    Scope.DOWNSTREAM.value,
    Scope.UPSTREAM.value,
    Scope.NON_DEPENDENCY.value,
)


@dataclass(frozen=True)
class ContributionCounts:
    prs_submitted: int = 0
    prs_merged: int = 0
    pr_comments: int = 0
    issues_submitted: int = 0
    issue_comments: int = 0

    @property
    def pr_merge_ratio(self) -> float:
        if self.prs_submitted == 0:
            return 0.0
        return self.prs_merged / self.prs_submitted


@dataclass(frozen=True)
class ControlVars:
    commit_count: int
    age_minutes: float
    integrator_experience: int
    self_integrated: bool
    has_comments: bool
    external_comment: bool
    has_hash_reference: bool
    is_newcomer: bool


@dataclass(frozen=True)
class FeatureRow:
    pr_id: str
    project: str
    submitter: str
    merged: bool
    controls: ControlVars
    contributions: Mapping[str, ContributionCounts]
    centrality: float
    direct_collab: float


@dataclass(frozen=True)
class PipelineConfig:
    window_days: int = 90
    cap: int = 688
    cap_fraction: float = 0.02
    vif_threshold: float = 5.0
    spearman_threshold: float = 0.5
    cooks_multiplier: float = 4.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("window_days", "cap", "cap_fraction", "vif_threshold",
                     "spearman_threshold", "cooks_multiplier"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def as_dict(self) -> dict:
        return {
            "window_days": self.window_days,
            "cap": self.cap,
            "cap_fraction": self.cap_fraction,
            "vif_threshold": self.vif_threshold,
            "spearman_threshold": self.spearman_threshold,
            "cooks_multiplier": self.cooks_multiplier,
            "rng_seed": self.rng_seed,
        }


class _UserHistory:
    """Per-user (activity, involvement) records sorted by activity close time."""

    __slots__ = ("times", "records")

    def __init__(self) -> None:
        self.times: list[int] = []
        # (project, kind, submitted, merged, comments_by_user)
        self.records: list[tuple[str, str, bool, bool, int]] = []


class EventIndex:
    """Query indexes over a filtered corpus.

    Built once, then shared by every per-PR feature computation; all
    lookups are reads over sorted arrays.
    """

    def __init__(self, events: Sequence[ActivityEvent]):
        self._histories: dict[str, _UserHistory] = {}
        self._first_merged: dict[tuple[str, str], int] = {}
        self._integrated: dict[tuple[str, str], list[int]] = {}

        order = sorted(
            (e for e in events if e.closed_at is not None),
            key=lambda e: (e.closed_at, e.id),
        )
        for event in order:
            t = event.closed_at
            comment_counts: dict[str, int] = {}
            for comment in event.comments:
                comment_counts[comment.author] = comment_counts.get(comment.author, 0) + 1
            involved = dict.fromkeys([event.submitter, *comment_counts])
            for user in involved:
                history = self._histories.get(user)
                if history is None:
                    history = self._histories[user] = _UserHistory()
                history.times.append(t)
                history.records.append(
                    (
                        event.project,
                        event.kind,
                        user == event.submitter,
                        bool(event.merged) if user == event.submitter else False,
                        comment_counts.get(user, 0),
                    )
                )
            if event.kind == PULL_REQUEST:
                if event.merged:
                    key = (event.submitter, event.project)
                    if key not in self._first_merged:
                        self._first_merged[key] = t
                if event.integrator is not None:
                    self._integrated.setdefault(
                        (event.integrator, event.project), []
                    ).append(t)

    def is_newcomer(self, user: str, project: str, t: int) -> bool:
        """True iff the user has no merged PR in the project closed before t."""
        first = self._first_merged.get((user, project))
        return first is None or first >= t

    def integrator_experience(self, integrator: str, project: str, t: int) -> int:
        times = self._integrated.get((integrator, project))
        if not times:
            return 0
        return bisect.bisect_left(times, t)

    def window_records(self, user: str, start: int, end: int):
        history = self._histories.get(user)
        if history is None:
            return ()
        lo = bisect.bisect_left(history.times, start)
        hi = bisect.bisect_left(history.times, end, lo)
        return history.records[lo:hi]


def _ensure_index(events) -> EventIndex:
    return events if isinstance(events, EventIndex) else EventIndex(events)


class _Tally:
    __slots__ = ("prs", "merged", "pr_comments", "issues", "issue_comments")

    def __init__(self) -> None:
        self.prs = 0
        self.merged = 0
        self.pr_comments = 0
        self.issues = 0
        self.issue_comments = 0

    def freeze(self) -> ContributionCounts:
        return ContributionCounts(
            prs_submitted=self.prs,
            prs_merged=self.merged,
            pr_comments=self.pr_comments,
            issues_submitted=self.issues,
            issue_comments=self.issue_comments,
        )


def contribution_counts(
    events: Sequence[ActivityEvent] | EventIndex,
    graph: DependencyGraph,
    user: str,
    focal: str,
    t: int,
    window_days: int,
) -> dict[str, ContributionCounts]:
    """Bucket the user's prior contributions by scope relative to `focal`.

    An activity counts iff its close time lies in [t − window, t); the
    strict upper bound keeps the focal PR itself out. The ecosystem
    bucket sums the three non-intra scopes; merge ratios are computed
    per bucket from that bucket's own submissions.
    """
    index = _ensure_index(events)
    start = t - window_days * SECONDS_PER_DAY
    tallies = {key: _Tally() for key in SCOPE_KEYS}
    deps = graph.dependencies_of(focal)
    dependents = graph.dependents_of(focal)
    for project, kind, submitted, merged, n_comments in index.window_records(
        user, start, t
    ):
        if project == focal:
            buckets = (tallies[Scope.INTRA_PROJECT.value],)
        else:
            if project in dependents:
                scope_key = Scope.DOWNSTREAM.value
            elif project in deps:
                scope_key = Scope.UPSTREAM.value
            else:
                scope_key = Scope.NON_DEPENDENCY.value
            buckets = (tallies[scope_key], tallies[ECOSYSTEM])
        for tally in buckets:
            if kind == PULL_REQUEST:
                if submitted:
                    tally.prs += 1
                    if merged:
                        tally.merged += 1
                tally.pr_comments += n_comments
            else:
                if submitted:
                    tally.issues += 1
                tally.issue_comments += n_comments
    return {key: tally.freeze() for key, tally in tallies.items()}


def is_newcomer(
    events: Sequence[ActivityEvent] | EventIndex, user: str, project: str, t: int
) -> bool:
    """False iff the user has a merged PR in the project closed before t.

    Unlike every other feature this looks at all history, not a window:
    successful submitters never become newcomers again.
    """
    return _ensure_index(events).is_newcomer(user, project, t)


@dataclass
class ControlDiagnostics:
    missing_integrator: int = 0
    pr_ids: list[str] = field(default_factory=list)


def control_vars(
    pr: ActivityEvent,
    events: Sequence[ActivityEvent] | EventIndex,
    diagnostics: ControlDiagnostics | None = None,
) -> ControlVars:
    """Standard decision factors of a single closed pull request."""
    if pr.kind != PULL_REQUEST:
        raise ValueError(f"control variables are defined for pull requests, got {pr.kind}")
    index = _ensure_index(events)
    t = pr.closed_at
    if pr.integrator is None:
        if diagnostics is not None:
            diagnostics.missing_integrator += 1
            diagnostics.pr_ids.append(pr.id)
        integrator_experience = 0
        self_integrated = False
    else:
        integrator_experience = index.integrator_experience(pr.integrator, pr.project, t)
        self_integrated = pr.integrator == pr.submitter

    external_comment = False
    for comment in pr.comments:
        author = comment.author
        if author == pr.submitter or author == pr.integrator:
            continue
        # Project contributors are users with a merged PR in the project
        # before this PR closed; everyone else is external.
        if index.is_newcomer(author, pr.project, t):
            external_comment = True
            break

    return ControlVars(
        commit_count=pr.commit_count or 0,
        age_minutes=(t - pr.created_at) / 60.0,
        integrator_experience=integrator_experience,
        self_integrated=self_integrated,
        has_comments=len(pr.comments) > 0,
        external_comment=external_comment,
        has_hash_reference="#" in pr.title or "#" in pr.description,
        is_newcomer=index.is_newcomer(pr.submitter, pr.project, t),
    )


def _assemble_one(
    pr: ActivityEvent,
    index: EventIndex,
    dep_graph: DependencyGraph,
    collab: MultiLayerTemporalGraph,
    weights: LayerWeights,
    cfg: PipelineConfig,
    diagnostics: ControlDiagnostics,
) -> FeatureRow:
    t = pr.closed_at
    window_start = t - cfg.window_days * SECONDS_PER_DAY
    controls = control_vars(pr, index, diagnostics)
    contributions = contribution_counts(
        index, dep_graph, pr.submitter, pr.project, t, cfg.window_days
    )
    centrality = second_order_centrality(
        collab, weights, pr.submitter, pr.project, t, window_start
    )
    if pr.integrator is None or pr.integrator == pr.submitter:
        direct = 0.0
    else:
        direct = link_strength(
            collab, weights, pr.submitter, pr.integrator, pr.project, t, window_start
        )
    return FeatureRow(
        pr_id=pr.id,
        project=pr.project,
        submitter=pr.submitter,
        merged=bool(pr.merged),
        controls=controls,
        contributions=contributions,
        centrality=centrality,
        direct_collab=direct,
    )


@dataclass
class AssembledMatrix:
    rows: list[FeatureRow]
    weights: LayerWeights
    diagnostics: ControlDiagnostics


def assemble_matrix(
    events: Sequence[ActivityEvent],
    dep_graph: DependencyGraph,
    cfg: PipelineConfig,
    collab: MultiLayerTemporalGraph | None = None,
    threads: int = 1,
) -> AssembledMatrix:
    """One feature row per retained pull request, in corpus order.

    The collaboration graph and its layer weights are built once from the
    whole corpus; each per-PR metric query then restricts edges to the
    PR's own window. Rows are computed independently and merged back in
    input order, so the result is identical for any thread count.
    """
    if collab is None:
        collab = build_graph(events)
    try:
        weights = layer_weights(collab)
    except ValueError:
        weights = LayerWeights({layer: 0.0 for layer in collab.edges_by_layer})
    index = EventIndex(events)
    prs = [e for e in events if e.kind == PULL_REQUEST and e.closed_at is not None]

    # Each worker gets its own diagnostics object; merged in input order
    # afterwards so counts and id lists are identical for any thread count.
    def compute(pr: ActivityEvent) -> tuple[FeatureRow, ControlDiagnostics]:
        local = ControlDiagnostics()
        return _assemble_one(pr, index, dep_graph, collab, weights, cfg, local), local

    if threads <= 1 or len(prs) < 2:
        results = [compute(pr) for pr in prs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(compute, prs))
    rows = [row for row, _ in results]
    diagnostics = ControlDiagnostics()
    for _, local in results:
        diagnostics.missing_integrator += local.missing_integrator
        diagnostics.pr_ids.extend(local.pr_ids)
    return AssembledMatrix(rows=rows, weights=weights, diagnostics=diagnostics)
