"""Synthetic forge-corpus generator with a declared acceptance model.

Events are synthesized so that each pull request's merge decision is a
Bernoulli draw from a logistic model over *true* features tracked by the
generator itself (windowed ecosystem activity, newcomer status, past
interactions with the integrator, ...). Downstream stages recompute the
same quantities from the emitted events, so declared effect signs are
recoverable end to end. Everything derives from one seed.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .events import format_timestamp

EPOCH_START = 1_514_764_800  # 2018-01-01T00:00:00Z
SECONDS_PER_DAY = 86_400

SUPPORTED_EFFECTS = (
    "intercept",
    "ecosystem_prs_submitted",
    "intra_project_prs_submitted",
    "direct_collab",
    "is_newcomer",
    "commit_count",
    "age_minutes",
    "has_comments",
)
_COUNT_EFFECTS = {
    "ecosystem_prs_submitted",
    "intra_project_prs_submitted",
    "direct_collab",
    "commit_count",
    "age_minutes",
}


@dataclass
class EffectProfile:
    """Ground-truth acceptance model plus generator shape knobs."""

    intercept: float = 1.3
    project_sigma: float = 0.5
    effects: dict[str, float] = field(default_factory=dict)
    window_days: int = 90
    # shape knobs
    pr_share: float = 0.6
    comment_mean: float = 1.2
    review_mean: float = 0.6
    self_integrate_rate: float = 0.12
    hash_reference_rate: float = 0.3
    affiliation_rate: float = 0.85
    bot_rate: float = 0.01
    ghost_rate: float = 0.005
    open_rate: float = 0.004
    n_bots: int = 3

    @classmethod
    def from_dict(cls, data: dict) -> "EffectProfile":
        if not isinstance(data, dict):
            raise ValueError("effect profile must be a JSON object")
        effects = data.get("effects", {})
        if not isinstance(effects, dict):
            raise ValueError("effect profile: 'effects' must be an object")
        for name, value in effects.items():
            if name not in SUPPORTED_EFFECTS or name == "intercept":
                raise ValueError(f"effect profile: unknown effect {name!r}")
            if not isinstance(value, (int, float)):
                raise ValueError(f"effect profile: effect {name!r} must be numeric")
        kwargs = {"effects": {k: float(v) for k, v in effects.items()}}
        for name in (
            "intercept", "project_sigma", "window_days", "pr_share", "comment_mean",
            "review_mean", "self_integrate_rate", "hash_reference_rate",
            "affiliation_rate", "bot_rate", "ghost_rate", "open_rate", "n_bots",
        ):
            shape = data.get("shape", {})
            if name in data:
                kwargs[name] = data[name]
            elif name in shape:
                kwargs[name] = shape[name]
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str) -> "EffectProfile":
        with open(path, "r", encoding="utf-8") as fp:
            return cls.from_dict(json.load(fp))


@dataclass
class SynthConfig:
    users: int = 200
    projects: int = 40
    days: int = 365
    target_prs: int = 10_000
    seed: int = 0


class _PairLog:
    """Interaction times and projects per unordered user pair."""

    __slots__ = ("times", "projects")

    def __init__(self) -> None:
        self.times: list[int] = []
        self.projects: list[int] = []

    def count_window(self, start: int, end: int, exclude_project: int) -> int:
        lo = bisect.bisect_left(self.times, start)
        hi = bisect.bisect_left(self.times, end, lo)
        return sum(1 for i in range(lo, hi) if self.projects[i] != exclude_project)


class _Truth:
    """Windowed per-user bookkeeping, maintained in close-time order."""

    def __init__(self, window_seconds: int):
        self.window = window_seconds
        self.user_pr_times: dict[int, list[int]] = {}
        self.user_project_pr_times: dict[tuple[int, int], list[int]] = {}
        self.first_merged: dict[tuple[int, int], int] = {}
        self.pairs: dict[tuple[int, int], _PairLog] = {}

    def _window_count(self, times: list[int] | None, t: int) -> int:
        if not times:
            return 0
        lo = bisect.bisect_left(times, t - self.window)
        hi = bisect.bisect_left(times, t, lo)
        return hi - lo

    def pr_counts(self, user: int, project: int, t: int) -> tuple[int, int]:
        total = self._window_count(self.user_pr_times.get(user), t)
        intra = self._window_count(self.user_project_pr_times.get((user, project)), t)
        return total - intra, intra

    def is_newcomer(self, user: int, project: int, t: int) -> bool:
        first = self.first_merged.get((user, project))
        return first is None or first >= t

    def pair_count(self, u: int, v: int, project: int, t: int) -> int:
        log = self.pairs.get((u, v) if u < v else (v, u))
        if log is None:
            return 0
        return log.count_window(t - self.window, t, project)

    def record_pr(self, user: int, project: int, t: int, merged: bool) -> None:
        self.user_pr_times.setdefault(user, []).append(t)
        self.user_project_pr_times.setdefault((user, project), []).append(t)
        if merged and (user, project) not in self.first_merged:
            self.first_merged[(user, project)] = t

    def record_interaction(self, u: int, v: int, project: int, t: int) -> None:
        if u == v:
            return
        key = (u, v) if u < v else (v, u)
        log = self.pairs.get(key)
        if log is None:
            log = self.pairs[key] = _PairLog()
        log.times.append(t)
        log.projects.append(project)


@dataclass
class _Draft:
    kind: str
    id: str
    project: int
    submitter: int
    created_at: int
    closed_at: int | None
    commit_count: int | None
    integrator: int | None
    comments: list[tuple[int, int]]  # (author, at)
    reviews: list[tuple[int, int]]
    has_hash: bool


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def generate_corpus(cfg: SynthConfig, profile: EffectProfile) -> dict:
    """Generate events, dependency manifest, bot list, and truth records.

    Returns a dict with keys: events (list of JSON-ready dicts in close
    order), deps (list of (dependent, dependency) id pairs), bots (list
    of bot logins), truth (per-PR list of dicts with the true features,
    linear predictor, and probability), merged_fraction.
    """
    rng = np.random.default_rng(cfg.seed)
    n_users, n_projects = cfg.users, cfg.projects
    if n_users < 4 or n_projects < 2:
        raise ValueError("need at least 4 users and 2 projects")

    user_names = [f"user_{i:05d}" for i in range(n_users)]
    project_names = [f"org/proj_{j:04d}" for j in range(n_projects)]
    bot_ids = list(range(min(profile.n_bots, n_users // 4)))
    bot_names = {i: f"dep-bot-{i:02d}" for i in bot_ids}

    # Dependency edges: each project depends on up to 3 earlier ones (acyclic).
    deps: list[tuple[str, str]] = []
    deps_set: set[tuple[int, int]] = set()
    for j in range(1, n_projects):
        n_dep = int(rng.integers(0, min(4, j + 1)))
        if n_dep:
            targets = rng.choice(j, size=n_dep, replace=False)
            for tgt in np.sort(targets):
                deps.append((project_names[j], project_names[int(tgt)]))
                deps_set.add((j, int(tgt)))

    # Skewed popularity for projects and users.
    project_weight = rng.pareto(1.5, n_projects) + 0.1
    project_weight /= project_weight.sum()
    user_weight = rng.pareto(2.0, n_users) + 0.2
    user_weight /= user_weight.sum()

    # Affiliations and maintainers.
    homes = [
        rng.choice(n_projects, size=int(rng.integers(1, 4)), replace=False, p=project_weight)
        for _ in range(n_users)
    ]
    maintainers = [
        rng.choice(n_users, size=int(rng.integers(1, 4)), replace=False, p=user_weight)
        for _ in range(n_projects)
    ]
    project_effect = rng.normal(0.0, profile.project_sigma, n_projects)

    n_prs = cfg.target_prs
    n_issues = int(round(n_prs * (1.0 - profile.pr_share) / max(profile.pr_share, 1e-9)))
    n_events = n_prs + n_issues
    horizon = cfg.days * SECONDS_PER_DAY

    kinds = np.concatenate(
        [np.full(n_prs, True), np.full(n_issues, False)]
    )
    rng.shuffle(kinds)
    created = EPOCH_START + np.sort(
        rng.integers(0, horizon, size=n_events, dtype=np.int64)
    )
    duration = np.minimum(
        (rng.lognormal(7.5, 1.5, n_events)).astype(np.int64) + 60, 120 * SECONDS_PER_DAY
    )
    submitters = rng.choice(n_users, size=n_events, p=user_weight)

    drafts: list[_Draft] = []
    pr_seq = issue_seq = 0
    for i in range(n_events):
        submitter = int(submitters[i])
        if homes[submitter].size and rng.random() < profile.affiliation_rate:
            project = int(homes[submitter][int(rng.integers(homes[submitter].size))])
        else:
            project = int(rng.choice(n_projects, p=project_weight))
        created_at = int(created[i])
        closed_at: int | None = created_at + int(duration[i])
        if rng.random() < profile.open_rate:
            closed_at = None

        pool = list(maintainers[project])
        for extra in homes[submitter]:
            for m in maintainers[int(extra)]:
                if m not in pool:
                    pool.append(int(m))
        n_comments = int(rng.poisson(profile.comment_mean))
        comments = []
        if closed_at is not None and n_comments and pool:
            span = max(closed_at - created_at, 1)
            for _ in range(n_comments):
                author = int(pool[int(rng.integers(len(pool)))])
                at = created_at + int(rng.integers(span))
                comments.append((author, at))
            comments.sort(key=lambda pair: pair[1])

        if kinds[i]:
            pr_seq += 1
            event_id = f"pr-{pr_seq:07d}"
            commit_count = 1 + int(rng.geometric(0.45))
            reviews = []
            if closed_at is not None and pool:
                for _ in range(int(rng.poisson(profile.review_mean))):
                    reviewer = int(pool[int(rng.integers(len(pool)))])
                    at = created_at + int(rng.integers(max(closed_at - created_at, 1)))
                    reviews.append((reviewer, at))
                reviews.sort(key=lambda pair: pair[1])
            closers = maintainers[project]
            if rng.random() < profile.self_integrate_rate or closers.size == 0:
                integrator = submitter
            else:
                integrator = int(closers[int(rng.integers(closers.size))])
            drafts.append(
                _Draft(
                    kind="pull_request",
                    id=event_id,
                    project=project,
                    submitter=submitter,
                    created_at=created_at,
                    closed_at=closed_at,
                    commit_count=commit_count,
                    integrator=integrator,
                    comments=comments,
                    reviews=reviews,
                    has_hash=bool(rng.random() < profile.hash_reference_rate),
                )
            )
        else:
            issue_seq += 1
            drafts.append(
                _Draft(
                    kind="issue",
                    id=f"issue-{issue_seq:07d}",
                    project=project,
                    submitter=submitter,
                    created_at=created_at,
                    closed_at=closed_at,
                    commit_count=None,
                    integrator=None,
                    comments=comments,
                    reviews=[],
                    has_hash=bool(rng.random() < profile.hash_reference_rate),
                )
            )

    # Decide merges in close-time order so every truth lookup is causal.
    truth = _Truth(profile.window_days * SECONDS_PER_DAY)
    closed_order = sorted(
        (d for d in drafts if d.closed_at is not None),
        key=lambda d: (d.closed_at, d.id),
    )
    merged_flags: dict[str, bool] = {}
    truth_rows: list[dict] = []
    merged_count = 0
    for draft in closed_order:
        t = draft.closed_at
        if draft.kind == "pull_request":
            eco, intra = truth.pr_counts(draft.submitter, draft.project, t)
            newcomer = truth.is_newcomer(draft.submitter, draft.project, t)
            direct = (
                truth.pair_count(draft.submitter, draft.integrator, draft.project, t)
                if draft.integrator != draft.submitter
                else 0
            )
            feats = {
                "ecosystem_prs_submitted": float(eco),
                "intra_project_prs_submitted": float(intra),
                "direct_collab": float(direct),
                "is_newcomer": 1.0 if newcomer else 0.0,
                "commit_count": float(draft.commit_count),
                "age_minutes": (t - draft.created_at) / 60.0,
                "has_comments": 1.0 if draft.comments else 0.0,
            }
            eta = profile.intercept + project_effect[draft.project]
            for name, coef in profile.effects.items():
                value = feats[name]
                if name in _COUNT_EFFECTS:
                    value = math.log1p(value)
                eta += coef * value
            prob = _sigmoid(eta)
            merged = bool(rng.random() < prob)
            merged_flags[draft.id] = merged
            merged_count += merged
            truth.record_pr(draft.submitter, draft.project, t, merged)
            truth_rows.append(
                {
                    "pr_id": draft.id,
                    "project": project_names[draft.project],
                    "submitter": user_names[draft.submitter],
                    **feats,
                    "eta": eta,
                    "prob": prob,
                    "merged": int(merged),
                }
            )
        for author, at in draft.comments:
            truth.record_interaction(author, draft.submitter, draft.project, t)
        for reviewer, at in draft.reviews:
            truth.record_interaction(reviewer, draft.submitter, draft.project, t)
        if (
            draft.kind == "pull_request"
            and draft.integrator is not None
            and draft.integrator != draft.submitter
        ):
            truth.record_interaction(draft.integrator, draft.submitter, draft.project, t)

    # Sprinkle ghost/bot submitters over a copy of the name mapping, then emit.
    events: list[dict] = []
    for draft in drafts:
        submitter_name = user_names[draft.submitter]
        submitter_is_bot = False
        roll = rng.random()
        if roll < profile.ghost_rate:
            submitter_name = "ghost"
        elif bot_ids and roll < profile.ghost_rate + profile.bot_rate:
            bot = bot_ids[int(rng.integers(len(bot_ids)))]
            submitter_name = bot_names[bot]
            submitter_is_bot = bool(rng.random() < 0.5)
        record = {
            "kind": draft.kind,
            "id": draft.id,
            "project": project_names[draft.project],
            "submitter": submitter_name,
            "created_at": format_timestamp(draft.created_at),
            "closed_at": format_timestamp(draft.closed_at)
            if draft.closed_at is not None
            else None,
            "title": f"{draft.kind} {draft.id}",
            "description": f"synthetic change #{draft.id[-4:]}"
            if draft.has_hash
            else "synthetic change",
            "comments": [
                {"author": user_names[a], "at": format_timestamp(at)}
                for a, at in draft.comments
            ],
        }
        if draft.kind == "pull_request":
            record["merged"] = merged_flags.get(draft.id, False)
            record["integrator"] = (
                user_names[draft.integrator] if draft.integrator is not None else None
            )
            record["commit_count"] = draft.commit_count
            record["reviews"] = [
                {"reviewer": user_names[r], "at": format_timestamp(at)}
                for r, at in draft.reviews
            ]
        if submitter_is_bot:
            record["submitter_is_bot"] = True
        events.append(record)

    n_labeled = len(truth_rows)
    return {
        "events": events,
        "deps": deps,
        "bots": sorted(bot_names.values()),
        "truth": truth_rows,
        "merged_fraction": merged_count / n_labeled if n_labeled else 0.0,
    }


def write_corpus(out_dir: str, corpus: dict, profile: EffectProfile, cfg: SynthConfig) -> dict[str, str]:
    """Write events.ndjson, deps.csv, bots.txt, truth.csv, and synth.json."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "events": os.path.join(out_dir, "events.ndjson"),
        "deps": os.path.join(out_dir, "deps.csv"),
        "bots": os.path.join(out_dir, "bots.txt"),
        "truth": os.path.join(out_dir, "truth.csv"),
        "meta": os.path.join(out_dir, "synth.json"),
    }
    with open(paths["events"], "w", encoding="utf-8", newline="\n") as fp:
        for record in corpus["events"]:
            fp.write(json.dumps(record, sort_keys=True) + "\n")
    with open(paths["deps"], "w", encoding="utf-8", newline="\n") as fp:
        fp.write("dependent,dependency\n")
        for dependent, dependency in corpus["deps"]:
            fp.write(f"{dependent},{dependency}\n")
    with open(paths["bots"], "w", encoding="utf-8", newline="\n") as fp:
        fp.write("# synthetic bot accounts\n")
        for name in corpus["bots"]:
            fp.write(name + "\n")
    truth_rows: Sequence[dict] = corpus["truth"]
    columns = (
        "pr_id", "project", "submitter", "ecosystem_prs_submitted",
        "intra_project_prs_submitted", "direct_collab", "is_newcomer",
        "commit_count", "age_minutes", "has_comments", "eta", "prob", "merged",
    )
    with open(paths["truth"], "w", encoding="utf-8", newline="\n") as fp:
        fp.write(",".join(columns) + "\n")
        for row in truth_rows:
            fp.write(",".join(_fmt(row[c]) for c in columns) + "\n")
    from .workspace import config_digest

    config = {
        "users": cfg.users,
        "projects": cfg.projects,
        "days": cfg.days,
        "target_prs": cfg.target_prs,
        "seed": cfg.seed,
        "profile": {
            "intercept": profile.intercept,
            "project_sigma": profile.project_sigma,
            "effects": profile.effects,
            "window_days": profile.window_days,
        },
    }
    meta = {
        "config": config,
        "config_digest": config_digest(config),
        "merged_fraction": corpus["merged_fraction"],
        "n_events": len(corpus["events"]),
        "n_prs": len(truth_rows),
    }
    with open(paths["meta"], "w", encoding="utf-8", newline="\n") as fp:
        json.dump(meta, fp, indent=2, sort_keys=True)
        fp.write("\n")
    return paths


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)
