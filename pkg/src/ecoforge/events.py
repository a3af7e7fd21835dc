"""Forge event-log ingestion: parsing, validation, bot detection, filtering.

Events arrive as newline-delimited JSON, one activity (closed pull request
or issue) per line. Parsing is forgiving about optional fields so that the
filtering stage can attribute removals to explicit criteria instead of
losing records at the parser.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

PULL_REQUEST = "pull_request"
ISSUE = "issue"

DEFAULT_GHOST_LOGIN = "ghost"
DEFAULT_HEAVY_USER_THRESHOLD = 400


class BotListError(Exception):
    """A bot-list file could not be read."""


@dataclass(frozen=True)
class Comment:
    author: str
    at: int  # epoch seconds, UTC


@dataclass(frozen=True)
class Review:
    reviewer: str
    at: int  # epoch seconds, UTC


@dataclass(frozen=True)
class ActivityEvent:
    """One closed development activity (pull request or issue).

    Optional fields stay ``None`` when the source record omitted them;
    the filtering stage decides what that means. ``submitter_is_bot``
    carries the forge's own account-type metadata.
    """

    kind: str  # PULL_REQUEST or ISSUE
    id: str
    project: str
    submitter: str
    created_at: int
    closed_at: int | None = None
    merged: bool | None = None
    integrator: str | None = None
    commit_count: int | None = None
    title: str = ""
    description: str = ""
    comments: tuple[Comment, ...] = ()
    reviews: tuple[Review, ...] = ()
    submitter_is_bot: bool = False

    @property
    def is_pull_request(self) -> bool:
        return self.kind == PULL_REQUEST


@dataclass(frozen=True)
class FilterConfig:
    bot_lists: tuple[str, ...] = ()
    heavy_user_threshold: int = DEFAULT_HEAVY_USER_THRESHOLD
    drop_ghost: bool = True
    ghost_login: str = DEFAULT_GHOST_LOGIN

    def __post_init__(self) -> None:
        if self.heavy_user_threshold < 1:
            raise ValueError("heavy_user_threshold must be >= 1")


@dataclass
class ParseResult:
    events: list[ActivityEvent]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def error_count(self) -> int:
        return len(self.diagnostics)


@dataclass
class FilterResult:
    retained: list[ActivityEvent]
    removed_counts: dict[str, int]

    @property
    def removed_total(self) -> int:
        return sum(self.removed_counts.values())


@dataclass
class BotReport:
    bots: set[str]
    review_list: set[str]


def parse_timestamp(value) -> int:
    """Parse an ISO-8601 UTC timestamp (or epoch seconds) to epoch seconds."""
    if isinstance(value, bool):
        raise ValueError(f"bad timestamp: {value!r}")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError(f"bad timestamp: {value!r}")
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError as exc:
            raise ValueError(f"bad timestamp: {value!r}") from exc
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"bad timestamp: {value!r}")


def format_timestamp(seconds: int) -> str:
    return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def _require_str(record: dict, name: str) -> str:
    if name not in record or record[name] is None:
        raise ValueError(f"missing field: {name}")
    value = record[name]
    if not isinstance(value, str) or not value:
        raise ValueError(f"bad field: {name}")
    return value


def _parse_record(record: dict) -> ActivityEvent:
    kind = _require_str(record, "kind")
    if kind not in (PULL_REQUEST, ISSUE):
        raise ValueError(f"bad field: kind ({kind!r})")
    event_id = _require_str(record, "id")
    project = _require_str(record, "project")
    submitter = _require_str(record, "submitter")
    if "created_at" not in record or record["created_at"] is None:
        raise ValueError("missing field: created_at")
    created_at = parse_timestamp(record["created_at"])

    closed_at = None
    if record.get("closed_at") is not None:
        closed_at = parse_timestamp(record["closed_at"])
        if closed_at < created_at:
            raise ValueError("closed_at before created_at")

    merged = record.get("merged")
    if merged is not None and not isinstance(merged, bool):
        raise ValueError("bad field: merged")
    integrator = record.get("integrator")
    if integrator is not None and (not isinstance(integrator, str) or not integrator):
        raise ValueError("bad field: integrator")
    commit_count = record.get("commit_count")
    if commit_count is not None:
        if isinstance(commit_count, bool) or not isinstance(commit_count, int):
            raise ValueError("bad field: commit_count")
        if commit_count < 0:
            raise ValueError("bad field: commit_count")
    if kind == ISSUE:
        # Issue records must not carry pull-request-only fields.
        merged = None
        integrator = None
        commit_count = None

    comments = []
    for entry in record.get("comments") or ():
        if not isinstance(entry, dict):
            raise ValueError("bad field: comments")
        author = entry.get("author")
        if not isinstance(author, str) or not author:
            raise ValueError("bad field: comments.author")
        comments.append(Comment(author=author, at=parse_timestamp(entry.get("at"))))

    reviews = []
    if kind == PULL_REQUEST:
        for entry in record.get("reviews") or ():
            if not isinstance(entry, dict):
                raise ValueError("bad field: reviews")
            reviewer = entry.get("reviewer")
            if not isinstance(reviewer, str) or not reviewer:
                raise ValueError("bad field: reviews.reviewer")
            reviews.append(
                Review(reviewer=reviewer, at=parse_timestamp(entry.get("at")))
            )

    submitter_is_bot = record.get("submitter_is_bot", False)
    if not isinstance(submitter_is_bot, bool):
        raise ValueError("bad field: submitter_is_bot")

    title = record.get("title") or ""
    description = record.get("description") or ""
    if not isinstance(title, str) or not isinstance(description, str):
        raise ValueError("bad field: title/description")

    return ActivityEvent(
        kind=kind,
        id=event_id,
        project=project,
        submitter=submitter,
        created_at=created_at,
        closed_at=closed_at,
        merged=merged,
        integrator=integrator,
        commit_count=commit_count,
        title=title,
        description=description,
        comments=tuple(comments),
        reviews=tuple(reviews),
        submitter_is_bot=submitter_is_bot,
    )


def parse_events(stream: Iterable[str]) -> ParseResult:
    """Parse newline-delimited JSON activity records.

    Well-formed events are returned in input order. Malformed lines are
    never silently dropped: each produces a diagnostic naming the line
    number and the violation.
    """
    events: list[ActivityEvent] = []
    diagnostics: list[str] = []
    for line_no, line in enumerate(stream, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            diagnostics.append(f"line {line_no}: invalid JSON ({exc.msg})")
            continue
        if not isinstance(record, dict):
            diagnostics.append(f"line {line_no}: record is not an object")
            continue
        try:
            events.append(_parse_record(record))
        except ValueError as exc:
            diagnostics.append(f"line {line_no}: {exc}")
    return ParseResult(events=events, diagnostics=diagnostics)


def event_to_record(event: ActivityEvent) -> dict:
    """Serialize an event back to its wire-format JSON object."""
    record: dict = {
        "kind": event.kind,
        "id": event.id,
        "project": event.project,
        "submitter": event.submitter,
        "created_at": format_timestamp(event.created_at),
        "closed_at": format_timestamp(event.closed_at)
        if event.closed_at is not None
        else None,
        "title": event.title,
        "description": event.description,
        "comments": [
            {"author": c.author, "at": format_timestamp(c.at)} for c in event.comments
        ],
    }
    if event.kind == PULL_REQUEST:
        record["merged"] = event.merged
        record["integrator"] = event.integrator
        record["commit_count"] = event.commit_count
        record["reviews"] = [
            {"reviewer": r.reviewer, "at": format_timestamp(r.at)}
            for r in event.reviews
        ]
    if event.submitter_is_bot:
        record["submitter_is_bot"] = True
    return record


def load_bot_list(path: str) -> set[str]:
    """Read one newline-delimited login list; '#' starts a comment."""
    logins: set[str] = set()
    try:
        with open(path, "r", encoding="utf-8") as fp:
            for line in fp:
                token = line.split("#", 1)[0].strip()
                if token:
                    logins.add(token)
    except OSError as exc:
        raise BotListError(f"unreadable bot-list file: {path} ({exc})") from exc
    return logins


def detect_bots(events: Sequence[ActivityEvent], cfg: FilterConfig) -> BotReport:
    """Collect known bots and the heavy-user review list.

    Bots are the union of list-file entries and accounts the forge itself
    flags as bots. Users whose closed-PR count exceeds the threshold are
    only *reported* for manual review; volume alone is not proof of
    automation, so they are never auto-removed.
    """
    bots: set[str] = set()
    for path in cfg.bot_lists:
        bots |= load_bot_list(path)
    for event in events:
        if event.submitter_is_bot:
            bots.add(event.submitter)

    closed_pr_counts: dict[str, int] = {}
    for event in events:
        if event.kind == PULL_REQUEST and event.closed_at is not None:
            closed_pr_counts[event.submitter] = (
                closed_pr_counts.get(event.submitter, 0) + 1
            )
    review_list = {
        user
        for user, count in closed_pr_counts.items()
        if count > cfg.heavy_user_threshold and user not in bots
    }
    return BotReport(bots=bots, review_list=review_list)


REMOVAL_GHOST = "ghost_submitter"
REMOVAL_UNCLOSED = "not_closed"
REMOVAL_MISSING = "missing_data"
REMOVAL_BOT = "bot_submitter"
REMOVAL_CRITERIA = (REMOVAL_GHOST, REMOVAL_UNCLOSED, REMOVAL_MISSING, REMOVAL_BOT)


def _missing_data(event: ActivityEvent) -> bool:
    if not event.submitter or event.created_at is None or event.closed_at is None:
        return True
    if event.kind == PULL_REQUEST:
        if event.merged is None or event.commit_count is None:
            return True
    return False


def _removal_reason(
    event: ActivityEvent, cfg: FilterConfig, bots: set[str]
) -> str | None:
    # First failing criterion wins, in the order the criteria are defined.
    if cfg.drop_ghost and event.submitter == cfg.ghost_login:
        return REMOVAL_GHOST
    if event.closed_at is None:
        return REMOVAL_UNCLOSED
    if _missing_data(event):
        return REMOVAL_MISSING
    if event.submitter in bots or event.submitter_is_bot:
        return REMOVAL_BOT
    return None


def filter_activities(
    events: Sequence[ActivityEvent], cfg: FilterConfig, bots: set[str]
) -> FilterResult:
    """Keep activities that are closed, complete, and human-submitted.

    A bot-submitted activity is dropped wholesale, including any human
    comments inside it; the alternative (salvaging the human comments as
    contribution/collaboration sources) would let bot-opened threads feed
    the metrics and is deliberately not taken.
    """
    retained: list[ActivityEvent] = []
    removed_counts = {criterion: 0 for criterion in REMOVAL_CRITERIA}
    for event in events:
        reason = _removal_reason(event, cfg, bots)
        if reason is None:
            retained.append(event)
        else:
            removed_counts[reason] += 1
    return FilterResult(retained=retained, removed_counts=removed_counts)


