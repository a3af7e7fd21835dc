"""Project dependency relation and contribution-scope classification."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Iterable, TextIO


class Scope(enum.Enum):
    """Where another project sits relative to a focal project."""

    INTRA_PROJECT = "intra_project"
    DOWNSTREAM = "downstream"
    UPSTREAM = "upstream"
    NON_DEPENDENCY = "non_dependency"


ECOSYSTEM_SCOPES = (Scope.DOWNSTREAM, Scope.UPSTREAM, Scope.NON_DEPENDENCY)


@dataclass
class DependencyGraph:
    """Directed "depends on" relation: (dependent, dependency) pairs.

    Self-edges are rejected at build time; duplicates collapse. The graph
    is immutable after build, so scope classification is a pure read.
    """

    edges: frozenset[tuple[str, str]] = frozenset()
    _deps_of: dict[str, set[str]] = field(default_factory=dict, repr=False)
    _dependents_of: dict[str, set[str]] = field(default_factory=dict, repr=False)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "DependencyGraph":
        edges = set()
        deps_of: dict[str, set[str]] = {}
        dependents_of: dict[str, set[str]] = {}
        for dependent, dependency in pairs:
            if dependent == dependency:
                raise ValueError(f"self-edge: {dependent}")
            if (dependent, dependency) in edges:
                continue
            edges.add((dependent, dependency))
            deps_of.setdefault(dependent, set()).add(dependency)
            dependents_of.setdefault(dependency, set()).add(dependent)
        return cls(
            edges=frozenset(edges), _deps_of=deps_of, _dependents_of=dependents_of
        )

    def dependencies_of(self, project: str) -> set[str]:
        return self._deps_of.get(project, set())

    def dependents_of(self, project: str) -> set[str]:
        return self._dependents_of.get(project, set())


@dataclass
class ManifestResult:
    graph: DependencyGraph
    diagnostics: list[str]


def build_dependency_graph(stream: TextIO | Iterable[str]) -> ManifestResult:
    """Build the graph from a CSV manifest with header "dependent,dependency".

    Malformed and self-edge rows are skipped with per-row diagnostics;
    duplicate rows collapse to one edge.
    """
    reader = csv.reader(stream)
    diagnostics: list[str] = []
    pairs: list[tuple[str, str]] = []
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["dependent", "dependency"]:
        raise ValueError(
            'dependency manifest must start with header "dependent,dependency"'
        )
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            diagnostics.append(f"row {row_no}: expected 2 fields, got {len(row)}")
            continue
        dependent, dependency = row[0].strip(), row[1].strip()
        if not dependent or not dependency:
            diagnostics.append(f"row {row_no}: empty project id")
            continue
        if dependent == dependency:
            diagnostics.append(f"row {row_no}: self-edge rejected ({dependent})")
            continue
        pairs.append((dependent, dependency))
    return ManifestResult(graph=DependencyGraph.from_pairs(pairs), diagnostics=diagnostics)


def classify_scope(graph: DependencyGraph, focal: str, other: str) -> Scope:
    """Classify `other` relative to `focal`.

    Downstream means `other` depends on `focal`. Mutual dependencies
    (cycles) classify as Downstream from both sides so that the
    downstream/upstream/non-dependency partition stays exhaustive.
    """
    if focal == other:
        return Scope.INTRA_PROJECT
    if (other, focal) in graph.edges:
        return Scope.DOWNSTREAM
    if (focal, other) in graph.edges:
        return Scope.UPSTREAM
    return Scope.NON_DEPENDENCY
