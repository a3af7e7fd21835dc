"""Dependency graph construction and scope classification."""

from __future__ import annotations

import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecoforge.depgraph import (
    DependencyGraph,
    Scope,
    build_dependency_graph,
    classify_scope,
)


def _build(text: str):
    return build_dependency_graph(io.StringIO(text))


def test_duplicate_rows_collapse():
    result = _build("dependent,dependency\nB,A\nB,A\n")
    assert result.graph.edges == {("B", "A")}
    assert result.diagnostics == []


def test_self_edge_rejected_with_diagnostic():
    result = _build("dependent,dependency\nA,A\nB,A\n")
    assert result.graph.edges == {("B", "A")}
    assert len(result.diagnostics) == 1
    assert "row 2" in result.diagnostics[0]
    assert "self-edge" in result.diagnostics[0]


def test_no_transitive_closure():
    result = _build("dependent,dependency\nB,A\nC,B\n")
    assert result.graph.edges == {("B", "A"), ("C", "B")}
    assert ("C", "A") not in result.graph.edges


def test_malformed_rows_diagnosed_with_row_number():
    result = _build("dependent,dependency\nB,A,extra\n,A\nC,B\n")
    assert result.graph.edges == {("C", "B")}
    assert len(result.diagnostics) == 2
    assert "row 2" in result.diagnostics[0]
    assert "row 3" in result.diagnostics[1]


def test_missing_header_is_an_error():
    with pytest.raises(ValueError, match="header"):
        _build("B,A\nC,B\n")


def test_scope_classification_paper_scenarios():
    # B depends on A; C is unrelated.
    graph = DependencyGraph.from_pairs([("B", "A")])
    assert classify_scope(graph, "A", "B") is Scope.DOWNSTREAM
    assert classify_scope(graph, "B", "A") is Scope.UPSTREAM
    assert classify_scope(graph, "A", "C") is Scope.NON_DEPENDENCY
    assert classify_scope(graph, "A", "A") is Scope.INTRA_PROJECT


def test_mutual_dependency_tie_breaks_downstream():
    graph = DependencyGraph.from_pairs([("A", "B"), ("B", "A")])
    assert classify_scope(graph, "A", "B") is Scope.DOWNSTREAM
    assert classify_scope(graph, "B", "A") is Scope.DOWNSTREAM


@st.composite
def acyclic_graphs(draw):
    n = draw(st.integers(min_value=2, max_value=10))
    names = [f"p{i}" for i in range(n)]
    pairs = []
    for j in range(1, n):
        for i in range(j):
            if draw(st.booleans()):
                pairs.append((names[j], names[i]))  # later depends on earlier
    return DependencyGraph.from_pairs(pairs), names


@settings(max_examples=200, deadline=None)
@given(acyclic_graphs(), st.data())
def test_partition_and_duality_on_acyclic_graphs(graph_names, data):
    graph, names = graph_names
    focal = data.draw(st.sampled_from(names))
    other = data.draw(st.sampled_from([p for p in names if p != focal]))
    scope = classify_scope(graph, focal, other)
    assert scope in (Scope.DOWNSTREAM, Scope.UPSTREAM, Scope.NON_DEPENDENCY)
    reverse = classify_scope(graph, other, focal)
    # Strict duality holds without cycles.
    if scope is Scope.DOWNSTREAM:
        assert reverse is Scope.UPSTREAM
    elif scope is Scope.UPSTREAM:
        assert reverse is Scope.DOWNSTREAM
    else:
        assert reverse is Scope.NON_DEPENDENCY
