"""Independent brute-force oracles for the collaboration metrics.

Direct transcriptions of the metric definitions with nested loops over
every layer pair and every edge instance. Deliberately unoptimized and
kept free of the package's adjacency indexes so the two routes stay
independent.
"""

from __future__ import annotations

from ecoforge.collabgraph import LAYERS, CollabEdge, Layer, LayerWeights


def _incident_occurrences(
    edges: list[CollabEdge],
    u: str,
    focal: str | None,
    t: int,
    window_start: int | None,
) -> list[tuple[str, int]]:
    """Occurrences <v, t'> of edges touching u with t' < t (one per instance)."""
    occurrences = []
    for edge in edges:
        if edge.u == edge.v:
            continue
        if edge.u == u:
            partner = edge.v
        elif edge.v == u:
            partner = edge.u
        else:
            continue
        if edge.t >= t:
            continue
        if window_start is not None and edge.t < window_start:
            continue
        if focal is not None and edge.project == focal:
            continue
        occurrences.append((partner, edge.t))
    return occurrences


def brute_second_order_centrality(
    edges_by_layer: dict[Layer, list[CollabEdge]],
    weights: LayerWeights,
    u: str,
    focal: str,
    t: int,
    window_start: int | None = None,
) -> float:
    total = 0.0
    for lam in LAYERS:
        for mu in LAYERS:
            first_order = _incident_occurrences(
                edges_by_layer.get(lam, []), u, focal, t, window_start
            )
            if not first_order:
                d = 0.0
            else:
                acc = 0.0
                for v, t_prime in first_order:
                    acc += len(
                        _incident_occurrences(
                            edges_by_layer.get(mu, []), v, None, t_prime, window_start
                        )
                    )
                d = acc / len(first_order)
            total += weights[lam] * weights[mu] * d
    return total


def brute_link_strength(
    edges_by_layer: dict[Layer, list[CollabEdge]],
    weights: LayerWeights,
    u: str,
    v: str,
    focal: str,
    t: int,
    window_start: int | None = None,
) -> float:
    if u == v:
        return 0.0
    total = 0.0
    for lam in LAYERS:
        count = 0
        for edge in edges_by_layer.get(lam, []):
            if {edge.u, edge.v} != {u, v}:
                continue
            if edge.t >= t:
                continue
            if window_start is not None and edge.t < window_start:
                continue
            if edge.project == focal:
                continue
            count += 1
        total += weights[lam] * count
    return total


def brute_layer_weights(edges_by_layer: dict[Layer, list[CollabEdge]]) -> LayerWeights:
    sizes = {layer: len(edges_by_layer.get(layer, [])) for layer in LAYERS}
    total = sum(sizes.values())
    if total == 0:
        raise ValueError("empty graph")
    populated = [layer for layer in LAYERS if sizes[layer] > 0]
    weights = {layer: 0.0 for layer in LAYERS}
    if len(populated) == 1:
        weights[populated[0]] = 1.0
        return LayerWeights(weights)
    raw = {layer: 1.0 - sizes[layer] / total for layer in populated}
    norm = sum(raw.values())
    for layer in populated:
        weights[layer] = raw[layer] / norm
    return LayerWeights(weights)
