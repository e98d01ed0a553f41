"""Exact weighted counting without enumerating edge colors.

Each edge contributes a multiplicity: the number of colors the law allows
between its endpoint states. The number of microstates behind a node
assignment is the product of those multiplicities, so summing that product
over node assignments gives the same big-integer counts as enumeration.

Only two strategies exist: a full sum over node assignments and linear-time
elimination along a simple path. Elimination orders for general graphs are
not implemented.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .errors import GeometryError, NotAPathError, SizeGuardError
from .model import TRUE, Evidence, Geometry, Law, Predicate, resolve_evidence
from .oracle import size_guard


@dataclass(frozen=True)
class WeightedCount:
    matching: int
    total: int


def edge_multiplicity(law: Law, a: str, b: str, pinned: str | None = None) -> int:
    """Number of colors allowed between states ``a`` and ``b``.

    With ``pinned`` set the edge color is known, so the answer is 1 if that
    color is allowed for the pair and 0 otherwise.
    """
    for s in (a, b):
        if s not in law.states:
            raise GeometryError(f"unknown state {s!r}")
    if pinned is not None:
        if pinned not in law.colors:
            raise GeometryError(f"unknown color {pinned!r}")
        return int(law.allows(pinned, a, b))
    return sum(1 for c in law.colors if law.allows(c, a, b))


def multiplicity_matrices(
    geometry: Geometry, evidence: Evidence | None = None
) -> list[list[list[int]]]:
    """One k-by-k matrix per edge, indexed [state of first endpoint][state of second]."""
    pins = resolve_evidence(geometry, evidence)
    law = geometry.law
    base = [[edge_multiplicity(law, a, b) for b in law.states] for a in law.states]
    mats = []
    for j in range(len(geometry.edges)):
        if j in pins.edges:
            color = law.colors[pins.edges[j]]
            mats.append(
                [[edge_multiplicity(law, a, b, color) for b in law.states] for a in law.states]
            )
        else:
            mats.append(base)
    return mats


def _check_guard(geometry: Geometry, guard: int | None) -> None:
    raw = len(geometry.law.states) ** len(geometry.nodes)
    cap = size_guard(guard)
    if raw > cap:
        raise SizeGuardError(
            f"geometry {geometry.name} has {raw} node assignments, above the cap of {cap}"
        )


def _weighted_assignments(geometry: Geometry, evidence: Evidence | None, guard: int | None):
    """Yield (state indices, weight) for each evidence-compatible node assignment with weight > 0."""
    _check_guard(geometry, guard)
    pins = resolve_evidence(geometry, evidence)
    mats = multiplicity_matrices(geometry, evidence)
    k = len(geometry.law.states)
    idx = geometry.node_index
    factors = [(idx[u], idx[v], m) for (u, v), m in zip(geometry.edges, mats)]
    domains = [[pins.nodes[i]] if i in pins.nodes else range(k) for i in range(len(geometry.nodes))]
    for states in product(*domains):
        w = 1
        for u, v, m in factors:
            w *= m[states[u]][states[v]]
            if not w:
                break
        if w:
            yield states, w


def weighted_count(
    geometry: Geometry,
    evidence: Evidence | None = None,
    predicate: Predicate = TRUE,
    *,
    guard: int | None = None,
) -> WeightedCount:
    test = predicate.compile(geometry)
    matching = total = 0
    for states, w in _weighted_assignments(geometry, evidence, guard):
        total += w
        if test(states):
            matching += w
    return WeightedCount(matching, total)


def partition_function(
    geometry: Geometry, evidence: Evidence | None = None, *, guard: int | None = None
) -> int:
    return weighted_count(geometry, evidence, TRUE, guard=guard).total


def weighted_table(
    geometry: Geometry,
    evidence: Evidence | None,
    scope: Sequence[str],
    *,
    guard: int | None = None,
) -> dict[tuple[str, ...], int]:
    law = geometry.law
    cols = [geometry.index_of(n) for n in scope]
    table = {row: 0 for row in product(law.states, repeat=len(cols))}
    for states, w in _weighted_assignments(geometry, evidence, guard):
        table[tuple(law.states[states[i]] for i in cols)] += w
    return table


def color_weights(
    geometry: Geometry,
    evidence: Evidence | None,
    edge: int,
    *,
    guard: int | None = None,
) -> dict[str, int]:
    """Weight of each color on ``edge``, computed by pinning the edge one color at a time."""
    law = geometry.law
    out = {}
    for color in law.colors:
        pinned = _pin_edge(geometry, evidence, edge, color)
        out[color] = 0 if pinned is None else partition_function(geometry, pinned, guard=guard)
    return out


def _pin_edge(geometry, evidence, edge, color):
    from .model import EdgeIs

    pins = resolve_evidence(geometry, evidence)
    if edge in pins.edges:
        return evidence if geometry.law.colors[pins.edges[edge]] == color else None
    return (evidence or Evidence()).with_atom(EdgeIs(edge, color, deduced=True))


# --------------------------------------------------------------------------
# Paths
# --------------------------------------------------------------------------


def path_order(geometry: Geometry) -> list[str]:
    """Nodes of a simple path from one end to the other.

    The end that comes first in declaration order is the start. Raises
    NotAPathError for anything that is not a single simple path.
    """
    n = len(geometry.nodes)
    if n == 0:
        raise NotAPathError("empty geometry")
    if len(geometry.edges) != n - 1:
        raise NotAPathError(f"{geometry.name} has {len(geometry.edges)} edges for {n} nodes")
    adj: dict[str, list[str]] = {v: [] for v in geometry.nodes}
    for u, v in geometry.edges:
        adj[u].append(v)
        adj[v].append(u)
    if any(len(a) > 2 for a in adj.values()):
        raise NotAPathError(f"{geometry.name} has a node of degree > 2")
    if n == 1:
        return list(geometry.nodes)
    start = next(v for v in geometry.nodes if len(adj[v]) == 1)
    order, prev = [start], None
    while len(order) < n:
        nxt = [w for w in adj[order[-1]] if w != prev]
        if not nxt:
            break
        prev = order[-1]
        order.append(nxt[0])
    if len(order) != n or len(set(order)) != n:
        raise NotAPathError(f"{geometry.name} is not connected as a single path")
    return order


def eliminate_chain(
    geometry: Geometry,
    evidence: Evidence | None = None,
    predicate: Predicate = TRUE,
) -> WeightedCount:
    """Weighted count on a path geometry in time linear in its length.

    Interior nodes are summed out one at a time by vector-matrix products;
    only the two endpoints are kept, so ``predicate`` may mention nothing else.
    """
    order = path_order(geometry)
    ends = {order[0], order[-1]}
    extra = predicate.nodes() - ends
    if extra:
        raise GeometryError(
            "eliminate_chain predicates may only mention the path ends; got " + ", ".join(sorted(extra))
        )
    pins = resolve_evidence(geometry, evidence)
    mats = multiplicity_matrices(geometry, evidence)
    k = len(geometry.law.states)
    idx = geometry.node_index

    steps = []
    for u, v in zip(order, order[1:]):
        j = geometry.edge_index((u, v)) if not geometry.directed else _directed_edge(geometry, u, v)
        m = mats[j]
        if geometry.edges[j][0] != u:
            m = [list(col) for col in zip(*m)]
        steps.append((m, pins.nodes.get(idx[v])))

    test = predicate.compile(geometry)
    first, last = idx[order[0]], idx[order[-1]]
    start_pin = pins.nodes.get(first)
    matching = total = 0
    for a in range(k):
        if start_pin is not None and a != start_pin:
            continue
        vec = [int(s == a) for s in range(k)]
        for m, pin in steps:
            vec = [
                0 if pin is not None and t != pin else sum(vec[s] * m[s][t] for s in range(k))
                for t in range(k)
            ]
        for b, w in enumerate(vec):
            if not w:
                continue
            states = [0] * len(geometry.nodes)
            states[first] = a
            states[last] = b
            total += w
            if test(states):
                matching += w
    return WeightedCount(matching, total)


def _directed_edge(geometry: Geometry, u: str, v: str) -> int:
    for j, e in enumerate(geometry.edges):
        if e in ((u, v), (v, u)):
            return j
    raise NotAPathError(f"no edge between {u} and {v}")
