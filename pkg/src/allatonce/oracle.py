"""Brute-force ground truth: list every law-satisfying microstate explicitly.

Node assignments are the outer loop and edge colors the inner loop, both
lexicographic in alphabet order. The weighted engine never calls into this
module, so the two stay independent checks on each other.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .errors import SizeGuardError
from .model import TRUE, Evidence, Geometry, Predicate, resolve_evidence

DEFAULT_SIZE_GUARD = 2**24
SIZE_GUARD_ENV = "AAO_SIZE_GUARD"


def size_guard(override: int | None = None) -> int:
    if override is not None:
        return override
    env = os.environ.get(SIZE_GUARD_ENV)
    if env:
        return int(env)
    return DEFAULT_SIZE_GUARD


def raw_assignments(geometry: Geometry) -> int:
    law = geometry.law
    return len(law.states) ** len(geometry.nodes) * len(law.colors) ** len(geometry.edges)


def _check_guard(geometry: Geometry, guard: int | None) -> None:
    raw = raw_assignments(geometry)
    cap = size_guard(guard)
    if raw > cap:
        raise SizeGuardError(
            f"geometry {geometry.name} has {raw} raw assignments, above the cap of {cap}"
        )


@dataclass(frozen=True)
class Microstate:
    """One complete assignment: ``nodes[i]`` is the state of node i, ``edges[j]`` the color of edge j."""

    nodes: tuple[str, ...]
    edges: tuple[str, ...]

    def assignment(self, geometry: Geometry) -> dict[str, str]:
        return dict(zip(geometry.nodes, self.nodes))

    def label(self) -> str:
        """Node states then edge colors, e.g. ``HHH:BG``."""
        sep = "" if all(len(s) == 1 for s in self.nodes + self.edges) else ","
        return sep.join(self.nodes) + ":" + sep.join(self.edges)

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class MicrostateCount:
    matching: int
    total: int


def path_label(geometry: Geometry, microstate: Microstate, path: Sequence[str]) -> str:
    """Interleave node states and connecting edge colors along ``path``.

    For the three-node fan ``left, bottom, right`` this gives strings like
    ``HBHGH``. Each consecutive pair on the path must be joined by exactly
    one edge.
    """
    idx = geometry.node_index
    parts = [microstate.nodes[idx[path[0]]]]
    for u, v in zip(path, path[1:]):
        e = geometry.edge_index((u, v))
        parts.append(microstate.edges[e])
        parts.append(microstate.nodes[idx[v]])
    return "".join(parts)


def _allowed_colors(geometry: Geometry):
    """allowed[a][b] = color indices permitted between state a and state b."""
    law = geometry.law
    k = len(law.states)
    return [
        [
            [c for c, color in enumerate(law.colors) if law.allows(color, law.states[a], law.states[b])]
            for b in range(k)
        ]
        for a in range(k)
    ]


def _iter_raw(geometry: Geometry, evidence: Evidence | None, guard: int | None):
    """Yield (node_state_indices, [color lists per edge]) for each evidence-compatible node assignment."""
    _check_guard(geometry, guard)
    pins = resolve_evidence(geometry, evidence)
    law = geometry.law
    allowed = _allowed_colors(geometry)
    domains = [
        [pins.nodes[i]] if i in pins.nodes else range(len(law.states))
        for i in range(len(geometry.nodes))
    ]
    edge_ends = [(geometry.node_index[u], geometry.node_index[v]) for u, v in geometry.edges]
    for states in product(*domains):
        choices = []
        for j, (u, v) in enumerate(edge_ends):
            ok = allowed[states[u]][states[v]]
            if j in pins.edges:
                ok = [c for c in ok if c == pins.edges[j]]
            choices.append(ok)
        yield states, choices


def iter_microstates(
    geometry: Geometry, evidence: Evidence | None = None, *, guard: int | None = None
) -> Iterator[Microstate]:
    law = geometry.law
    for states, choices in _iter_raw(geometry, evidence, guard):
        node_syms = tuple(law.states[s] for s in states)
        for colors in product(*choices):
            yield Microstate(node_syms, tuple(law.colors[c] for c in colors))


def enumerate_microstates(
    geometry: Geometry, evidence: Evidence | None = None, *, guard: int | None = None
) -> list[Microstate]:
    """Every microstate satisfying the law and the evidence, in canonical order.

    Raises SizeGuardError rather than truncating when the raw product of
    node and color assignments exceeds the cap.
    """
    return list(iter_microstates(geometry, evidence, guard=guard))


def classify(
    geometry: Geometry, evidence: Evidence | None = None, *, guard: int | None = None
) -> Iterator[tuple[Microstate, bool]]:
    """Walk the full raw Cartesian product, flagging each element accepted or rejected.

    Deliberately naive; it exists to check exhaustiveness on small graphs.
    """
    _check_guard(geometry, guard)
    pins = resolve_evidence(geometry, evidence)
    law = geometry.law
    ends = [(geometry.node_index[u], geometry.node_index[v]) for u, v in geometry.edges]
    for states in product(range(len(law.states)), repeat=len(geometry.nodes)):
        node_ok = all(states[i] == s for i, s in pins.nodes.items())
        for colors in product(range(len(law.colors)), repeat=len(geometry.edges)):
            ok = node_ok and all(colors[j] == c for j, c in pins.edges.items()) and all(
                law.allows(law.colors[c], law.states[states[u]], law.states[states[v]])
                for c, (u, v) in zip(colors, ends)
            )
            yield Microstate(
                tuple(law.states[s] for s in states), tuple(law.colors[c] for c in colors)
            ), ok


def _count_survivors(choices) -> int:
    n = 0
    for _ in product(*choices):
        n += 1
    return n


def count_matching(
    geometry: Geometry,
    evidence: Evidence | None = None,
    predicate: Predicate = TRUE,
    *,
    guard: int | None = None,
) -> MicrostateCount:
    """Count microstates compatible with ``evidence``, and those also satisfying ``predicate``."""
    test = predicate.compile(geometry)
    matching = total = 0
    for states, choices in _iter_raw(geometry, evidence, guard):
        n = _count_survivors(choices)
        total += n
        if n and test(states):
            matching += n
    return MicrostateCount(matching, total)


def count_table(
    geometry: Geometry,
    evidence: Evidence | None,
    scope: Sequence[str],
    *,
    guard: int | None = None,
) -> dict[tuple[str, ...], int]:
    """Microstate counts for every state tuple over ``scope``, canonical row order."""
    law = geometry.law
    cols = [geometry.index_of(n) for n in scope]
    table = {row: 0 for row in product(law.states, repeat=len(cols))}
    for states, choices in _iter_raw(geometry, evidence, guard):
        n = _count_survivors(choices)
        if n:
            table[tuple(law.states[states[i]] for i in cols)] += n
    return table


def color_counts(
    geometry: Geometry,
    evidence: Evidence | None,
    edge: int,
    *,
    guard: int | None = None,
) -> dict[str, int]:
    """How many compatible microstates give ``edge`` each color."""
    law = geometry.law
    counts = dict.fromkeys(law.colors, 0)
    for ms in iter_microstates(geometry, evidence, guard=guard):
        counts[ms.edges[edge]] += 1
    return counts
