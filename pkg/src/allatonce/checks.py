"""Randomized cross-checks: oracle vs. weighted engine, and update-order invariance.

Every suite takes a seeded :class:`random.Random`, so a failing case can be
replayed exactly from its seed and index.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

from . import inference, oracle, weighted
from .dsl import ModelDocument
from .errors import AaoError
from .model import (
    TRUE,
    And,
    EdgeIs,
    Evidence,
    Geometry,
    GeometryIs,
    Law,
    NodeEquals,
    NodeIs,
    NodesSame,
    Not,
    Or,
    Predicate,
)

RAW_BUDGET = 2**20


def random_law(rng: random.Random, n_states: int, n_colors: int, density: float = 0.5) -> Law:
    """Symmetric law with each unordered (color, pair) allowed with probability ``density``."""
    states = tuple(f"s{i}" for i in range(n_states))
    colors = tuple(f"c{i}" for i in range(n_colors))
    table = {c: [] for c in colors}
    for c in colors:
        for i, j in itertools.combinations_with_replacement(range(n_states), 2):
            if rng.random() < density:
                table[c].append((states[i], states[j]))
                if i != j:
                    table[c].append((states[j], states[i]))
    return Law.from_table(states, colors, table)


def random_geometry(
    rng: random.Random,
    max_nodes: int = 10,
    max_edges: int = 12,
    budget: int = RAW_BUDGET,
    name: str = "g",
) -> Geometry:
    """Random multigraph whose raw assignment space stays within ``budget``."""
    while True:
        n = rng.randint(1, max_nodes)
        e = rng.randint(0, max_edges) if n > 1 else 0
        k = rng.choice((2, 2, 3))
        c = rng.choice((0, 1, 2, 2, 3))
        if k**n * c**e <= budget:
            break
    law = random_law(rng, k, c, density=rng.choice((0.3, 0.5, 0.7, 1.0)))
    nodes = tuple(f"v{i}" for i in range(n))
    edges = tuple(tuple(rng.sample(nodes, 2)) for _ in range(e))
    return Geometry(name, nodes, edges, law)


def random_evidence(rng: random.Random, geometry: Geometry, edge_rate: float = 0.2) -> Evidence:
    law = geometry.law
    atoms = [
        NodeIs(v, rng.choice(law.states)) for v in geometry.nodes if rng.random() < 0.3
    ]
    if law.colors:
        for j in range(len(geometry.edges)):
            if rng.random() < edge_rate:
                atoms.append(EdgeIs(j, rng.choice(law.colors), deduced=True))
    return Evidence(atoms)


def random_predicate(rng: random.Random, geometry: Geometry, depth: int = 2) -> Predicate:
    nodes, states = geometry.nodes, geometry.law.states
    roll = rng.random()
    if depth <= 0 or roll < 0.4:
        if rng.random() < 0.5:
            return NodesSame(rng.choice(nodes), rng.choice(nodes))
        if rng.random() < 0.1:
            return TRUE
        return NodeEquals(rng.choice(nodes), rng.choice(states))
    if roll < 0.55:
        return Not(random_predicate(rng, geometry, depth - 1))
    terms = tuple(random_predicate(rng, geometry, depth - 1) for _ in range(rng.randint(2, 3)))
    return And(terms) if roll < 0.8 else Or(terms)


@dataclass
class Mismatch:
    case: int
    geometry: Geometry
    evidence: Evidence
    predicate: Predicate
    oracle: tuple
    weighted: tuple

    def dump(self) -> str:
        g = self.geometry
        return "\n".join([
            f"case {self.case}: engines disagree",
            f"  states {' '.join(g.law.states)}; colors {' '.join(g.law.colors)}",
            "  law " + "; ".join(
                f"{c}: {' '.join(a + '-' + b for a, b in pairs)}" for c, pairs in g.law.table().items()
            ),
            f"  nodes {' '.join(g.nodes)}",
            "  edges " + " ".join(f"{u}-{v}" for u, v in g.edges),
            "  evidence " + "; ".join(str(a) for a in self.evidence),
            f"  predicate {self.predicate!r}",
            f"  oracle (matching, total) = {self.oracle}",
            f"  weighted (matching, total) = {self.weighted}",
        ])


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _pair(count) -> tuple:
    return (count.matching, count.total)


def compare_engines(
    geometry: Geometry,
    evidence: Evidence,
    predicate: Predicate,
    oracle_count: Callable | None = None,
    weighted_count: Callable | None = None,
) -> tuple[tuple, tuple]:
    oracle_count = oracle_count or oracle.count_matching
    weighted_count = weighted_count or weighted.weighted_count
    return _pair(oracle_count(geometry, evidence, predicate)), _pair(
        weighted_count(geometry, evidence, predicate)
    )


def engine_equivalence(
    rng: random.Random,
    cases: int = 1000,
    max_nodes: int = 10,
    max_edges: int = 12,
    oracle_count: Callable | None = None,
    weighted_count: Callable | None = None,
) -> SuiteResult:
    result = SuiteResult("engine equivalence")
    for i in range(cases):
        g = random_geometry(rng, max_nodes, max_edges)
        ev = random_evidence(rng, g)
        pred = random_predicate(rng, g)
        o, w = compare_engines(g, ev, pred, oracle_count, weighted_count)
        result.cases += 1
        if o != w:
            result.failures.append(Mismatch(i, g, ev, pred, o, w))
    return result


def _extend(rng: random.Random, g: Geometry, extra: int) -> Geometry:
    """A second candidate geometry: ``g`` plus ``extra`` new nodes wired into it."""
    nodes = g.nodes + tuple(f"x{i}" for i in range(extra))
    edges = list(g.edges)
    for i in range(extra):
        for _ in range(rng.randint(1, 2)):
            edges.append((f"x{i}", rng.choice(nodes[: len(g.nodes) + i])))
    return Geometry(g.name + "_ext", nodes, tuple(edges), g.law)


def _realizable_atoms(rng: random.Random, geometries, base: Geometry):
    """Atoms read off one microstate of the largest geometry, so every subset has support."""
    big = max(geometries, key=lambda g: len(g.nodes))
    states = list(oracle.iter_microstates(big))
    if not states:
        return None
    ms = rng.choice(states)
    atoms = [NodeIs(v, s) for v, s in zip(big.nodes, ms.nodes) if base.has_node(v) and rng.random() < 0.5]
    for j in range(len(base.edges)):
        if rng.random() < 0.15:
            atoms.append(EdgeIs(j, ms.edges[j], deduced=True))
    if len(geometries) > 1 and rng.random() < 0.5:
        atoms.append(GeometryIs(big.name))
    return atoms


def _posterior(session: inference.UpdateSession, queries, scope):
    return (
        tuple(_freeze(session.probability(q)) for q in queries),
        _freeze(session.joint_table(scope)),
    )


def _freeze(answer):
    if isinstance(answer, inference.GeometryConditionalTable):
        return tuple((k, _freeze(v)) for k, v in answer.items())
    if isinstance(answer, inference.JointTable):
        return (answer.scope, tuple(answer.counts.items()), answer.total)
    return answer


def order_invariance(
    rng: random.Random,
    sets: int = 200,
    permutations: int = 5,
    max_nodes: int = 6,
    max_edges: int = 7,
    engine: str = "weighted",
) -> SuiteResult:
    """Learn the same atoms in several orders; every posterior must match exactly."""
    result = SuiteResult("order invariance")
    done = 0
    while done < sets:
        base = random_geometry(rng, max_nodes, max_edges, budget=2**14, name="base")
        geos = [base]
        if rng.random() < 0.5:
            geos.append(_extend(rng, base, rng.randint(1, 2)))
        try:
            atoms = _realizable_atoms(rng, geos, base)
        except AaoError:
            atoms = None
        if not atoms or len(atoms) < 2:
            result.skipped += 1
            continue
        done += 1
        queries = [random_predicate(rng, base) for _ in range(2)]
        scope = rng.sample(base.nodes, min(2, len(base.nodes)))
        seen = None
        for p in range(permutations):
            order = atoms[:] if p == 0 else rng.sample(atoms, len(atoms))
            inference.clear_caches()
            session = inference.UpdateSession.start(geos, order, engine)
            post = _posterior(session, queries, scope)
            result.cases += 1
            if seen is None:
                seen = post
            elif post != seen:
                result.failures.append(
                    f"set {done}: order {[str(a) for a in order]} gave {post}, expected {seen}"
                )
    return result


def document_order_invariance(
    doc: ModelDocument,
    rng: random.Random,
    sets: int,
    permutations: int = 5,
    engine: str = "weighted",
) -> SuiteResult:
    """Order invariance on the document's own geometries, all held as candidates.

    Atoms are read off one microstate of a randomly chosen geometry, so that
    geometry always keeps support. Edge atoms are only drawn together with a
    GeometryIs atom, since edge indices differ between geometries.
    """
    result = SuiteResult("document order invariance")
    geos = [g for g in doc.all_geometries() if oracle.raw_assignments(g) <= RAW_BUDGET]
    if not geos:
        return result
    for k in range(sets):
        g = rng.choice(geos)
        states = list(oracle.iter_microstates(g))
        if not states:
            result.skipped += 1
            continue
        ms = rng.choice(states)
        atoms = [NodeIs(v, s) for v, s in zip(g.nodes, ms.nodes) if rng.random() < 0.5]
        if len(geos) == 1 or rng.random() < 0.5:
            atoms.append(GeometryIs(g.name))
            atoms += [EdgeIs(j, c, deduced=True) for j, c in enumerate(ms.edges) if rng.random() < 0.2]
        if len(atoms) < 2:
            result.skipped += 1
            continue
        queries = [random_predicate(rng, g) for _ in range(2)]
        seen = None
        for p in range(permutations):
            order = atoms[:] if p == 0 else rng.sample(atoms, len(atoms))
            inference.clear_caches()
            session = inference.UpdateSession.start(geos, order, engine)
            try:
                post = tuple(_freeze(session.probability(q)) for q in queries)
            except AaoError as exc:  # a query may name nodes other candidates lack
                post = type(exc).__name__
            result.cases += 1
            if seen is None:
                seen = post
            elif post != seen:
                result.failures.append(
                    f"set {k}: order {[str(a) for a in order]} gave {post}, expected {seen}"
                )
    return result


def document_checks(
    doc: ModelDocument,
    oracle_count: Callable | None = None,
    weighted_count: Callable | None = None,
) -> SuiteResult:
    """Compare both engines on every geometry x evidence block x query in a document."""
    result = SuiteResult("document")
    blocks: list[Evidence] = [Evidence()] + [doc.evidence_block(n) for n in doc.evidence]
    queries: list[Predicate] = [TRUE] + list(doc.queries.values())
    for g in doc.all_geometries():
        for ev in blocks:
            ev = ev.without_geometry()
            for q in queries:
                if not q.nodes() <= set(g.nodes):
                    continue
                try:
                    o, w = compare_engines(g, ev, q, oracle_count, weighted_count)
                except AaoError:
                    result.skipped += 1
                    continue
                result.cases += 1
                if o != w:
                    result.failures.append(Mismatch(result.cases, g, ev, q, o, w))
    return result


def document_variants(
    doc: ModelDocument,
    rng: random.Random,
    cases: int,
    oracle_count: Callable | None = None,
    weighted_count: Callable | None = None,
) -> SuiteResult:
    """Random evidence and predicates on the document's own geometries."""
    result = SuiteResult("document variants")
    geos = doc.all_geometries()
    if not geos:
        return result
    for i in range(cases):
        g = rng.choice(geos)
        if oracle.raw_assignments(g) > RAW_BUDGET:
            result.skipped += 1
            continue
        ev = random_evidence(rng, g)
        pred = random_predicate(rng, g)
        o, w = compare_engines(g, ev, pred, oracle_count, weighted_count)
        result.cases += 1
        if o != w:
            result.failures.append(Mismatch(i, g, ev, pred, o, w))
    return result
