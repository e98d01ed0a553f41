"""Exact conditional probabilities over equally weighted microstates.

Every compatible microstate gets the same prior weight, so a probability is
just a ratio of two counts. Counts come from either engine:
``"oracle"`` (explicit enumeration) or ``"weighted"`` (multiplicity sums).
Answers are :class:`fractions.Fraction` in lowest terms.

Nothing here ever weights one geometry against another. When the geometry
is unknown the answer is a table of per-geometry conditionals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence, Union

from . import oracle, weighted
from .errors import (
    ContradictionError,
    EvidenceError,
    GeometryPriorError,
    ScopeError,
    ZeroSupportError,
)
from .model import (
    TRUE,
    Atom,
    Evidence,
    Geometry,
    GeometryIs,
    NodeIs,
    Predicate,
    check_predicate,
    resolve_evidence,
)
from .oracle import Microstate

ENGINES = ("oracle", "weighted")
DEFAULT_ENGINE = "weighted"


def _engine(name: str) -> str:
    if name not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, not {name!r}")
    return name


@lru_cache(maxsize=4096)
def _counts(engine: str, geometry: Geometry, evidence: Evidence, predicate: Predicate):
    if engine == "oracle":
        c = oracle.count_matching(geometry, evidence, predicate)
    else:
        c = weighted.weighted_count(geometry, evidence, predicate)
    return c.matching, c.total


@lru_cache(maxsize=1024)
def _table(engine: str, geometry: Geometry, evidence: Evidence, scope: tuple):
    if engine == "oracle":
        return oracle.count_table(geometry, evidence, scope)
    return weighted.weighted_table(geometry, evidence, scope)


def _local(geometry: Geometry, evidence: Evidence | None) -> Evidence:
    """Evidence minus a GeometryIs atom naming this geometry."""
    evidence = evidence or Evidence()
    resolve_evidence(geometry, evidence)
    return evidence.without_geometry()


def probability(
    query: Predicate,
    geometry: Geometry,
    evidence: Evidence | None = None,
    engine: str = DEFAULT_ENGINE,
) -> Fraction:
    check_predicate(geometry, query)
    matching, total = _counts(_engine(engine), geometry, _local(geometry, evidence), query)
    if total == 0:
        raise ZeroSupportError(f"no microstate of {geometry.name} is compatible with the evidence")
    return Fraction(matching, total)


@dataclass(frozen=True)
class JointTable:
    """Exact distribution over the joint states of ``scope``.

    ``counts`` keeps the raw microstate counts (weights) per row; rows are
    in canonical order, lexicographic in the state alphabet.
    """

    scope: tuple[str, ...]
    counts: Mapping[tuple[str, ...], int]
    total: int

    @property
    def rows(self) -> dict[tuple[str, ...], Fraction]:
        return {row: Fraction(n, self.total) for row, n in self.counts.items()}

    def __getitem__(self, row) -> Fraction:
        if isinstance(row, str):
            row = tuple(row) if len(row) == len(self.scope) else tuple(row.split(","))
        return Fraction(self.counts[tuple(row)], self.total)

    def __iter__(self) -> Iterator[tuple[tuple[str, ...], int, Fraction]]:
        for row, n in self.counts.items():
            yield row, n, Fraction(n, self.total)

    def __len__(self):
        return len(self.counts)

    def marginalize(self, keep: Sequence[str]) -> "JointTable":
        """Sum out every scope node not in ``keep``."""
        cols = [self.scope.index(n) for n in keep]
        out: dict[tuple[str, ...], int] = {}
        for row, n in self.counts.items():
            key = tuple(row[i] for i in cols)
            out[key] = out.get(key, 0) + n
        return JointTable(tuple(keep), out, self.total)


def joint_table(
    scope: Sequence[str],
    geometry: Geometry,
    evidence: Evidence | None = None,
    engine: str = DEFAULT_ENGINE,
) -> JointTable:
    scope = tuple(scope)
    for n in scope:
        geometry.index_of(n)
    counts = _table(_engine(engine), geometry, _local(geometry, evidence), scope)
    total = sum(counts.values())
    if total == 0:
        raise ZeroSupportError(f"no microstate of {geometry.name} is compatible with the evidence")
    return JointTable(scope, dict(counts), total)


Answer = Union[Fraction, JointTable]


@dataclass(frozen=True)
class GeometryConditionalTable:
    """``{geometry name: answer given that geometry}``, with no prior and no mixing."""

    entries: Mapping[str, Answer]

    def __getitem__(self, name: str) -> Answer:
        return self.entries[name]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries.items()

    @property
    def independent(self) -> bool:
        values = list(self.entries.values())
        return all(v == values[0] for v in values[1:])


def _check_set(geometries: Iterable[Geometry]) -> list[Geometry]:
    geometries = list(geometries)
    if not geometries:
        raise ValueError("empty geometry set")
    names = [g.name for g in geometries]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate geometry names in set: {names}")
    return geometries


def _check_scope(geometries: Sequence[Geometry], nodes: set[str], what: str) -> None:
    for g in geometries:
        missing = sorted(n for n in nodes if not g.has_node(n))
        if missing:
            raise ScopeError(f"{what} mentions {', '.join(missing)}, absent from geometry {g.name}")


def geometry_conditional(
    query: Predicate,
    geometries: Iterable[Geometry],
    evidence: Evidence | None = None,
    engine: str = DEFAULT_ENGINE,
    *,
    prior: Mapping[str, object] | None = None,
) -> GeometryConditionalTable:
    """Answer ``query`` separately under each candidate geometry.

    Nodes are matched across geometries by name. A ``prior`` over
    geometries is refused outright; the model has no basis for one.
    """
    if prior is not None:
        raise GeometryPriorError("geometry priors are not supported; answers stay per-geometry")
    geometries = _check_set(geometries)
    evidence = evidence or Evidence()
    if evidence.geometry_names:
        raise EvidenceError("evidence already fixes the geometry; use probability() instead")
    _check_scope(geometries, query.nodes(), "query")
    _check_scope(geometries, {a.node for a in evidence.node_atoms()}, "evidence")
    return GeometryConditionalTable(
        {g.name: probability(query, g, evidence, engine) for g in geometries}
    )


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    table: GeometryConditionalTable


def independence_check(
    query: Predicate,
    geometries: Iterable[Geometry],
    evidence: Evidence | None = None,
    engine: str = DEFAULT_ENGINE,
) -> IndependenceReport:
    """Is the answer to ``query`` the same whatever the geometry is?"""
    table = geometry_conditional(query, geometries, evidence, engine)
    return IndependenceReport(table.independent, table)


def deduce_colors(
    geometry: Geometry,
    evidence: Evidence | None = None,
    engine: str = DEFAULT_ENGINE,
) -> dict[int, dict[str, Fraction]]:
    """Posterior color distribution for each edge (by index); zero-probability colors are omitted."""
    evidence = _local(geometry, evidence)
    out = {}
    for j in range(len(geometry.edges)):
        if _engine(engine) == "oracle":
            counts = oracle.color_counts(geometry, evidence, j)
        else:
            counts = weighted.color_weights(geometry, evidence, j)
        total = sum(counts.values())
        if total == 0:
            raise ZeroSupportError(f"no microstate of {geometry.name} is compatible with the evidence")
        out[j] = {c: Fraction(n, total) for c, n in counts.items() if n}
    return out


@dataclass(frozen=True)
class ClassicalInfoState:
    """Explicit list of ``(probability, microstate)`` over surviving microstates."""

    geometry: Geometry
    entries: tuple[tuple[Fraction, Microstate], ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def probabilities(self) -> list[Fraction]:
        return [p for p, _ in self.entries]


def info_state(
    geometry: Geometry, evidence: Evidence | None = None, *, guard: int | None = None
) -> ClassicalInfoState:
    """Equal weight on every compatible microstate. Needs explicit enumeration."""
    states = oracle.enumerate_microstates(geometry, _local(geometry, evidence), guard=guard)
    if not states:
        raise ZeroSupportError(f"no microstate of {geometry.name} is compatible with the evidence")
    p = Fraction(1, len(states))
    return ClassicalInfoState(geometry, tuple((p, ms) for ms in states))


# --------------------------------------------------------------------------
# Sessions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UpdateSession:
    """An agent's knowledge over a set of candidate geometries.

    ``log`` records the order atoms were learned in, but every answer is
    computed from the set of learned atoms alone. Learning returns a new
    session; a rejected atom leaves the old one untouched.
    """

    geometries: tuple[Geometry, ...]
    log: tuple[Atom, ...] = ()
    engine: str = DEFAULT_ENGINE

    def __post_init__(self):
        object.__setattr__(self, "geometries", tuple(_check_set(self.geometries)))
        _engine(self.engine)

    @classmethod
    def start(
        cls,
        geometries: Iterable[Geometry],
        evidence: Evidence | Iterable[Atom] = (),
        engine: str = DEFAULT_ENGINE,
    ) -> "UpdateSession":
        session = cls(tuple(geometries), (), engine)
        for atom in evidence:
            session = session.learn(atom)
        return session

    @property
    def evidence(self) -> Evidence:
        return Evidence(self.log)

    @property
    def candidates(self) -> tuple[Geometry, ...]:
        names = self.evidence.geometry_names
        if not names:
            return self.geometries
        return tuple(g for g in self.geometries if g.name in names)

    @property
    def geometry(self) -> Geometry | None:
        """The known geometry, or None while it is still open."""
        cands = self.candidates
        return cands[0] if len(cands) == 1 else None

    def learn(self, atom: Atom) -> "UpdateSession":
        if atom in self.log:
            return self
        if isinstance(atom, GeometryIs):
            if atom.name not in {g.name for g in self.geometries}:
                raise EvidenceError(f"unknown geometry {atom.name!r}")
            known = self.evidence.geometry_names
            if known and atom.name not in known:
                raise ContradictionError(
                    f"geometry already learned as {next(iter(known))}, cannot also be {atom.name}"
                )
        new = UpdateSession(self.geometries, self.log + (atom,), self.engine)
        if isinstance(atom, NodeIs) and not any(g.has_node(atom.node) for g in new.candidates):
            raise ScopeError(f"no candidate geometry has a node named {atom.node!r}")
        if not new.viable:
            raise ZeroSupportError(f"learning '{atom}' leaves no compatible microstate in any candidate geometry")
        return new

    @property
    def viable(self) -> tuple[Geometry, ...]:
        """Candidates that contain every learned node and keep some microstate.

        Acceptance of an atom depends only on this set, and shrinking the
        evidence can only grow it, so no learning order rejects an atom that
        another order accepts.
        """
        evidence = self.evidence.without_geometry()
        nodes = {a.node for a in evidence.node_atoms()}
        out = []
        for g in self.candidates:
            if not all(g.has_node(n) for n in nodes):
                continue
            try:
                resolve_evidence(g, evidence)
            except ContradictionError:
                raise
            except EvidenceError:
                continue  # e.g. an edge reference this geometry does not have
            if _counts(self.engine, g, evidence, TRUE)[1]:
                out.append(g)
        return tuple(out)

    def reset(self) -> "UpdateSession":
        return UpdateSession(self.geometries, (), self.engine)

    def probability(self, query: Predicate) -> Union[Fraction, GeometryConditionalTable]:
        evidence = self.evidence.without_geometry()
        g = self.geometry
        if g is not None:
            return probability(query, g, evidence, self.engine)
        return geometry_conditional(query, self.viable, evidence, self.engine)

    def joint_table(self, scope: Sequence[str]) -> Union[JointTable, GeometryConditionalTable]:
        evidence = self.evidence.without_geometry()
        g = self.geometry
        if g is not None:
            return joint_table(scope, g, evidence, self.engine)
        cands = self.viable
        _check_scope(cands, set(scope), "table scope")
        return GeometryConditionalTable(
            {c.name: joint_table(scope, c, evidence, self.engine) for c in cands}
        )


def update(session: UpdateSession, atom: Atom) -> UpdateSession:
    return session.learn(atom)


def clear_caches() -> None:
    """Drop memoized counts so the next query recomputes from scratch."""
    _counts.cache_clear()
    _table.cache_clear()
