"""Geometries, constraint laws, evidence atoms and query predicates.

A *geometry* is a labeled multigraph. Every node takes one state from the
law's state alphabet and every edge takes one color from its color
alphabet; the law says which colors may join which ordered state pairs.
Nothing else constrains a microstate.

All types here are immutable and hashable so they can be used as cache keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    ContradictionError,
    EvidenceError,
    GeometryError,
    UnknownNodeError,
)

AXIS_LABELS = ("space", "time")


def _check_alphabet(kind: str, symbols: Sequence[str], allow_empty: bool) -> tuple:
    symbols = tuple(symbols)
    if not symbols and not allow_empty:
        raise GeometryError(f"{kind} alphabet is empty")
    seen = set()
    for s in symbols:
        if not isinstance(s, str) or not s:
            raise GeometryError(f"{kind} symbol {s!r} is not a nonempty string")
        if s in seen:
            raise GeometryError(f"duplicate {kind} symbol {s!r}")
        seen.add(s)
    return symbols


@dataclass(frozen=True)
class Law:
    """States, colors, and the set of permitted ``(color, state_a, state_b)`` triples.

    Triples absent from ``allowed`` are forbidden. ``observable`` marks colors
    as directly measurable, which lifts the deduction requirement on edge
    evidence.
    """

    states: tuple[str, ...]
    colors: tuple[str, ...]
    allowed: frozenset = frozenset()
    observable: bool = False

    def __post_init__(self):
        object.__setattr__(self, "states", _check_alphabet("state", self.states, False))
        # an empty color alphabet is a legal (vacuous) law
        object.__setattr__(self, "colors", _check_alphabet("color", self.colors, True))
        allowed = frozenset(tuple(t) for t in self.allowed)
        for color, a, b in allowed:
            if color not in self.colors:
                raise GeometryError(f"constraint uses unknown color {color!r}")
            for s in (a, b):
                if s not in self.states:
                    raise GeometryError(f"constraint uses unknown state {s!r}")
        object.__setattr__(self, "allowed", allowed)

    @classmethod
    def from_table(
        cls,
        states: Sequence[str],
        colors: Sequence[str],
        table: Mapping[str, Iterable[tuple[str, str]]],
        observable: bool = False,
    ) -> "Law":
        """Build a law from ``{color: [(state_a, state_b), ...]}``.

        Every color must have an entry, even if it is an empty list.
        """
        missing = [c for c in colors if c not in table]
        if missing:
            raise GeometryError(
                "incomplete constraint table: no entry for color(s) " + ", ".join(missing)
            )
        extra = [c for c in table if c not in colors]
        if extra:
            raise GeometryError("constraint table names unknown color(s) " + ", ".join(extra))
        allowed = {(c, a, b) for c, pairs in table.items() for a, b in pairs}
        return cls(tuple(states), tuple(colors), frozenset(allowed), observable)

    def allows(self, color: str, a: str, b: str) -> bool:
        return (color, a, b) in self.allowed

    def pairs(self, color: str) -> tuple[tuple[str, str], ...]:
        """Permitted state pairs for ``color`` in canonical order."""
        return tuple(
            (a, b) for a in self.states for b in self.states if (color, a, b) in self.allowed
        )

    def table(self) -> dict[str, tuple[tuple[str, str], ...]]:
        return {c: self.pairs(c) for c in self.colors}

    def is_symmetric(self) -> bool:
        return all((c, b, a) in self.allowed for c, a, b in self.allowed)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise GeometryError(f"unknown state {state!r}") from None

    def color_index(self, color: str) -> int:
        try:
            return self.colors.index(color)
        except ValueError:
            raise GeometryError(f"unknown color {color!r}") from None


DEFAULT_LAW = Law.from_table(
    ("H", "T"),
    ("R", "G", "B"),
    {
        "R": [("H", "T"), ("T", "H")],
        "G": [("H", "H"), ("T", "T")],
        "B": [("H", "H"), ("T", "T")],
    },
)


@dataclass(frozen=True)
class Geometry:
    """A validated labeled multigraph under a law.

    Node and edge order is the order of declaration and is the canonical
    order for every enumeration and table. ``axes`` and ``coords`` are
    descriptive metadata only; no engine reads them.
    """

    name: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...] = ()
    law: Law = DEFAULT_LAW
    directed: bool = False
    axes: tuple[tuple[str, str], ...] = ()
    coords: tuple[tuple[str, tuple], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "axes", tuple(tuple(a) for a in self.axes))
        object.__setattr__(
            self, "coords", tuple((n, tuple(c)) for n, c in self.coords)
        )
        if not self.name:
            raise GeometryError("geometry needs a name")
        seen = set()
        for n in self.nodes:
            if n in seen:
                raise GeometryError(f"duplicate node name {n!r} in {self.name}")
            seen.add(n)
        for e in self.edges:
            if len(e) != 2:
                raise GeometryError(f"edge {e!r} does not have two endpoints")
            u, v = e
            for x in (u, v):
                if x not in seen:
                    raise GeometryError(f"edge {u}-{v} in {self.name}: unknown node {x!r}")
            if u == v:
                raise GeometryError(f"edge {u}-{v} in {self.name} is a self-loop")
        if not self.directed and not self.law.is_symmetric():
            raise GeometryError(
                f"geometry {self.name} is undirected but its constraint table is asymmetric"
            )
        axis_names = set()
        for axis, label in self.axes:
            if label not in AXIS_LABELS:
                raise GeometryError(f"axis {axis!r} label must be space or time, not {label!r}")
            if axis in axis_names:
                raise GeometryError(f"axis {axis!r} declared twice")
            axis_names.add(axis)
        for n, _ in self.coords:
            if n not in seen:
                raise GeometryError(f"coordinates given for unknown node {n!r}")

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    def index_of(self, node: str) -> int:
        try:
            return self.node_index[node]
        except KeyError:
            raise UnknownNodeError(f"geometry {self.name} has no node {node!r}") from None

    def has_node(self, node: str) -> bool:
        return node in self.node_index

    def edge_index(self, ref: Union[int, tuple[str, str]]) -> int:
        """Resolve an edge reference: a position, or an endpoint pair."""
        if isinstance(ref, int):
            if 0 <= ref < len(self.edges):
                return ref
            raise EvidenceError(f"geometry {self.name} has no edge #{ref}")
        u, v = ref
        if self.directed:
            hits = [i for i, e in enumerate(self.edges) if e == (u, v)]
        else:
            hits = [i for i, e in enumerate(self.edges) if set(e) == {u, v}]
        if not hits:
            raise EvidenceError(f"geometry {self.name} has no edge {u}-{v}")
        if len(hits) > 1:
            raise EvidenceError(
                f"edge {u}-{v} is ambiguous in {self.name} (parallel edges {hits}); use an index"
            )
        return hits[0]

    def edge_label(self, i: int) -> str:
        u, v = self.edges[i]
        label = f"{u}-{v}"
        if sum(1 for e in self.edges if set(e) == {u, v}) > 1:
            label += f"#{i}"
        return label

    def with_axes(self, **labels: str) -> "Geometry":
        """Copy with axis metadata replaced, e.g. ``with_axes(vertical="time")``."""
        axes = dict(self.axes)
        axes.update(labels)
        return Geometry(
            self.name, self.nodes, self.edges, self.law, self.directed,
            tuple(axes.items()), self.coords,
        )

    def renamed(self, name: str) -> "Geometry":
        return Geometry(
            name, self.nodes, self.edges, self.law, self.directed, self.axes, self.coords
        )

    @property
    def is_temporal(self) -> bool:
        return any(label == "time" for _, label in self.axes)


def build_geometry(description: Mapping) -> Geometry:
    """Validate a plain-dict geometry description.

    Recognized keys: ``name``, ``nodes``, ``edges``, ``states``, ``colors``,
    ``constraints`` (color -> list of state pairs), ``observable``,
    ``directed``, ``axes`` (mapping or pairs) and ``coords``. When no law
    keys are present the two-state, three-color default law is used.
    """
    d = dict(description)
    if any(k in d for k in ("states", "colors", "constraints")):
        try:
            law = Law.from_table(
                d["states"], d["colors"], d["constraints"], d.get("observable", False)
            )
        except KeyError as exc:
            raise GeometryError(f"law description is missing {exc.args[0]!r}") from None
    else:
        law = d.get("law", DEFAULT_LAW)
    axes = d.get("axes", ())
    if isinstance(axes, Mapping):
        axes = tuple(axes.items())
    coords = d.get("coords", ())
    if isinstance(coords, Mapping):
        coords = tuple(coords.items())
    return Geometry(
        name=d.get("name", "g"),
        nodes=tuple(d.get("nodes", ())),
        edges=tuple(tuple(e) for e in d.get("edges", ())),
        law=law,
        directed=d.get("directed", False),
        axes=tuple(axes),
        coords=tuple(coords),
    )


# --------------------------------------------------------------------------
# Evidence
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NodeIs:
    node: str
    state: str

    def __str__(self):
        return f"{self.node} = {self.state}"


@dataclass(frozen=True)
class EdgeIs:
    """A learned edge color.

    Colors are normally unobservable, so the atom must be flagged as
    ``deduced`` unless the law declares its colors observable.
    """

    edge: Union[int, tuple[str, str]]
    color: str
    deduced: bool = False

    def __post_init__(self):
        if not isinstance(self.edge, int):
            object.__setattr__(self, "edge", tuple(self.edge))

    def __str__(self):
        ref = str(self.edge) if isinstance(self.edge, int) else " ".join(self.edge)
        return f"edge {ref} = {self.color}" + (" deduced" if self.deduced else "")


@dataclass(frozen=True)
class GeometryIs:
    name: str

    def __str__(self):
        return f"geometry = {self.name}"


Atom = Union[NodeIs, EdgeIs, GeometryIs]


@dataclass(frozen=True)
class Evidence:
    """An unordered set of learned atoms."""

    atoms: frozenset = frozenset()

    def __post_init__(self):
        atoms = frozenset(self.atoms)
        for a in atoms:
            if not isinstance(a, (NodeIs, EdgeIs, GeometryIs)):
                raise TypeError(f"not an evidence atom: {a!r}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def of(cls, *atoms: Atom, **nodes: str) -> "Evidence":
        """``Evidence.of(bottom="H")`` or ``Evidence.of(NodeIs("bottom", "H"))``."""
        return cls(frozenset(atoms) | {NodeIs(n, s) for n, s in nodes.items()})

    def __iter__(self) -> Iterator[Atom]:
        return iter(sorted(self.atoms, key=_atom_key))

    def __len__(self):
        return len(self.atoms)

    def __contains__(self, atom):
        return atom in self.atoms

    def with_atom(self, atom: Atom) -> "Evidence":
        return Evidence(self.atoms | {atom})

    def union(self, other: Union["Evidence", Iterable[Atom]]) -> "Evidence":
        other_atoms = other.atoms if isinstance(other, Evidence) else frozenset(other)
        return Evidence(self.atoms | other_atoms)

    def without_geometry(self) -> "Evidence":
        return Evidence(a for a in self.atoms if not isinstance(a, GeometryIs))

    @property
    def geometry_names(self) -> set[str]:
        return {a.name for a in self.atoms if isinstance(a, GeometryIs)}

    def node_atoms(self) -> list[NodeIs]:
        return [a for a in self if isinstance(a, NodeIs)]

    def edge_atoms(self) -> list[EdgeIs]:
        return [a for a in self if isinstance(a, EdgeIs)]


def _atom_key(atom):
    order = {NodeIs: 0, EdgeIs: 1, GeometryIs: 2}[type(atom)]
    return (order, str(atom))


NO_EVIDENCE = Evidence()


@dataclass(frozen=True)
class Pins:
    """Evidence resolved against one geometry, as alphabet indices."""

    nodes: Mapping[int, int] = field(default_factory=dict)
    edges: Mapping[int, int] = field(default_factory=dict)


def resolve_evidence(geometry: Geometry, evidence: Evidence | None) -> Pins:
    """Map evidence onto node/edge positions, collecting every problem found.

    Raises ContradictionError for clashes and EvidenceError for anything
    else (unknown names, unflagged edge atoms, a different geometry).
    """
    evidence = evidence or NO_EVIDENCE
    law = geometry.law
    problems: list[str] = []
    clashes: list[str] = []
    node_pins: dict[int, int] = {}
    edge_pins: dict[int, int] = {}

    names = evidence.geometry_names
    if len(names) > 1:
        clashes.append("evidence names several geometries: " + ", ".join(sorted(names)))
    elif names and names != {geometry.name}:
        clashes.append(f"evidence is about geometry {next(iter(names))}, not {geometry.name}")

    for atom in evidence.node_atoms():
        if not geometry.has_node(atom.node):
            problems.append(f"unknown node {atom.node!r}")
            continue
        if atom.state not in law.states:
            problems.append(f"unknown state {atom.state!r} for node {atom.node}")
            continue
        i, s = geometry.node_index[atom.node], law.states.index(atom.state)
        if node_pins.get(i, s) != s:
            clashes.append(
                f"node {atom.node} is both {law.states[node_pins[i]]} and {atom.state}"
            )
            continue
        node_pins[i] = s

    for atom in evidence.edge_atoms():
        if not (atom.deduced or law.observable):
            problems.append(f"edge colors are unobservable; '{atom}' needs the deduced flag")
            continue
        try:
            i = geometry.edge_index(atom.edge)
        except EvidenceError as exc:
            problems.append(str(exc))
            continue
        if atom.color not in law.colors:
            problems.append(f"unknown color {atom.color!r}")
            continue
        c = law.colors.index(atom.color)
        if edge_pins.get(i, c) != c:
            clashes.append(
                f"edge {geometry.edge_label(i)} is both {law.colors[edge_pins[i]]} and {atom.color}"
            )
            continue
        edge_pins[i] = c

    if problems:
        raise EvidenceError("; ".join(problems + clashes), problems + clashes)
    if clashes:
        raise ContradictionError("; ".join(clashes), clashes)
    return Pins(node_pins, edge_pins)


def validate_evidence(geometry: Geometry, evidence: Evidence | None) -> None:
    """Raise if ``evidence`` cannot be interpreted on ``geometry``.

    Only naming and pairwise consistency are checked here; whether the
    evidence is compatible with the law is for the engines to find out.
    """
    resolve_evidence(geometry, evidence)


# --------------------------------------------------------------------------
# Query predicates
# --------------------------------------------------------------------------


class Predicate:
    """Boolean expression over node states. Supports ``&``, ``|`` and ``~``."""

    def nodes(self) -> set[str]:
        raise NotImplementedError

    def states(self) -> set[str]:
        return set()

    def evaluate(self, assignment: Mapping[str, str]) -> bool:
        raise NotImplementedError

    def compile(self, geometry: Geometry) -> Callable[[Sequence[int]], bool]:
        """Return a test over state-index tuples in the geometry's node order."""
        raise NotImplementedError

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)


def _lookup(assignment, node):
    try:
        return assignment[node]
    except KeyError:
        raise UnknownNodeError(f"assignment has no node {node!r}") from None


@dataclass(frozen=True)
class Always(Predicate):
    def nodes(self):
        return set()

    def evaluate(self, assignment):
        return True

    def compile(self, geometry):
        return lambda s: True


@dataclass(frozen=True)
class NodeEquals(Predicate):
    node: str
    state: str

    def nodes(self):
        return {self.node}

    def states(self):
        return {self.state}

    def evaluate(self, assignment):
        return _lookup(assignment, self.node) == self.state

    def compile(self, geometry):
        i = geometry.index_of(self.node)
        if self.state not in geometry.law.states:
            return lambda s: False
        k = geometry.law.states.index(self.state)
        return lambda s: s[i] == k


@dataclass(frozen=True)
class NodesSame(Predicate):
    a: str
    b: str

    def nodes(self):
        return {self.a, self.b}

    def evaluate(self, assignment):
        return _lookup(assignment, self.a) == _lookup(assignment, self.b)

    def compile(self, geometry):
        i, j = geometry.index_of(self.a), geometry.index_of(self.b)
        return lambda s: s[i] == s[j]


@dataclass(frozen=True)
class Not(Predicate):
    term: Predicate

    def nodes(self):
        return self.term.nodes()

    def states(self):
        return self.term.states()

    def evaluate(self, assignment):
        return not self.term.evaluate(assignment)

    def compile(self, geometry):
        f = self.term.compile(geometry)
        return lambda s: not f(s)


@dataclass(frozen=True)
class And(Predicate):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) < 2:
            raise ValueError("And needs at least two terms")

    def nodes(self):
        return set().union(*(t.nodes() for t in self.terms))

    def states(self):
        return set().union(*(t.states() for t in self.terms))

    def evaluate(self, assignment):
        # evaluate every term so unknown nodes are always reported
        return all([t.evaluate(assignment) for t in self.terms])

    def compile(self, geometry):
        fs = [t.compile(geometry) for t in self.terms]
        return lambda s: all(f(s) for f in fs)


@dataclass(frozen=True)
class Or(Predicate):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) < 2:
            raise ValueError("Or needs at least two terms")

    def nodes(self):
        return set().union(*(t.nodes() for t in self.terms))

    def states(self):
        return set().union(*(t.states() for t in self.terms))

    def evaluate(self, assignment):
        return any([t.evaluate(assignment) for t in self.terms])

    def compile(self, geometry):
        fs = [t.compile(geometry) for t in self.terms]
        return lambda s: any(f(s) for f in fs)


TRUE = Always()


def evaluate_predicate(predicate: Predicate, assignment: Mapping[str, str]) -> bool:
    return predicate.evaluate(assignment)


def check_predicate(geometry: Geometry, predicate: Predicate) -> None:
    """Raise UnknownNodeError if the predicate mentions nodes or states the geometry lacks."""
    missing = sorted(predicate.nodes() - set(geometry.nodes))
    if missing:
        raise UnknownNodeError(
            f"geometry {geometry.name} has no node(s) {', '.join(missing)}"
        )
    bad = sorted(predicate.states() - set(geometry.law.states))
    if bad:
        raise GeometryError(f"query uses unknown state(s) {', '.join(bad)}")
