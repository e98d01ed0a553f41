"""Reader and writer for ``.aao`` model files.

A model file is a sequence of statements, one per line or separated by
``;``. ``#`` starts a comment. Example::

    states H T
    colors R G B
    constraint R : H-T T-H
    constraint G : H-H T-T
    constraint B : H-H T-T

    geometry fig2a {
      node bottom left right
      edge bottom left
      edge bottom right
      axis vertical=time
    }

    evidence base { bottom = H }
    query same_lr = same(left, right)
    set fig2 { fig2a fig2b }

Other statements: ``colors ... observable``, ``directed`` and
``coord <node> <numbers>`` inside a geometry, and evidence atoms
``edge <u> <v> = <color> deduced`` / ``edge <index> = <color> deduced`` /
``geometry = <name>``.

Query expressions: ``same(a, b)``, ``a = H``, ``true``, ``not E``,
``E and E``, ``E or E`` and parentheses; ``not`` binds tightest, then
``and``, then ``or``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import AaoError, GeometryError
from .model import (
    DEFAULT_LAW,
    TRUE,
    Always,
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

KEYWORDS = frozenset(
    "states colors constraint geometry evidence query set node edge axis coord "
    "directed observable deduced same not and or true".split()
)


class DSLError(AaoError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class DSLSyntaxError(DSLError):
    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()):
        self.expected = tuple(expected)
        if self.expected:
            message += f" (expected {' or '.join(self.expected)})"
        super().__init__(message, line, column)


class DSLSemanticError(DSLError):
    pass


# --------------------------------------------------------------------------
# Tokens
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER NL EOF or the punctuation itself
    value: str
    line: int
    column: int

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "NL":
            return "end of line"
        return repr(self.value)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f\v]+)
  | (?P<comment>\#[^\r\n]*)
  | (?P<nl>\r\n|\r|\n)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}();:=,\-])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    if text.startswith("﻿"):
        text = text[1:]
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            tokens.append(Token("NL", value, line, col))
            line += 1
            line_start = m.end()
        elif kind == "number":
            tokens.append(Token("NUMBER", value, line, col))
        elif kind == "ident":
            tokens.append(Token("IDENT", value, line, col))
        elif kind == "punct":
            tokens.append(Token(value, value, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# Document
# --------------------------------------------------------------------------


@dataclass
class GeometryDecl:
    name: str
    nodes: tuple[str, ...] = ()
    edges: tuple[tuple[str, str], ...] = ()
    directed: bool = False
    axes: tuple[tuple[str, str], ...] = ()
    coords: tuple[tuple[str, tuple], ...] = ()


@dataclass
class ModelDocument:
    """Parsed contents of a model file.

    ``states``/``colors``/``constraints`` are None when the file omits them;
    :meth:`law` then falls back to the two-state, three-color default.
    """

    states: tuple[str, ...] | None = None
    colors: tuple[str, ...] | None = None
    observable: bool = False
    constraints: dict[str, tuple[tuple[str, str], ...]] | None = None
    geometries: dict[str, GeometryDecl] = field(default_factory=dict)
    evidence: dict[str, tuple] = field(default_factory=dict)
    queries: dict[str, Predicate] = field(default_factory=dict)
    sets: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def law(self) -> Law:
        if self.states is None and self.colors is None and self.constraints is None:
            return DEFAULT_LAW
        return Law.from_table(
            self.states or (), self.colors or (), self.constraints or {}, self.observable
        )

    def geometry(self, name: str) -> Geometry:
        d = self.geometries[name]
        return Geometry(d.name, d.nodes, d.edges, self.law(), d.directed, d.axes, d.coords)

    def geometry_set(self, name: str) -> list[Geometry]:
        return [self.geometry(g) for g in self.sets[name]]

    def all_geometries(self) -> list[Geometry]:
        return [self.geometry(g) for g in self.geometries]

    def evidence_block(self, name: str) -> Evidence:
        return Evidence(self.evidence[name])

    def query(self, name: str) -> Predicate:
        return self.queries[name]


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.doc = ModelDocument()
        self.law_tok: Token | None = None
        self.set_refs: list[tuple[str, Token]] = []
        self.node_refs: list[tuple[str, Token]] = []
        self.state_refs: list[tuple[str, Token]] = []
        self.color_refs: list[tuple[str, Token]] = []
        self.geo_tok: dict[str, Token] = {}

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, msg: str, expected=(), tok: Token | None = None):
        tok = tok or self.tok
        return DSLSyntaxError(f"{msg}, got {tok.describe()}", tok.line, tok.column, expected)

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            raise self.error("unexpected token", [what or repr(kind)])
        return self.advance()

    def keyword(self, word: str) -> Token:
        if not (self.tok.kind == "IDENT" and self.tok.value == word):
            raise self.error("unexpected token", [repr(word)])
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.value == word

    def name(self, what: str = "identifier") -> Token:
        if self.tok.kind != "IDENT":
            raise self.error("unexpected token", [what])
        if self.tok.value in KEYWORDS:
            raise self.error(f"reserved word used as {what}", [what])
        return self.advance()

    def unique(self, tok: Token, existing: list, what: str) -> str:
        if tok.value in existing:
            raise self.semantic(f"duplicate {what} {tok.value}", tok)
        return tok.value

    def skip_separators(self):
        while self.tok.kind in ("NL", ";"):
            self.advance()

    def end_statement(self):
        if self.tok.kind in ("NL", ";"):
            self.advance()
        elif self.tok.kind not in ("EOF", "}"):
            raise self.error("unexpected token", ["end of statement"])

    def semantic(self, msg: str, tok: Token):
        return DSLSemanticError(msg, tok.line, tok.column)

    # statements
    def parse(self) -> ModelDocument:
        self.skip_separators()
        while self.tok.kind != "EOF":
            t = self.tok
            if t.kind != "IDENT":
                raise self.error("unexpected token", ["statement keyword"])
            handler = {
                "states": self.p_states,
                "colors": self.p_colors,
                "constraint": self.p_constraint,
                "geometry": self.p_geometry,
                "evidence": self.p_evidence,
                "query": self.p_query,
                "set": self.p_set,
            }.get(t.value)
            if handler is None:
                raise self.error(
                    "unknown statement",
                    ["states", "colors", "constraint", "geometry", "evidence", "query", "set"],
                )
            handler()
            self.end_statement()
            self.skip_separators()
        self.finish()
        return self.doc

    def p_states(self):
        kw = self.keyword("states")
        if self.doc.states is not None:
            raise self.semantic("states declared twice", kw)
        names = []
        while self.tok.kind == "IDENT":
            names.append(self.unique(self.name("state"), names, "state"))
        if not names:
            raise self.error("empty state list", ["state"])
        self.doc.states = tuple(names)
        self.law_tok = self.law_tok or kw

    def p_colors(self):
        kw = self.keyword("colors")
        if self.doc.colors is not None:
            raise self.semantic("colors declared twice", kw)
        names = []
        while self.tok.kind == "IDENT" and not self.at_keyword("observable"):
            names.append(self.unique(self.name("color"), names, "color"))
        if self.at_keyword("observable"):
            self.advance()
            self.doc.observable = True
        self.doc.colors = tuple(names)
        self.law_tok = self.law_tok or kw

    def p_constraint(self):
        kw = self.keyword("constraint")
        color = self.name("color")
        self.color_refs.append((color.value, color))
        self.expect(":", "':'")
        if self.doc.constraints is None:
            self.doc.constraints = {}
        if color.value in self.doc.constraints:
            raise self.semantic(f"constraint for color {color.value} declared twice", color)
        pairs = []
        while self.tok.kind == "IDENT":
            a = self.name("state")
            self.expect("-", "'-'")
            b = self.name("state")
            self.state_refs += [(a.value, a), (b.value, b)]
            if (a.value, b.value) not in pairs:
                pairs.append((a.value, b.value))
        self.doc.constraints[color.value] = tuple(pairs)
        self.law_tok = self.law_tok or kw

    def p_geometry(self):
        self.keyword("geometry")
        name = self.name("geometry name")
        if name.value in self.doc.geometries:
            raise self.semantic(f"duplicate geometry {name.value}", name)
        decl = GeometryDecl(name.value)
        if self.at_keyword("directed"):
            self.advance()
            decl.directed = True
        self.expect("{", "'{'")
        self.skip_separators()
        nodes, edges, axes, coords = [], [], [], []
        while self.tok.kind != "}":
            if self.at_keyword("node"):
                self.advance()
                if self.tok.kind != "IDENT":
                    raise self.error("empty node list", ["node name"])
                while self.tok.kind == "IDENT":
                    nodes.append(self.unique(self.name("node name"), nodes, "node"))
            elif self.at_keyword("edge"):
                self.advance()
                u, v = self.name("node name"), self.name("node name")
                for t in (u, v):
                    if t.value not in nodes:
                        raise self.semantic(f"edge endpoint {t.value} is not a node of {name.value}", t)
                if u.value == v.value:
                    raise self.semantic(f"self-loop on {u.value}", u)
                edges.append((u.value, v.value))
            elif self.at_keyword("axis"):
                self.advance()
                if self.tok.kind != "IDENT":
                    raise self.error("empty axis list", ["axis=label"])
                while self.tok.kind == "IDENT":
                    axis = self.name("axis name")
                    self.expect("=", "'='")
                    label = self.expect("IDENT", "space or time")
                    if label.value not in ("space", "time"):
                        raise self.semantic(f"axis label must be space or time, not {label.value}", label)
                    if any(a == axis.value for a, _ in axes):
                        raise self.semantic(f"axis {axis.value} declared twice", axis)
                    axes.append((axis.value, label.value))
            elif self.at_keyword("coord"):
                self.advance()
                node = self.name("node name")
                if node.value not in nodes:
                    raise self.semantic(f"coordinates for unknown node {node.value}", node)
                if any(n == node.value for n, _ in coords):
                    raise self.semantic(f"coordinates for {node.value} given twice", node)
                values = []
                while self.tok.kind == "NUMBER":
                    values.append(_number(self.advance().value))
                if not values:
                    raise self.error("missing coordinates", ["number"])
                coords.append((node.value, tuple(values)))
            elif self.at_keyword("directed"):
                self.advance()
                decl.directed = True
            else:
                raise self.error("unexpected token", ["node", "edge", "axis", "coord", "directed", "'}'"])
            self.end_statement()
            self.skip_separators()
        self.expect("}", "'}'")
        decl.nodes, decl.edges = tuple(nodes), tuple(edges)
        decl.axes, decl.coords = tuple(axes), tuple(coords)
        self.doc.geometries[name.value] = decl
        self.geo_tok[name.value] = name

    def p_evidence(self):
        self.keyword("evidence")
        name = self.name("evidence name")
        if name.value in self.doc.evidence:
            raise self.semantic(f"duplicate evidence block {name.value}", name)
        self.expect("{", "'{'")
        atoms = []
        self.skip_atom_separators()
        while self.tok.kind != "}":
            atom = self.p_atom()
            if atom not in atoms:
                atoms.append(atom)
            if self.tok.kind not in ("NL", ";", ",", "}"):
                raise self.error("unexpected token", ["';'", "','", "'}'"])
            self.skip_atom_separators()
        self.expect("}", "'}'")
        self.doc.evidence[name.value] = tuple(atoms)

    def skip_atom_separators(self):
        while self.tok.kind in ("NL", ";", ","):
            self.advance()

    def p_atom(self):
        if self.at_keyword("geometry"):
            self.advance()
            self.expect("=", "'='")
            g = self.name("geometry name")
            self.set_refs.append((g.value, g))
            return GeometryIs(g.value)
        if self.at_keyword("edge"):
            self.advance()
            if self.tok.kind == "NUMBER":
                t = self.advance()
                if not re.fullmatch(r"\d+", t.value):
                    raise self.error("edge index must be a nonnegative integer", tok=t)
                ref = int(t.value)
            else:
                u, v = self.name("node name"), self.name("node name")
                self.node_refs += [(u.value, u), (v.value, v)]
                ref = (u.value, v.value)
            self.expect("=", "'='")
            c = self.name("color")
            self.color_refs.append((c.value, c))
            deduced = False
            if self.at_keyword("deduced"):
                self.advance()
                deduced = True
            return EdgeIs(ref, c.value, deduced)
        node = self.name("node name")
        self.expect("=", "'='")
        state = self.name("state")
        self.node_refs.append((node.value, node))
        self.state_refs.append((state.value, state))
        return NodeIs(node.value, state.value)

    def p_query(self):
        self.keyword("query")
        name = self.name("query name")
        if name.value in self.doc.queries:
            raise self.semantic(f"duplicate query {name.value}", name)
        self.expect("=", "'='")
        self.doc.queries[name.value] = self.p_or()
        if self.tok.kind not in ("NL", ";", "EOF"):
            raise self.error("unexpected token", ["'and'", "'or'", "end of statement"])

    def p_set(self):
        self.keyword("set")
        name = self.name("set name")
        if name.value in self.doc.sets:
            raise self.semantic(f"duplicate set {name.value}", name)
        self.expect("{", "'{'")
        members = []
        self.skip_atom_separators()
        while self.tok.kind == "IDENT":
            g = self.name("geometry name")
            self.set_refs.append((g.value, g))
            if g.value in members:
                raise self.semantic(f"geometry {g.value} listed twice in set {name.value}", g)
            members.append(g.value)
            self.skip_atom_separators()
        self.expect("}", "'}'")
        if not members:
            raise self.semantic(f"set {name.value} is empty", name)
        self.doc.sets[name.value] = tuple(members)

    # expressions
    def p_or(self) -> Predicate:
        terms = [self.p_and()]
        while self.at_keyword("or"):
            self.advance()
            terms.append(self.p_and())
        return terms[0] if len(terms) == 1 else Or(tuple(terms))

    def p_and(self) -> Predicate:
        terms = [self.p_not()]
        while self.at_keyword("and"):
            self.advance()
            terms.append(self.p_not())
        return terms[0] if len(terms) == 1 else And(tuple(terms))

    def p_not(self) -> Predicate:
        if self.at_keyword("not"):
            self.advance()
            return Not(self.p_not())
        return self.p_atom_expr()

    def p_atom_expr(self) -> Predicate:
        t = self.tok
        if t.kind == "(":
            self.advance()
            inner = self.p_or()
            self.expect(")", "')'")
            return inner
        if t.kind == "IDENT" and t.value == "same" and self.peek().kind == "(":
            self.advance()
            self.advance()
            a = self.name("node name")
            self.expect(",", "','")
            b = self.name("node name")
            self.expect(")", "')'")
            self.node_refs += [(a.value, a), (b.value, b)]
            return NodesSame(a.value, b.value)
        if t.kind == "IDENT" and t.value == "true":
            self.advance()
            return TRUE
        if t.kind == "IDENT" and t.value not in KEYWORDS:
            node = self.advance()
            self.expect("=", "'='")
            state = self.name("state")
            self.node_refs.append((node.value, node))
            self.state_refs.append((state.value, state))
            return NodeEquals(node.value, state.value)
        raise self.error("unexpected token", ["same(", "node name", "'not'", "'('", "'true'"])

    # semantic checks that need the whole document
    def finish(self):
        doc = self.doc
        if doc.constraints is None and (doc.states is not None or doc.colors is not None):
            doc.constraints = {}
        for g, tok in self.set_refs:
            if g not in doc.geometries:
                raise self.semantic(f"unknown geometry {g}", tok)
        all_nodes = {n for d in doc.geometries.values() for n in d.nodes}
        for n, tok in self.node_refs:
            if n not in all_nodes:
                raise self.semantic(f"unknown node {n}", tok)
        try:
            law = doc.law()
        except GeometryError as exc:
            tok = self.law_tok or self.toks[0]
            raise self.semantic(str(exc), tok) from None
        for s, tok in self.state_refs:
            if s not in law.states:
                raise self.semantic(f"unknown state {s}", tok)
        for c, tok in self.color_refs:
            if c not in law.colors:
                raise self.semantic(f"unknown color {c}", tok)
        for name in doc.geometries:
            try:
                doc.geometry(name)
            except GeometryError as exc:
                raise self.semantic(str(exc), self.geo_tok[name]) from None


def _number(text: str):
    return float(text) if any(ch in text for ch in ".eE") else int(text)


def parse_model(text: str) -> ModelDocument:
    """Parse model text; raises DSLSyntaxError or DSLSemanticError with a 1-based position."""
    return _Parser(text).parse()


def parse_query(text: str) -> Predicate:
    p = _Parser(text)
    p.skip_separators()
    pred = p.p_or()
    p.skip_separators()
    if p.tok.kind != "EOF":
        raise p.error("unexpected token", ["'and'", "'or'", "end of input"])
    return pred


def parse_atom(text: str):
    """Parse a single evidence atom such as ``left = H`` or ``geometry = fig2b``."""
    p = _Parser(text)
    atom = p.p_atom()
    if p.tok.kind not in ("EOF", "NL"):
        raise p.error("unexpected token", ["end of input"])
    return atom


# --------------------------------------------------------------------------
# Serializer
# --------------------------------------------------------------------------


def format_query(pred: Predicate) -> str:
    return _fmt(pred, 0)


_PREC = {Or: 1, And: 2, Not: 3}


def _fmt(pred: Predicate, parent: int) -> str:
    if isinstance(pred, Always):
        return "true"
    if isinstance(pred, NodeEquals):
        return f"{pred.node} = {pred.state}"
    if isinstance(pred, NodesSame):
        return f"same({pred.a}, {pred.b})"
    if isinstance(pred, Not):
        return "not " + _fmt(pred.term, 3)
    if isinstance(pred, (And, Or)):
        mine = _PREC[type(pred)]
        word = " and " if isinstance(pred, And) else " or "
        # nested groups of the same operator keep their parentheses so the tree round-trips
        body = word.join(_fmt(t, mine + 1 if type(t) is type(pred) else mine) for t in pred.terms)
        return f"({body})" if parent >= mine else body
    raise TypeError(f"cannot format {pred!r}")


def format_atom(atom) -> str:
    return str(atom)


def _fmt_number(x) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def serialize_model(doc: ModelDocument) -> str:
    """Canonical text for ``doc``; ``parse_model`` of the result equals ``doc``."""
    out: list[str] = []
    if doc.states is not None:
        out.append("states " + " ".join(doc.states))
    if doc.colors is not None:
        out.append(" ".join(["colors", *doc.colors] + (["observable"] if doc.observable else [])))
    for color, pairs in (doc.constraints or {}).items():
        out.append(" ".join([f"constraint {color} :", *(f"{a}-{b}" for a, b in pairs)]).rstrip())
    for d in doc.geometries.values():
        if out:
            out.append("")
        out.append(f"geometry {d.name}{' directed' if d.directed else ''} {{")
        if d.nodes:
            out.append("  node " + " ".join(d.nodes))
        for u, v in d.edges:
            out.append(f"  edge {u} {v}")
        if d.axes:
            out.append("  axis " + " ".join(f"{a}={l}" for a, l in d.axes))
        for n, c in d.coords:
            out.append(f"  coord {n} " + " ".join(_fmt_number(x) for x in c))
        out.append("}")
    blocks = []
    for name, atoms in doc.evidence.items():
        body = "; ".join(format_atom(a) for a in atoms)
        blocks.append(f"evidence {name} {{ {body} }}" if body else f"evidence {name} {{ }}")
    for name, pred in doc.queries.items():
        blocks.append(f"query {name} = {format_query(pred)}")
    for name, members in doc.sets.items():
        blocks.append(f"set {name} {{ {' '.join(members)} }}")
    if blocks:
        if out:
            out.append("")
        out.extend(blocks)
    return "\n".join(out) + "\n" if out else ""
