"""Command-line front end: ``aao eval | table | session | check | enumerate``.

Exit codes: 0 success, 1 parse error, 2 semantic error (unknown names,
invalid geometry or evidence, size guard), 3 evidence with zero support,
4 engine mismatch or failed check.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TextIO

from . import checks, inference, oracle
from .dsl import DSLSemanticError, DSLSyntaxError, ModelDocument, parse_atom, parse_model, parse_query
from .errors import AaoError, ZeroSupportError
from .model import Evidence, Geometry, GeometryIs, Predicate

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_ZERO, EXIT_MISMATCH = 0, 1, 2, 3, 4


class UsageError(AaoError):
    """Bad names on the command line; reported with the semantic exit code."""


class EngineMismatch(AaoError):
    pass


def fmt_fraction(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}"


def fmt_decimal(p: Fraction, places: int = 6) -> str:
    # round() on a Fraction is exact and rounds half to even
    scaled = round(p * 10**places)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


@dataclass(frozen=True)
class OutputRecord:
    query: str
    geometry: str
    value: Fraction
    engine: str

    @property
    def exact(self) -> str:
        return fmt_fraction(self.value)


# --------------------------------------------------------------------------
# shared plumbing
# --------------------------------------------------------------------------


def load_document(path: str) -> ModelDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_model(text)


def pick_geometries(doc: ModelDocument, geometry: str | None, set_name: str | None) -> list[Geometry]:
    if geometry and set_name:
        raise UsageError("give --geometry or --set, not both")
    if geometry:
        if geometry not in doc.geometries:
            raise UsageError(f"unknown geometry {geometry}")
        return [doc.geometry(geometry)]
    if set_name:
        if set_name not in doc.sets:
            raise UsageError(f"unknown set {set_name}")
        return doc.geometry_set(set_name)
    if not doc.geometries:
        raise UsageError("the model declares no geometries")
    return doc.all_geometries()


def pick_evidence(doc: ModelDocument, name: str | None, none: bool = False) -> Evidence:
    if none:
        return Evidence()
    if name:
        if name not in doc.evidence:
            raise UsageError(f"unknown evidence block {name}")
        return doc.evidence_block(name)
    if len(doc.evidence) == 1:
        return doc.evidence_block(next(iter(doc.evidence)))
    return Evidence()


def pick_query(doc: ModelDocument, text: str) -> tuple[str, Predicate]:
    if text in doc.queries:
        return text, doc.queries[text]
    try:
        return text, parse_query(text)
    except DSLSyntaxError:
        raise UsageError(f"unknown query {text!r}") from None


def narrow(geometries: list[Geometry], evidence: Evidence) -> tuple[list[Geometry], Evidence]:
    """Apply any GeometryIs atom in the evidence to the candidate list."""
    names = evidence.geometry_names
    if not names:
        return geometries, evidence
    kept = [g for g in geometries if g.name in names]
    if len(names) > 1 or not kept:
        raise UsageError("evidence names a geometry outside the selection: " + ", ".join(sorted(names)))
    return kept, evidence.without_geometry()


def engines_for(choice: str) -> list[str]:
    return list(inference.ENGINES) if choice == "both" else [choice]


def split_nodes(items: Sequence[str]) -> list[str]:
    return [n for item in items for n in item.replace(",", " ").split()]


def add_common(p: argparse.ArgumentParser, formats: bool = True):
    p.add_argument("model", help="path to a .aao model file")
    p.add_argument("--geometry", help="evaluate a single geometry")
    p.add_argument("--set", dest="set_name", help="evaluate every geometry of a named set")
    p.add_argument("--evidence", help="evidence block to condition on (default: the only one)")
    p.add_argument("--no-evidence", action="store_true", help="ignore evidence blocks")
    p.add_argument("--engine", choices=("oracle", "weighted", "both"), default="weighted")
    if formats:
        p.add_argument("--format", choices=("text", "json", "tsv"), default="text")
        p.add_argument("--decimal", action="store_true", help="also print decimals (6 places)")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# --------------------------------------------------------------------------
# verbs
# --------------------------------------------------------------------------


def cmd_eval(args, out: TextIO) -> int:
    doc = load_document(args.model)
    qname, query = pick_query(doc, args.query)
    geos, evidence = narrow(
        pick_geometries(doc, args.geometry, args.set_name),
        pick_evidence(doc, args.evidence, args.no_evidence),
    )
    results: dict[str, list[OutputRecord]] = {}
    for engine in engines_for(args.engine):
        if len(geos) == 1:
            values = {geos[0].name: inference.probability(query, geos[0], evidence, engine)}
        else:
            values = dict(inference.geometry_conditional(query, geos, evidence, engine).items())
        results[engine] = [OutputRecord(qname, g, v, engine) for g, v in values.items()]

    engines = list(results)
    mismatch = len(engines) == 2 and [r.value for r in results[engines[0]]] != [
        r.value for r in results[engines[1]]
    ]

    if args.format == "json":
        def entry(r: OutputRecord):
            return {"exact": r.exact, "decimal": fmt_decimal(r.value)} if args.decimal else r.exact

        if len(engines) == 1:
            out.write(dumps({r.geometry: entry(r) for r in results[engines[0]]}) + "\n")
        else:
            out.write(dumps({e: {r.geometry: entry(r) for r in rs} for e, rs in results.items()}) + "\n")
    elif args.format == "tsv":
        header = ["query", "geometry", "engine", "probability"] + (["decimal"] if args.decimal else [])
        out.write("\t".join(header) + "\n")
        for e in engines:
            for r in results[e]:
                row = [r.query, r.geometry, r.engine, r.exact] + ([fmt_decimal(r.value)] if args.decimal else [])
                out.write("\t".join(row) + "\n")
    else:
        first = results[engines[0]]
        for i, r in enumerate(first):
            if len(engines) == 1:
                text = r.exact + (f" ({fmt_decimal(r.value)})" if args.decimal else "")
            else:
                text = " ".join(f"{e}={results[e][i].exact}" for e in engines)
            out.write(f"{r.geometry}: {text}\n")
    if mismatch:
        raise EngineMismatch("engines disagree")
    return EXIT_OK


def cmd_table(args, out: TextIO) -> int:
    doc = load_document(args.model)
    scope = split_nodes(args.nodes)
    if not scope:
        raise UsageError("empty scope")
    geos, evidence = narrow(
        pick_geometries(doc, args.geometry, args.set_name),
        pick_evidence(doc, args.evidence, args.no_evidence),
    )
    tables: dict[str, dict[str, inference.JointTable]] = {}
    for engine in engines_for(args.engine):
        for g in geos:
            missing = [n for n in scope if not g.has_node(n)]
            if missing:
                raise UsageError(f"geometry {g.name} has no node(s) {', '.join(missing)}")
            tables.setdefault(g.name, {})[engine] = inference.joint_table(scope, g, evidence, engine)

    mismatch = False
    for per_engine in tables.values():
        ts = list(per_engine.values())
        if len(ts) == 2 and (ts[0].counts != ts[1].counts):
            mismatch = True
    shown = {g: next(iter(per_engine.values())) for g, per_engine in tables.items()}
    if mismatch:
        shown = {}

    if args.format == "json":
        obj = {}
        for gname, t in shown.items():
            rows = []
            for row, n, p in t:
                item = {"states": list(row), "count": n, "probability": fmt_fraction(p)}
                if args.decimal:
                    item["decimal"] = fmt_decimal(p)
                rows.append(item)
            obj[gname] = {"scope": list(t.scope), "total": t.total, "rows": rows}
        out.write(dumps(obj) + "\n")
    elif args.format == "tsv":
        header = ["geometry", *scope, "count", "probability"] + (["decimal"] if args.decimal else [])
        out.write("\t".join(header) + "\n")
        for gname, t in shown.items():
            for row, n, p in t:
                cells = [gname, *row, str(n), fmt_fraction(p)] + ([fmt_decimal(p)] if args.decimal else [])
                out.write("\t".join(cells) + "\n")
    else:
        for i, (gname, t) in enumerate(shown.items()):
            if i:
                out.write("\n")
            out.write(render_table(gname, t, args.decimal))
    if mismatch:
        for gname, per_engine in tables.items():
            for e, t in per_engine.items():
                out.write(f"{gname} [{e}] counts {list(t.counts.values())}\n")
        raise EngineMismatch("engines disagree on the joint table")
    return EXIT_OK


def render_table(gname: str, t: inference.JointTable, decimal: bool = False) -> str:
    header = [*t.scope, "count", "probability"] + (["decimal"] if decimal else [])
    rows = [
        [*row, str(n), fmt_fraction(p)] + ([fmt_decimal(p)] if decimal else [])
        for row, n, p in t
    ]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = [gname]
    for r in [header] + rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    lines.append(f"total {t.total}")
    return "\n".join(lines) + "\n"


def cmd_enumerate(args, out: TextIO) -> int:
    doc = load_document(args.model)
    geos, evidence = narrow(
        pick_geometries(doc, args.geometry, args.set_name),
        pick_evidence(doc, args.evidence, args.no_evidence),
    )
    path = split_nodes([args.path]) if args.path else None
    dump = {}
    for i, g in enumerate(geos):
        states = oracle.enumerate_microstates(g, evidence)
        labels = [oracle.path_label(g, ms, path) if path else ms.label() for ms in states]
        if args.format == "json":
            dump[g.name] = {
                "nodes": list(g.nodes),
                "edges": [g.edge_label(j) for j in range(len(g.edges))],
                "microstates": [{"nodes": list(ms.nodes), "edges": list(ms.edges)} for ms in states],
            }
            continue
        if i:
            out.write("\n")
        if args.format == "tsv":
            out.write("\t".join(["geometry", *g.nodes, *(g.edge_label(j) for j in range(len(g.edges)))]) + "\n")
            for ms in states:
                out.write("\t".join([g.name, *ms.nodes, *ms.edges]) + "\n")
        else:
            order = " ".join(path) if path else " ".join(g.nodes) + " : " + " ".join(
                g.edge_label(j) for j in range(len(g.edges))
            )
            out.write(f"# {g.name}: {len(states)} microstates ({order})\n")
            for label in labels:
                out.write(label + "\n")
    if args.format == "json":
        out.write(dumps(dump) + "\n")
    return EXIT_OK


def cmd_check(args, out: TextIO) -> int:
    doc = load_document(args.model)
    results = run_checks(doc, args.cases, args.max_nodes, args.max_edges, args.seed)
    failed = False
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        out.write(f"{status} {r.name}: {r.cases} cases, {len(r.failures)} failures\n")
        if not r.ok:
            failed = True
            first = r.failures[0]
            out.write((first.dump() if hasattr(first, "dump") else str(first)) + "\n")
    return EXIT_MISMATCH if failed else EXIT_OK


def run_checks(
    doc: ModelDocument,
    cases: int = 200,
    max_nodes: int = 10,
    max_edges: int = 12,
    seed: int = 0,
    oracle_count=None,
    weighted_count=None,
) -> list[checks.SuiteResult]:
    rng = random.Random(seed)
    return [
        checks.document_checks(doc, oracle_count, weighted_count),
        checks.document_variants(doc, rng, cases, oracle_count, weighted_count),
        checks.document_order_invariance(doc, rng, max(1, cases // 5)),
        checks.engine_equivalence(rng, cases, max_nodes, max_edges, oracle_count, weighted_count),
        checks.order_invariance(rng, max(1, cases // 5), 5, min(max_nodes, 6), min(max_edges, 7)),
    ]


# --------------------------------------------------------------------------
# session
# --------------------------------------------------------------------------

SESSION_HELP = """commands:
  learn <node> = <state>       learn a node state
  learn geometry <name>        learn which geometry is real
  learn edge <u> <v> = <color> deduced
  show <query>                 a named query or an expression
  show table <nodes>           joint table over nodes
  log                          atoms learned so far, in order
  reset                        forget everything learned in this session
  quit
"""


class Session:
    """Line-oriented driver around :class:`inference.UpdateSession`."""

    def __init__(self, doc: ModelDocument, geometries, evidence: Evidence, query: str | None, engine: str, out: TextIO):
        self.doc = doc
        self.out = out
        self.active = query
        self.initial = inference.UpdateSession.start(geometries, evidence, engine)
        self.state = self.initial

    def say(self, text: str):
        self.out.write(text + "\n")

    def handle(self, line: str) -> bool:
        """Run one command; return False to stop."""
        line = line.split("#", 1)[0].strip()
        if not line:
            return True
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if word in ("quit", "exit"):
                return False
            if word == "help":
                self.out.write(SESSION_HELP)
            elif word == "learn":
                self.learn(rest)
            elif word == "show":
                if rest.startswith("table"):
                    self.show_table(split_nodes([rest[len("table"):]]))
                else:
                    self.show(rest)
            elif word == "log":
                if not self.state.log:
                    self.say("(nothing learned)")
                for i, atom in enumerate(self.state.log, 1):
                    self.say(f"{i}. {atom}")
            elif word == "reset":
                self.state = self.initial
                self.say("reset")
                self.show_active()
            else:
                self.say(f"error: unknown command {word!r} (try help)")
        except (AaoError, DSLSyntaxError) as exc:
            self.say(f"error: {exc}")
        return True

    def learn(self, text: str):
        if not text:
            raise UsageError("learn what?")
        if text.startswith("geometry") and "=" not in text:
            text = "geometry = " + text[len("geometry"):].strip()
        atom = parse_atom(text)
        before = self.state
        self.state = self.state.learn(atom)
        self.say(f"learned {atom}" if self.state is not before else f"already known: {atom}")
        self.show_active()

    def show_active(self):
        if self.active:
            self.show(self.active)

    def show(self, text: str):
        if not text:
            raise UsageError("show what?")
        name, query = pick_query(self.doc, text)
        answer = self.state.probability(query)
        if isinstance(answer, inference.GeometryConditionalTable):
            for g, p in answer.items():
                self.say(f"{name} [{g}] = {fmt_fraction(p)}")
        else:
            self.say(f"{name} [{self.state.geometry.name}] = {fmt_fraction(answer)}")

    def show_table(self, scope: list[str]):
        if not scope:
            raise UsageError("show table needs node names")
        answer = self.state.joint_table(scope)
        if isinstance(answer, inference.GeometryConditionalTable):
            for g, t in answer.items():
                self.out.write(render_table(g, t))
        else:
            self.out.write(render_table(self.state.geometry.name, answer))


def cmd_session(args, out: TextIO, stdin: TextIO) -> int:
    doc = load_document(args.model)
    geos = pick_geometries(doc, args.geometry, args.set_name)
    evidence = pick_evidence(doc, args.evidence, args.no_evidence)
    query = args.query
    if query is None and len(doc.queries) == 1:
        query = next(iter(doc.queries))
    if query is not None:
        pick_query(doc, query)
    session = Session(doc, geos, evidence, query, "weighted" if args.engine == "both" else args.engine, out)
    interactive = stdin.isatty()
    if interactive:
        out.write(SESSION_HELP)
    session.show_active()
    while True:
        if interactive:
            out.write("aao> ")
            out.flush()
        line = stdin.readline()
        if not line:
            break
        if not session.handle(line):
            break
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aao", description="Exact all-at-once inference over constraint-graph models."
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("eval", help="probability of a query, per geometry")
    add_common(p)
    p.add_argument("query", help="query name from the model, or an inline expression")

    p = sub.add_parser("table", help="joint table over a list of nodes")
    add_common(p)
    p.add_argument("nodes", nargs="+", help="scope nodes, comma or space separated")

    p = sub.add_parser("session", help="interactive (or piped) update session")
    add_common(p, formats=False)
    p.add_argument("--query", help="query re-evaluated after every learn")

    p = sub.add_parser("check", help="cross-check the two engines on randomized cases")
    p.add_argument("model")
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--max-nodes", type=int, default=10)
    p.add_argument("--max-edges", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("enumerate", help="list every compatible microstate")
    add_common(p)
    p.add_argument("--path", help="interleave nodes and link colors along this node path")
    return parser


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stdin: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "eval":
            return cmd_eval(args, out)
        if args.verb == "table":
            return cmd_table(args, out)
        if args.verb == "enumerate":
            return cmd_enumerate(args, out)
        if args.verb == "check":
            return cmd_check(args, out)
        return cmd_session(args, out, stdin or sys.stdin)
    except DSLSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ZeroSupportError as exc:
        print(f"zero support: {exc}", file=sys.stderr)
        return EXIT_ZERO
    except EngineMismatch as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (DSLSemanticError, AaoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
