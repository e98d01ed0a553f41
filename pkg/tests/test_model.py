import pytest
from hypothesis import given, strategies as st

from allatonce import (
    DEFAULT_LAW,
    ContradictionError,
    EdgeIs,
    Evidence,
    EvidenceError,
    Geometry,
    GeometryError,
    GeometryIs,
    Law,
    NodeEquals,
    NodeIs,
    NodesSame,
    Not,
    UnknownNodeError,
    build_geometry,
    evaluate_predicate,
    validate_evidence,
)
from allatonce.oracle import enumerate_microstates

FIG2A_DESC = {
    "name": "fig2a",
    "nodes": ["bottom", "left", "right"],
    "edges": [("bottom", "left"), ("bottom", "right")],
    "states": ["H", "T"],
    "colors": ["R", "G", "B"],
    "constraints": {
        "R": [("H", "T"), ("T", "H")],
        "G": [("H", "H"), ("T", "T")],
        "B": [("H", "H"), ("T", "T")],
    },
}


class TestBuildGeometry:
    def test_fig2a(self):
        g = build_geometry(FIG2A_DESC)
        assert len(g.edges) == 2
        assert g.nodes == ("bottom", "left", "right")
        assert g.law == DEFAULT_LAW

    def test_isolated_node(self):
        g = build_geometry({"name": "dot", "nodes": ["a"], "edges": []})
        assert g.nodes == ("a",) and g.edges == ()

    def test_dangling_endpoint(self):
        desc = dict(FIG2A_DESC, edges=[("topp", "left")])
        with pytest.raises(GeometryError, match="topp"):
            build_geometry(desc)

    def test_self_loop(self):
        with pytest.raises(GeometryError, match="self-loop"):
            build_geometry(dict(FIG2A_DESC, edges=[("left", "left")]))

    def test_duplicate_node(self):
        with pytest.raises(GeometryError, match="duplicate"):
            build_geometry(dict(FIG2A_DESC, nodes=["left", "left"], edges=[]))

    def test_incomplete_constraint_table(self):
        constraints = {"R": [("H", "T"), ("T", "H")], "G": [("H", "H")]}
        with pytest.raises(GeometryError, match="incomplete"):
            build_geometry(dict(FIG2A_DESC, constraints=constraints))

    def test_asymmetric_law_needs_directed_edges(self):
        desc = dict(FIG2A_DESC, constraints={"R": [("H", "T")], "G": [], "B": []})
        with pytest.raises(GeometryError, match="asymmetric"):
            build_geometry(desc)
        g = build_geometry(dict(desc, directed=True))
        assert g.directed

    def test_parallel_edges_are_separate_variables(self):
        g = Geometry("pp", ("a", "b"), (("a", "b"), ("b", "a")))
        assert len(enumerate_microstates(g)) == 2 * 2 * 2 + 2 * 1 * 1

    def test_bad_axis_label(self):
        with pytest.raises(GeometryError):
            Geometry("g", ("a",), axes=(("vertical", "sideways"),))

    def test_canonical_order_is_declaration_order(self):
        g1, g2 = build_geometry(FIG2A_DESC), build_geometry(FIG2A_DESC)
        assert g1 == g2
        assert enumerate_microstates(g1) == enumerate_microstates(g2)


def test_default_law_is_symmetric():
    law = DEFAULT_LAW
    for c in law.colors:
        for a in law.states:
            for b in law.states:
                assert law.allows(c, a, b) == law.allows(c, b, a)


def test_empty_color_alphabet_is_allowed():
    law = Law.from_table(("H", "T"), (), {})
    assert law.colors == ()


def test_empty_state_alphabet_rejected():
    with pytest.raises(GeometryError):
        Law.from_table((), ("R",), {"R": []})


class TestValidateEvidence:
    def test_ok(self, fig2a):
        validate_evidence(fig2a, Evidence.of(bottom="H"))

    def test_direct_clash(self, fig2a):
        with pytest.raises(ContradictionError):
            validate_evidence(fig2a, Evidence.of(NodeIs("bottom", "H"), NodeIs("bottom", "T")))

    def test_edge_atom_needs_deduction_flag(self, fig2a):
        with pytest.raises(EvidenceError, match="unobservable"):
            validate_evidence(fig2a, Evidence.of(EdgeIs(("bottom", "left"), "R")))
        validate_evidence(fig2a, Evidence.of(EdgeIs(("bottom", "left"), "R", deduced=True)))

    def test_observable_colors_lift_the_flag(self):
        law = Law.from_table(("H", "T"), ("R",), {"R": [("H", "T"), ("T", "H")]}, observable=True)
        g = Geometry("g", ("a", "b"), (("a", "b"),), law)
        validate_evidence(g, Evidence.of(EdgeIs(("a", "b"), "R")))

    def test_unknown_node_and_state(self, fig2a):
        with pytest.raises(EvidenceError) as info:
            validate_evidence(fig2a, Evidence.of(NodeIs("top", "H"), NodeIs("left", "X")))
        assert len(info.value.problems) == 2

    def test_edge_by_pair_and_index_clash(self, fig2a):
        ev = Evidence.of(EdgeIs(0, "G", True), EdgeIs(("left", "bottom"), "B", True))
        with pytest.raises(ContradictionError):
            validate_evidence(fig2a, ev)

    def test_other_geometry(self, fig2a):
        with pytest.raises(ContradictionError):
            validate_evidence(fig2a, Evidence.of(GeometryIs("fig2b")))
        validate_evidence(fig2a, Evidence.of(GeometryIs("fig2a")))

    def test_ambiguous_parallel_edge(self):
        g = Geometry("pp", ("a", "b"), (("a", "b"), ("a", "b")))
        with pytest.raises(EvidenceError, match="ambiguous"):
            validate_evidence(g, Evidence.of(EdgeIs(("a", "b"), "R", True)))
        validate_evidence(g, Evidence.of(EdgeIs(1, "R", True)))

    def test_evidence_is_a_set(self):
        a = Evidence.of(NodeIs("x", "H"), NodeIs("y", "T"))
        b = Evidence.of(NodeIs("y", "T"), NodeIs("x", "H"), NodeIs("x", "H"))
        assert a == b and len(b) == 2


class TestPredicates:
    def test_same(self):
        assert evaluate_predicate(NodesSame("left", "right"), {"left": "H", "right": "H"})
        assert not evaluate_predicate(NodesSame("left", "right"), {"left": "H", "right": "T"})

    def test_not(self):
        assert evaluate_predicate(Not(NodeEquals("top", "H")), {"top": "T", "left": "H"})

    def test_unknown_node(self):
        with pytest.raises(UnknownNodeError):
            evaluate_predicate(NodeEquals("top", "H"), {"left": "H"})

    def test_operators(self):
        p = NodeEquals("a", "H") & ~NodesSame("a", "b") | NodeEquals("b", "X")
        assert p.evaluate({"a": "H", "b": "T"})
        assert not p.evaluate({"a": "H", "b": "H"})

    @given(st.dictionaries(st.sampled_from("abcd"), st.sampled_from("HT"), min_size=4, max_size=4))
    def test_compiled_matches_evaluate(self, assignment):
        g = Geometry("g", tuple("abcd"))
        p = (NodesSame("a", "b") & ~NodeEquals("c", "T")) | NodeEquals("d", "H")
        states = tuple(g.law.states.index(assignment[n]) for n in g.nodes)
        assert p.compile(g)(states) == p.evaluate(assignment)


def test_axes_are_metadata_only(fig2a):
    temporal = fig2a.with_axes(vertical="time")
    assert temporal.is_temporal and not fig2a.is_temporal
    assert enumerate_microstates(temporal) == enumerate_microstates(fig2a)
