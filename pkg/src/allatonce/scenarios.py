"""Ready-made models: the two fan geometries, their temporal reading, the
shoebox pair, and chains.

Each builder returns a :class:`ScenarioBundle` whose ``expected`` values
are tagged ``"stated"`` (a known reference value, reproduced exactly) or
``"derived"`` (computed by exhaustive enumeration and frozen).

The double-slit comparison is represented only by :func:`fig2_temporal`:
``fig2a`` plays the arrangement where the two branches stay separate and
``fig2b`` the one where they recombine. No photon-specific model exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Mapping

from .dsl import ModelDocument, parse_model
from .model import (
    NO_EVIDENCE,
    Evidence,
    Geometry,
    Law,
    NodeEquals,
    NodesSame,
    Predicate,
)
from .oracle import Microstate

SPATIAL = (("horizontal", "space"), ("vertical", "space"))
TEMPORAL = (("horizontal", "space"), ("vertical", "time"))

_FAN_COORDS = {"bottom": (0, 0), "left": (-1, 1), "right": (1, 1), "top": (0, 2)}


@dataclass(frozen=True)
class Expected:
    value: object
    origin: str  # "stated" or "derived"


@dataclass(frozen=True)
class ScenarioBundle:
    name: str
    geometries: tuple[Geometry, ...]
    evidence: Evidence = NO_EVIDENCE
    queries: Mapping[str, Predicate] = field(default_factory=dict)
    # (item, geometry name) -> Expected; items are query names, "Z" for the
    # partition function, or "table:a,b" for joint-table counts
    expected: Mapping[tuple[str, str], Expected] = field(default_factory=dict)

    @property
    def geometry(self) -> Geometry:
        if len(self.geometries) != 1:
            raise ValueError(f"scenario {self.name} has {len(self.geometries)} geometries")
        return self.geometries[0]

    def by_name(self, name: str) -> Geometry:
        return next(g for g in self.geometries if g.name == name)


def load_model(filename: str) -> ModelDocument:
    """Parse one of the shipped ``.aao`` files by file name."""
    text = resources.files("allatonce").joinpath("models", filename).read_text(encoding="utf-8")
    return parse_model(text)


def shipped_models() -> list[str]:
    return sorted(
        p.name for p in resources.files("allatonce").joinpath("models").iterdir()
        if p.name.endswith(".aao")
    )


def _fan(name: str, with_top: bool, axes) -> Geometry:
    nodes = ["bottom", "left", "right"]
    edges = [("bottom", "left"), ("bottom", "right")]
    if with_top:
        nodes.append("top")
        edges += [("left", "top"), ("right", "top")]
    coords = tuple((n, _FAN_COORDS[n]) for n in nodes)
    return Geometry(name, tuple(nodes), tuple(edges), axes=axes, coords=coords)


_SAME_LR = {"same_lr": NodesSame("left", "right")}
_BOTTOM_H = Evidence.of(bottom="H")


def _fig2a_expected(name):
    return {
        ("same_lr", name): Expected(Fraction(5, 9), "stated"),
        ("Z", name): Expected(9, "stated"),
        ("table:left,right", name): Expected((4, 2, 2, 1), "stated"),
    }


def _fig2b_expected(name):
    return {
        ("same_lr", name): Expected(Fraction(25, 41), "stated"),
        ("Z", name): Expected(41, "stated"),
        ("table:left,right", name): Expected((20, 8, 8, 5), "stated"),
        ("table:left,right,top", name): Expected((16, 4, 4, 4, 4, 4, 1, 4), "stated"),
    }


def fig2a(axes=SPATIAL) -> ScenarioBundle:
    g = _fan("fig2a", False, axes)
    return ScenarioBundle("fig2a", (g,), _BOTTOM_H, dict(_SAME_LR), _fig2a_expected("fig2a"))


def fig2b(axes=SPATIAL) -> ScenarioBundle:
    g = _fan("fig2b", True, axes)
    return ScenarioBundle("fig2b", (g,), _BOTTOM_H, dict(_SAME_LR), _fig2b_expected("fig2b"))


def fig2(axes=SPATIAL) -> ScenarioBundle:
    """Both fan geometries as one candidate set (geometry unknown)."""
    a, b = fig2a(axes), fig2b(axes)
    return ScenarioBundle(
        "fig2", a.geometries + b.geometries, _BOTTOM_H, dict(_SAME_LR),
        {**a.expected, **b.expected},
    )


def fig2_temporal() -> ScenarioBundle:
    """The fan geometries with the vertical axis labeled as time."""
    bundle = fig2(TEMPORAL)
    return ScenarioBundle(
        "fig2_temporal", bundle.geometries, bundle.evidence, bundle.queries, bundle.expected
    )


SHOE_LAW = Law.from_table(("L", "R"), ("pair",), {"pair": [("L", "R"), ("R", "L")]})


def shoebox() -> ScenarioBundle:
    g = Geometry("shoebox", ("box1", "box2"), (("box1", "box2"),), SHOE_LAW, axes=TEMPORAL)
    return ScenarioBundle(
        "shoebox",
        (g,),
        NO_EVIDENCE,
        {"box2_right": NodeEquals("box2", "R"), "box1_left": NodeEquals("box1", "L")},
        {
            ("info_state", "shoebox"): Expected(
                {"L1R2": Fraction(1, 2), "L2R1": Fraction(1, 2)}, "stated"
            ),
            ("box2_right", "shoebox"): Expected(Fraction(1, 2), "derived"),
        },
    )


def shoe_label(microstate: Microstate) -> str:
    """Label a shoebox microstate by which shoe sits in which box, e.g. ``L1R2``."""
    placed = sorted((shoe, box) for box, shoe in enumerate(microstate.nodes, start=1))
    return "".join(f"{shoe}{box}" for shoe, box in placed)


def chain(n: int, pinned: str | None = None) -> ScenarioBundle:
    """Path of ``n`` edges (nodes ``n0``..``n{n}``) under the default law.

    The pinned node (default ``n0``) is fixed to H; the query asks whether
    the two ends agree.
    """
    if n < 1:
        raise ValueError("a chain needs at least one edge")
    nodes = tuple(f"n{i}" for i in range(n + 1))
    g = Geometry(f"chain{n}", nodes, tuple(zip(nodes, nodes[1:])))
    pin = pinned or "n0"
    expected = {}
    if pin in ("n0", nodes[-1]):
        # ends-same with one end pinned: (3^n + 1) / (2 * 3^n)
        origin = "stated" if n == 1 else "derived"
        expected[("ends_same", g.name)] = Expected(Fraction(3**n + 1, 2 * 3**n), origin)
    elif n == 2 and pin == "n1":
        expected[("ends_same", g.name)] = Expected(Fraction(5, 9), "stated")
    return ScenarioBundle(
        g.name, (g,), Evidence.of(**{pin: "H"}),
        {"ends_same": NodesSame(nodes[0], nodes[-1])}, expected,
    )
