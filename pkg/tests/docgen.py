"""Random well-formed model documents for round-trip testing."""

import random

from allatonce.dsl import GeometryDecl, ModelDocument
from allatonce.model import (
    TRUE,
    And,
    EdgeIs,
    GeometryIs,
    NodeEquals,
    NodeIs,
    NodesSame,
    Not,
    Or,
)


def _query(rng, nodes, states, depth=3):
    roll = rng.random()
    if depth == 0 or roll < 0.35:
        pick = rng.random()
        if pick < 0.45:
            return NodesSame(rng.choice(nodes), rng.choice(nodes))
        if pick < 0.9:
            return NodeEquals(rng.choice(nodes), rng.choice(states))
        return TRUE
    if roll < 0.5:
        return Not(_query(rng, nodes, states, depth - 1))
    terms = tuple(_query(rng, nodes, states, depth - 1) for _ in range(rng.randint(2, 3)))
    return And(terms) if roll < 0.75 else Or(terms)


def _coord(rng):
    if rng.random() < 0.5:
        return rng.randint(-5, 5)
    return rng.choice([0.5, -1.25, 3.0, 1e-7, 2.5e20, rng.uniform(-10, 10)])


def random_document(rng: random.Random) -> ModelDocument:
    doc = ModelDocument()
    if rng.random() < 0.7:
        k = rng.randint(1, 4)
        states = tuple(f"S{i}" for i in range(k))
        colors = tuple(f"c{i}" for i in range(rng.randint(0, 3)))
        constraints = {}
        for c in colors:
            pairs = []
            for i in range(k):
                for j in range(i, k):
                    if rng.random() < 0.5:
                        pairs.append((states[i], states[j]))
                        if i != j:
                            pairs.append((states[j], states[i]))
            constraints[c] = tuple(pairs)
        doc.states, doc.colors, doc.constraints = states, colors, constraints
        doc.observable = rng.random() < 0.2
    else:
        states, colors = ("H", "T"), ("R", "G", "B")

    pool = [f"n{i}" for i in range(8)]
    for gi in range(rng.randint(0, 3)):
        nodes = tuple(rng.sample(pool, rng.randint(1, 5)))
        edges = ()
        if len(nodes) > 1:
            edges = tuple(tuple(rng.sample(nodes, 2)) for _ in range(rng.randint(0, 5)))
        axes = ()
        if rng.random() < 0.5:
            axes = tuple((a, rng.choice(("space", "time"))) for a in rng.sample(["x", "y", "vertical"], rng.randint(1, 3)))
        coords = tuple(
            (n, tuple(_coord(rng) for _ in range(rng.randint(1, 3))))
            for n in nodes if rng.random() < 0.3
        )
        doc.geometries[f"g{gi}"] = GeometryDecl(f"g{gi}", nodes, edges, rng.random() < 0.2, axes, coords)

    all_nodes = sorted({n for d in doc.geometries.values() for n in d.nodes})
    gnames = list(doc.geometries)
    if all_nodes:
        for ei in range(rng.randint(0, 2)):
            atoms = []
            for _ in range(rng.randint(0, 4)):
                roll = rng.random()
                if roll < 0.6:
                    atom = NodeIs(rng.choice(all_nodes), rng.choice(states))
                elif roll < 0.85 and colors:
                    ref = rng.randint(0, 4) if rng.random() < 0.3 else tuple(rng.sample(all_nodes, 2)) if len(all_nodes) > 1 else 0
                    atom = EdgeIs(ref, rng.choice(colors), rng.random() < 0.7)
                else:
                    atom = GeometryIs(rng.choice(gnames))
                if atom not in atoms:
                    atoms.append(atom)
            doc.evidence[f"e{ei}"] = tuple(atoms)
        for qi in range(rng.randint(0, 3)):
            doc.queries[f"q{qi}"] = _query(rng, all_nodes, states)
        for si in range(rng.randint(0, 2)):
            doc.sets[f"set{si}"] = tuple(rng.sample(gnames, rng.randint(1, len(gnames))))
    return doc
