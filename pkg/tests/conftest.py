import random
from fractions import Fraction

import pytest

from plma.curves import GraphMeasure, GraphPoint, MetricGraph
from plma.geometry import AffineFunctional, PLConvexFunction, Polytope


def interval(a=0, b=1):
    return Polytope.from_points([(Fraction(a),), (Fraction(b),)])


def unit_square():
    return Polytope.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


def simplex2():
    return Polytope.from_points([(0, 0), (1, 0), (0, 1)])


def hexagon():
    return Polytope.from_points([(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)])


ACCEPTANCE_POLYTOPES = [interval(), unit_square(), simplex2(), hexagon()]


def rnd_frac(rng, den=6, lo=-2, hi=2):
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_admissible(rng, delta, extra=4):
    """Random admissible function: all vertex slopes plus interior slopes."""
    n = delta.dim
    pieces = [AffineFunctional(v, rnd_frac(rng)) for v in delta.vertices]
    for _ in range(extra):
        ws = [rng.randint(0, 3) for _ in delta.vertices]
        if sum(ws) == 0:
            continue
        s = sum(ws)
        sl = tuple(
            sum(Fraction(w) * vv[i] for w, vv in zip(ws, delta.vertices)) / s
            for i in range(n)
        )
        pieces.append(AffineFunctional(sl, rnd_frac(rng)))
    return PLConvexFunction.from_pieces(pieces)


def random_graph(rng, max_extra_edges=4):
    """Connected graph on 2..8 vertices with rational edge lengths."""
    nv = rng.randint(2, 8)
    edges = []
    for v in range(1, nv):
        u = rng.randint(0, v - 1)
        edges.append((u, v, Fraction(rng.randint(1, 6), rng.randint(1, 3))))
    for _ in range(rng.randint(0, max_extra_edges)):
        if len(edges) >= 12:
            break
        u, v = rng.randint(0, nv - 1), rng.randint(0, nv - 1)
        edges.append((u, v, Fraction(rng.randint(1, 6), rng.randint(1, 3))))
    return MetricGraph.build(list(range(nv)), edges)


def random_graph_point(rng, graph):
    e = rng.randrange(len(graph.edges))
    ln = graph.edge_length(e)
    return GraphPoint(e, ln * Fraction(rng.randint(0, 4), 4))


def random_positive_measure(rng, graph, total, natoms=3):
    """Positive atomic measure with the given total mass."""
    pts = [graph.point_key(random_graph_point(rng, graph)) for _ in range(natoms)]
    pts = sorted(set(pts), key=repr)
    cuts = sorted(rng.randint(1, 11) for _ in range(len(pts) - 1))
    bounds = [0] + cuts + [12]
    atoms = [
        (p, total * Fraction(b2 - b1, 12)) for p, b1, b2 in zip(pts, bounds, bounds[1:])
    ]
    return GraphMeasure.from_atoms(graph, atoms)


@pytest.fixture
def rng():
    return random.Random(1729)
