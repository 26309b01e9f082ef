"""JSON encoding of the library's types.

All numbers are rational strings "p/q" ("p" when the denominator is 1),
so every file round-trips without loss.  Atom lists are emitted in the
canonical sorted order, which makes output byte-deterministic.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .curves import (
    GraphMeasure,
    GraphPLFunction,
    GraphPoint,
    MetricGraph,
    vertex_key,
)
from .geometry import (
    AffineFunctional,
    DiscreteMeasure,
    PLConvexFunction,
    Polytope,
    as_fraction,
)


class SchemaError(ValueError):
    """Input does not match the expected JSON layout."""


def rational_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise SchemaError(f"expected a rational string, got {s!r}")
    try:
        return as_fraction(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {s!r}: {exc}") from None


def point_to_json(v):
    return [rational_str(c) for c in v]


def point_from_json(obj):
    if not isinstance(obj, list) or not obj:
        raise SchemaError("a point must be a nonempty array of rationals")
    return tuple(parse_rational(c) for c in obj)


# ---------------------------------------------------------------------------
# toric side


def polytope_to_json(p: Polytope):
    return {"vertices": [point_to_json(v) for v in p.vertices]}


def polytope_from_json(obj) -> Polytope:
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise SchemaError('polytope must be {"vertices": [...]}')
    return Polytope.from_points([point_from_json(v) for v in obj["vertices"]])


def pl_function_to_json(g: PLConvexFunction):
    pieces = sorted(g.pieces, key=lambda f: (f.slope, f.intercept))
    return {
        "pieces": [
            {"slope": point_to_json(f.slope), "intercept": rational_str(f.intercept)}
            for f in pieces
        ]
    }


def pl_function_from_json(obj) -> PLConvexFunction:
    if not isinstance(obj, dict) or "pieces" not in obj:
        raise SchemaError('function must be {"pieces": [...]}')
    pieces = []
    for item in obj["pieces"]:
        if not isinstance(item, dict) or "slope" not in item or "intercept" not in item:
            raise SchemaError('each piece must be {"slope": [...], "intercept": "..."}')
        pieces.append(
            AffineFunctional(point_from_json(item["slope"]), parse_rational(item["intercept"]))
        )
    if not pieces:
        raise SchemaError("function needs at least one piece")
    return PLConvexFunction.from_pieces(pieces)


def measure_to_json(mu: DiscreteMeasure):
    return {
        "atoms": [
            {"point": point_to_json(p), "mass": rational_str(m)} for p, m in mu.atoms
        ]
    }


def measure_from_json(obj) -> DiscreteMeasure:
    if not isinstance(obj, dict) or "atoms" not in obj:
        raise SchemaError('measure must be {"atoms": [...]}')
    atoms = []
    for item in obj["atoms"]:
        if not isinstance(item, dict) or "point" not in item or "mass" not in item:
            raise SchemaError('each atom must be {"point": [...], "mass": "..."}')
        atoms.append((point_from_json(item["point"]), parse_rational(item["mass"])))
    return DiscreteMeasure.from_atoms(atoms)


def toric_ma_result_to_json(result):
    return {
        "ma_real": measure_to_json(result.measure_NR),
        "ma_berkovich": {
            "atoms": [
                {"point": point_to_json(mp.v), "mass": rational_str(m)}
                for mp, m in result.measure_an
            ]
        },
        "degree": rational_str(result.degree),
    }


def solve_report_to_json(report):
    return {
        "solution": pl_function_to_json(report.solution),
        "residual": [
            {"point": point_to_json(p), "error": rational_str(Fraction(e).limit_denominator(10**15))}
            for p, e in report.residual
        ],
        "polished_residual": [
            {"point": point_to_json(p), "error": rational_str(e)}
            for p, e in report.polished_residual
        ],
        "iterations": report.iterations,
        "converged": report.converged,
    }


# ---------------------------------------------------------------------------
# curve side


def graph_to_json(graph: MetricGraph):
    return {
        "vertices": list(graph.vertex_ids),
        "edges": [
            {"ends": [u, v], "length": rational_str(ln)} for u, v, ln in graph.edges
        ],
    }


def graph_from_json(obj) -> MetricGraph:
    if not isinstance(obj, dict) or "vertices" not in obj or "edges" not in obj:
        raise SchemaError('graph must be {"vertices": [...], "edges": [...]}')
    edges = []
    for item in obj["edges"]:
        if not isinstance(item, dict) or "ends" not in item or "length" not in item:
            raise SchemaError('each edge must be {"ends": [i, j], "length": "p/q"}')
        u, v = item["ends"]
        edges.append((u, v, parse_rational(item["length"])))
    return MetricGraph.build(list(obj["vertices"]), edges)


def graph_point_to_json(graph, loc):
    if isinstance(loc, tuple) and loc and loc[0] in ("v", "e"):
        key = loc
    else:
        key = graph.point_key(loc)
    if key[0] == "v":
        return {"vertex": key[1]}
    return {"edge": key[1], "offset": rational_str(key[2])}


def graph_point_from_json(obj):
    if isinstance(obj, dict) and "vertex" in obj:
        return vertex_key(obj["vertex"])
    if isinstance(obj, dict) and "edge" in obj and "offset" in obj:
        return GraphPoint(obj["edge"], parse_rational(obj["offset"]))
    raise SchemaError('graph point must be {"vertex": id} or {"edge": k, "offset": "p/q"}')


def graph_function_to_json(f: GraphPLFunction):
    return {
        "edges": [
            [[rational_str(o), rational_str(y)] for o, y in pairs]
            for pairs in f.edge_values
        ]
    }


def graph_function_from_json(obj, graph: MetricGraph) -> GraphPLFunction:
    if not isinstance(obj, dict) or "edges" not in obj:
        raise SchemaError('graph function must be {"edges": [...]}')
    values = []
    for pairs in obj["edges"]:
        values.append(tuple((parse_rational(o), parse_rational(y)) for o, y in pairs))
    return GraphPLFunction.build(graph, values)


def graph_measure_to_json(graph, mu: GraphMeasure):
    return {
        "atoms": [
            {"point": graph_point_to_json(graph, key), "mass": rational_str(m)}
            for key, m in mu.atoms
        ]
    }


def graph_measure_from_json(obj, graph: MetricGraph) -> GraphMeasure:
    if not isinstance(obj, dict) or "atoms" not in obj:
        raise SchemaError('graph measure must be {"atoms": [...]}')
    atoms = []
    for item in obj["atoms"]:
        if not isinstance(item, dict) or "point" not in item or "mass" not in item:
            raise SchemaError('each atom must be {"point": ..., "mass": "..."}')
        atoms.append((graph_point_from_json(item["point"]), parse_rational(item["mass"])))
    return GraphMeasure.from_atoms(graph, atoms)


# ---------------------------------------------------------------------------
# file helpers


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_path(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
