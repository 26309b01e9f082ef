"""Potential theory on finite metric graphs.

The Laplacian of a piecewise-linear function is the atomic signed measure
assigning to each point the sum of its outgoing slopes; with this
convention a local maximum carries negative mass and the total mass is
always zero.  Poisson problems are solved exactly over the rationals by
fraction-free elimination on the vertex system, Green functions are
normalized against the reference measure, and the dynamical canonical
metric on the circle is obtained by iterating the degree-m transfer
operator.

Loops and parallel edges are allowed; all edge lengths are finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .geometry import as_fraction


class GraphError(ValueError):
    pass


class MassBalanceError(ValueError):
    """Source measure does not have the required total mass."""


class SubharmonicityError(ValueError):
    pass


@dataclass(frozen=True)
class MetricGraph:
    vertex_ids: tuple
    edges: tuple  # ((u, v, length), ...)

    @staticmethod
    def build(vertex_ids, edges) -> "MetricGraph":
        vids = tuple(vertex_ids)
        if len(set(vids)) != len(vids):
            raise GraphError("duplicate vertex ids")
        es = []
        for u, v, ln in edges:
            ln = as_fraction(ln)
            if ln <= 0:
                raise GraphError("edge lengths must be positive")
            if u not in vids or v not in vids:
                raise GraphError("edge endpoint not a declared vertex")
            es.append((u, v, ln))
        g = MetricGraph(vids, tuple(es))
        if not g.is_connected():
            raise GraphError("graph must be connected")
        return g

    def is_connected(self) -> bool:
        if not self.vertex_ids:
            return False
        seen = {self.vertex_ids[0]}
        frontier = [self.vertex_ids[0]]
        adj = {v: set() for v in self.vertex_ids}
        for u, v, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        while frontier:
            x = frontier.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return len(seen) == len(self.vertex_ids)

    def edge_length(self, e: int) -> Fraction:
        return self.edges[e][2]

    def point_key(self, pt):
        """Canonical location key: ('v', id) for vertices, ('e', e, off) inside edges."""
        if isinstance(pt, tuple) and pt and pt[0] in ("v", "e"):
            if pt[0] == "e":
                return self.point_key(GraphPoint(pt[1], pt[2]))
            return pt
        e, off = pt.edge, pt.offset
        u, v, ln = self.edges[e]
        if off == 0:
            return ("v", u)
        if off == ln:
            return ("v", v)
        if not 0 < off < ln:
            raise GraphError("offset outside edge")
        return ("e", e, off)

    def some_point(self, key) -> "GraphPoint":
        """A GraphPoint representative for a location key."""
        if key[0] == "e":
            return GraphPoint(key[1], key[2])
        vid = key[1]
        for i, (u, v, ln) in enumerate(self.edges):
            if u == vid:
                return GraphPoint(i, Fraction(0))
            if v == vid:
                return GraphPoint(i, ln)
        raise GraphError(f"vertex {vid!r} is isolated")


@dataclass(frozen=True)
class GraphPoint:
    edge: int
    offset: Fraction

    @staticmethod
    def make(edge, offset) -> "GraphPoint":
        return GraphPoint(edge, as_fraction(offset))


def vertex_key(vid):
    return ("v", vid)


@dataclass(frozen=True)
class GraphPLFunction:
    """Continuous piecewise-linear function, stored per edge as (offset, value) breakpoints."""

    edge_values: tuple  # one tuple of (offset, value) pairs per edge, endpoints included

    @staticmethod
    def build(graph: MetricGraph, edge_values) -> "GraphPLFunction":
        evs = []
        for e, pairs in enumerate(edge_values):
            ln = graph.edge_length(e)
            pairs = tuple((as_fraction(o), as_fraction(y)) for o, y in pairs)
            if len(pairs) < 2 or pairs[0][0] != 0 or pairs[-1][0] != ln:
                raise GraphError(f"edge {e}: breakpoints must run from 0 to the edge length")
            if any(b[0] <= a[0] for a, b in zip(pairs, pairs[1:])):
                raise GraphError(f"edge {e}: breakpoints must be strictly increasing")
            evs.append(pairs)
        f = GraphPLFunction(tuple(evs))
        # continuity across shared vertices
        vals = {}
        for e, (u, v, ln) in enumerate(graph.edges):
            for vid, val in ((u, evs[e][0][1]), (v, evs[e][-1][1])):
                if vid in vals and vals[vid] != val:
                    raise GraphError(f"discontinuity at vertex {vid!r}")
                vals[vid] = val
        return f

    @staticmethod
    def constant(graph: MetricGraph, c) -> "GraphPLFunction":
        c = as_fraction(c)
        return GraphPLFunction(
            tuple(((Fraction(0), c), (ln, c)) for _, _, ln in graph.edges)
        )

    def vertex_value(self, graph: MetricGraph, vid) -> Fraction:
        for e, (u, v, ln) in enumerate(graph.edges):
            if u == vid:
                return self.edge_values[e][0][1]
            if v == vid:
                return self.edge_values[e][-1][1]
        raise GraphError(f"vertex {vid!r} is isolated")

    def eval(self, graph: MetricGraph, pt) -> Fraction:
        key = graph.point_key(pt)
        if key[0] == "v":
            return self.vertex_value(graph, key[1])
        _, e, off = key
        pairs = self.edge_values[e]
        for (o1, y1), (o2, y2) in zip(pairs, pairs[1:]):
            if o1 <= off <= o2:
                return y1 + (y2 - y1) * (off - o1) / (o2 - o1)
        raise GraphError("offset outside edge")

    def combine(self, other: "GraphPLFunction", a, b) -> "GraphPLFunction":
        """a * self + b * other, breakpoints merged per edge."""
        a, b = as_fraction(a), as_fraction(b)
        evs = []
        for p1, p2 in zip(self.edge_values, other.edge_values):
            offs = sorted({o for o, _ in p1} | {o for o, _ in p2})
            evs.append(
                tuple(
                    (o, a * _interp(p1, o) + b * _interp(p2, o)) for o in offs
                )
            )
        return GraphPLFunction(tuple(evs))

    def __add__(self, other):
        return self.combine(other, 1, 1)

    def __sub__(self, other):
        return self.combine(other, 1, -1)

    def scale(self, c) -> "GraphPLFunction":
        c = as_fraction(c)
        return GraphPLFunction(
            tuple(tuple((o, c * y) for o, y in pairs) for pairs in self.edge_values)
        )

    def add_constant(self, c) -> "GraphPLFunction":
        c = as_fraction(c)
        return GraphPLFunction(
            tuple(tuple((o, y + c) for o, y in pairs) for pairs in self.edge_values)
        )

    def simplify(self) -> "GraphPLFunction":
        """Drop breakpoints where the slope does not change."""
        evs = []
        for pairs in self.edge_values:
            kept = [pairs[0]]
            for i in range(1, len(pairs) - 1):
                (o0, y0), (o1, y1), (o2, y2) = kept[-1], pairs[i], pairs[i + 1]
                if (y1 - y0) * (o2 - o1) != (y2 - y1) * (o1 - o0):
                    kept.append(pairs[i])
            kept.append(pairs[-1])
            evs.append(tuple(kept))
        return GraphPLFunction(tuple(evs))


def _interp(pairs, off):
    for (o1, y1), (o2, y2) in zip(pairs, pairs[1:]):
        if o1 <= off <= o2:
            return y1 + (y2 - y1) * (off - o1) / (o2 - o1)
    raise GraphError("offset outside edge")


@dataclass(frozen=True)
class GraphMeasure:
    """Atomic signed measure; atoms keyed by canonical location."""

    atoms: tuple  # ((key, mass), ...) sorted by key

    @staticmethod
    def from_atoms(graph: MetricGraph, atoms) -> "GraphMeasure":
        acc = {}
        for loc, mass in atoms:
            key = graph.point_key(loc) if not _is_key(loc) else loc
            acc[key] = acc.get(key, Fraction(0)) + as_fraction(mass)
        cleaned = sorted(
            ((k, m) for k, m in acc.items() if m != 0), key=lambda km: repr(km[0])
        )
        return GraphMeasure(tuple(cleaned))

    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    def is_positive(self) -> bool:
        return all(m > 0 for _, m in self.atoms)

    def mass_at(self, graph: MetricGraph, loc) -> Fraction:
        key = graph.point_key(loc) if not _is_key(loc) else loc
        for k, m in self.atoms:
            if k == key:
                return m
        return Fraction(0)

    def scale(self, c) -> "GraphMeasure":
        c = as_fraction(c)
        return GraphMeasure(tuple((k, c * m) for k, m in self.atoms if c * m != 0))

    def add(self, graph: MetricGraph, other: "GraphMeasure") -> "GraphMeasure":
        return GraphMeasure.from_atoms(graph, list(self.atoms) + list(other.atoms))

    def sub(self, graph: MetricGraph, other: "GraphMeasure") -> "GraphMeasure":
        return self.add(graph, other.scale(-1))

    def integrate(self, graph: MetricGraph, f: GraphPLFunction) -> Fraction:
        return sum((m * f.eval(graph, k) for k, m in self.atoms), Fraction(0))


def _is_key(loc):
    return isinstance(loc, tuple) and loc and loc[0] in ("v", "e")


# ---------------------------------------------------------------------------
# Laplacian and Poisson solving


def laplacian(f: GraphPLFunction, graph: MetricGraph) -> GraphMeasure:
    """Atomic measure of outgoing-slope sums; total mass is exactly zero."""
    acc = {}

    def put(key, m):
        if m != 0:
            acc[key] = acc.get(key, Fraction(0)) + m

    for e, pairs in enumerate(f.edge_values):
        u, v, ln = graph.edges[e]
        slopes = [
            (y2 - y1) / (o2 - o1) for (o1, y1), (o2, y2) in zip(pairs, pairs[1:])
        ]
        put(("v", u), slopes[0])
        put(("v", v), -slopes[-1])
        for i in range(1, len(pairs) - 1):
            put(graph.point_key(GraphPoint(e, pairs[i][0])), slopes[i] - slopes[i - 1])
    cleaned = sorted(((k, m) for k, m in acc.items() if m != 0), key=lambda km: repr(km[0]))
    return GraphMeasure(tuple(cleaned))


def _refine(graph: MetricGraph, keys):
    """Insert interior edge points as nodes.

    Returns (nodes, node_index, per-edge chains) where each chain lists
    (node_a, node_b, length) segments covering the edge in order, and
    per-edge sorted interior offsets.
    """
    interior = {}
    for key in keys:
        if key[0] == "e":
            interior.setdefault(key[1], set()).add(key[2])
    nodes = [("v", vid) for vid in graph.vertex_ids]
    chains = []
    edge_offsets = []
    for e, (u, v, ln) in enumerate(graph.edges):
        offs = sorted(interior.get(e, ()))
        edge_offsets.append(offs)
        for o in offs:
            nodes.append(("e", e, o))
        stops = [("v", u)] + [("e", e, o) for o in offs] + [("v", v)]
        offs_full = [Fraction(0)] + offs + [ln]
        chains.append(
            [
                (a, b, o2 - o1)
                for a, b, o1, o2 in zip(stops, stops[1:], offs_full, offs_full[1:])
            ]
        )
    index = {k: i for i, k in enumerate(nodes)}
    return nodes, index, chains, edge_offsets


def _gauss_solve(A, b):
    """Exact dense Gaussian elimination over the rationals."""
    n = len(A)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise GraphError("singular linear system")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                c = M[r][col]
                M[r] = [x - c * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _assemble_and_solve(graph, rho_map, nodes, index, chains, fixed=None):
    """Solve sum_j w_ij (x_j - x_i) = rho_i at free nodes, exactly.

    fixed: dict key -> value of pinned nodes.  When fixed is None, the
    node 0 is pinned to zero (pure Neumann problem, rho must balance).
    """
    fixed = dict(fixed) if fixed else None
    if fixed is None:
        fixed = {nodes[0]: Fraction(0)}
        drop_equation_at = {nodes[0]}
    else:
        drop_equation_at = set(fixed)
    free = [k for k in nodes if k not in fixed]
    pos = {k: i for i, k in enumerate(free)}
    m = len(free)
    A = [[Fraction(0)] * m for _ in range(m)]
    b = [Fraction(0)] * m
    for k in free:
        b[pos[k]] = rho_map.get(k, Fraction(0))
    for chain in chains:
        for a, bb, ln in chain:
            w = 1 / ln
            for this, other in ((a, bb), (bb, a)):
                if this in drop_equation_at:
                    continue
                i = pos[this]
                A[i][i] -= w
                if other in fixed:
                    b[i] -= w * fixed[other]
                else:
                    A[i][pos[other]] += w
    x = _gauss_solve(A, b) if m else []
    out = dict(fixed)
    for k, val in zip(free, x):
        out[k] = val
    return out


def _function_from_node_values(graph, values, edge_offsets):
    evs = []
    for e, (u, v, ln) in enumerate(graph.edges):
        pairs = [(Fraction(0), values[("v", u)])]
        for o in edge_offsets[e]:
            pairs.append((o, values[("e", e, o)]))
        pairs.append((ln, values[("v", v)]))
        evs.append(tuple(pairs))
    return GraphPLFunction(tuple(evs)).simplify()


def solve_poisson(
    graph: MetricGraph, rho: GraphMeasure, normalization
) -> GraphPLFunction:
    """Exact f with laplacian(f) = rho and f(normalization) = 0."""
    if rho.total_mass() != 0:
        raise MassBalanceError("source measure must have total mass zero")
    norm_key = graph.point_key(normalization) if not _is_key(normalization) else normalization
    keys = [k for k, _ in rho.atoms] + [norm_key]
    nodes, index, chains, edge_offsets = _refine(graph, keys)
    rho_map = dict(rho.atoms)
    values = _assemble_and_solve(graph, rho_map, nodes, index, chains)
    f = _function_from_node_values(graph, values, edge_offsets)
    return f.add_constant(-f.eval(graph, norm_key))


def green(graph: MetricGraph, x, omega0: GraphMeasure) -> GraphPLFunction:
    """Potential with laplacian = d_L delta_x - omega0, normalized so that
    its integral against omega0 vanishes.  d_L is the mass of omega0."""
    d_L = omega0.total_mass()
    if d_L <= 0 or not omega0.is_positive():
        raise MassBalanceError("reference measure must be positive")
    x_key = graph.point_key(x) if not _is_key(x) else x
    rho = GraphMeasure.from_atoms(graph, [(x_key, d_L)]).sub(graph, omega0)
    f = solve_poisson(graph, rho, x_key)
    return f.add_constant(-omega0.integrate(graph, f) / d_L)


def green_value(graph: MetricGraph, x, y, omega0: GraphMeasure) -> Fraction:
    return green(graph, x, omega0).eval(graph, y)


def superpose(graph: MetricGraph, mu: GraphMeasure, omega0: GraphMeasure) -> GraphPLFunction:
    """d_L^{-1} sum over atoms x of mu of mass(x) * green(x); solves
    laplacian(f) = mu - omega0 with omega0-integral zero."""
    d_L = omega0.total_mass()
    if mu.total_mass() != d_L:
        raise MassBalanceError("mu must have the same mass as the reference measure")
    if not mu.is_positive():
        raise MassBalanceError("mu must be positive")
    out = GraphPLFunction.constant(graph, 0)
    for key, mass in mu.atoms:
        out = out + green(graph, key, omega0).scale(mass / d_L)
    return out.simplify()


def is_subharmonic(f: GraphPLFunction, graph: MetricGraph, omega0: GraphMeasure) -> bool:
    """True iff laplacian(f) + omega0 is a positive measure."""
    return laplacian(f, graph).add(graph, omega0).is_positive()


def ma_curve(f: GraphPLFunction, graph: MetricGraph, omega0: GraphMeasure) -> GraphMeasure:
    """omega0 + laplacian(f); requires subharmonicity, total mass = mass(omega0)."""
    out = laplacian(f, graph).add(graph, omega0)
    if not out.is_positive():
        raise SubharmonicityError("function is not subharmonic for the reference measure")
    return out


# ---------------------------------------------------------------------------
# dynamics on the circle


def circle_graph(length=1) -> MetricGraph:
    return MetricGraph.build([0], [(0, 0, length)])


def _compose_with_mult(f: GraphPLFunction, graph: MetricGraph, m: int) -> GraphPLFunction:
    """t -> f(m t mod 1) on the unit circle."""
    pairs = f.edge_values[0]
    offs = set()
    for j in range(m):
        for o, _ in pairs:
            offs.add((o + j) / m)
    offs.add(Fraction(0))
    offs.add(Fraction(1))
    out = []
    for o in sorted(offs):
        if o == 1:
            out.append((o, pairs[0][1]))
        else:
            t = (m * o) % 1
            out.append((o, _interp(pairs, t)))
    return GraphPLFunction((tuple(out),))


def canonical_metric(m: int, iterations: int, d_L=1):
    """Iterate the multiplication-by-m transfer operator on the unit circle.

    Returns (potential, measure): the potential relative to the reference
    metric whose curvature is d_L * delta at the base point, and its
    Monge-Ampere measure after the given number of iterations.  The
    measure equidistributes toward d_L times Lebesgue measure on the
    circle: after k steps it is uniform over the m^k-division points.
    """
    if m < 2:
        raise ValueError("multiplier m must be at least 2")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    d_L = as_fraction(d_L)
    graph = circle_graph()
    lam = Fraction(m * m)
    omega0 = GraphMeasure.from_atoms(graph, [(("v", 0), d_L)])
    omega1 = GraphMeasure.from_atoms(
        graph,
        [(GraphPoint(0, Fraction(j, m)), d_L / m) for j in range(m)],
    )
    # potential of one pullback step: laplacian = omega1 - omega0
    h0 = solve_poisson(graph, omega1.sub(graph, omega0), ("v", 0))
    u = GraphPLFunction.constant(graph, 0)
    for _ in range(iterations):
        u = (h0 + _compose_with_mult(u, graph, m).scale(1 / lam)).simplify()
    measure = laplacian(u, graph).add(graph, omega0)
    return u, measure


def arc_masses(measure: GraphMeasure, parts: int):
    """Masses of the arcs [j/parts, (j+1)/parts) of the unit circle."""
    out = [Fraction(0)] * parts
    for key, mass in measure.atoms:
        if key[0] == "v":
            t = Fraction(0)
        else:
            t = key[2] % 1
        out[int(t * parts)] += mass
    return out
