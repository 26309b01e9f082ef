"""Exact rational convex geometry.

Polytopes in V-representation, finite-max-of-affine convex functions,
subdifferentials, volumes, and Legendre-type transforms over a polytope.
All coordinates are `fractions.Fraction` and every predicate is exact;
no floating point enters this module.

Ambient dimensions 1 and 2 are supported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction


class DimensionError(ValueError):
    """Raised when ambient dimensions disagree or are unsupported."""


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floating-point input rejected; pass Fraction/int/str")
    return Fraction(x)


def as_point(p) -> tuple:
    return tuple(as_fraction(c) for c in p)


def dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vscale(c, a):
    return tuple(c * x for x in a)


def cross2(a, b) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def _check_dim(n: int):
    if n not in (1, 2):
        raise DimensionError(f"ambient dimension {n} not supported (use 1 or 2)")


def _hull2(points):
    """Extreme points of a 2-D point set, in counterclockwise boundary order.

    Andrew's monotone chain with strict turns, so collinear points are
    dropped.  Collapses to 1 or 2 points for degenerate inputs.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross2(vsub(out[-1], out[-2]), vsub(p, out[-2])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    ring = lower[:-1] + upper[:-1]
    if len(ring) < 3:  # all collinear
        return [pts[0], pts[-1]]
    return ring


@dataclass(frozen=True)
class Polytope:
    """Rational polytope, canonically the lex-sorted tuple of extreme points."""

    dim: int
    vertices: tuple

    @staticmethod
    def from_points(points) -> "Polytope":
        pts = [as_point(p) for p in points]
        if not pts:
            raise ValueError("polytope needs at least one point")
        n = len(pts[0])
        _check_dim(n)
        if any(len(p) != n for p in pts):
            raise DimensionError("points of mixed dimension")
        if n == 1:
            lo, hi = min(pts), max(pts)
            hull = [lo] if lo == hi else [lo, hi]
        else:
            hull = _hull2(pts)
        return Polytope(n, tuple(sorted(set(hull))))

    def ring(self):
        """Boundary vertices in counterclockwise order (2-D)."""
        if self.dim == 1:
            return list(self.vertices)
        return _hull2(self.vertices)

    def volume(self) -> Fraction:
        if self.dim == 1:
            if len(self.vertices) < 2:
                return Fraction(0)
            return self.vertices[-1][0] - self.vertices[0][0]
        ring = self.ring()
        if len(ring) < 3:
            return Fraction(0)
        area2 = Fraction(0)
        for a, b in zip(ring, ring[1:] + ring[:1]):
            area2 += cross2(a, b)
        return area2 / 2

    def is_full_dimensional(self) -> bool:
        return self.volume() > 0

    def contains(self, p) -> bool:
        p = as_point(p)
        if len(p) != self.dim:
            raise DimensionError("point/polytope dimension mismatch")
        if self.dim == 1:
            return self.vertices[0][0] <= p[0] <= self.vertices[-1][0]
        ring = self.ring()
        if len(ring) == 1:
            return p == ring[0]
        if len(ring) == 2:
            a, b = ring
            if cross2(vsub(b, a), vsub(p, a)) != 0:
                return False
            t = vsub(p, a)
            d = vsub(b, a)
            # p = a + s*d with s in [0,1]
            s = t[0] / d[0] if d[0] != 0 else t[1] / d[1]
            return 0 <= s <= 1
        for a, b in zip(ring, ring[1:] + ring[:1]):
            if cross2(vsub(b, a), vsub(p, a)) < 0:
                return False
        return True

    def translate(self, t) -> "Polytope":
        t = as_point(t)
        return Polytope(self.dim, tuple(sorted(vadd(v, t) for v in self.vertices)))

    def dilate(self, c) -> "Polytope":
        c = as_fraction(c)
        if c <= 0:
            raise ValueError("dilation factor must be positive")
        return Polytope(self.dim, tuple(sorted(vscale(c, v) for v in self.vertices)))


@dataclass(frozen=True)
class AffineFunctional:
    """u . v - intercept, with slope u in the dual space."""

    slope: tuple
    intercept: Fraction

    @staticmethod
    def make(slope, intercept) -> "AffineFunctional":
        return AffineFunctional(as_point(slope), as_fraction(intercept))

    def value(self, v) -> Fraction:
        return dot(self.slope, v) - self.intercept


def _strict_feasible(constraints, n: int) -> bool:
    """Exact feasibility of the open system  a . v > b  (Fourier-Motzkin)."""
    if n == 1:
        lows, highs = [], []
        for a, b in constraints:
            if a[0] > 0:
                lows.append(b / a[0])
            elif a[0] < 0:
                highs.append(b / a[0])
            elif b >= 0:
                return False
        if not lows or not highs:
            return True
        return max(lows) < min(highs)
    # n == 2: eliminate the second coordinate.
    lows, highs, ones = [], [], []  # bounds as affine functions c0 + c1*v1
    for a, b in constraints:
        if a[1] > 0:
            lows.append((b / a[1], -a[0] / a[1]))  # v2 > c0 + c1 v1
        elif a[1] < 0:
            highs.append((b / a[1], -a[0] / a[1]))  # v2 < c0 + c1 v1
        else:
            ones.append(((a[0],), b))
    for (l0, l1), (h0, h1) in itertools.product(lows, highs):
        # h0 + h1 v1 > l0 + l1 v1
        ones.append(((h1 - l1,), l0 - h0))
    return _strict_feasible(ones, 1)


def _essential_mask(pieces):
    """pieces[i] survives iff it is the strict maximum somewhere."""
    mask = []
    for i, pi in enumerate(pieces):
        cons = [
            (vsub(pi.slope, pj.slope), pi.intercept - pj.intercept)
            for j, pj in enumerate(pieces)
            if j != i
        ]
        mask.append(_strict_feasible(cons, len(pi.slope)))
    return mask


@dataclass(frozen=True)
class PLConvexFunction:
    """Finite max of affine functionals; convex and piecewise linear."""

    pieces: tuple

    @staticmethod
    def from_pieces(pieces, prune: bool = True) -> "PLConvexFunction":
        ps = [p if isinstance(p, AffineFunctional) else AffineFunctional.make(*p) for p in pieces]
        if not ps:
            raise ValueError("need at least one affine piece")
        n = len(ps[0].slope)
        _check_dim(n)
        if any(len(p.slope) != n for p in ps):
            raise DimensionError("pieces of mixed dimension")
        # Same slope: only the lowest intercept (largest value) can matter.
        best = {}
        for p in ps:
            if p.slope not in best or p.intercept < best[p.slope]:
                best[p.slope] = p.intercept
        ps = [AffineFunctional(s, c) for s, c in best.items()]
        if prune and len(ps) > 1:
            mask = _essential_mask(ps)
            ps = [p for p, keep in zip(ps, mask) if keep]
        ps.sort(key=lambda p: (p.slope, p.intercept))
        return PLConvexFunction(tuple(ps))

    @property
    def dim(self) -> int:
        return len(self.pieces[0].slope)

    @property
    def slopes(self):
        return tuple(p.slope for p in self.pieces)

    def __call__(self, v) -> Fraction:
        v = as_point(v)
        if len(v) != self.dim:
            raise DimensionError("argument dimension mismatch")
        return max(p.value(v) for p in self.pieces)

    def active_pieces(self, v):
        v = as_point(v)
        m = self(v)
        return [p for p in self.pieces if p.value(v) == m]

    def shift(self, c) -> "PLConvexFunction":
        """Pointwise g + c."""
        c = as_fraction(c)
        return PLConvexFunction(
            tuple(AffineFunctional(p.slope, p.intercept - c) for p in self.pieces)
        )

    def translate(self, t) -> "PLConvexFunction":
        """g(. - t)."""
        t = as_point(t)
        return PLConvexFunction.from_pieces(
            [AffineFunctional(p.slope, p.intercept + dot(p.slope, t)) for p in self.pieces],
            prune=False,
        )

    def __add__(self, other: "PLConvexFunction") -> "PLConvexFunction":
        if self.dim != other.dim:
            raise DimensionError("dimension mismatch in sum")
        n = self.dim
        out = []
        for i, pi in enumerate(self.pieces):
            cons_i = [
                (vsub(pi.slope, pk.slope), pi.intercept - pk.intercept)
                for k, pk in enumerate(self.pieces)
                if k != i
            ]
            for j, pj in enumerate(other.pieces):
                cons = cons_i + [
                    (vsub(pj.slope, pl.slope), pj.intercept - pl.intercept)
                    for l, pl in enumerate(other.pieces)
                    if l != j
                ]
                # The sum piece matters only where both summands are strictly
                # active at once.
                if _strict_feasible(cons, n):
                    out.append(
                        AffineFunctional(vadd(pi.slope, pj.slope), pi.intercept + pj.intercept)
                    )
        return PLConvexFunction.from_pieces(out, prune=False)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atomic measure with rational masses; atoms lex-sorted, zero masses dropped."""

    atoms: tuple  # ((point, mass), ...)

    @staticmethod
    def from_atoms(atoms) -> "DiscreteMeasure":
        acc = {}
        for loc, mass in atoms:
            loc = as_point(loc)
            acc[loc] = acc.get(loc, Fraction(0)) + as_fraction(mass)
        cleaned = sorted((loc, m) for loc, m in acc.items() if m != 0)
        return DiscreteMeasure(tuple(cleaned))

    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    def is_positive(self) -> bool:
        return all(m > 0 for _, m in self.atoms)

    def mass_at(self, loc) -> Fraction:
        loc = as_point(loc)
        for p, m in self.atoms:
            if p == loc:
                return m
        return Fraction(0)

    def scale(self, c) -> "DiscreteMeasure":
        c = as_fraction(c)
        return DiscreteMeasure.from_atoms([(p, c * m) for p, m in self.atoms])

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure.from_atoms(list(self.atoms) + list(other.atoms))

    def __sub__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return self + other.scale(-1)

    def integrate(self, fn) -> Fraction:
        """Pair against a pointwise-evaluable function (exact)."""
        return sum((m * fn(p) for p, m in self.atoms), Fraction(0))


# ---------------------------------------------------------------------------
# operations


def support_function(delta: Polytope) -> PLConvexFunction:
    """max over vertices u of delta of <u, .>."""
    return PLConvexFunction.from_pieces(
        [AffineFunctional(u, Fraction(0)) for u in delta.vertices], prune=False
    )


def evaluate(g: PLConvexFunction, v) -> Fraction:
    return g(v)


def is_admissible(g: PLConvexFunction, delta: Polytope) -> bool:
    """True iff all slopes of g lie in delta and every vertex of delta is a slope.

    For piecewise-linear g this is equivalent to g - support_function(delta)
    being bounded on the whole space.
    """
    if g.dim != delta.dim:
        raise DimensionError("dimension mismatch")
    slopes = set(g.slopes)
    if not all(delta.contains(s) for s in slopes):
        return False
    return all(v in slopes for v in delta.vertices)


def subdifferential(g: PLConvexFunction, v) -> Polytope:
    """Convex hull of the slopes active at v."""
    return Polytope.from_points([p.slope for p in g.active_pieces(v)])


def polytope_volume(p: Polytope) -> Fraction:
    return p.volume()


def _solve2(a1, b1, a2, b2):
    """Solve the 2x2 system a1.v = b1, a2.v = b2; None if singular."""
    det = cross2(a1, a2)
    if det == 0:
        return None
    x = (b1 * a2[1] - b2 * a1[1]) / det
    y = (a1[0] * b2 - a2[0] * b1) / det
    return (x, y)


def _spans(slopes, n: int) -> bool:
    """Do the given slopes affinely span R^n?"""
    if n == 1:
        return len(set(slopes)) >= 2
    base = slopes[0]
    dirs = [vsub(s, base) for s in slopes[1:]]
    return any(cross2(d1, d2) != 0 for d1, d2 in itertools.combinations(dirs, 2))


def breakpoints(g: PLConvexFunction):
    """Vertices of the linearity subdivision induced by g.

    These are the points where at least dim+1 pieces are active with
    affinely spanning slopes; they are the only possible atoms of the
    real Monge-Ampere measure of g.
    """
    n = g.dim
    found = set()
    if n == 1:
        for pi, pj in itertools.combinations(g.pieces, 2):
            if pi.slope == pj.slope:
                continue
            v = ((pi.intercept - pj.intercept) / (pi.slope[0] - pj.slope[0]),)
            if pi.value(v) == g(v) and _spans([p.slope for p in g.active_pieces(v)], 1):
                found.add(v)
    else:
        for pi, pj, pk in itertools.combinations(g.pieces, 3):
            v = _solve2(
                vsub(pi.slope, pj.slope),
                pi.intercept - pj.intercept,
                vsub(pi.slope, pk.slope),
                pi.intercept - pk.intercept,
            )
            if v is None or v in found:
                continue
            if pi.value(v) == g(v) and _spans([p.slope for p in g.active_pieces(v)], 2):
                found.add(v)
    return sorted(found)


def dual_transform(F: PLConvexFunction, delta: Polytope) -> PLConvexFunction:
    """h(v) = max over u in delta of (<u, v> - F(u)).

    The Legendre-type transform of F restricted to delta.  The maximum,
    for each v, is attained at a vertex of the subdivision of delta
    induced by the linearity regions of F, so h is the max-affine
    function with one piece (u, F(u)) per such vertex.
    """
    if F.dim != delta.dim:
        raise DimensionError("dimension mismatch")
    n = delta.dim
    cands = set(delta.vertices)
    ps = F.pieces
    if n == 1:
        a, b = delta.vertices[0][0], delta.vertices[-1][0]
        for pi, pj in itertools.combinations(ps, 2):
            if pi.slope == pj.slope:
                continue
            u = (pi.intercept - pj.intercept) / (pi.slope[0] - pj.slope[0])
            if a <= u <= b and pi.value((u,)) == F((u,)):
                cands.add((u,))
    else:
        ring = delta.ring()
        for pi, pj, pk in itertools.combinations(ps, 3):
            u = _solve2(
                vsub(pi.slope, pj.slope),
                pi.intercept - pj.intercept,
                vsub(pi.slope, pk.slope),
                pi.intercept - pk.intercept,
            )
            if u is not None and pi.value(u) == F(u) and delta.contains(u):
                cands.add(u)
        if len(ring) >= 2:
            edges = list(zip(ring, ring[1:] + ring[:1])) if len(ring) >= 3 else [tuple(ring)]
            for pi, pj in itertools.combinations(ps, 2):
                a_tie = vsub(pi.slope, pj.slope)
                b_tie = pi.intercept - pj.intercept
                for a, b in edges:
                    d = vsub(b, a)
                    # a + s d on the tie line
                    denom = dot(a_tie, d)
                    if denom == 0:
                        continue
                    s = (b_tie - dot(a_tie, a)) / denom
                    if 0 <= s <= 1:
                        u = vadd(a, vscale(s, d))
                        if pi.value(u) == F(u):
                            cands.add(u)
    pieces = [AffineFunctional(u, F(u)) for u in cands]
    return PLConvexFunction.from_pieces(pieces, prune=False)


def convex_envelope(samples, delta: Polytope) -> PLConvexFunction:
    """Largest convex function with slopes in delta lying below the samples.

    samples: iterable of (point, value) pairs.  The result h satisfies
    h(p) <= y for every sample and no convex minorant with slopes in
    delta exceeds it anywhere.
    """
    samples = [(as_point(p), as_fraction(y)) for p, y in samples]
    if not samples:
        raise ValueError("empty sample set")
    if any(len(p) != delta.dim for p, _ in samples):
        raise DimensionError("sample/polytope dimension mismatch")
    F = PLConvexFunction.from_pieces(
        [AffineFunctional(p, y) for p, y in samples], prune=True
    )
    return dual_transform(F, delta)


def convex_envelope_of_function(psi: PLConvexFunction, delta: Polytope) -> PLConvexFunction:
    """Largest convex minorant of psi with slopes in delta.

    psi must be admissible for some polytope containing delta (its
    breakpoint values then determine the envelope).
    """
    bps = breakpoints(psi)
    if not bps:
        if all(delta.contains(s) for s in psi.slopes):
            return psi
        raise ValueError("affine input with slope outside the target polytope")
    return convex_envelope([(v, psi(v)) for v in bps], delta)
