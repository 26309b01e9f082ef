"""Real Monge-Ampere measures of admissible piecewise-linear convex functions.

The measure assigns to each vertex of the linearity subdivision the exact
volume of the subdifferential there; for admissible functions the cells
partition the polytope, so the total mass equals its volume.  The
analytic-side measure is the same atom list scaled by n! and tagged with
monomial points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .geometry import (
    DiscreteMeasure,
    DimensionError,
    PLConvexFunction,
    Polytope,
    as_point,
    breakpoints,
    is_admissible,
    polytope_volume,
    subdifferential,
    support_function,
)


class AdmissibilityError(ValueError):
    """Function/polytope pair fails the slope conditions."""


class DegeneratePolytopeError(ValueError):
    """Operation requires a full-dimensional polytope."""


@dataclass(frozen=True)
class MonomialPoint:
    """Label for the multiplicative seminorm attached to a point of N_R."""

    v: tuple

    @staticmethod
    def make(v) -> "MonomialPoint":
        return MonomialPoint(as_point(v))


@dataclass(frozen=True)
class ToricMAResult:
    measure_NR: DiscreteMeasure
    measure_an: tuple  # ((MonomialPoint, mass), ...)
    degree: Fraction


def degree(delta: Polytope) -> Fraction:
    """n! Vol(delta): the self-intersection number of the polarization."""
    return factorial(delta.dim) * polytope_volume(delta)


def ma_measure(g: PLConvexFunction, delta: Polytope, check: bool = True) -> ToricMAResult:
    """Real Monge-Ampere measure of g, plus its n!-scaled analytic copy."""
    if check and not is_admissible(g, delta):
        raise AdmissibilityError(
            "function is not admissible for the polytope "
            "(slope outside, or missing vertex slope)"
        )
    n = delta.dim
    atoms = []
    for v in breakpoints(g):
        mass = polytope_volume(subdifferential(g, v))
        if mass != 0:
            atoms.append((v, mass))
    nr = DiscreteMeasure.from_atoms(atoms)
    an = tuple((MonomialPoint(p), factorial(n) * m) for p, m in nr.atoms)
    return ToricMAResult(nr, an, degree(delta))


def point_mass_solution(delta: Polytope, v0) -> PLConvexFunction:
    """Translate of the support function; its MA measure is Vol(delta) at v0."""
    if not delta.is_full_dimensional():
        raise DegeneratePolytopeError("polytope is not full-dimensional")
    return support_function(delta).translate(as_point(v0))


def mixed_ma(gs, delta: Polytope) -> DiscreteMeasure:
    """Mixed Monge-Ampere measure of n admissible functions, by polarization.

    (1/n!) sum over nonempty S of (-1)^(n-|S|) MA(sum of g_i, i in S);
    the inner sums are admissible for the dilated polytope |S| * delta.
    Symmetric and multilinear, with total mass Vol(delta).
    """
    gs = list(gs)
    n = delta.dim
    if len(gs) != n:
        raise DimensionError(f"expected {n} functions, got {len(gs)}")
    for g in gs:
        if not is_admissible(g, delta):
            raise AdmissibilityError("every argument must be admissible for the polytope")
    total = DiscreteMeasure.from_atoms([])
    for r in range(1, n + 1):
        for subset in itertools.combinations(range(n), r):
            h = gs[subset[0]]
            for i in subset[1:]:
                h = h + gs[i]
            part = ma_measure(h, delta.dilate(r), check=False).measure_NR
            sign = (-1) ** (n - r)
            total = total + part.scale(sign)
    return total.scale(Fraction(1, factorial(n)))
