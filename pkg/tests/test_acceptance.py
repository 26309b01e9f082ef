"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -s` to see the summary lines.
"""

import random
import time
from fractions import Fraction
from math import factorial

from plma.curves import (
    GraphMeasure,
    GraphPLFunction,
    GraphPoint,
    arc_masses,
    canonical_metric,
    circle_graph,
    green_value,
    laplacian,
    ma_curve,
    solve_poisson,
    superpose,
    vertex_key,
)
from plma.geometry import DiscreteMeasure, polytope_volume, support_function
from plma.solver import solve_toric
from plma.toric import degree, ma_measure, point_mass_solution
from plma.variational import (
    MinOfConvex,
    PiecewiseLinear1D,
    energy_toric,
    energy_of_envelope_derivative,
    orthogonality_defect,
)

from conftest import (
    ACCEPTANCE_POLYTOPES,
    interval,
    random_admissible,
    random_graph,
    random_graph_point,
    random_positive_measure,
    rnd_frac,
    simplex2,
    unit_square,
)


def run_criterion(number, label, limit_seconds, body):
    start = time.monotonic()
    try:
        body()
    except Exception:
        print(f"FAIL criterion {number}: {label}")
        raise
    elapsed = time.monotonic() - start
    ok = elapsed < limit_seconds
    print(
        f"{'PASS' if ok else 'FAIL'} criterion {number}: {label}"
        f" ({elapsed:.2f}s, limit {limit_seconds}s)"
    )
    assert ok, f"criterion {number} exceeded the {limit_seconds}s budget"


def test_criterion_1_mass_identity():
    rng = random.Random(101)

    def body():
        for delta in ACCEPTANCE_POLYTOPES:
            n = delta.dim
            vol = polytope_volume(delta)
            for _ in range(50):
                g = random_admissible(rng, delta)
                res = ma_measure(g, delta)
                assert res.measure_NR.total_mass() == vol
                assert sum(m for _, m in res.measure_an) == factorial(n) * vol

    run_criterion(1, "toric mass identity, 50 functions per polytope", 10, body)


def test_criterion_2_point_mass():
    rng = random.Random(102)

    def body():
        for delta in ACCEPTANCE_POLYTOPES:
            vol = polytope_volume(delta)
            for _ in range(20):
                v0 = tuple(rnd_frac(rng, den=7, lo=-1, hi=1) for _ in range(delta.dim))
                g = point_mass_solution(delta, v0)
                want = DiscreteMeasure.from_atoms([(v0, vol)])
                assert ma_measure(g, delta).measure_NR == want

    run_criterion(2, "point-mass solution, 20 random targets per polytope", 5, body)


def random_target(rng, delta, max_atoms=12):
    extra = 4
    while True:
        nu = ma_measure(random_admissible(rng, delta, extra=extra), delta).measure_NR
        if len(nu.atoms) <= max_atoms:
            return nu
        extra -= 1


def test_criterion_3_solver_roundtrip():
    rng = random.Random(103)

    def body():
        for delta in ACCEPTANCE_POLYTOPES:
            vol = float(polytope_volume(delta))
            for i in range(25):
                nu = random_target(rng, delta)
                rep = solve_toric(delta, nu)
                assert rep.converged
                assert max(abs(float(e)) for _, e in rep.residual) <= 1e-10 * vol
                assert all(isinstance(e, Fraction) for _, e in rep.polished_residual)
                if delta.dim == 1:
                    assert all(e == 0 for _, e in rep.residual)
                if i < 3:
                    other = solve_toric(
                        delta, nu, initial_weights=[rnd_frac(rng) for _ in nu.atoms]
                    )
                    diffs = [
                        float(rep.solution(v) - other.solution(v))
                        for v in delta.vertices
                    ]
                    assert max(diffs) - min(diffs) <= 1e-9

    run_criterion(3, "solver round-trip and uniqueness, 25 instances per polytope", 60, body)


def test_criterion_4_orthogonality():
    rng = random.Random(104)

    def body():
        seg, square = interval(), unit_square()
        for i in range(50):
            delta = seg if i % 2 == 0 else square
            psi = MinOfConvex(
                (random_admissible(rng, delta), random_admissible(rng, delta))
            )
            assert orthogonality_defect(psi, delta) == 0
        for _ in range(50):
            g = random_graph(rng)
            om = random_positive_measure(rng, g, Fraction(2))
            base = superpose(g, random_positive_measure(rng, g, Fraction(2)), om)
            dent = random_positive_measure(rng, g, Fraction(1))
            psi = base + superpose(g, dent.scale(2), om).scale(Fraction(-1, 2))
            assert orthogonality_defect(psi, (g, om)) == 0

    run_criterion(4, "orthogonality defect exactly zero, 50 toric + 50 curve", 30, body)


def bump_1d(center, width, height):
    return PiecewiseLinear1D.build(
        [(center - width, Fraction(0)), (center, height), (center + width, Fraction(0))],
        Fraction(0),
        Fraction(0),
    )


def test_criterion_5_envelope_differentiability():
    rng = random.Random(105)
    t_grid = (Fraction(1, 8), Fraction(1, 16), Fraction(1, 32), Fraction(1, 64))

    def body():
        seg = interval()
        for _ in range(12):
            phi = random_admissible(rng, seg)
            height = rnd_frac(rng, den=4, lo=-1, hi=1)
            f = bump_1d(rnd_frac(rng), Fraction(1), height)
            exact, fd = energy_of_envelope_derivative(phi, f, seg, t_grid=t_grid)
            C = 4 * degree(seg) * max(abs(height), Fraction(1, 100))
            for t, q in fd:
                assert abs(q - exact) <= C * t
        g = circle_graph()
        for _ in range(8):
            om = random_positive_measure(rng, g, Fraction(2))
            mu = random_positive_measure(rng, g, Fraction(2))
            phi = superpose(g, mu, om)
            peak = rnd_frac(rng, den=4, lo=-1, hi=1)
            f = GraphPLFunction.build(
                g,
                [(
                    (Fraction(0), Fraction(0)),
                    (Fraction(1, 2), peak),
                    (Fraction(1), Fraction(0)),
                )],
            )
            exact, fd = energy_of_envelope_derivative(phi, f, (g, om), t_grid=t_grid)
            C = 4 * om.total_mass() * max(abs(peak), Fraction(1, 100))
            for t, q in fd:
                assert abs(q - exact) <= C * t

    run_criterion(5, "E(P(phi + t f)) first-order accurate, 20 instances", 30, body)


def test_criterion_6_poisson_green():
    rng = random.Random(106)

    def body():
        for _ in range(50):
            g = random_graph(rng)
            mu = random_positive_measure(rng, g, Fraction(2))
            om = random_positive_measure(rng, g, Fraction(2))
            rho = mu.sub(g, om)
            f = solve_poisson(g, rho, random_graph_point(rng, g))
            assert laplacian(f, g) == rho
        for _ in range(20):
            g = random_graph(rng)
            om = random_positive_measure(rng, g, Fraction(1))
            x = random_graph_point(rng, g)
            y = random_graph_point(rng, g)
            assert green_value(g, x, y, om) == green_value(g, y, x, om)

    run_criterion(6, "Poisson round-trip (50 graphs) and Green symmetry (20)", 10, body)


def test_criterion_7_energy_cocycle():
    rng = random.Random(107)

    def body():
        polytopes = (interval(), simplex2())
        for i in range(30):
            delta = polytopes[i % len(polytopes)]
            g = random_admissible(rng, delta)
            h = random_admissible(rng, delta)
            k = random_admissible(rng, delta)
            assert energy_toric(g, h, delta) == -energy_toric(h, g, delta)
            lhs = energy_toric(g, k, delta)
            rhs = energy_toric(g, h, delta) + energy_toric(h, k, delta)
            assert lhs == rhs
            assert -lhs == energy_toric(k, h, delta) + energy_toric(h, g, delta)

    run_criterion(7, "energy antisymmetry and cocycle identity, 30 pairs", 10, body)


def test_criterion_8_canonical_dynamics():
    def body():
        _, measure = canonical_metric(2, 6)
        d_l = measure.total_mass()
        target = d_l * Fraction(1, 64)
        for m in arc_masses(measure, 64):
            assert abs(m - target) <= Fraction(1, 20) * target
        prev = None
        for k in range(1, 9):
            _, mk = canonical_metric(2, k)
            disc = max(abs(m - d_l * Fraction(1, 8)) for m in arc_masses(mk, 8))
            if prev is not None:
                assert disc <= prev
            prev = disc

    run_criterion(8, "canonical measure equidistributes on dyadic arcs", 10, body)


def test_criterion_9_linearity_1d():
    rng = random.Random(109)

    def body():
        seg = interval()
        for _ in range(30):
            g1 = random_admissible(rng, seg)
            g2 = random_admissible(rng, seg)
            lhs = ma_measure(g1 + g2, seg.dilate(2), check=False).measure_NR
            rhs = ma_measure(g1, seg).measure_NR + ma_measure(g2, seg).measure_NR
            assert lhs == rhs
        for _ in range(30):
            g = random_graph(rng)
            om = random_positive_measure(rng, g, Fraction(2))
            f1 = superpose(g, random_positive_measure(rng, g, Fraction(2)), om)
            f2 = superpose(g, random_positive_measure(rng, g, Fraction(2)), om)
            lhs = ma_curve(f1 + f2, g, om.scale(2))
            rhs = ma_curve(f1, g, om).add(g, ma_curve(f2, g, om))
            assert lhs == rhs

    run_criterion(9, "one-dimensional MA linearity, 30 pairs per context", 5, body)
