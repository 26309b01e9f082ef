from fractions import Fraction

import pytest

from plma.curves import (
    GraphError,
    GraphMeasure,
    GraphPLFunction,
    GraphPoint,
    MassBalanceError,
    MetricGraph,
    arc_masses,
    canonical_metric,
    circle_graph,
    green,
    green_value,
    is_subharmonic,
    laplacian,
    ma_curve,
    solve_poisson,
    superpose,
    vertex_key,
)

from conftest import random_graph, random_graph_point, random_positive_measure


def star3():
    return MetricGraph.build([0, 1, 2, 3], [(0, 1, 1), (0, 2, 1), (0, 3, 1)])


def tent(graph):
    # min(t, 1-t) on the unit circle
    return GraphPLFunction.build(
        graph, [((Fraction(0), Fraction(0)), (Fraction(1, 2), Fraction(1, 2)), (Fraction(1), Fraction(0)))]
    )


def slope_sum_oracle(f, graph, key):
    # exact outgoing slopes from values a small step away on each direction
    h = Fraction(1, 10**6)
    total = Fraction(0)
    for e, (u, v, ln) in enumerate(graph.edges):
        pairs = f.edge_values[e]

        def val(off):
            from plma.curves import _interp

            return _interp(pairs, off)

        for end, sgn in ((u, 1), (v, -1)):
            if graph.point_key(vertex_key(end)) == key:
                base = Fraction(0) if sgn == 1 else ln
                total += (val(base + sgn * h) - val(base)) / h
        if key[0] == "e" and key[1] == e:
            off = key[2]
            total += (val(off + h) - val(off)) / h + (val(off - h) - val(off)) / h
    return total


def test_laplacian_constant_circle():
    g = circle_graph()
    f = GraphPLFunction.constant(g, Fraction(5, 3))
    assert laplacian(f, g).atoms == ()


def test_laplacian_star_distance():
    g = star3()
    f = GraphPLFunction.build(
        g,
        [
            ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(1))),
            ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0))),
            ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0))),
        ],
    )
    lap = laplacian(f, g)
    assert lap.mass_at(g, vertex_key(1)) == -1
    assert lap.mass_at(g, vertex_key(0)) == 1
    assert lap.total_mass() == 0


def test_laplacian_tent_with_oracle():
    g = circle_graph()
    lap = laplacian(tent(g), g)
    # outgoing-slope convention: +2 at the base point, -2 at the max
    assert lap.mass_at(g, vertex_key(0)) == 2
    assert lap.mass_at(g, GraphPoint(0, Fraction(1, 2))) == -2
    for key, mass in lap.atoms:
        assert mass == slope_sum_oracle(tent(g), g, key)


def test_laplacian_mass_balance_and_linearity(rng):
    for _ in range(10):
        g = random_graph(rng)
        mu = random_positive_measure(rng, g, Fraction(2))
        om = random_positive_measure(rng, g, Fraction(2))
        f1 = superpose(g, mu, om)
        f2 = green(g, random_graph_point(rng, g), om)
        assert laplacian(f1, g).total_mass() == 0
        a, b = Fraction(3, 2), Fraction(-2, 5)
        combo = f1.scale(a) + f2.scale(b)
        lhs = laplacian(combo, g)
        rhs = laplacian(f1, g).scale(a).add(g, laplacian(f2, g).scale(b))
        assert lhs == rhs


def test_solve_poisson_zero():
    g = star3()
    f = solve_poisson(g, GraphMeasure.from_atoms(g, []), vertex_key(1))
    assert f.eval(g, vertex_key(2)) == 0 and laplacian(f, g).atoms == ()


def test_solve_poisson_circle_tent():
    g = circle_graph()
    rho = GraphMeasure.from_atoms(
        g, [(GraphPoint(0, Fraction(1, 2)), Fraction(1)), (vertex_key(0), Fraction(-1))]
    )
    f = solve_poisson(g, rho, vertex_key(0))
    assert laplacian(f, g) == rho
    assert f.eval(g, vertex_key(0)) == 0
    # normative sign: -min(t, 1-t)/2
    assert f.eval(g, GraphPoint(0, Fraction(1, 2))) == Fraction(-1, 4)
    assert f.eval(g, GraphPoint(0, Fraction(1, 4))) == Fraction(-1, 8)


def gauss_oracle_star(rho_leaf_plus, rho_leaf_minus):
    # hand-coded elimination for the 4-node star system, unit edge weights:
    # f(center) unknowns f0..f3, laplacian at leaf i is f0 - fi
    # choose f0 = 0; then fi = -rho_i at each leaf
    return {0: Fraction(0), rho_leaf_plus: Fraction(-1), rho_leaf_minus: Fraction(1)}


def test_solve_poisson_star_path():
    g = star3()
    rho = GraphMeasure.from_atoms(
        g, [(vertex_key(1), Fraction(1)), (vertex_key(2), Fraction(-1))]
    )
    f = solve_poisson(g, rho, vertex_key(0))
    assert laplacian(f, g) == rho
    expected = gauss_oracle_star(1, 2)
    for vid, val in expected.items():
        assert f.eval(g, vertex_key(vid)) == val
    # constant on the third edge
    assert f.eval(g, GraphPoint(2, Fraction(1, 2))) == 0
    assert f.eval(g, vertex_key(3)) == 0


def test_solve_poisson_mass_mismatch():
    g = star3()
    rho = GraphMeasure.from_atoms(g, [(vertex_key(1), Fraction(1))])
    with pytest.raises(MassBalanceError):
        solve_poisson(g, rho, vertex_key(0))


def test_disconnected_graph_rejected():
    with pytest.raises(GraphError):
        MetricGraph.build([0, 1, 2, 3], [(0, 1, 1), (2, 3, 1)])


def test_poisson_uniqueness_up_to_constants(rng):
    g = random_graph(rng)
    mu = random_positive_measure(rng, g, Fraction(3))
    om = random_positive_measure(rng, g, Fraction(3))
    rho = mu.sub(g, om)
    p1 = random_graph_point(rng, g)
    p2 = random_graph_point(rng, g)
    f1 = solve_poisson(g, rho, p1)
    f2 = solve_poisson(g, rho, p2)
    c = f1.eval(g, p2)
    probes = [vertex_key(v) for v in g.vertex_ids] + [k for k, _ in rho.atoms]
    assert all(f1.eval(g, k) - c == f2.eval(g, k) for k in probes)


def test_green_at_omega0_atom():
    g = circle_graph()
    om = GraphMeasure.from_atoms(g, [(vertex_key(0), Fraction(2))])
    phi = green(g, vertex_key(0), om)
    assert phi.eval(g, GraphPoint(0, Fraction(1, 3))) == 0


def test_green_circle_defining_properties():
    g = circle_graph()
    om = GraphMeasure.from_atoms(g, [(vertex_key(0), Fraction(1))])
    x = GraphPoint(0, Fraction(1, 2))
    phi = green(g, x, om)
    want = GraphMeasure.from_atoms(g, [(x, Fraction(1)), (vertex_key(0), Fraction(-1))])
    assert laplacian(phi, g) == want
    assert om.integrate(g, phi) == 0


def test_green_symmetry(rng):
    for _ in range(10):
        g = random_graph(rng)
        om = random_positive_measure(rng, g, Fraction(1))
        x = random_graph_point(rng, g)
        y = random_graph_point(rng, g)
        assert green_value(g, x, y, om) == green_value(g, y, x, om)


def test_superpose_examples(rng):
    g = circle_graph()
    om = GraphMeasure.from_atoms(g, [(vertex_key(0), Fraction(2))])
    x = GraphPoint(0, Fraction(1, 3))
    mu = GraphMeasure.from_atoms(g, [(x, Fraction(2))])
    assert superpose(g, mu, om) == green(g, x, om)
    assert superpose(g, om, om).simplify() == GraphPLFunction.constant(g, 0)
    a, b = GraphPoint(0, Fraction(1, 4)), GraphPoint(0, Fraction(2, 3))
    mu2 = GraphMeasure.from_atoms(g, [(a, Fraction(1)), (b, Fraction(1))])
    f = superpose(g, mu2, om)
    assert laplacian(f, g) == mu2.sub(g, om)
    assert om.integrate(g, f) == 0


def test_superpose_mass_mismatch():
    g = circle_graph()
    om = GraphMeasure.from_atoms(g, [(vertex_key(0), Fraction(2))])
    mu = GraphMeasure.from_atoms(g, [(GraphPoint(0, Fraction(1, 3)), Fraction(1))])
    with pytest.raises(MassBalanceError):
        superpose(g, mu, om)


def test_is_subharmonic_examples(rng):
    g = random_graph(rng)
    om = random_positive_measure(rng, g, Fraction(2))
    x = random_graph_point(rng, g)
    assert is_subharmonic(GraphPLFunction.constant(g, 0), g, om)
    phi = green(g, x, om)
    assert is_subharmonic(phi, g, om)
    if om.mass_at(g, x) == 0:
        assert not is_subharmonic(phi.scale(-1), g, om)


def test_ma_curve_examples(rng):
    g = random_graph(rng)
    om = random_positive_measure(rng, g, Fraction(3))
    assert ma_curve(GraphPLFunction.constant(g, Fraction(1, 7)), g, om) == om
    mu = random_positive_measure(rng, g, Fraction(3))
    f = superpose(g, mu, om)
    assert ma_curve(f, g, om) == mu
    assert ma_curve(f, g, om).total_mass() == 3


def test_maximum_principle(rng):
    # away from supp(laplacian(f)) the function is harmonic, so the global
    # max is attained on that support (or f is constant)
    for _ in range(10):
        g = random_graph(rng)
        om = random_positive_measure(rng, g, Fraction(2))
        mu = random_positive_measure(rng, g, Fraction(2))
        f = superpose(g, mu, om)
        lap = laplacian(f, g)
        if not lap.atoms:
            continue
        candidates = [k for k, _ in lap.atoms]
        candidates += [g.point_key(vertex_key(v)) for v in g.vertex_ids]
        for e, pairs in enumerate(f.edge_values):
            candidates += [g.point_key(GraphPoint(e, o)) for o, _ in pairs]
        overall = max(f.eval(g, k) for k in candidates)
        on_support = max(f.eval(g, k) for k, _ in lap.atoms)
        assert overall == on_support


def test_perron_inequality(rng):
    # any competitor whose laplacian dominates d_L delta_x - omega0 atomwise,
    # normalized nonpositively against omega0, lies below the Green function
    g = random_graph(rng)
    om = random_positive_measure(rng, g, Fraction(2))
    x = g.point_key(random_graph_point(rng, g))
    phi_x = green(g, x, om)
    target = GraphMeasure.from_atoms(g, [(x, Fraction(2))]).sub(g, om)
    for c in (Fraction(0), Fraction(-1, 3), Fraction(-2)):
        cand = phi_x + GraphPLFunction.constant(g, c)
        lap = laplacian(cand, g)
        dominates = all(lap.mass_at(g, k) >= m for k, m in target.atoms)
        assert dominates and om.integrate(g, cand) <= 0
        for key, _ in lap.atoms:
            assert cand.eval(g, key) <= phi_x.eval(g, key)


def test_canonical_zero_iterations():
    potential, measure = canonical_metric(2, 0)
    g = circle_graph()
    assert potential.simplify() == GraphPLFunction.constant(g, 0)
    assert measure == GraphMeasure.from_atoms(g, [(vertex_key(0), Fraction(1))])


def test_canonical_exact_dyadic_masses():
    for k in range(1, 7):
        _, measure = canonical_metric(2, k)
        masses = arc_masses(measure, 2**k)
        assert all(m == Fraction(1, 2**k) for m in masses)


def test_canonical_monotone_decay():
    prev = None
    for k in range(1, 9):
        _, measure = canonical_metric(2, k)
        masses = arc_masses(measure, 8)
        disc = max(abs(m - Fraction(1, 8)) for m in masses)
        if prev is not None:
            assert disc <= prev
        prev = disc


def test_canonical_bad_m():
    with pytest.raises(ValueError):
        canonical_metric(1, 3)
