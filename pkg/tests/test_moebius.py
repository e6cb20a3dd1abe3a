import math

import numpy as np
import pytest

from shearlab import (
    GeometryError,
    MobiusMap,
    BoundaryPoint,
    INFINITY,
    compose,
    cross_ratio_shear,
    parabolic_fixed_point,
    trace_product_parabolics,
    trace_to_length,
)
from shearlab.shear import basic_matrix_P


def random_mobius(rng, scale=1.0):
    while True:
        a, b, c, d = rng.standard_normal(4) * scale
        if a * d - b * c > 0.1:
            return MobiusMap(a, b, c, d)


def random_parabolic(rng):
    x = float(rng.uniform(-3, 3))
    h = float(rng.uniform(0.1, 2.0)) * (1 if rng.random() < 0.5 else -1)
    m = MobiusMap(1 + h * x, -h * x * x, h, 1 - h * x)
    if rng.random() < 0.5:
        m = MobiusMap(-m.a, -m.b, -m.c, -m.d)
    return m


def test_compose_identity():
    m = MobiusMap(2.0, 1.0, 1.0, 1.0)
    assert compose(MobiusMap.identity(), m).distance_to(m) < 1e-15


def test_compose_basic_parabolics():
    got = compose(basic_matrix_P(1), basic_matrix_P(-1))
    want = MobiusMap(2.5, -0.5, -0.5, 0.5)
    assert got.distance_to(want) < 1e-15
    assert abs(got.trace() - 3.0) < 1e-15


def test_compose_inverse(rng):
    for _ in range(50):
        m = random_mobius(rng)
        assert compose(m, m.inverse()).is_identity(tol=1e-12)
        assert abs(compose(m, m.inverse()).det() - 1.0) < 1e-12


def test_determinant_preserved(rng):
    for _ in range(200):
        m1, m2 = random_mobius(rng), random_mobius(rng)
        assert abs(compose(m1, m2).det() - 1.0) < 1e-12


def test_classification_sign_stable(rng):
    for _ in range(50):
        m = random_mobius(rng)
        flipped = MobiusMap(-m.a, -m.b, -m.c, -m.d)
        assert m.classify() == flipped.classify()


def test_trace_to_length_values():
    assert trace_to_length(2.0) == 0.0
    assert abs(trace_to_length(3.0) - 1.9248473002384139) < 1e-12
    assert abs(trace_to_length(-2.5) - 2.0 * math.log(2.0)) < 1e-12
    with pytest.raises(GeometryError):
        trace_to_length(1.99)


def test_trace_length_round_trip():
    for ell in np.geomspace(1e-6, 40.0, 60):
        rec = trace_to_length(2.0 * math.cosh(ell / 2.0))
        assert abs(rec - ell) <= 1e-9 or abs(rec - ell) <= 1e-9 * ell


def test_parabolic_fixed_points():
    assert parabolic_fixed_point(MobiusMap(1, 0, 2.0, 1)).value == 0.0
    assert parabolic_fixed_point(MobiusMap(1, 1, 0, 1)).at_infinity
    C = 0.7
    m = MobiusMap(1 + C, -C, C, 1 - C)
    assert abs(parabolic_fixed_point(m).value - 1.0) < 1e-12
    with pytest.raises(GeometryError):
        parabolic_fixed_point(MobiusMap(2.0, 0.0, 0.0, 0.5))
    with pytest.raises(GeometryError):
        parabolic_fixed_point(MobiusMap.identity())


def test_cross_ratio_symmetric_quad():
    pts = [BoundaryPoint(-1.0), BoundaryPoint(0.0), BoundaryPoint(1.0), INFINITY]
    assert abs(cross_ratio_shear(*pts)) < 1e-15


def test_cross_ratio_worked_example():
    pts = [BoundaryPoint(float(x)) for x in (0, 1, 2, 3)]
    assert abs(cross_ratio_shear(*pts) - math.log(1.0 / 3.0)) < 1e-12


def test_cross_ratio_mobius_invariance(rng):
    for _ in range(100):
        xs = sorted(rng.uniform(-5, 5, size=4))
        pts = [BoundaryPoint(float(x)) for x in xs]
        v0 = cross_ratio_shear(*pts)
        g = random_mobius(rng)
        moved = [g.apply(p) for p in pts]
        # the image of an increasing quadruple stays in ccw cyclic order
        assert abs(cross_ratio_shear(*moved) - v0) < 1e-9


def test_cross_ratio_triangle_order_swap(rng):
    for _ in range(50):
        xs = sorted(rng.uniform(-5, 5, size=4))
        pts = [BoundaryPoint(float(x)) for x in xs]
        a = cross_ratio_shear(pts[0], pts[1], pts[2], pts[3])
        b = cross_ratio_shear(pts[2], pts[3], pts[0], pts[1])
        assert abs(a - b) < 1e-14


def test_cross_ratio_errors():
    p = [BoundaryPoint(0.0), BoundaryPoint(0.0), BoundaryPoint(1.0), BoundaryPoint(2.0)]
    with pytest.raises(GeometryError):
        cross_ratio_shear(*p)
    bad_order = [BoundaryPoint(float(x)) for x in (0, 2, 1, 3)]
    with pytest.raises(GeometryError, match="cyclic order"):
        cross_ratio_shear(*bad_order)


def test_trace_product_worked_example():
    g1 = MobiusMap(1, 0, 1, 1)
    g2 = MobiusMap(-3, 4, -4, 5)
    assert abs(trace_product_parabolics(g1, g2) - 6.0) < 1e-12
    assert abs(compose(g1, g2).trace() - 6.0) < 1e-12


def test_trace_product_matches_composition(rng):
    for _ in range(2000):
        g1, g2 = random_parabolic(rng), random_parabolic(rng)
        direct = compose(g1, g2).trace()
        formula = trace_product_parabolics(g1, g2)
        assert abs(direct - formula) <= 1e-9 * max(1.0, abs(direct))


def test_trace_product_conjugation_invariance(rng):
    for _ in range(200):
        g1, g2 = random_parabolic(rng), random_parabolic(rng)

        def invariant(a, b):
            x1 = (a.a - a.d) / (2 * a.c)
            x2 = (b.a - b.d) / (2 * b.c)
            return a.c * b.c * (x1 - x2) ** 2

        v0 = invariant(g1, g2)
        h = random_mobius(rng)
        c1 = compose(compose(h, g1), h.inverse())
        c2 = compose(compose(h, g2), h.inverse())
        if abs(c1.c) < 1e-8 or abs(c2.c) < 1e-8:
            continue
        assert abs(invariant(c1, c2) - v0) <= 1e-9 * max(1.0, abs(v0))


def test_trace_product_requires_finite_fixed_point():
    g_inf = MobiusMap(1, 1, 0, 1)
    g = MobiusMap(1, 0, 1, 1)
    with pytest.raises(GeometryError, match="conjugate first"):
        trace_product_parabolics(g_inf, g)


def test_common_fixed_point_gives_parabolic_product(rng):
    for _ in range(20):
        x = float(rng.uniform(-2, 2))
        h1, h2 = 0.8, -1.3
        g1 = MobiusMap(1 + h1 * x, -h1 * x * x, h1, 1 - h1 * x)
        g2 = MobiusMap(1 + h2 * x, -h2 * x * x, h2, 1 - h2 * x)
        assert abs(abs(compose(g1, g2).trace()) - 2.0) < 1e-12
