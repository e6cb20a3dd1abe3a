import math

import numpy as np
import pytest

from shearlab import (
    GeometryError,
    ValidationError,
    build_surface,
    builtin_curve,
    curve_length,
    random_complete_shears,
)
from shearlab.fenchel_nielsen import (
    FNPoint,
    FuchsianRep,
    edge_parabolic_lifts,
    fn_to_holonomy,
    hexagon_h,
    holonomy_to_shear,
    perpendicular_d,
    twist_from_lengths_case11,
    twist_from_lengths_case04,
)
from shearlab.moebius import MobiusMap, compose
from shearlab.shear import marking_matrices
from conftest import BUILTIN_NAMES

LSTAR = 2.0 * math.acosh(1.5)


def test_fn_point_validation():
    with pytest.raises(ValidationError):
        FNPoint("s_1_1", (0.0,), (1.0,))
    with pytest.raises(ValidationError):
        FNPoint("s_1_1", (1.0, 2.0), (0.0,))
    d = FNPoint("s_1_1", (1.5,), (-0.3,)).to_dict()
    p = FNPoint.from_dict(d)
    assert p.lengths == (1.5,) and p.twists == (-0.3,)


def test_fn_s11_cusp_condition(rng):
    for _ in range(20):
        l = float(rng.uniform(0.5, 4.0))
        tau = float(rng.uniform(-3.0, 3.0))
        rep = fn_to_holonomy("s_1_1", FNPoint("s_1_1", (l,), (tau,)))
        per = rep.peripherals()[0]
        assert abs(abs(per.trace()) - 2.0) <= 1e-8
        assert abs(rep.generators["a"].trace()) - 2.0 * math.cosh(l / 2.0) < 1e-10
        assert rep.relator_check() == 0.0


def test_fn_unsupported_surface():
    with pytest.raises(ValidationError):
        fn_to_holonomy("s_0_3", FNPoint("s_0_3", (1.0,), (0.0,)))


def test_fn_twist_additivity(rng):
    l, tau = 1.9, -0.7
    r1 = fn_to_holonomy("s_1_1", FNPoint("s_1_1", (l,), (tau,)))
    r2 = fn_to_holonomy("s_1_1", FNPoint("s_1_1", (l,), (tau + l,)))
    for _ in range(20):
        word = [
            ("ab"[int(rng.integers(2))], int(rng.integers(2)) * 2 - 1)
            for _ in range(int(rng.integers(1, 8)))
        ]
        subst = []
        for n, s in word:
            if n == "b":
                subst.extend([("a", 1), ("b", 1)] if s > 0 else [("b", -1), ("a", -1)])
            else:
                subst.append((n, s))
        t1 = r1.evaluate(tuple(subst)).trace()
        t2 = r2.evaluate(tuple(word)).trace()
        assert abs(abs(t1) - abs(t2)) <= 1e-9 * max(1.0, abs(t1))


def test_modular_point_location(s11):
    # the maximally symmetric point sits at one half-twist in the
    # perpendicular-feet normalization
    rep = fn_to_holonomy("s_1_1", FNPoint("s_1_1", (LSTAR,), (LSTAR / 2.0,)))
    sv = holonomy_to_shear(rep, s11)
    assert max(abs(v) for v in sv.values) < 1e-9


def test_holonomy_to_shear_round_trip_grid(s11):
    a = builtin_curve(s11, "a")
    b = builtin_curve(s11, "b")
    for l in np.linspace(0.5, 4.0, 5):
        for tau in np.linspace(-3.0, 3.0, 5):
            rep = fn_to_holonomy("s_1_1", FNPoint("s_1_1", (float(l),), (float(tau),)))
            sv = holonomy_to_shear(rep, s11)
            assert sv.is_complete(tol=1e-7)
            assert abs(curve_length(sv, a) - l) <= 1e-6
            cosh_tau = twist_from_lengths_case11(curve_length(sv, b), float(l), 0.0)
            assert abs(cosh_tau - math.cosh(tau)) <= 1e-5


def test_holonomy_to_shear_conjugation_invariance(s11, rng):
    rep = fn_to_holonomy("s_1_1", FNPoint("s_1_1", (2.2,), (0.8,)))
    sv = holonomy_to_shear(rep, s11)
    g = MobiusMap(1.7, 0.3, -0.4, 0.9)
    conj = FuchsianRep(
        generators={
            k: compose(compose(g, m), g.inverse()) for k, m in rep.generators.items()
        },
        peripheral_words=rep.peripheral_words,
        marking=rep.marking,
    )
    sv2 = holonomy_to_shear(conj, s11)
    assert max(abs(a - b) for a, b in zip(sv.values, sv2.values)) < 1e-8


def test_holonomy_to_shear_general_round_trip(rng):
    for name in BUILTIN_NAMES:
        T = build_surface(name)
        for _ in range(10):
            sv = random_complete_shears(T, rng, scale=0.8)
            gens = marking_matrices(sv)
            sv2 = holonomy_to_shear(gens, T)
            assert max(abs(a - b) for a, b in zip(sv.values, sv2.values)) < 1e-10


def test_holonomy_to_shear_rejects_bad_lifts(s11):
    bad = {e: (MobiusMap.identity(),) * 4 for e in s11.edge_ids}
    with pytest.raises(GeometryError):
        holonomy_to_shear(None, s11, lifts=bad)


def test_edge_lifts_are_parabolic(rng):
    T = build_surface("s_0_4")
    sv = random_complete_shears(T, rng, scale=0.6)
    lifts = edge_parabolic_lifts(T, marking_matrices(sv))
    assert sorted(lifts) == sorted(T.edge_ids)
    for quad in lifts.values():
        for g in quad:
            assert g.classify() == "parabolic"


def test_fn_s04_construction():
    for l in (0.8, 1.7, 3.0):
        for tau in (-1.2, 0.0, 2.4):
            rep = fn_to_holonomy("s_0_4", FNPoint("s_0_4", (l,), (tau,)))
            assert rep.relator_check() < 1e-12
            for per in rep.peripherals():
                assert abs(abs(per.trace()) - 2.0) < 1e-9
            pants = rep.evaluate((("x1", 1), ("x2", 1)))
            assert abs(abs(pants.trace()) - 2.0 * math.cosh(l / 2.0)) < 1e-9


def test_fn_s04_twist_is_dehn_twist(rng):
    l = 1.4
    r1 = fn_to_holonomy("s_0_4", FNPoint("s_0_4", (l,), (0.6,)))
    r2 = fn_to_holonomy("s_0_4", FNPoint("s_0_4", (l,), (0.6 + l,)))
    gamma = (("x1", 1), ("x2", 1))
    for _ in range(20):
        word = [
            (f"x{int(rng.integers(1, 5))}", int(rng.integers(2)) * 2 - 1)
            for _ in range(int(rng.integers(1, 6)))
        ]
        # full twist: x3, x4 conjugated by the pants curve
        subst = []
        for n, s in word:
            if n in ("x3", "x4"):
                subst.extend(
                    list(gamma) + [(n, s)] + [(x, -sgn) for x, sgn in reversed(gamma)]
                )
            else:
                subst.append((n, s))
        t1 = r1.evaluate(tuple(subst)).trace()
        t2 = r2.evaluate(tuple(word)).trace()
        assert abs(abs(t1) - abs(t2)) <= 1e-8 * max(1.0, abs(t1))


def test_twist_case11_examples(rng):
    # oracle-generated data recovers cosh tau exactly at tau = 0
    for l in (0.8, 1.7, 3.2):
        T = build_surface("s_1_1")
        rep = fn_to_holonomy("s_1_1", FNPoint("s_1_1", (l,), (0.0,)))
        sv = holonomy_to_shear(rep, T)
        l_mu = curve_length(sv, builtin_curve(T, "b"))
        assert abs(twist_from_lengths_case11(l_mu, l, 0.0) - 1.0) <= 1e-6
    # monotone in the crossing length
    vals = [twist_from_lengths_case11(m, 1.5, 0.7) for m in (2.2, 2.5, 3.0, 4.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(GeometryError, match="inconsistent"):
        twist_from_lengths_case11(0.1, 3.0, 0.0)


def test_twist_case04_identities(rng):
    # d = h + h' gives cosh tau = 1
    assert abs(twist_from_lengths_case04(1.3 + 0.9, 1.3, 0.9) - 1.0) < 1e-12
    # forward-then-invert round trip
    for _ in range(50):
        tau = float(rng.uniform(-3, 3))
        h = float(rng.uniform(0.2, 2.0))
        hp = float(rng.uniform(0.2, 2.0))
        d = perpendicular_d(tau, h, hp)
        assert abs(twist_from_lengths_case04(d, h, hp) - math.cosh(tau)) < 1e-10
    with pytest.raises(ValidationError):
        twist_from_lengths_case04(1.0, 0.0, 1.0)


def test_hexagon_h_symmetric_case():
    g, d = 1.6, 0.9
    ch = math.cosh(hexagon_h(g, g, d))
    want = (math.cosh(d / 2) + math.cosh(g / 2) ** 2) / math.sinh(g / 2) ** 2
    assert abs(ch - want) < 1e-12


def test_bounded_denominator_on_sample(rng):
    # the case-(0,4) denominator stays away from zero once the legs have a
    # length floor
    l_min = 0.5
    floor = math.sinh(hexagon_h(l_min, l_min, 0.0)) ** 2
    assert floor > 0
    for _ in range(100):
        g = float(rng.uniform(l_min, 4.0))
        b = float(rng.uniform(l_min, 4.0))
        dd = float(rng.uniform(0.0, 3.0))
        h = hexagon_h(g, b, dd)
        assert math.sinh(h) > 0.1
