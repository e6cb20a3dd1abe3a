import json

import pytest

from shearlab import (
    CurveOnSurface,
    GeometryError,
    IdealTriangulation,
    ValidationError,
    build_surface,
    builtin_curve,
    builtin_names,
    lr_word,
    random_curve,
    random_surface,
    reroute_through_flip,
)
from conftest import BUILTIN_NAMES


def test_builtin_cell_counts():
    expected = {
        "s_1_1": (1, 1, 2, 3),
        "s_0_3": (0, 3, 2, 3),
        "s_0_4": (0, 4, 4, 6),
        "s_1_2": (1, 2, 4, 6),
    }
    assert builtin_names() == sorted(expected)
    for name, (g, n, F, E) in expected.items():
        T = build_surface(name)
        assert (T.genus, T.punctures, T.num_triangles, T.num_edges) == (g, n, F, E)
        assert E == 6 * g - 6 + 3 * n
        assert F == 4 * g - 4 + 2 * n


def test_s11_puncture_link():
    T = build_surface("s_1_1")
    links = T.puncture_links()
    assert len(links) == 1
    assert sorted(links[0]) == ["e1", "e1", "e2", "e2", "e3", "e3"]
    # one cyclic visit of each edge per half-turn around the link
    assert links[0][:3] != links[0][3:] or links[0][:3] == links[0][3:]


def test_s03_links():
    T = build_surface("s_0_3")
    links = T.puncture_links()
    assert len(links) == 3
    assert all(len(l) == 2 for l in links)


def test_link_multiplicity_totals():
    for name in BUILTIN_NAMES:
        T = build_surface(name)
        total = sum(len(l) for l in T.puncture_links())
        assert total == 2 * T.num_edges == 3 * T.num_triangles


def test_random_gluings_invariants(rng):
    for _ in range(100):
        F = int(rng.choice([2, 4, 6]))
        T = random_surface(rng, triangles=F)
        g, n = T.genus, T.punctures
        assert T.num_edges == 6 * g - 6 + 3 * n
        assert T.num_triangles == 4 * g - 4 + 2 * n
        assert n - T.num_edges + T.num_triangles == 2 - 2 * g
        corners = [c for cyc in T.corner_cycles for c in cyc]
        assert len(corners) == len(set(corners)) == 3 * T.num_triangles


def test_validation_errors():
    with pytest.raises(ValidationError, match="glued to itself"):
        IdealTriangulation([((0, 0), (0, 0), "e1")])
    with pytest.raises(ValidationError, match="used twice"):
        IdealTriangulation(
            [((0, 0), (1, 0), "e1"), ((0, 0), (1, 1), "e2"), ((0, 2), (1, 2), "e3")]
        )
    with pytest.raises(ValidationError, match="not connected"):
        IdealTriangulation(
            [((0, 0), (1, 0), "a1"), ((0, 1), (1, 1), "a2"), ((0, 2), (1, 2), "a3"),
             ((2, 0), (3, 0), "b1"), ((2, 1), (3, 1), "b2"), ((2, 2), (3, 2), "b3")]
        )
    with pytest.raises(ValidationError):
        build_surface("nope")
    with pytest.raises(ValidationError):
        build_surface({"gluing": [[[0, 0], [1, 0]], [[0, 1], [1, 1]]]})


def test_spec_dict_round_trip():
    for name in BUILTIN_NAMES:
        T = build_surface(name)
        d = T.to_spec_dict()
        T2 = build_surface(json.dumps(d))
        assert T2.canonical_key() == T.canonical_key()
        assert (T2.genus, T2.punctures) == (T.genus, T.punctures)
    with pytest.raises(ValidationError):
        bad = build_surface("s_1_1").to_spec_dict()
        bad["genus"] = 7
        build_surface(bad)


def test_flip_involution_combinatorial():
    for name in BUILTIN_NAMES:
        T = build_surface(name)
        for e in T.edge_ids:
            if not T.is_flippable(e):
                continue
            T2 = T.flip(e).flip(e)
            assert T2.canonical_key() == T.canonical_key()
            assert T2.edge_ids == T.edge_ids


def test_flip_preserves_cells():
    T = build_surface("s_1_1")
    for e in T.edge_ids:
        T2 = T.flip(e)
        assert (T2.genus, T2.punctures) == (T.genus, T.punctures)
        assert (T2.num_edges, T2.num_triangles) == (T.num_edges, T.num_triangles)
        assert sum(len(l) for l in T2.puncture_links()) == sum(
            len(l) for l in T.puncture_links()
        )


def test_self_folded_flip_rejected():
    # build a surface with a self-folded edge: fold side (0,0) onto (0,1)
    # (two sides of one edge in a single triangle)
    edges = [((0, 0), (0, 1), "e1"), ((0, 2), (1, 0), "e2"), ((1, 1), (1, 2), "e3")]
    try:
        T = IdealTriangulation(edges)
    except ValidationError:
        pytest.skip("complex invalid for other reasons")
    assert not T.is_flippable("e1")
    with pytest.raises(GeometryError, match="flip undefined"):
        T.flip_data("e1")


def test_lr_word_signs_alternating_strip(s11):
    # right-left-right start, per the three-triangle figure convention
    c = CurveOnSurface(((0, 0, 1), (1, 1, 0), (0, 0, 1), (1, 1, 0)))
    w = lr_word(s11, c)
    assert [s for _, s in w.letters][:3] == [-1, 1, -1]


def test_lr_word_two_step(s11):
    w = lr_word(s11, builtin_curve(s11, "a"))
    assert sorted(s for _, s in w.letters) == [-1, 1]


def test_lr_word_bad_step(s11):
    with pytest.raises(ValidationError):
        CurveOnSurface(((0, 1, 1), (1, 1, 0))).validate(s11)
    with pytest.raises(ValidationError):
        CurveOnSurface(((0, 0, 1), (1, 2, 0))).validate(s11)  # incompatible gluing


def test_lr_word_relabel_equivariance(rng):
    T = build_surface("s_1_1")
    perm = {0: 1, 1: 0}
    rot = {0: 1, 1: 2}

    def map_side(side):
        t, k = side
        return (perm[t], (k + rot[t]) % 3)

    edges = []
    for e in range(T.num_edges):
        s1, s2 = T.edge_sides(e)
        edges.append((map_side(s1), map_side(s2), T.edge_ids[e]))
    T2 = IdealTriangulation(edges)

    for _ in range(10):
        c = random_curve(T, rng, max_len=20)
        mapped = CurveOnSurface(
            tuple(
                (perm[t], (i + rot[t]) % 3, (o + rot[t]) % 3) for (t, i, o) in c.steps
            )
        )
        w1 = lr_word(T, c)
        w2 = lr_word(T2, mapped)
        assert [s for _, s in w1.letters] == [s for _, s in w2.letters]
        assert [e for e, _ in w1.letters] == [e for e, _ in w2.letters]


def test_reroute_preserves_surviving_crossings(rng):
    for name in BUILTIN_NAMES:
        T = build_surface(name)
        flippable = [e for e in T.edge_ids if T.is_flippable(e)]
        for _ in range(5):
            c = random_curve(T, rng, max_len=30)
            e = flippable[int(rng.integers(len(flippable)))]
            c2 = reroute_through_flip(T, c, e)
            T2 = T.flip(e)
            c2.validate(T2)
            old = [
                T.edge_ids[T.side_edge((t, o))] for (t, _, o) in c.steps
            ]
            new = [
                T2.edge_ids[T2.side_edge((t, o))] for (t, _, o) in c2.steps
            ]
            assert [x for x in old if x != e].count("e1") == [
                x for x in new if x != e
            ].count("e1")


def test_unlabeled_canonical_key_invariance():
    T = build_surface("s_1_1")
    key = T.unlabeled_canonical_key()
    for e in T.edge_ids:
        assert T.flip(e).unlabeled_canonical_key() == key
    assert build_surface("s_0_3").unlabeled_canonical_key() != key
