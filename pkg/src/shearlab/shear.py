"""Shear vectors, completeness constraints, holonomy words, and geometric flips.

Developments place the starting ideal triangle at (-1, 1, oo) with the
entering edge on the geodesic [-1, 1].  Crossing to the right edge and then
shearing along it is the map z -> e^s (z - 1) + 1, crossing to the left edge
z -> e^-s (z + 1) - 1; both are encoded by V_eps(s) = H_eps(s) P_eps below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import GeometryError, ValidationError
from .moebius import MobiusMap, compose, trace_to_length
from .triangulation import (
    CurveOnSurface,
    IdealTriangulation,
    LRSequence,
    build_surface,
    lr_word,
)

MAX_ABS_SHEAR = 500.0
COMPLETE_TOL = 1e-9

__all__ = [
    "ShearVector",
    "HolonomyWordResult",
    "basic_matrix_P",
    "basic_matrix_H",
    "basic_matrix_V",
    "holonomy_of_word",
    "curve_length",
    "check_complete",
    "completeness_matrix",
    "puncture_word",
    "flip_shears",
    "shear_from_four_lengths",
    "based_loop_holonomy",
    "marking_matrices",
    "random_complete_shears",
    "make_incomplete",
]

# Rotates the standard triangle: -1 -> 1 -> oo -> -1 (frame relabeling).
_R3 = MobiusMap(-0.5, -1.5, 0.5, -0.5)


def basic_matrix_P(eps: int) -> MobiusMap:
    """Parabolic carrying the entering edge [-1,1] onto the leaving edge."""
    if eps not in (-1, 1):
        raise ValidationError("eps must be +-1")
    return MobiusMap(1.5, 0.5 * eps, -0.5 * eps, 0.5)


def basic_matrix_H(eps: int, s: float) -> MobiusMap:
    """Shear by s along the leaving edge ([1,oo] for eps=-1, [-1,oo] for eps=+1)."""
    if eps not in (-1, 1):
        raise ValidationError("eps must be +-1")
    return MobiusMap(
        math.exp(-eps * s / 2.0), -2.0 * math.sinh(s / 2.0), 0.0, math.exp(eps * s / 2.0)
    )


def basic_matrix_V(eps: int, s: float) -> MobiusMap:
    """One full crossing: V_eps(s) = H_eps(s) o P_eps."""
    return compose(basic_matrix_H(eps, s), basic_matrix_P(eps))


@dataclass(frozen=True)
class ShearVector:
    """One real shear per edge of a triangulation, indexed in edge-label order."""

    triangulation: IdealTriangulation
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != self.triangulation.num_edges:
            raise ValidationError(
                f"expected {self.triangulation.num_edges} shears, got {len(vals)}"
            )
        for v in vals:
            if not math.isfinite(v):
                raise ValidationError("shears must be finite")
            if abs(v) > MAX_ABS_SHEAR:
                raise ValidationError(f"|shear| exceeds {MAX_ABS_SHEAR}")
        object.__setattr__(self, "values", vals)

    @staticmethod
    def zeros(T: IdealTriangulation) -> "ShearVector":
        return ShearVector(T, (0.0,) * T.num_edges)

    @staticmethod
    def from_mapping(T: IdealTriangulation, mapping) -> "ShearVector":
        if set(mapping) != set(T.edge_ids):
            raise ValidationError("shear mapping must cover exactly the edge labels")
        return ShearVector(T, tuple(float(mapping[e]) for e in T.edge_ids))

    def value(self, edge_id: str) -> float:
        return self.values[self.triangulation.edge_index[edge_id]]

    def norm(self, kind: str = "euclidean") -> float:
        v = self.values
        if kind == "euclidean":
            return math.sqrt(sum(x * x for x in v))
        if kind == "sup":
            return max(abs(x) for x in v)
        if kind == "l1":
            return sum(abs(x) for x in v)
        raise ValidationError(f"unknown norm {kind!r}")

    def residuals(self) -> tuple[float, ...]:
        return check_complete(self)

    def is_complete(self, tol: float = COMPLETE_TOL) -> bool:
        return all(abs(r) <= tol for r in self.residuals())

    def to_dict(self) -> dict:
        return {
            "surface": self.triangulation.surface_ref(),
            "shears": {e: v for e, v in zip(self.triangulation.edge_ids, self.values)},
        }

    @staticmethod
    def from_dict(d: dict) -> "ShearVector":
        T = build_surface(d["surface"])
        return ShearVector.from_mapping(T, d["shears"])


def completeness_matrix(T: IdealTriangulation) -> np.ndarray:
    """n x E matrix whose rows sum the shears around each puncture (with multiplicity)."""
    M = np.zeros((T.punctures, T.num_edges))
    for p, cyc in enumerate(T.corner_cycles):
        for (t, c) in cyc:
            M[p, T.side_edge((t, c))] += 1.0
    return M


def check_complete(s: ShearVector) -> tuple[float, ...]:
    """Per-puncture sums of incident shears; all zero iff the structure is complete."""
    M = completeness_matrix(s.triangulation)
    return tuple(float(x) for x in M @ np.asarray(s.values))


def puncture_word(T: IdealTriangulation, puncture: int) -> LRSequence:
    """Left-right word of a small loop around the given puncture (all right turns)."""
    cyc = T.corner_cycles[puncture]
    return LRSequence(tuple((T.edge_ids[T.side_edge(c)], -1) for c in cyc))


@dataclass(frozen=True)
class HolonomyWordResult:
    matrix: MobiusMap
    word_length: int
    classification: str
    degenerate: bool = False
    trace: float = 0.0


_WORD_FLOAT_BUDGET = 30.0  # sum of |s|/2 beyond which entries outrange doubles


def _word_budget(s: ShearVector, w: LRSequence) -> float:
    return sum(abs(s.value(e)) / 2.0 + 1.1 for e, _ in w.letters)


def _raw_mobius(a, b, c, d) -> MobiusMap:
    m = object.__new__(MobiusMap)
    object.__setattr__(m, "a", a)
    object.__setattr__(m, "b", b)
    object.__setattr__(m, "c", c)
    object.__setattr__(m, "d", d)
    return m


def _holonomy_word_mp(s: ShearVector, w: LRSequence) -> HolonomyWordResult:
    import mpmath as mp

    mp.mp.dps = 30 + int(0.9 * _word_budget(s, w))
    g = mp.matrix([[1, 0], [0, 1]])
    for edge_id, eps in w.letters:
        sv = mp.mpf(s.value(edge_id))
        H = mp.matrix(
            [[mp.e ** (-eps * sv / 2), mp.e ** (-sv / 2) - mp.e ** (sv / 2)],
             [0, mp.e ** (eps * sv / 2)]]
        )
        P = mp.matrix([[mp.mpf(3) / 2, mp.mpf(eps) / 2], [-mp.mpf(eps) / 2, mp.mpf(1) / 2]])
        g = g * (H * P)
    tr = float(g[0, 0] + g[1, 1])
    if abs(abs(tr) - 2.0) <= 1e-8:
        cls = "parabolic"
    else:
        cls = "hyperbolic" if abs(tr) > 2.0 else "elliptic"
    matrix = _raw_mobius(*(float(g[i, j]) for i in range(2) for j in range(2)))
    return HolonomyWordResult(matrix, len(w), cls, trace=tr)


def holonomy_of_word(
    s: ShearVector, w: LRSequence, chunk_size: int | None = None
) -> HolonomyWordResult:
    """Ordered product of V_eps(shear) over the word letters.

    chunk_size groups the product into associative blocks; the result must not
    depend on the grouping (up to roundoff).  Words whose entries outrange
    double precision are evaluated in extended precision; the trace and the
    classification stay accurate, the matrix entries are then best-effort.
    """
    T = s.triangulation
    for edge_id, _ in w.letters:
        if edge_id not in T.edge_index:
            raise ValidationError(f"edge {edge_id!r} not on the triangulation")
    if not w.letters:
        return HolonomyWordResult(
            MobiusMap.identity(), 0, "parabolic", degenerate=True, trace=2.0
        )
    if _word_budget(s, w) > _WORD_FLOAT_BUDGET:
        return _holonomy_word_mp(s, w)
    mats = [basic_matrix_V(eps, s.value(e)) for e, eps in w.letters]
    try:
        if chunk_size is None or chunk_size <= 1:
            g = reduce(compose, mats)
        else:
            while len(mats) > 1:
                mats = [
                    reduce(compose, mats[i : i + chunk_size])
                    for i in range(0, len(mats), chunk_size)
                ]
            g = mats[0]
    except GeometryError:
        return _holonomy_word_mp(s, w)
    return HolonomyWordResult(g, len(w), g.classify(), trace=g.trace())


def curve_length(s: ShearVector, curve: CurveOnSurface) -> float:
    """Hyperbolic length of the closed geodesic in the strip's homotopy class."""
    res = holonomy_of_word(s, lr_word(s.triangulation, curve))
    if res.classification != "hyperbolic":
        raise GeometryError(
            f"curve degenerate for this metric / inconsistent data ({res.classification})"
        )
    return trace_to_length(res.trace)


# -- developments -----------------------------------------------------------

def _det2(p, q):
    return p[0] * q[1] - q[0] * p[1]


class _FloatOps:
    """Plain double-precision backend for developments."""

    exp = staticmethod(math.exp)
    log = staticmethod(math.log)
    sqrt = staticmethod(math.sqrt)

    @staticmethod
    def number(x):
        return float(x)

    @staticmethod
    def is_bad(x):
        return not math.isfinite(x)


class _MpOps:
    """Arbitrary-precision backend; used when local shears are large enough
    that developed ideal points collide in double precision."""

    def __init__(self, dps: int):
        import mpmath

        self.mp = mpmath.mp
        self.dps = dps
        self.number = mpmath.mpf
        self.exp = mpmath.exp
        self.log = mpmath.log
        self.sqrt = mpmath.sqrt

    @staticmethod
    def is_bad(x):
        return False


def _normalize(u, v, ops=_FloatOps):
    h = ops.sqrt(u * u + v * v)
    if h == 0.0 or ops.is_bad(h):
        raise GeometryError("development degenerate")
    return (u / h, v / h)


def develop_across(p, q, r, s, ops=_FloatOps):
    """Ideal vertex of the neighbor across side p->q of ccw triangle (p, q, r),
    developed so that the shear on [p, q] equals s.  Points are homogeneous pairs."""
    mu = _det2(q, r)
    lam = ops.exp(s) * _det2(r, p)
    return _normalize(mu * p[0] - lam * q[0], mu * p[1] - lam * q[1], ops)


def _quad_shear(x1, x2, x3, x4, ops=_FloatOps, coincidence_tol=1e-13):
    """Cross-ratio shear of the diagonal [x1, x3]; homogeneous-pair inputs."""
    pts = [_normalize(*x, ops) for x in (x1, x2, x3, x4)]
    if coincidence_tol > 0.0:
        for i in range(4):
            for j in range(i + 1, 4):
                if abs(_det2(pts[i], pts[j])) <= coincidence_tol:
                    raise GeometryError("development degenerate")
    ratio = (_det2(pts[0], pts[1]) * _det2(pts[2], pts[3])) / (
        _det2(pts[0], pts[3]) * _det2(pts[1], pts[2])
    )
    if ratio <= 0.0:
        raise GeometryError("points not in cyclic order")
    return ops.log(ratio)


_DEV_FLOAT_LIMIT = 18.0  # exponent budget beyond which doubles lose the vertices


def flip_shears(s: ShearVector, edge_id: str, _complete_tol: float = 1e-6) -> ShearVector:
    """Flip the edge geometrically: develop the two adjacent triangles and the
    neighbors of the quad, re-diagonalize, and recompute the affected shears
    from cross-ratios.  All other shears are unchanged.

    Developed vertices separate only like exp(-|s|), so for large local shears
    the same development runs on an arbitrary-precision backend.
    """
    T = s.triangulation
    if not all(abs(r) <= _complete_tol for r in s.residuals()):
        raise GeometryError("flip_shears requires a complete shear vector")
    fd = T.flip_data(edge_id)
    # developed vertices separate like exp(-budget); see _DEV_FLOAT_LIMIT
    budget = abs(s.values[fd.edge]) + 2.0 * max(
        abs(s.values[T.side_edge(sl)]) for sl in fd.slots
    )
    if budget <= _DEV_FLOAT_LIMIT:
        ops = _FloatOps
        tol = 1e-13
    else:
        import mpmath

        ops = _MpOps(dps=30 + int(0.5 * budget))
        mpmath.mp.dps = ops.dps
        tol = 0.0
    one = ops.number(1.0)
    se = ops.number(s.values[fd.edge])

    # Base quad: tA = (v1, v2, v3) ccw anchored at (-1, 1, oo); diagonal [v3, v1].
    v1, v2, v3 = (-one, one), (one, one), (one, one * 0)
    v4 = develop_across(v3, v1, v2, se, ops)

    # slot -> (p, q, r of the old triangle, opposite vertex in the new triangle)
    slot_geometry = {
        0: (v1, v2, v3, v4),
        1: (v2, v3, v1, v4),
        2: (v3, v4, v1, v2),
        3: (v4, v1, v3, v2),
    }

    new_values = list(s.values)
    try:
        new_values[fd.edge] = float(_quad_shear(v2, v3, v4, v1, ops, tol))
        seen: dict[int, float] = {}
        for j, slot in enumerate(fd.slots):
            p, q, r, n1 = slot_geometry[j]
            f = T.side_edge(slot)
            sf = ops.number(s.values[f])
            partner = T.glued(slot)
            if partner in fd.slots:
                # The neighbor across [p, q] is another lift of the quad itself;
                # develop that lift and flip it too.
                w = develop_across(p, q, r, sf, ops)
                jp = fd.slots.index(partner)
                if jp in (0, 2):
                    n2 = develop_across(w, q, p, se, ops)
                else:
                    n2 = develop_across(p, w, q, se, ops)
            else:
                n2 = develop_across(p, q, r, sf, ops)
            val = float(_quad_shear(p, n2, q, n1, ops, tol))
            if f in seen:
                if abs(seen[f] - val) > 1e-7:
                    raise GeometryError("development degenerate")
            else:
                seen[f] = val
                new_values[f] = val
    except GeometryError as exc:
        if "cyclic order" in str(exc) or "coincident" in str(exc):
            raise GeometryError("development degenerate") from exc
        raise
    return ShearVector(T.flip(edge_id), tuple(new_values))


def shear_from_four_lengths(
    g1: MobiusMap, g2: MobiusMap, g3: MobiusMap, g4: MobiusMap
) -> float:
    """Shear of the diagonal [x1, x3] from four parabolic matrices whose fixed
    points are the quad's ideal vertices in counterclockwise order."""
    gs = (g1, g2, g3, g4)
    cs, xs = [], []
    for g in gs:
        if g.classify() != "parabolic":
            raise GeometryError("inputs must be parabolic")
        scale = max(abs(g.a), abs(g.b), abs(g.c), abs(g.d))
        if abs(g.c) <= 1e-12 * scale:
            raise GeometryError("fixed point at infinity; conjugate first")
        cs.append(g.c)
        xs.append((g.a - g.d) / (2.0 * g.c))
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(xs[i] - xs[j]) <= 1e-12 * max(1.0, abs(xs[i]), abs(xs[j])):
                raise GeometryError("coincident fixed points")

    def factor(i, j):
        return cs[i] * cs[j] * (xs[i] - xs[j]) ** 2

    num = factor(0, 1) * factor(2, 3)
    den = factor(0, 3) * factor(1, 2)
    if num * den <= 0.0:
        raise GeometryError("points not in cyclic order")
    return 0.5 * math.log(num / den)


# -- based loops evaluated in the V-matrix calculus ---------------------------

def based_loop_holonomy(s: ShearVector, sides) -> MobiusMap:
    """Holonomy of a based dual loop given by its crossing side sequence.

    The loop starts and ends inside triangle 0; the result is expressed in the
    frame placing triangle 0 at (-1, 1, oo) with side 0 on [-1, 1].
    """
    T = s.triangulation
    t, bottom = 0, 0
    F = MobiusMap.identity()
    for side in sides:
        if side[0] != t:
            raise ValidationError("crossing sequence leaves the current triangle")
        j = side[1]
        sj = s.values[T.side_edge(side)]
        if j == bottom:
            F = compose(F, _R3)
            bottom = (bottom + 1) % 3
        if j == (bottom + 1) % 3:
            F = compose(F, basic_matrix_V(-1, sj))
        elif j == (bottom + 2) % 3:
            F = compose(F, basic_matrix_V(1, sj))
        else:
            raise ValidationError("invalid crossing")
        t, bottom = T.glued(side)
    if t != 0:
        raise ValidationError("crossing sequence is not a based loop")
    for _ in range((3 - bottom) % 3):
        F = compose(F, _R3)
    return F


def marking_matrices(s: ShearVector) -> dict[str, MobiusMap]:
    """Holonomy matrices of the dual-spanning-tree generator loops, keyed by
    the label of the non-tree edge each generator crosses."""
    T = s.triangulation
    return {
        T.edge_ids[e]: based_loop_holonomy(s, T.generator_loop_sides(e))
        for e in T.nontree_edges
    }


def corner_parabolic(s: ShearVector, t: int, c: int) -> MobiusMap:
    """Parabolic fixing the developed position of corner (t, c) on the lift of
    t reached from the base triangle through the dual spanning tree."""
    return based_loop_holonomy(s, s.triangulation.based_link_loop_sides(t, c))


# -- sampling helpers -----------------------------------------------------------

def random_complete_shears(
    T: IdealTriangulation, rng, scale: float = 1.0
) -> ShearVector:
    """Gaussian sample projected onto the completeness subspace."""
    C = completeness_matrix(T)
    z = rng.standard_normal(T.num_edges) * scale
    if C.size:
        sol, *_ = np.linalg.lstsq(C, C @ z, rcond=None)
        z = z - sol
    return ShearVector(T, tuple(float(x) for x in z))


def make_incomplete(s: ShearVector, rng, min_residual: float = 0.15) -> ShearVector:
    """Perturb off the completeness subspace so every puncture sum has
    magnitude at least min_residual."""
    T = s.triangulation
    C = completeness_matrix(T)
    signs = np.where(rng.standard_normal(T.punctures) >= 0, 1.0, -1.0)
    target = signs * (min_residual * (1.0 + rng.random(T.punctures)))
    v = np.linalg.pinv(C) @ target
    vals = tuple(float(x) for x in (np.asarray(s.values) + v))
    return ShearVector(T, vals)
