"""Real 2x2 matrix calculus for isometries of the upper half-plane.

Matrices are kept unimodular (determinant renormalized to 1 after every
product) and are only meaningful up to an overall sign, so traces are
compared via their absolute value throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError

DET_TOL = 1e-12
PARABOLIC_TOL = 1e-8

__all__ = [
    "MobiusMap",
    "BoundaryPoint",
    "INFINITY",
    "compose",
    "trace_to_length",
    "parabolic_fixed_point",
    "cross_ratio_shear",
    "trace_product_parabolics",
]


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the ideal boundary R u {oo}; infinity is an explicit tag."""

    value: float = 0.0
    at_infinity: bool = False

    def __post_init__(self):
        if self.at_infinity:
            object.__setattr__(self, "value", 0.0)
        elif not math.isfinite(self.value):
            raise GeometryError("finite boundary point must have a finite value")

    @staticmethod
    def finite(x: float) -> "BoundaryPoint":
        return BoundaryPoint(float(x))

    def homogeneous(self) -> tuple[float, float]:
        """Return (u, v) with the point equal to u/v, normalized to unit length."""
        if self.at_infinity:
            return (1.0, 0.0)
        h = math.hypot(self.value, 1.0)
        return (self.value / h, 1.0 / h)

    def __repr__(self):
        return "oo" if self.at_infinity else f"{self.value!r}"


INFINITY = BoundaryPoint(at_infinity=True)


def _from_homogeneous(u: float, v: float) -> BoundaryPoint:
    h = math.hypot(u, v)
    if h == 0.0 or not math.isfinite(h):
        raise GeometryError("degenerate homogeneous boundary point")
    u, v = u / h, v / h
    if abs(v) <= 1e-14:
        return INFINITY
    return BoundaryPoint(u / v)


@dataclass(frozen=True)
class MobiusMap:
    """Unimodular real 2x2 matrix acting on the upper half-plane, up to sign."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        ad = self.a * self.d
        bc = self.b * self.c
        det = ad - bc
        if not math.isfinite(det):
            raise GeometryError("matrix entries overflow")
        # ad - bc cancels catastrophically for large entries; only renormalize
        # when the deviation from det 1 exceeds the evaluation error, otherwise
        # rescaling would inject that error into the entries.
        err = 8.0 * 2.220446049250313e-16 * (abs(ad) + abs(bc)) + 1e-15
        if abs(det - 1.0) <= err:
            return
        if det <= 0.0:
            raise GeometryError(f"matrix must have positive determinant, got {det}")
        s = 1.0 / math.sqrt(det)
        object.__setattr__(self, "a", self.a * s)
        object.__setattr__(self, "b", self.b * s)
        object.__setattr__(self, "c", self.c * s)
        object.__setattr__(self, "d", self.d * s)

    @staticmethod
    def identity() -> "MobiusMap":
        return MobiusMap(1.0, 0.0, 0.0, 1.0)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def trace(self) -> float:
        return self.a + self.d

    def classify(self, tol: float = PARABOLIC_TOL) -> str:
        """One of 'elliptic', 'parabolic', 'hyperbolic' (sign-insensitive)."""
        t = abs(self.trace())
        if abs(t - 2.0) <= tol:
            return "parabolic"
        return "hyperbolic" if t > 2.0 else "elliptic"

    def is_identity(self, tol: float = 1e-9) -> bool:
        return (
            abs(abs(self.a) - 1.0) <= tol
            and abs(abs(self.d) - 1.0) <= tol
            and abs(self.b) <= tol
            and abs(self.c) <= tol
            and self.a * self.d > 0.0
        )

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return compose(self, other)

    def apply(self, p: BoundaryPoint) -> BoundaryPoint:
        u, v = p.homogeneous()
        return _from_homogeneous(self.a * u + self.b * v, self.c * u + self.d * v)

    def apply_complex(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def entries(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def distance_to(self, other: "MobiusMap") -> float:
        """Max entry deviation, minimized over the overall sign."""
        direct = max(
            abs(x - y) for x, y in zip(self.entries(), other.entries())
        )
        flipped = max(
            abs(x + y) for x, y in zip(self.entries(), other.entries())
        )
        return min(direct, flipped)


def compose(m1: MobiusMap, m2: MobiusMap) -> MobiusMap:
    """Matrix product m1 * m2, renormalized to determinant 1."""
    return MobiusMap(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def trace_to_length(t: float) -> float:
    """Translation length of a hyperbolic element with trace t, via |t| = 2 cosh(l/2)."""
    if abs(t) < 2.0:
        raise GeometryError(f"non-hyperbolic element (|trace| = {abs(t)} < 2)")
    return 2.0 * math.acosh(abs(t) / 2.0)


def parabolic_fixed_point(m: MobiusMap, tol: float = PARABOLIC_TOL) -> BoundaryPoint:
    """The unique boundary fixed point (A - D) / (2C) of a parabolic matrix."""
    if m.classify(tol) != "parabolic":
        raise GeometryError(f"not parabolic (|trace| = {abs(m.trace())})")
    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
    if m.is_identity():
        raise GeometryError("identity has no unique fixed point")
    if abs(m.c) <= 1e-12 * scale:
        return INFINITY
    return BoundaryPoint((m.a - m.d) / (2.0 * m.c))


def _det2(p: tuple[float, float], q: tuple[float, float]) -> float:
    return p[0] * q[1] - q[0] * p[1]


def cross_ratio_shear(
    x1: BoundaryPoint, x2: BoundaryPoint, x3: BoundaryPoint, x4: BoundaryPoint
) -> float:
    """Shear of the diagonal [x1, x3] of the ideal quadrilateral (x1, x2, x3, x4).

    The four points must be pairwise distinct and listed in counterclockwise
    order on the boundary circle; the value is
    ln [(x1-x2)(x3-x4)] / [(x1-x4)(x2-x3)], evaluated projectively so that a
    point at infinity is handled by the exact cross-ratio limit.
    """
    pts = [x1, x2, x3, x4]
    hom = [p.homogeneous() for p in pts]
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(_det2(hom[i], hom[j])) <= 1e-13:
                raise GeometryError(f"coincident boundary points {pts[i]} and {pts[j]}")
    d12 = _det2(hom[0], hom[1])
    d34 = _det2(hom[2], hom[3])
    d14 = _det2(hom[0], hom[3])
    d23 = _det2(hom[1], hom[2])
    ratio = (d12 * d34) / (d14 * d23)
    if ratio <= 0.0:
        raise GeometryError("points not in cyclic order")
    return math.log(ratio)


def trace_product_parabolics(g1: MobiusMap, g2: MobiusMap) -> float:
    """Trace of g1*g2 for parabolic g1, g2 with finite fixed points.

    Computed as tr(g1) tr(g2) / 2 - C1 C2 (x1 - x2)^2 without forming the
    product; agrees with trace(compose(g1, g2)).
    """
    for g in (g1, g2):
        if g.classify() != "parabolic":
            raise GeometryError("inputs must be parabolic")
        scale = max(abs(g.a), abs(g.b), abs(g.c), abs(g.d))
        if abs(g.c) <= 1e-12 * scale:
            raise GeometryError("fixed point at infinity; conjugate first")
    x1 = (g1.a - g1.d) / (2.0 * g1.c)
    x2 = (g2.a - g2.d) / (2.0 * g2.c)
    return 0.5 * g1.trace() * g2.trace() - g1.c * g2.c * (x1 - x2) ** 2
