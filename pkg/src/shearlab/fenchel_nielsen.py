"""Fenchel-Nielsen coordinates for built-in surfaces and conversion to shears.

Twist convention: length units along the pants curve, with tau = 0 at the
point where the feet of the perpendicular between the boundary copies of the
curve line up (so the dual curve has minimal length there), and a full twist
tau -> tau + l acting as the Dehn twist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import GeometryError, ValidationError
from .moebius import MobiusMap, compose
from .shear import ShearVector
from .triangulation import IdealTriangulation

__all__ = [
    "FNPoint",
    "FuchsianRep",
    "fn_to_holonomy",
    "holonomy_to_shear",
    "edge_parabolic_lifts",
    "twist_from_lengths_case11",
    "twist_from_lengths_case04",
    "hexagon_h",
    "perpendicular_d",
]

Word = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class FNPoint:
    """Lengths and twists along a pants decomposition (3g-3+n entries each)."""

    surface: str
    lengths: tuple[float, ...]
    twists: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        object.__setattr__(self, "twists", tuple(float(x) for x in self.twists))
        if len(self.lengths) != len(self.twists):
            raise ValidationError("need one twist per length")
        if any(l <= 0 for l in self.lengths):
            raise ValidationError("lengths must be positive")

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "lengths": list(self.lengths),
            "twists": list(self.twists),
        }

    @staticmethod
    def from_dict(d: dict) -> "FNPoint":
        return FNPoint(d["surface"], tuple(d["lengths"]), tuple(d["twists"]))


@dataclass(frozen=True)
class FuchsianRep:
    """Discrete faithful representation given on named generators.

    marking maps the non-tree edge labels of the associated triangulation to
    generator words, tying the representation to the strip-holonomy marking
    used by the shear machinery.
    """

    generators: dict[str, MobiusMap]
    peripheral_words: tuple[Word, ...]
    relator_words: tuple[Word, ...] = ()
    marking: dict[str, Word] = field(default_factory=dict)

    def evaluate(self, word: Word) -> MobiusMap:
        g = MobiusMap.identity()
        for name, sign in word:
            m = self.generators[name]
            g = compose(g, m if sign > 0 else m.inverse())
        return g

    def relator_check(self) -> float:
        if not self.relator_words:
            return 0.0
        return max(
            self.evaluate(w).distance_to(MobiusMap.identity())
            for w in self.relator_words
        )

    def peripherals(self) -> list[MobiusMap]:
        return [self.evaluate(w) for w in self.peripheral_words]

    def marking_matrices(self) -> dict[str, MobiusMap]:
        return {lab: self.evaluate(w) for lab, w in self.marking.items()}


def _translation(t: float) -> MobiusMap:
    return MobiusMap(math.exp(t / 2.0), 0.0, 0.0, math.exp(-t / 2.0))


def _fn_s11(length: float, twist: float) -> FuchsianRep:
    c = math.cosh(length / 2.0)
    s = math.sinh(length / 2.0)
    A = _translation(length)
    # Feet-aligned base: axis of B crosses the imaginary axis orthogonally,
    # with tr B = 2 cosh(d/2) = 2 coth(l/2); the cusp relation
    # x^2 + y^2 + z^2 = xyz then holds identically.
    B0 = MobiusMap(c / s, 1.0 / s, 1.0 / s, c / s)
    B = compose(_translation(twist), B0)
    commutator: Word = (("a", 1), ("b", 1), ("a", -1), ("b", -1))
    return FuchsianRep(
        generators={"a": A, "b": B},
        peripheral_words=(commutator,),
        marking={"e2": (("a", 1),), "e3": (("b", 1),)},
    )


def _parabolic_at(p: float, h: float) -> MobiusMap:
    return MobiusMap(1.0 + h * p, -h * p * p, h, 1.0 - h * p)


def _pants_generators(length: float):
    """Parabolic y1, y2 with y1 y2 = translation by `length` along [0, oo]."""
    p = math.tanh(length / 4.0)
    y1 = _parabolic_at(p, 1.0)
    y2 = compose(y1.inverse(), _translation(length))
    if abs(abs(y2.trace()) - 2.0) > 1e-9:
        raise GeometryError("pants construction failed to produce a parabolic")
    return y1, y2


_ROT_PI = MobiusMap(0.0, 1.0, -1.0, 0.0)  # order-2 rotation about i, reverses [0, oo]


def _fn_s04(length: float, twist: float) -> FuchsianRep:
    y1, y2 = _pants_generators(length)
    Tt = _translation(twist)
    x3 = compose(compose(Tt, compose(compose(_ROT_PI, y1), _ROT_PI.inverse())), Tt.inverse())
    x4 = compose(compose(Tt, compose(compose(_ROT_PI, y2), _ROT_PI.inverse())), Tt.inverse())
    relator: Word = (("x1", 1), ("x2", 1), ("x3", 1), ("x4", 1))
    return FuchsianRep(
        generators={"x1": y1, "x2": y2, "x3": x3, "x4": x4},
        peripheral_words=((("x1", 1),), (("x2", 1),), (("x3", 1),), (("x4", 1),)),
        relator_words=(relator,),
    )


def fn_to_holonomy(surface: str, p: FNPoint) -> FuchsianRep:
    """Fuchsian representation realizing the given Fenchel-Nielsen point."""
    if len(p.lengths) != 1:
        raise ValidationError("built-in FN surfaces have a single pants curve")
    if surface == "s_1_1":
        return _fn_s11(p.lengths[0], p.twists[0])
    if surface == "s_0_4":
        return _fn_s04(p.lengths[0], p.twists[0])
    raise ValidationError(f"unsupported surface {surface!r} (use s_1_1 or s_0_4)")


# -- holonomy -> shear ---------------------------------------------------------

def _based_word(T: IdealTriangulation, sides) -> list[tuple[int, int]]:
    return T.word_of_sides(sides)


def _evaluate_edge_word(gens: dict[str, MobiusMap], T: IdealTriangulation, word) -> MobiusMap:
    g = MobiusMap.identity()
    for e, sign in word:
        m = gens[T.edge_ids[e]]
        g = compose(g, m if sign > 0 else m.inverse())
    return g


def edge_parabolic_lifts(
    T: IdealTriangulation, gens: dict[str, MobiusMap]
) -> dict[str, tuple[MobiusMap, MobiusMap, MobiusMap, MobiusMap]]:
    """For each edge, four parabolics whose fixed points are the ideal vertices
    of the edge's quadrilateral, in counterclockwise order with the edge as the
    diagonal [x1, x3].

    gens maps each non-tree edge label to the holonomy of its dual generator
    loop (the strip-based marking).
    """
    lifts = {}
    for e in range(T.num_edges):
        (tA, iA), (tB, iB) = T.edge_sides(e)
        if tA == tB:
            continue  # self-folded: no embedded quadrilateral
        def corner(t, c):
            return _evaluate_edge_word(gens, T, _based_word(T, T.based_link_loop_sides(t, c)))
        # ccw quad (v1, v2, v3, v4); the diagonal cross-ratio order is (v3, v4, v1, v2)
        g_v3 = corner(tA, iA)
        g_v1 = corner(tA, (iA + 1) % 3)
        g_v2 = corner(tA, (iA + 2) % 3)
        transport = _evaluate_edge_word(
            gens, T, _based_word(T, T.generator_loop_sides(e))
        )
        raw_v4 = corner(tB, (iB + 2) % 3)
        g_v4 = compose(compose(transport, raw_v4), transport.inverse())
        lifts[T.edge_ids[e]] = (g_v3, g_v4, g_v1, g_v2)
    return lifts


def holonomy_to_shear(
    rep: FuchsianRep | dict[str, MobiusMap],
    T: IdealTriangulation,
    lifts: dict[str, tuple[MobiusMap, ...]] | None = None,
    residual_tol: float = 1e-7,
) -> ShearVector:
    """Shear coordinates of the hyperbolic structure of a marked representation.

    Each edge's shear is the cross-ratio shear of the fixed points of the four
    supplied parabolic lifts; the result must satisfy the completeness
    constraints (that is the cusp condition) up to residual_tol.
    """
    if lifts is None:
        if isinstance(rep, FuchsianRep):
            gens = rep.marking_matrices()
        else:
            gens = rep
        missing = [T.edge_ids[e] for e in T.nontree_edges if T.edge_ids[e] not in gens]
        if missing:
            raise ValidationError(f"marking does not cover non-tree edges {missing}")
        lifts = edge_parabolic_lifts(T, gens)
    from .shear import _quad_shear

    values = []
    for lab in T.edge_ids:
        quad = lifts.get(lab)
        if quad is None:
            raise GeometryError(f"no parabolic lifts for edge {lab}")
        # fixed points taken projectively as the image of the nilpotent
        # g - sign(tr) I (no infinity special case); the parabolic trace of a
        # float word deviates from +-2 by its own rounding scale, so the class
        # check tolerates exactly that
        pts = []
        for g in quad:
            scale = max(abs(g.a), abs(g.b), abs(g.c), abs(g.d))
            tol = 1e-8 + 64.0 * 2.220446049250313e-16 * scale * scale
            if abs(abs(g.trace()) - 2.0) > tol:
                raise GeometryError("lift is not parabolic")
            sgn = 1.0 if g.trace() > 0 else -1.0
            col1 = (g.a - sgn, g.c)
            col2 = (g.b, g.d - sgn)
            pts.append(col1 if col1[0] ** 2 + col1[1] ** 2 >= col2[0] ** 2 + col2[1] ** 2 else col2)
        values.append(_quad_shear(*pts))
    sv = ShearVector(T, tuple(values))
    bad = [r for r in sv.residuals() if abs(r) > residual_tol]
    if bad:
        raise GeometryError(f"shear vector not complete (residuals {bad})")
    return sv


# -- twist from lengths ----------------------------------------------------------

def twist_from_lengths_case11(l_mu: float, l_alpha: float, l_delta: float) -> float:
    """cosh(tau) for a pants curve inside a one-holed torus, from the lengths of
    the crossing curve mu, the pants curve alpha, and the boundary delta."""
    if min(l_mu, l_alpha) <= 0 or l_delta < 0:
        raise ValidationError("lengths must be positive (boundary may be a cusp: 0)")
    value = (
        (math.cosh(l_mu) + 1.0)
        * (math.cosh(l_alpha) - 1.0)
        / (math.cosh(l_delta / 2.0) + math.cosh(l_alpha))
    ) - 1.0
    if value < 1.0 - 1e-9:
        raise GeometryError("inconsistent length data")
    return max(value, 1.0)


def twist_from_lengths_case04(d: float, h: float, hp: float) -> float:
    """cosh(tau) for a pants curve in a four-holed sphere from the perpendicular
    lengths d (boundary-to-boundary) and h, h' (boundary-to-curve)."""
    if h <= 0 or hp <= 0:
        raise ValidationError("h and h' must be positive")
    den = math.sinh(h) * math.sinh(hp)
    if den == 0.0:
        raise GeometryError("degenerate perpendiculars")
    return (math.cosh(d) - math.cosh(h) * math.cosh(hp)) / den


def hexagon_h(gamma: float, beta: float, delta: float) -> float:
    """Perpendicular from boundary beta to the pants curve gamma, with third
    boundary delta: cosh h sinh(g/2) sinh(b/2) = cosh(d/2) + cosh(g/2) cosh(b/2)."""
    if gamma <= 0 or beta <= 0 or delta < 0:
        raise ValidationError("gamma, beta positive; delta nonnegative")
    ch = (math.cosh(delta / 2.0) + math.cosh(gamma / 2.0) * math.cosh(beta / 2.0)) / (
        math.sinh(gamma / 2.0) * math.sinh(beta / 2.0)
    )
    if ch < 1.0:
        raise GeometryError("inconsistent length data")
    return math.acosh(ch)


def perpendicular_d(tau: float, h: float, hp: float) -> float:
    """Boundary-to-boundary perpendicular from the twist and the two legs:
    cosh d = cosh tau sinh h sinh h' + cosh h cosh h'."""
    if h <= 0 or hp <= 0:
        raise ValidationError("h and h' must be positive")
    return math.acosh(
        math.cosh(tau) * math.sinh(h) * math.sinh(hp) + math.cosh(h) * math.cosh(hp)
    )
