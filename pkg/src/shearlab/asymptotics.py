"""Orbit enumeration over the flip graph and asymptotic verification utilities.

The enumerator walks the flip graph from a base complete shear vector,
deduplicating nodes by the canonical labeled triangulation plus the rounded
shear vector; a node represents a re-marking of the same hyperbolic surface,
so counting nodes inside a norm ball counts mapping classes up to the finite
stabilizer of the base triangulation.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, ValidationError
from .foliation import NormBallSpec, mc_ball_volume
from .shear import ShearVector, flip_shears

__all__ = [
    "OrbitCount",
    "OrbitLimits",
    "enumerate_orbit",
    "fit_exponent",
    "norm_ratio_test",
    "ClosedCone",
    "LinearAsymptote",
    "apl_residual_scan",
    "bounding_check",
    "s11_orbit_fn_sample",
]

# Declared per-surface multiplicity of mapping classes fixing the base
# triangulation pointwise on edges (hyperelliptic involutions).
STABILIZER_MULTIPLICITY = {"s_1_1": 2, "s_0_4": 4}

_ROUND = 6  # shear rounding for node keys
_AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class OrbitLimits:
    max_nodes: int = 200_000
    prune_margin: float | None = None  # None: default dip allowance, then doubling
    certify: bool = True


@dataclass
class OrbitCount:
    norm: str
    radii: tuple[float, ...]
    counts: tuple[int, ...]
    counts_adjusted: tuple[int, ...]
    nodes_expanded: int
    max_depth: int
    prune_margin: float
    stabilizer: int
    certified: bool
    key_collisions: int = 0
    nodes: list = field(default_factory=list, repr=False)

    def count_at(self, L: float) -> int:
        c = 0
        for r, n in zip(self.radii, self.counts):
            if r <= L + 1e-12:
                c = n
        return c


def _node_key(sv: ShearVector):
    return (
        sv.triangulation.canonical_key(),
        tuple(int(round(v * 10**_ROUND)) for v in sv.values),
    )


def _bfs(start: ShearVector, L_stop: float, norm: str, max_nodes: int):
    """Breadth-first flip expansion; nodes with norm > L_stop are not expanded.

    Returns (visited dict key -> (ShearVector, depth, norm), expanded count,
    max depth reached, max single-flip norm change seen, collision count,
    truncated flag)."""
    root_key = _node_key(start)
    visited = {root_key: (start, 0, start.norm(norm))}
    queue = deque([root_key])
    expanded = 0
    max_depth = 0
    max_delta = 0.0
    collisions = 0
    truncated = False
    while queue:
        key = queue.popleft()
        sv, depth, nval = visited[key]
        if nval > L_stop:
            continue
        if expanded >= max_nodes:
            truncated = True
            break
        expanded += 1
        T = sv.triangulation
        for e in T.edge_ids:
            if not T.is_flippable(e):
                continue
            child = flip_shears(sv, e)
            ck = _node_key(child)
            cn = child.norm(norm)
            max_delta = max(max_delta, abs(cn - nval))
            if ck in visited:
                prev = visited[ck][0]
                if max(
                    abs(a - b) for a, b in zip(prev.values, child.values)
                ) > _AUDIT_TOL:
                    collisions += 1
                continue
            visited[ck] = (child, depth + 1, cn)
            max_depth = max(max_depth, depth + 1)
            queue.append(ck)
    return visited, expanded, max_depth, max_delta, collisions, truncated


def enumerate_orbit(
    X: ShearVector,
    L_max: float,
    norm: str = "euclidean",
    limits: OrbitLimits = OrbitLimits(),
    radii: tuple[float, ...] | None = None,
    keep_nodes: bool = False,
) -> OrbitCount:
    """Count flip-graph nodes (marked triangulations of the same surface) whose
    shear vector lies in the norm ball of each given radius <= L_max.

    Nodes beyond L_max + margin are pruned; the count is certified when
    doubling the margin leaves all counts unchanged.
    """
    if not X.is_complete(tol=1e-7):
        raise GeometryError("orbit enumeration requires a complete base point")
    if radii is None:
        radii = (L_max,)
    radii = tuple(sorted(float(r) for r in radii))
    if radii and radii[-1] > L_max + 1e-12:
        raise ValidationError("radius grid exceeds L_max")

    base_norm = X.norm(norm)
    if L_max < base_norm:
        empty = (0,) * len(radii)
        return OrbitCount(norm, radii, empty, empty, 0, 0, 0.0, _stab(X), True)

    # A single flip can change the norm by an amount that grows with the node,
    # so a margin tied to the largest observed change diverges; instead start
    # from a fixed dip allowance and certify by doubling until counts freeze.
    margin = limits.prune_margin if limits.prune_margin is not None else 2.0 + 2.0 * math.log(2.0)

    root_shape = X.triangulation.unlabeled_canonical_key()
    shape_cache: dict = {}

    def same_shape(sv):
        ck = sv.triangulation.canonical_key()
        if ck not in shape_cache:
            shape_cache[ck] = sv.triangulation.unlabeled_canonical_key()
        return shape_cache[ck] == root_shape

    def run(m):
        visited, expanded, depth, _, coll, trunc = _bfs(
            X, L_max + m, norm, limits.max_nodes
        )
        in_ball = [
            (nval, sv)
            for (sv, _, nval) in visited.values()
            if nval <= L_max + 1e-12 and same_shape(sv)
        ]
        counts = tuple(
            sum(1 for nval, _ in in_ball if nval <= r + 1e-12) for r in radii
        )
        return counts, expanded, depth, coll, trunc, in_ball

    counts, expanded, depth, coll, trunc, in_ball = run(margin)
    certified = False
    if limits.certify and not trunc:
        for _ in range(5):
            counts2, expanded2, depth2, coll2, trunc2, in_ball2 = run(2.0 * margin)
            expanded = max(expanded, expanded2)
            depth = max(depth, depth2)
            coll += coll2
            if trunc2:
                break
            if counts2 == counts:
                certified = True
                break
            margin *= 2.0
            counts, in_ball = counts2, in_ball2
    elif not limits.certify:
        certified = not trunc

    stab = _stab(X)
    oc = OrbitCount(
        norm=norm,
        radii=radii,
        counts=counts,
        counts_adjusted=tuple(stab * c for c in counts),
        nodes_expanded=expanded,
        max_depth=depth,
        prune_margin=margin,
        stabilizer=stab,
        certified=certified,
        key_collisions=coll,
    )
    if keep_nodes:
        oc.nodes = [sv for _, sv in sorted(in_ball, key=lambda t: t[0])]
    return oc


def _stab(X: ShearVector) -> int:
    return STABILIZER_MULTIPLICITY.get(X.triangulation.name or "", 1)


def fit_exponent(oc: OrbitCount, window: tuple[float, float] | None = None):
    """Least-squares fit of log(count) against log(L) on the window.

    Returns (exponent, log-coefficient, r_squared).
    """
    if window is None:
        window = (oc.radii[0], oc.radii[-1])
    pts = [
        (r, c)
        for r, c in zip(oc.radii, oc.counts)
        if window[0] - 1e-12 <= r <= window[1] + 1e-12 and c >= 10
    ]
    if len(pts) < 5:
        raise ValidationError(
            f"need at least 5 grid points with counts >= 10 in the window, have {len(pts)}"
        )
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), res, *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(res[0]) if res.size else float(np.sum((A @ [slope, intercept] - y) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class NormRatioResult:
    observed: float
    predicted: float
    relative_gap: float
    count_a: int
    count_b: int


def norm_ratio_test(
    X: ShearVector,
    L: float,
    norms: tuple[str, str],
    limits: OrbitLimits = OrbitLimits(),
    mc_samples: int = 200_000,
    mc_seed: int = 0,
) -> NormRatioResult:
    """Compare the orbit-count ratio between two norms with the ratio of the
    corresponding unit-ball volumes (the point-density constant cancels)."""
    oc_a = enumerate_orbit(X, L, norms[0], limits)
    oc_b = enumerate_orbit(X, L, norms[1], limits)
    ca, cb = oc_a.count_at(L), oc_b.count_at(L)
    if ca == 0 or cb == 0:
        raise GeometryError("zero counts; increase L")
    if not (oc_a.certified and oc_b.certified):
        raise GeometryError("counts not certified at this L")
    T = X.triangulation
    va, _ = mc_ball_volume(NormBallSpec.for_surface(T, norms[0], 1.0), mc_samples, mc_seed)
    vb, _ = mc_ball_volume(NormBallSpec.for_surface(T, norms[1], 1.0), mc_samples, mc_seed + 1)
    observed = ca / cb
    predicted = va / vb
    gap = abs(observed - predicted) / predicted
    return NormRatioResult(observed, predicted, gap, ca, cb)


# -- asymptotically-piecewise-linear checks ------------------------------------

@dataclass(frozen=True)
class ClosedCone:
    """Intersection of half-spaces {x : R_i(x) >= 0} given by rows of a matrix."""

    functionals: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "functionals", np.atleast_2d(np.asarray(self.functionals, dtype=float))
        )

    def min_functional(self, x) -> float:
        return float(np.min(self.functionals @ np.asarray(x, dtype=float)))

    def contains(self, x, tol: float = 1e-12) -> bool:
        return self.min_functional(x) >= -tol


@dataclass(frozen=True)
class LinearAsymptote:
    slope: float
    constant: float
    t_grid: tuple[float, ...]
    residuals: tuple[float, ...]

    def tail_max_residual(self, fraction: float = 0.5) -> float:
        k = int(len(self.residuals) * (1.0 - fraction))
        return max(self.residuals[k:])


def apl_residual_scan(
    F,
    cone: ClosedCone,
    base,
    direction,
    t_grid,
    tail_fraction: float = 0.5,
) -> LinearAsymptote:
    """Fit F(base + t*direction) by slope*t + constant on the tail of the grid
    and report |F - fit| along the whole ray.

    The ray must stay in the cone with its minimal functional diverging.
    """
    base = np.asarray(base, dtype=float)
    direction = np.asarray(direction, dtype=float)
    ts = np.asarray(sorted(float(t) for t in t_grid))
    if len(ts) < 4:
        raise ValidationError("need at least 4 grid points")
    mins = []
    for t in ts:
        x = base + t * direction
        if not cone.contains(x, tol=1e-9):
            raise GeometryError(f"ray exits the cone at t={t}")
        mins.append(cone.min_functional(x))
    if mins[-1] <= mins[0] or mins[-1] <= 0:
        raise GeometryError("ray does not tend to infinity in the cone")
    values = np.asarray([float(F(base + t * direction)) for t in ts])
    k = int(len(ts) * (1.0 - tail_fraction))
    A = np.vstack([ts[k:], np.ones(len(ts) - k)]).T
    (slope, constant), *_ = np.linalg.lstsq(A, values[k:], rcond=None)
    residuals = np.abs(values - (slope * ts + constant))
    return LinearAsymptote(
        float(slope), float(constant), tuple(float(t) for t in ts),
        tuple(float(r) for r in residuals),
    )


_S11_STRIP_A = ((0, 0, 1), (1, 1, 0))
_S11_STRIP_B = ((0, 0, 2), (1, 2, 0))


def s11_orbit_fn_sample(nodes, norm: str = "euclidean"):
    """Fenchel-Nielsen data of an s_1_1 orbit sample.

    For each node, measures the marked curve pair on the node's triangulation
    (the flip closure keeps the gluing pattern of the base triangulation, so
    the strip patterns transfer verbatim) and recovers |tau| from the one-holed
    torus twist formula with a cusp boundary.

    Returns (fn_points, f_values) suitable for bounding_check.
    """
    from .fenchel_nielsen import twist_from_lengths_case11
    from .shear import curve_length
    from .triangulation import CurveOnSurface

    fn_points = []
    f_values = []
    for sv in nodes:
        a = CurveOnSurface(_S11_STRIP_A)
        b = CurveOnSurface(_S11_STRIP_B)
        l_alpha = curve_length(sv, a)
        l_mu = curve_length(sv, b)
        cosh_tau = twist_from_lengths_case11(l_mu, l_alpha, 0.0)
        tau = math.acosh(min(max(cosh_tau, 1.0), 1e300))
        fn_points.append(((l_alpha,), (tau,)))
        f_values.append(sv.norm(norm))
    return fn_points, f_values


@dataclass(frozen=True)
class BoundingCheckResult:
    sup_ratios: tuple[float, ...]     # per pants curve, over the whole sample
    half_sup_ratios: tuple[float, ...]
    stabilized: bool


def bounding_check(
    fn_points, f_values, stabilize_tol: float = 0.05
) -> BoundingCheckResult:
    """Empirical sup of (l_i + |tau_i|) / F over an orbit sample.

    fn_points: per sample, (lengths tuple, twists tuple); f_values: the norm
    values F > 0.  Stabilized means the sup over the lower half of the sample
    (ordered by F) already agrees with the full sup within stabilize_tol.
    """
    pts = list(fn_points)
    fv = [float(f) for f in f_values]
    if len(pts) != len(fv) or not pts:
        raise ValidationError("need one F value per sample point")
    if any(f <= 0 for f in fv):
        raise ValidationError("F must be positive on the sample")
    k = len(pts[0][0])
    order = sorted(range(len(pts)), key=lambda i: fv[i])
    ratios = [
        [
            (pts[i][0][j] + abs(pts[i][1][j])) / fv[i]
            for i in order
        ]
        for j in range(k)
    ]
    sup_all = tuple(max(r) for r in ratios)
    half = max(1, len(pts) // 2)
    sup_half = tuple(max(r[:half]) for r in ratios)
    stabilized = all(
        (a - h) <= stabilize_tol * a for a, h in zip(sup_all, sup_half)
    )
    return BoundingCheckResult(sup_all, sup_half, stabilized)
