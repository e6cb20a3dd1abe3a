"""Horocyclic measured-foliation coordinates and norm-ball volume estimation.

Edge measures are nonnegative transverse measures; around each edge the shear
is half the alternating sum of the four neighboring quadrilateral side
measures, which identifies the foliation cone with the completeness subspace
of shear space.  Ball volumes in that subspace are estimated by rejection
sampling in an orthonormal frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as _sla
from scipy import optimize as _sopt

from .errors import GeometryError, ValidationError
from .shear import ShearVector, completeness_matrix
from .triangulation import IdealTriangulation

__all__ = [
    "FoliationCoords",
    "NormBallSpec",
    "shear_from_measures",
    "measures_from_shear",
    "mc_ball_volume",
    "n_delta_relative",
]


@dataclass(frozen=True)
class FoliationCoords:
    """Nonnegative corner weights (one per triangle corner, indexed 3t + c);
    each edge's transverse measure is the sum of the two adjacent corner
    weights, and must agree from both sides of the edge."""

    triangulation: IdealTriangulation
    corner_weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.corner_weights)
        if len(w) != 3 * self.triangulation.num_triangles:
            raise ValidationError("need one weight per triangle corner")
        if any(x < -1e-9 for x in w):
            raise ValidationError("corner weights must be nonnegative")
        object.__setattr__(self, "corner_weights", w)
        for e in range(self.triangulation.num_edges):
            m1, m2 = self._side_measures(e)
            if abs(m1 - m2) > 1e-9 * (1.0 + abs(m1) + abs(m2)):
                raise ValidationError(
                    f"edge {self.triangulation.edge_ids[e]} measures disagree across the gluing"
                )

    def _side_measures(self, e: int) -> tuple[float, float]:
        out = []
        for (t, k) in self.triangulation.edge_sides(e):
            out.append(
                self.corner_weights[3 * t + k]
                + self.corner_weights[3 * t + (k + 1) % 3]
            )
        return out[0], out[1]

    def edge_measures(self) -> tuple[float, ...]:
        return tuple(
            0.5 * (a + b)
            for a, b in (self._side_measures(e) for e in range(self.triangulation.num_edges))
        )


def _quad_slots(T: IdealTriangulation, e: int):
    """The four quadrilateral side slots around edge e, ccw: f12, f23, f34, f41."""
    (tA, iA), (tB, iB) = T.edge_sides(e)
    if tA == tB:
        raise GeometryError(
            f"edge {T.edge_ids[e]} is self-folded; no embedded quadrilateral"
        )
    return (
        (tA, (iA + 1) % 3),
        (tA, (iA + 2) % 3),
        (tB, (iB + 1) % 3),
        (tB, (iB + 2) % 3),
    )


def measure_to_shear_matrix(T: IdealTriangulation) -> np.ndarray:
    """Linear map from per-edge measures to shears: around each edge,
    s_e = (m_a + m_c - m_b - m_d) / 2 over the ccw quadrilateral sides."""
    S = np.zeros((T.num_edges, T.num_edges))
    for e in range(T.num_edges):
        signs = (0.5, -0.5, 0.5, -0.5)
        for slot, sgn in zip(_quad_slots(T, e), signs):
            S[e, T.side_edge(slot)] += sgn
    return S


def shear_from_measures(T: IdealTriangulation, measures) -> ShearVector:
    """Shear vector of a measured foliation given by per-edge measures."""
    m = np.asarray([float(x) for x in measures])
    if m.shape != (T.num_edges,):
        raise ValidationError(
            f"label mismatch: need {T.num_edges} per-edge measures, got {m.shape}"
        )
    return ShearVector(T, tuple(float(x) for x in measure_to_shear_matrix(T) @ m))


def _corner_weight_matrix(T: IdealTriangulation) -> np.ndarray:
    """Corner weights from edge measures: w(t,c) = (m_c + m_{c+2} - m_{c+1}) / 2
    over the three sides of the triangle."""
    A = np.zeros((3 * T.num_triangles, T.num_edges))
    for t in range(T.num_triangles):
        for c in range(3):
            A[3 * t + c, T.side_edge((t, c))] += 0.5
            A[3 * t + c, T.side_edge((t, (c + 2) % 3))] += 0.5
            A[3 * t + c, T.side_edge((t, (c + 1) % 3))] -= 0.5
    return A


def measures_from_shear(s: ShearVector) -> FoliationCoords:
    """Invert the foliation-to-shear map on a complete shear vector.

    Among all nonnegative corner-weight solutions, returns the one of minimum
    Euclidean norm (the lift of the foliation is not unique; this fixes a
    deterministic representative).
    """
    T = s.triangulation
    if not s.is_complete(tol=1e-7):
        raise GeometryError("measures_from_shear requires a complete shear vector")
    S = measure_to_shear_matrix(T)
    target = np.asarray(s.values)
    m0, res, *_ = np.linalg.lstsq(S, target, rcond=None)
    if np.linalg.norm(S @ m0 - target) > 1e-9 * (1.0 + np.linalg.norm(target)):
        raise GeometryError("shear outside representable cone")
    N = _sla.null_space(S)
    A = _corner_weight_matrix(T)

    def weights(z):
        return A @ (m0 + N @ z)

    if N.shape[1] == 0:
        w = A @ m0
    else:
        z0 = np.zeros(N.shape[1])
        # make the start point feasible by pushing along the all-ones measure
        ones = np.ones(T.num_edges)
        lam, *_ = np.linalg.lstsq(N, ones, rcond=None)
        if np.linalg.norm(N @ lam - ones) < 1e-9:
            wmin = float(np.min(A @ m0))
            if wmin < 0:
                z0 = lam * (2.0 * abs(wmin))
        res = _sopt.minimize(
            lambda z: float(np.sum(weights(z) ** 2)),
            z0,
            jac=lambda z: 2.0 * (N.T @ (A.T @ weights(z))),
            constraints=[{"type": "ineq", "fun": weights, "jac": lambda z: A @ N}],
            method="SLSQP",
            options={"maxiter": 500, "ftol": 1e-14},
        )
        w = weights(res.x)
        if float(np.min(w)) < -1e-8:
            raise GeometryError("shear outside representable cone")
    w = np.maximum(w, 0.0)
    return FoliationCoords(T, tuple(float(x) for x in w))


# -- norm-ball volumes ------------------------------------------------------------

_NORMS = ("euclidean", "sup", "l1")


@dataclass(frozen=True)
class NormBallSpec:
    """A norm ball in the completeness subspace C of shear space."""

    norm: str
    radius: float
    subspace: np.ndarray  # constraint matrix; C is its null space

    def __post_init__(self):
        if self.norm not in _NORMS:
            raise ValidationError(f"unknown norm {self.norm!r}; use one of {_NORMS}")
        if self.radius <= 0:
            raise ValidationError("radius must be positive")

    @staticmethod
    def for_surface(T: IdealTriangulation, norm: str, radius: float) -> "NormBallSpec":
        return NormBallSpec(norm, radius, completeness_matrix(T))

    def frame(self) -> np.ndarray:
        Q = _sla.null_space(self.subspace)
        if Q.shape[1] != self.subspace.shape[1] - self.subspace.shape[0]:
            raise GeometryError("constraint matrix does not have full rank")
        return Q


def _ambient_norms(X: np.ndarray, norm: str) -> np.ndarray:
    if norm == "euclidean":
        return np.sqrt(np.sum(X * X, axis=1))
    if norm == "sup":
        return np.max(np.abs(X), axis=1)
    return np.sum(np.abs(X), axis=1)


def _box_halfwidth(norm: str, radius: float, ambient_dim: int) -> float:
    # coordinates in the orthonormal frame satisfy |z| <= ||Qz||_2
    if norm == "euclidean":
        return radius
    if norm == "sup":
        return radius * math.sqrt(ambient_dim)
    return radius  # l1 ball is inside the Euclidean ball


def mc_ball_volume(
    spec: NormBallSpec, samples: int, seed: int, threads: int = 1
) -> tuple[float, float]:
    """Monte Carlo estimate of the volume of {x in C : N(x) <= r}.

    Rejection sampling over a bounding box in an orthonormal frame of C.
    Deterministic given (seed, samples, threads); chunk i of a threaded run
    draws from numpy SeedSequence([seed, i]), so the single-threaded stream is
    the reference and any threaded run is reproducible for the same split.
    """
    if samples < 1000:
        raise ValidationError("need at least 1000 samples")
    Q = spec.frame()
    d = Q.shape[1]
    half = _box_halfwidth(spec.norm, spec.radius, Q.shape[0])
    box_vol = (2.0 * half) ** d

    def run_chunk(chunk_seed, count):
        rng = np.random.default_rng(np.random.SeedSequence(chunk_seed))
        hits = 0
        left = count
        while left > 0:
            batch = min(left, 200_000)
            Z = rng.uniform(-half, half, size=(batch, d))
            X = Z @ Q.T
            hits += int(np.sum(_ambient_norms(X, spec.norm) <= spec.radius))
            left -= batch
        return hits

    if threads <= 1:
        hits = run_chunk([seed], samples)
    else:
        from concurrent.futures import ThreadPoolExecutor

        counts = [samples // threads] * threads
        counts[-1] += samples - sum(counts)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futs = [ex.submit(run_chunk, [seed, i], c) for i, c in enumerate(counts)]
            hits = sum(f.result() for f in futs)
    p = hits / samples
    estimate = box_vol * p
    stderr = box_vol * math.sqrt(max(p * (1.0 - p), 0.0) / samples)
    return estimate, stderr


def n_delta_relative(
    T: IdealTriangulation, norm: str, samples: int, seed: int, threads: int = 1
) -> float:
    """Volume of the unit shear-norm ball in the completeness subspace,
    up to one global constant independent of the norm."""
    est, _ = mc_ball_volume(NormBallSpec.for_surface(T, norm, 1.0), samples, seed, threads)
    return est
