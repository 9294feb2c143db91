"""Low-dimensional lattice geometry: successive minima, box counts,
and the behavior of sublattice covolumes under a last-coordinate stretch.

Everything here is exhaustive enumeration at desk scale (dimension ≤ 4);
exactness is preferred over basis reduction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, DomainError

_ENUM_BUDGET = 5 * 10**6


@dataclass(frozen=True)
class GeneralLattice:
    """A rank-m lattice in ℝⁿ given by m basis row vectors (m ≤ n ≤ 4)."""

    basis: tuple  # tuple of tuples, rows are basis vectors

    def __post_init__(self):
        b = self.matrix
        if b.ndim != 2 or not (2 <= b.shape[1] <= 4) or b.shape[0] > b.shape[1]:
            raise DomainError(f"basis must be m x n with m <= n and 2 <= n <= 4")
        if np.linalg.det(b @ b.T) <= 0:
            raise DomainError("basis vectors must be linearly independent")

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.basis, dtype=float)

    @property
    def rank(self) -> int:
        return self.matrix.shape[0]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @property
    def covolume(self) -> float:
        b = self.matrix
        return float(math.sqrt(np.linalg.det(b @ b.T)))


@dataclass(frozen=True)
class StretchMap:
    """diag(1, ..., 1, t): scales the last ambient coordinate by t."""

    t: float
    dimension: int

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t}")

    def apply(self, lat: GeneralLattice) -> GeneralLattice:
        if lat.dimension != self.dimension:
            raise DomainError("dimension mismatch")
        b = lat.matrix.copy()
        b[:, -1] *= self.t
        return GeneralLattice(tuple(map(tuple, b)))


def _enumerate_shorter_than(lat: GeneralLattice, radius: float):
    """All nonzero lattice vectors with Euclidean norm <= radius.

    Coefficient ranges come from the dual basis row norms; returns
    (coefficient tuples, vectors) sorted by (norm, lexicographic coords).
    """
    b = lat.matrix
    if lat.rank != lat.dimension:
        raise DomainError("short-vector enumeration requires a full-rank basis")
    dual = np.linalg.inv(b.T).T  # rows d_i with <d_i, v> = c_i
    caps = np.floor(radius * np.linalg.norm(dual, axis=1)).astype(int)
    total = np.prod(2 * caps + 1)
    if total > _ENUM_BUDGET:
        raise BudgetExceeded(
            f"{total} candidate coefficient vectors exceed the budget; "
            "pre-reduce the basis"
        )
    ranges = [np.arange(-c, c + 1) for c in caps]
    grids = np.meshgrid(*ranges, indexing="ij")
    coef = np.stack([g.ravel() for g in grids], axis=1)
    vecs = coef @ b
    norms = np.linalg.norm(vecs, axis=1)
    keep = (norms <= radius) & (norms > 0)
    coef, vecs, norms = coef[keep], vecs[keep], norms[keep]
    order = sorted(
        range(norms.size), key=lambda i: (norms[i], tuple(coef[i].tolist()))
    )
    return coef[order], vecs[order], norms[order]


def successive_minima_vectors(lat: GeneralLattice, count: int):
    """(λ_1..λ_count, realizing vectors) by exhaustive short-vector search."""
    n = lat.dimension
    if not 1 <= count <= n:
        raise DomainError(f"count must be in [1, {n}], got {count}")
    # Minkowski: λ_1 ≤ 2 (covolume / v_n)^{1/n}; grow from there
    radius = 2.0 * lat.covolume ** (1.0 / n) + np.linalg.norm(lat.matrix, axis=1).min()
    for _ in range(32):
        coef, vecs, norms = _enumerate_shorter_than(lat, radius)
        chosen_v, chosen_n = [], []
        span = np.zeros((0, n))
        for i in range(norms.size):
            cand = np.vstack([span, vecs[i]])
            if np.linalg.matrix_rank(cand, tol=1e-10) > span.shape[0]:
                span = cand
                chosen_v.append(vecs[i])
                chosen_n.append(float(norms[i]))
                if len(chosen_v) == count:
                    return chosen_n, chosen_v
        radius *= 1.5
    raise BudgetExceeded("short-vector search did not converge")


def successive_minima(lat: GeneralLattice, count: int) -> list[float]:
    """λ_1 ≤ ... ≤ λ_count of the lattice."""
    values, _ = successive_minima_vectors(lat, count)
    return values


def stretch_determinant_check(lat: GeneralLattice, t: float):
    """Covolume before and after stretching the last coordinate by t.

    For t ≥ 1 the stretched covolume is at most t times the original,
    with equality at full rank.
    """
    stretch = StretchMap(t, lat.dimension)
    return lat.covolume, stretch.apply(lat).covolume


def box_volume(dimension: int, delta: float, tau: float) -> float:
    """Volume of [τ⁻¹, 2τ] × [−1,1]^{n−2} × [0, δ]."""
    return (2.0 * tau - 1.0 / tau) * 2.0 ** (dimension - 2) * delta


def count_box_points(g_basis: GeneralLattice, delta: float, tau: float) -> int:
    """Exact number of lattice points in the closed box
    [τ⁻¹, 2τ] × [−1,1]^{n−2} × [0, δ].

    Coefficient ranges are the integer bounding box of the region's corners
    mapped through the basis inverse.
    """
    n = g_basis.dimension
    if n not in (3, 4):
        raise DomainError(f"box counting supports dimensions 3 and 4, got {n}")
    if g_basis.rank != n:
        raise DomainError("box counting requires a full-rank basis")
    if not tau > 0 or not delta > 0:
        raise DomainError("tau and delta must be positive")
    lo = np.array([1.0 / tau] + [-1.0] * (n - 2) + [0.0])
    hi = np.array([2.0 * tau] + [1.0] * (n - 2) + [delta])

    b = g_basis.matrix
    inv = np.linalg.inv(b.T)  # c = inv @ x for x = B^T c
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    coef_corners = corners @ inv.T
    c_lo = np.ceil(coef_corners.min(axis=0) - 1e-9).astype(int)
    c_hi = np.floor(coef_corners.max(axis=0) + 1e-9).astype(int)
    total = np.prod(c_hi - c_lo + 1)
    if total > _ENUM_BUDGET:
        raise BudgetExceeded(f"{total} candidate points exceed the budget")
    ranges = [np.arange(a, b_ + 1) for a, b_ in zip(c_lo, c_hi)]
    grids = np.meshgrid(*ranges, indexing="ij")
    coef = np.stack([g.ravel() for g in grids], axis=1)
    pts = coef @ b
    inside = np.all((pts >= lo) & (pts <= hi), axis=1)
    return int(inside.sum())
