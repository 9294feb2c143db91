"""Exact arithmetic and sharp point counting for planar lattices ⟨1, α+iβ⟩.

A lattice is the set {m·(1,0) + n·(α,β) : m,n ∈ ℤ}; its covolume is β.
All counting routines iterate rows of constant n, where the admissible m
form a contiguous integer interval, so a disc of radius t costs O(t/β)
rather than O(t²).

Boundary rule: interval endpoints are finalized by evaluating the squared
norm in extended (80-bit) precision and comparing at that precision, so
counts are deterministic and reproducible.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, DomainError, InconclusiveScan

_LD = np.longdouble

#: squared norms closer than COINCIDENCE_TOL*max(1, x) are merged when
#: tabulating norms with multiplicities
COINCIDENCE_TOL = 1e-9

_DEFAULT_BUDGET = 20_000_000


def point_budget() -> int:
    """Enumeration cap on the estimated number of lattice points."""
    return int(os.environ.get("ANNULI_MAX_POINTS", _DEFAULT_BUDGET))


@dataclass(frozen=True)
class LatticeSpec:
    """The lattice ⟨1, α+iβ⟩ with β > 0."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    @property
    def determinant(self) -> float:
        return self.beta

    @property
    def xi(self) -> float:
        """First dual parameter, −α/β."""
        return -self.alpha / self.beta

    @property
    def eta(self) -> float:
        """Second dual parameter, 1/β."""
        return 1.0 / self.beta


#: numerically generic lattice used throughout the test experiments
DEFAULT_ALPHA = math.pi - 3.0
DEFAULT_BETA = math.e / 2.0
DEFAULT_LATTICE = LatticeSpec(DEFAULT_ALPHA, DEFAULT_BETA)


@dataclass(frozen=True)
class LatticePoint:
    m: int
    n: int


@dataclass(frozen=True)
class DualPoint:
    a: int
    b: int


@dataclass(frozen=True)
class AnnulusQuery:
    """Annulus of inner radius t and width rho; radially half-open (t, t+rho]."""

    t: float
    rho: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"inner radius must be positive, got {self.t}")
        if not self.rho > 0:
            raise DomainError(f"width must be positive, got {self.rho}")


def squared_norm(lattice: LatticeSpec, p) -> float:
    """|m + n(α+iβ)|² evaluated in a fixed order: u=m+nα, v=nβ, u²+v²."""
    m, n = (p.m, p.n) if isinstance(p, LatticePoint) else p
    u = m + n * lattice.alpha
    v = n * lattice.beta
    return u * u + v * v


def dual_squared_norm(lattice: LatticeSpec, p) -> float:
    """Squared norm of a + b(ξ+iη) in the dual lattice, (ξ,η)=(−α/β, 1/β)."""
    a, b = (p.a, p.b) if isinstance(p, DualPoint) else p
    u = a + b * lattice.xi
    v = b * lattice.eta
    return u * u + v * v


def _row_range(beta: float, t2_ld) -> np.ndarray:
    """All n with (nβ)² ≤ t², as int64."""
    bl = _LD(beta)
    nmax = int(math.floor(math.sqrt(float(t2_ld)) / beta))
    # fix up the double-precision guess against the extended predicate
    while (_LD(nmax + 1) * bl) ** 2 <= t2_ld:
        nmax += 1
    while nmax > 0 and (_LD(nmax) * bl) ** 2 > t2_ld:
        nmax -= 1
    return np.arange(-nmax, nmax + 1, dtype=np.int64)


def _edge_ld(alpha: float, beta: float, t2_ld, ni: int, guess: int, pick_max: bool):
    """Extended-precision endpoint for one row, scanning guess ± 2.

    The double-precision guess is within 1 of the true endpoint, so a
    5-candidate window always contains it.  Returns None for an empty row.
    """
    al = _LD(alpha)
    v = _LD(int(ni)) * _LD(beta)
    v2 = v * v
    best = None
    for d in (-2, -1, 0, 1, 2):
        m = int(guess) + d
        u = _LD(m) + _LD(int(ni)) * al
        if u * u + v2 <= t2_ld:
            if best is None or (m > best if pick_max else m < best):
                best = m
    return best


def _row_intervals(alpha: float, beta: float, t2_ld, n: np.ndarray):
    """Per-row integer interval [lo, hi] of admissible m with norm² ≤ t².

    The bulk of the work is double precision; rows whose edge candidates
    fall inside a small band around the circle are re-decided with the
    extended-precision norm predicate, keeping results deterministic.
    """
    t2 = float(t2_ld)
    nl = n.astype(np.float64)
    v2 = (nl * beta) ** 2
    w = np.sqrt(np.maximum(t2 - v2, 0.0))
    base = -nl * alpha
    tol = 64.0 * np.finfo(np.float64).eps * max(t2, 1.0)

    def status(m):
        u = m + nl * alpha
        s = u * u + v2
        return s <= t2, np.abs(s - t2) <= tol

    hi0 = np.floor(base + w)
    in_up, amb_up = status(hi0 + 1.0)
    in_at, amb_at = status(hi0)
    hi = np.where(in_up, hi0 + 1.0, np.where(in_at, hi0, hi0 - 1.0))

    lo0 = np.ceil(base - w)
    in_dn, amb_dn = status(lo0 - 1.0)
    in_lo, amb_lo = status(lo0)
    lo = np.where(in_dn, lo0 - 1.0, np.where(in_lo, lo0, lo0 + 1.0))

    lo = lo.astype(np.int64)
    hi = hi.astype(np.int64)

    ambiguous = np.nonzero(amb_up | amb_at | amb_dn | amb_lo)[0]
    for i in ambiguous:
        ni = int(n[i])
        h = _edge_ld(alpha, beta, t2_ld, ni, int(hi0[i]), pick_max=True)
        l = _edge_ld(alpha, beta, t2_ld, ni, int(lo0[i]), pick_max=False)
        if h is None or l is None:
            lo[i], hi[i] = 1, 0  # empty row
        else:
            lo[i], hi[i] = l, h
    return lo, hi


try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    _HAVE_NUMBA = False

    def _njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


@_njit(cache=True)
def _rows_kernel(alpha, beta, t2, nmax, tol, amb):
    """Sum of mirrored per-row counts for norm² ≤ t², double precision.

    Rows whose edge residuals fall inside the tol band are skipped and
    their indices written to amb; the caller re-decides them with the
    extended-precision predicate.  Returns (partial_total, #ambiguous);
    a negative second component signals amb overflow.
    """
    total = 0.0
    namb = 0
    for n in range(nmax + 1):
        v2 = (n * beta) ** 2
        rem = t2 - v2
        w = math.sqrt(rem) if rem > 0.0 else 0.0
        na = n * alpha
        hi0 = math.floor(w - na)
        lo0 = math.ceil(-w - na)

        u = hi0 + na
        d0 = u * u - rem
        d1 = d0 + 2.0 * u + 1.0
        ul = lo0 + na
        e0 = ul * ul - rem
        e1 = e0 - 2.0 * ul + 1.0

        if (abs(d0) <= tol or abs(d1) <= tol
                or abs(e0) <= tol or abs(e1) <= tol):
            if namb >= amb.size:
                return total, -1
            amb[namb] = n
            namb += 1
            continue

        if d1 <= 0.0:
            hi = hi0 + 1.0
        elif d0 <= 0.0:
            hi = hi0
        else:
            hi = hi0 - 1.0
        if e1 <= 0.0:
            lo = lo0 - 1.0
        elif e0 <= 0.0:
            lo = lo0
        else:
            lo = lo0 + 1.0

        c = hi - lo + 1.0
        if c > 0.0:
            total += c if n == 0 else 2.0 * c
    return total, namb


def _nmax_rows(beta: float, t2_ld) -> int:
    """Largest n with (nβ)² ≤ t², certified against the extended predicate."""
    nmax = int(math.floor(math.sqrt(float(t2_ld)) / beta))
    bl = _LD(beta)
    while (_LD(nmax + 1) * bl) ** 2 <= t2_ld:
        nmax += 1
    while nmax > 0 and (_LD(nmax) * bl) ** 2 > t2_ld:
        nmax -= 1
    return nmax


def _count_half_disc(alpha: float, beta: float, t2_ld) -> int:
    """Mirrored disc count from rows n ≥ 0, jitted bulk + extended edges."""
    nmax = _nmax_rows(beta, t2_ld)
    t2 = float(t2_ld)
    tol = 64.0 * np.finfo(np.float64).eps * max(t2, 1.0)
    amb = np.empty(4096, dtype=np.int64)
    total, namb = _rows_kernel(alpha, beta, t2, nmax, tol, amb)
    if namb < 0:
        # tol band overflow (pathological); decide every row in extended
        amb = np.arange(0, nmax + 1, dtype=np.int64)
        namb = amb.size
        total = 0.0
    for i in range(namb):
        ni = int(amb[i])
        na = ni * alpha
        rem = t2 - (ni * beta) ** 2
        w = math.sqrt(rem) if rem > 0.0 else 0.0
        h = _edge_ld(alpha, beta, t2_ld, ni, math.floor(w - na), pick_max=True)
        l = _edge_ld(alpha, beta, t2_ld, ni, math.ceil(-w - na), pick_max=False)
        if h is None or l is None or h < l:
            continue
        c = h - l + 1
        total += c if ni == 0 else 2 * c
    return int(round(total))


def _half_rows(beta: float, t2_ld) -> np.ndarray:
    """Rows n = 0 … n_max with (nβ)² ≤ t²; the n < 0 half is mirrored."""
    nmax = int(math.floor(math.sqrt(float(t2_ld)) / beta))
    bl = _LD(beta)
    while (_LD(nmax + 1) * bl) ** 2 <= t2_ld:
        nmax += 1
    while nmax > 0 and (_LD(nmax) * bl) ** 2 > t2_ld:
        nmax -= 1
    return np.arange(0, nmax + 1, dtype=np.int64)


def _row_counts(alpha: float, beta: float, t2_ld, n, na, v2):
    """Per-row point counts for norm² ≤ t²; shares na = n·α and v2 = (nβ)².

    Double-precision edge decisions with residuals d = (m+nα)² − (t²−(nβ)²);
    rows whose residual at a candidate edge falls inside a small band are
    re-decided with the extended-precision predicate.
    """
    t2 = float(t2_ld)
    tol = 64.0 * np.finfo(np.float64).eps * max(t2, 1.0)
    rem = t2 - v2
    w = np.sqrt(np.maximum(rem, 0.0))
    hi0 = np.floor(w - na)
    lo0 = np.ceil(-w - na)

    u = hi0 + na
    d0 = u * u - rem
    d1 = d0 + 2.0 * u + 1.0
    hi = np.where(d1 <= 0.0, hi0 + 1.0, np.where(d0 <= 0.0, hi0, hi0 - 1.0))

    ul = lo0 + na
    e0 = ul * ul - rem
    e1 = e0 - 2.0 * ul + 1.0
    lo = np.where(e1 <= 0.0, lo0 - 1.0, np.where(e0 <= 0.0, lo0, lo0 + 1.0))

    counts = np.maximum(hi - lo + 1.0, 0.0).astype(np.int64)
    ambiguous = np.nonzero(
        (np.abs(d0) <= tol) | (np.abs(d1) <= tol)
        | (np.abs(e0) <= tol) | (np.abs(e1) <= tol)
    )[0]
    for i in ambiguous:
        ni = int(n[i])
        h = _edge_ld(alpha, beta, t2_ld, ni, int(hi0[i]), pick_max=True)
        l = _edge_ld(alpha, beta, t2_ld, ni, int(lo0[i]), pick_max=False)
        counts[i] = 0 if (h is None or l is None or h < l) else h - l + 1
    return counts


def _count_disc_vectorized(alpha: float, beta: float, t2_ld) -> int:
    """numpy path for the mirrored disc count (no-numba fallback)."""
    n = _half_rows(beta, t2_ld)
    nl = n.astype(np.float64)
    c = _row_counts(alpha, beta, t2_ld, n, nl * alpha, (nl * beta) ** 2)
    # row −n mirrors row n point-for-point under (m, n) → (−m, −n)
    return int(c[0] + 2 * c[1:].sum())


def count_disc(lattice: LatticeSpec, t: float) -> int:
    """Number of lattice points in the closed disc of radius t."""
    if t < 0:
        raise DomainError(f"radius must be nonnegative, got {t}")
    if t == 0:
        return 1
    t2 = _LD(t) * _LD(t)
    if _HAVE_NUMBA:
        return _count_half_disc(lattice.alpha, lattice.beta, t2)
    return _count_disc_vectorized(lattice.alpha, lattice.beta, t2)


def count_annulus(lattice: LatticeSpec, q: AnnulusQuery) -> int:
    """Points in the half-open annulus (t, t+rho]: N(t+rho) − N(t)."""
    outer = _LD(q.t + q.rho) * _LD(q.t + q.rho)
    inner = _LD(q.t) * _LD(q.t)
    if _HAVE_NUMBA:
        return (
            _count_half_disc(lattice.alpha, lattice.beta, outer)
            - _count_half_disc(lattice.alpha, lattice.beta, inner)
        )
    return (
        _count_disc_vectorized(lattice.alpha, lattice.beta, outer)
        - _count_disc_vectorized(lattice.alpha, lattice.beta, inner)
    )


def disc_error(lattice: LatticeSpec, t: float) -> float:
    """Count minus area: N(t) − (π/β)t²."""
    return count_disc(lattice, t) - (math.pi / lattice.beta) * t * t


def normalized_disc_error(lattice: LatticeSpec, t: float) -> float:
    """disc_error normalized by √t; requires t > 0."""
    if not t > 0:
        raise DomainError(f"radius must be positive, got {t}")
    return disc_error(lattice, t) / math.sqrt(t)


def sharp_statistic(lattice: LatticeSpec, q: AnnulusQuery) -> float:
    """(annulus count − (π/β)(2tρ+ρ²)) / √t."""
    area = (math.pi / lattice.beta) * (2.0 * q.t * q.rho + q.rho * q.rho)
    return (count_annulus(lattice, q) - area) / math.sqrt(q.t)


def _guard(bound: float, det: float):
    est = math.pi * bound / det
    budget = point_budget()
    if est > budget:
        raise BudgetExceeded(
            f"~{est:.3g} points exceed the budget of {budget} "
            "(raise ANNULI_MAX_POINTS to override)"
        )


def _raw_norms(alpha: float, beta: float, bound: float) -> np.ndarray:
    """Unsorted squared norms ≤ bound of ⟨1, α+iβ⟩, one entry per point."""
    if bound < 0:
        raise DomainError(f"bound must be nonnegative, got {bound}")
    _guard(bound, beta)
    t2 = _LD(bound)
    n = _row_range(beta, t2)
    lo, hi = _row_intervals(alpha, beta, t2, n)
    chunks = []
    for ni, l, h in zip(n, lo, hi):
        if h < l:
            continue
        m = np.arange(l, h + 1, dtype=np.float64)
        u = m + ni * alpha
        v = ni * beta
        chunks.append(u * u + v * v)
    if not chunks:
        return np.empty(0)
    return np.concatenate(chunks)


def _merged_norms(alpha: float, beta: float, bound: float):
    """Sorted distinct squared norms ≤ bound with multiplicities.

    Values closer than COINCIDENCE_TOL·max(1, x) are treated as one norm.
    """
    norms = np.sort(_raw_norms(alpha, beta, bound))
    if norms.size == 0:
        return norms, np.empty(0, dtype=np.int64)
    gaps = np.diff(norms)
    tol = COINCIDENCE_TOL * np.maximum(1.0, norms[1:])
    starts = np.concatenate(([0], np.nonzero(gaps >= tol)[0] + 1))
    mult = np.diff(np.concatenate((starts, [norms.size])))
    return norms[starts], mult.astype(np.int64)


_NORM_CACHE: dict = {}


def norm_table(lattice: LatticeSpec, bound: float, use_dual: bool = False):
    """(norms, multiplicities) arrays for the primal or dual lattice, cached."""
    key = (lattice.alpha, lattice.beta, bool(use_dual), float(bound))
    if key not in _NORM_CACHE:
        if use_dual:
            res = _merged_norms(lattice.xi, lattice.eta, bound)
        else:
            res = _merged_norms(lattice.alpha, lattice.beta, bound)
        if len(_NORM_CACHE) > 64:
            _NORM_CACHE.clear()
        _NORM_CACHE[key] = res
    return _NORM_CACHE[key]


def enumerate_norms(lattice: LatticeSpec, bound: float, use_dual: bool = False):
    """Sorted list of (squared_norm, multiplicity) up to bound."""
    norms, mult = norm_table(lattice, bound, use_dual)
    return list(zip(norms.tolist(), mult.tolist()))


def norm_gap(lattice: LatticeSpec, x: float, window: float) -> float:
    """Gap from the squared norm nearest x to any other norm in the window.

    Midpoint ambiguity is resolved toward the smaller norm.  Raises
    InconclusiveScan when the window holds fewer than two distinct norms.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    if not window > 0:
        raise DomainError(f"window must be positive, got {window}")
    norms, _ = norm_table(lattice, x + window)
    norms = norms[norms >= x - window]
    if norms.size < 2:
        raise InconclusiveScan(
            f"window [{x - window}, {x + window}] contains fewer than two "
            "distinct squared norms"
        )
    # exact ties in |x - norm| pick the first (smaller) norm
    idx = int(np.argmin(np.abs(norms - x)))
    gaps = []
    if idx > 0:
        gaps.append(norms[idx] - norms[idx - 1])
    if idx < norms.size - 1:
        gaps.append(norms[idx + 1] - norms[idx])
    return float(min(gaps))
