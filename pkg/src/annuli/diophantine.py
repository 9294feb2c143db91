"""Empirical Diophantine quality of real tuples and signed square-root gaps.

Exhaustive minimization of integer linear forms and integer polynomials
over growing coefficient heights, with a least-squares fit of the decay
exponent, plus the minimum of signed sums of square roots of dual-lattice
norms.  The fitted slopes are empirical; no claim is made that they equal
the existential exponents they shadow.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import BudgetExceeded, DomainError, RelationDetected
from .lattice import COINCIDENCE_TOL, LatticeSpec, dual_squared_norm

#: double-precision minima below this trigger an extended-precision recheck
CANDIDATE_TOL = 1e-10
#: extended-precision values below this are exact integer relations
EXACT_ZERO_TOL = 1e-30
#: values consistent with an exact relation of the underlying reals, given
#: that float inputs carry only ~1e-16 relative accuracy
FLOAT_RESOLUTION = 1e-12

_LINEAR_CAPS = {1: 1000, 2: 1000, 3: 100}
_POLY_BUDGET = 2 * 10**8
_PAIR_BUDGET = 5 * 10**6


@dataclass(frozen=True)
class DiophQuery:
    tuple: tuple
    height_cap: int
    degree: int = 1

    def __post_init__(self):
        if len(self.tuple) == 0:
            raise DomainError("tuple must be nonempty")
        if self.height_cap < 1:
            raise DomainError("height_cap must be >= 1")
        if self.degree < 1:
            raise DomainError("degree must be >= 1")


@dataclass(frozen=True)
class ExponentFit:
    per_height_minima: list  # [(q, min_abs_value), ...]
    fitted_exponent: float
    fit_residual: float


def _height_grid(cap: int) -> list[int]:
    if cap < 2:
        return [cap]
    grid = np.unique(np.rint(np.geomspace(2, cap, num=8)).astype(int))
    return [int(q) for q in grid if q >= 1]


def _min_linear_combination(monomials: list[float], h: int):
    """Minimum of |a0 + Σ a_i·monomial_i| over nonzero integer vectors, |a|≤h.

    The constant coefficient is reduced in closed form (nearest integer,
    clipped to height), the rest are enumerated with the trailing two
    coefficients vectorized.  Returns (min_value, witness_coefficients).
    """
    n = len(monomials)
    mono = np.asarray(monomials, dtype=float)
    # pure-constant form: a0 = ±1, the rest zero
    best_val = 1.0
    best_wit = (1,) + (0,) * n

    tail_k = min(n, 2)
    head_k = n - tail_k
    tail_ranges = [np.arange(-h, h + 1)] * tail_k
    tail_grids = np.meshgrid(*tail_ranges, indexing="ij")
    tail_coef = np.stack([g.ravel() for g in tail_grids], axis=1)
    tail_vals = tail_coef @ mono[head_k:]

    head_iter = itertools.product(*[range(-h, h + 1)] * head_k)
    for head in head_iter:
        s = tail_vals + (np.dot(head, mono[:head_k]) if head_k else 0.0)
        a0 = np.clip(np.rint(-s), -h, h)
        vals = np.abs(s + a0)
        if head_k == 0 or not any(head):
            # exclude the all-zero vector (a0 forced to 0 there)
            zero_row = int(np.all(tail_coef == 0, axis=1).argmax())
            vals[zero_row] = np.inf
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_wit = (int(a0[i]), *head, *(int(c) for c in tail_coef[i]))
    return best_val, best_wit


def _recheck_extended(value_terms, witness, h: int, scale: float):
    """Classify a tiny minimum with 60-digit arithmetic; raise on relations."""
    with mp.workdps(60):
        total = mp.mpf(0)
        a0 = witness[0]
        total += a0
        for coeff, term in zip(witness[1:], value_terms):
            total += coeff * term
        mag = abs(total)
        if mag < EXACT_ZERO_TOL:
            raise RelationDetected(
                f"exact integer relation with coefficients {witness}",
                witness=witness,
            )
        if mag < FLOAT_RESOLUTION * max(1.0, h) * max(1.0, scale):
            raise RelationDetected(
                "relation within double-precision resolution of the inputs, "
                f"coefficients {witness}",
                witness=witness,
            )
        return float(mag)


def _fit(per_height):
    qs = np.array([q for q, _ in per_height], dtype=float)
    mins = np.array([v for _, v in per_height], dtype=float)
    x = np.log(qs)
    y = -np.log(mins)
    if x.size < 2:
        return 0.0, 0.0
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


def linear_form_minimum(q: DiophQuery) -> ExponentFit:
    """Per-height minima of |a0 + Σ a_i·α_i| and the fitted decay exponent."""
    n = len(q.tuple)
    if n > 3:
        raise DomainError(f"linear forms support tuples of length <= 3, got {n}")
    cap = _LINEAR_CAPS[n]
    if q.height_cap > cap:
        raise BudgetExceeded(
            f"height cap {q.height_cap} exceeds the configured limit {cap} for n={n}"
        )
    if all(v == 0 for v in q.tuple):
        raise DomainError("degenerate tuple (all zeros)")
    terms = [mp.mpf(v) for v in q.tuple]
    scale = max(abs(v) for v in q.tuple)
    per_height = []
    for h in _height_grid(q.height_cap):
        val, wit = _min_linear_combination(list(q.tuple), h)
        if val < CANDIDATE_TOL:
            val = _recheck_extended(terms, wit, h, scale)
        per_height.append((h, val))
    slope, resid = _fit(per_height)
    return ExponentFit(per_height, slope, resid)


def _poly_monomials(degree: int):
    """(i, j) exponent pairs with 1 <= i+j <= degree, constant excluded."""
    return [
        (i, j)
        for total in range(1, degree + 1)
        for i in range(total + 1)
        for j in [total - i]
    ]


def polynomial_minimum(pair, degree: int, height_cap: int) -> ExponentFit:
    """Per-height minima of |p(α, β)| over integer polynomials of bounded degree."""
    if degree > 3:
        raise DomainError(f"degree must be <= 3, got {degree}")
    if degree < 1:
        raise DomainError(f"degree must be >= 1, got {degree}")
    alpha, beta = pair
    expos = _poly_monomials(degree)
    n_free = len(expos)
    if (2 * height_cap + 1) ** n_free > _POLY_BUDGET:
        raise BudgetExceeded(
            f"(2h+1)^{n_free} enumeration at h={height_cap} exceeds the budget"
        )
    monomials = [alpha**i * beta**j for i, j in expos]
    with mp.workdps(60):
        terms = [mp.mpf(alpha) ** i * mp.mpf(beta) ** j for i, j in expos]
    scale = max(abs(v) for v in monomials)
    per_height = []
    for h in _height_grid(height_cap):
        val, wit = _min_linear_combination(monomials, h)
        if val < CANDIDATE_TOL:
            val = _recheck_extended(terms, wit, h, scale)
        per_height.append((h, val))
    slope, resid = _fit(per_height)
    return ExponentFit(per_height, slope, resid)


def _signed_subset_sums(roots: np.ndarray, size: int):
    """All Σ ε_i √z_i over index subsets of the given size, with all signs.

    Returns (values, index_bitmasks) with values in extended precision.
    """
    idx = np.arange(roots.size)
    combos = list(itertools.combinations(idx, size))
    signs = list(itertools.product((1.0, -1.0), repeat=size))
    vals = np.empty(len(combos) * len(signs), dtype=np.longdouble)
    # object dtype: bitmasks exceed 64 bits once there are many norms
    masks = np.empty(len(combos) * len(signs), dtype=object)
    pos = 0
    for combo in combos:
        r = roots[list(combo)]
        mask = 0
        for i in combo:
            mask |= 1 << int(i)
        for s in signs:
            vals[pos] = np.dot(np.asarray(s, dtype=np.longdouble), r)
            masks[pos] = mask
            pos += 1
    return vals, masks


def primitive_dual_norms(lattice: LatticeSpec, bound: float) -> np.ndarray:
    """Sorted distinct dual squared norms from primitive (a, b), a, b ≥ 0.

    Primitive means gcd(a, b) = 1; (0, 0) is excluded.  Values closer than
    COINCIDENCE_TOL·max(1, z) are merged into one norm.
    """
    if bound <= 0:
        raise DomainError(f"bound must be positive, got {bound}")
    eta = lattice.eta
    b_max = int(math.sqrt(bound) / eta) + 1
    vals = []
    for b in range(0, b_max + 1):
        rem = bound - (b * eta) ** 2
        if rem < 0:
            continue
        half = math.sqrt(rem)
        center = -b * lattice.xi
        for a in range(max(0, math.ceil(center - half) - 1),
                       math.floor(center + half) + 2):
            if math.gcd(a, b) != 1:
                continue
            z = dual_squared_norm(lattice, (a, b))
            if 0 < z <= bound:
                vals.append(z)
    vals.sort()
    merged = []
    for z in vals:
        if merged and z - merged[-1] <= COINCIDENCE_TOL * max(1.0, z):
            continue
        merged.append(z)
    return np.asarray(merged)


def sqrt_sum_gap(lattice: LatticeSpec, bound: float, m: int) -> float:
    """Minimum of |Σ_{j=1..m} ε_j √z_j| over m distinct primitive dual norms.

    Signs ε_j = ±1; the z_j ≤ bound are distinct squared norms of dual
    vectors with primitive nonnegative coordinates.  The primitivity
    restriction removes the trivial cancellations among scalar multiples
    of one vector (e.g. 3·√z − 2·√z − √z), so generically the minimum is
    strictly positive.  Work is done in extended precision with a
    meet-in-the-middle split, so the search is exhaustive without
    enumerating all m-subsets directly.
    """
    if m not in (2, 3, 4):
        raise DomainError(f"m must be in {{2, 3, 4}}, got {m}")
    norms = primitive_dual_norms(lattice, bound)
    if norms.size < m:
        raise DomainError(
            f"only {norms.size} distinct nonzero dual norms below {bound}"
        )
    n_pairs = norms.size * (norms.size - 1) // 2
    if 4 * n_pairs > _PAIR_BUDGET:
        raise BudgetExceeded(
            f"{norms.size} norms give too many signed pairs for the budget"
        )
    roots = np.sqrt(norms.astype(np.longdouble))

    left_size = m // 2
    right_size = m - left_size
    lv, lm = _signed_subset_sums(roots, left_size)
    rv, rm = _signed_subset_sums(roots, right_size)
    order = np.argsort(rv, kind="stable")
    rv = rv[order]
    rm = rm[order]

    best = np.longdouble(np.inf)
    targets = np.searchsorted(rv, -lv)
    for i in range(lv.size):
        # scan outward from the insertion point until a disjoint partner
        # can no longer improve the current best
        for direction in (0, -1):
            j = int(targets[i]) + direction
            step = 1 if direction == 0 else -1
            while 0 <= j < rv.size:
                gap = abs(lv[i] + rv[j])
                if gap >= best:
                    break
                if not (lm[i] & rm[j]):
                    best = gap
                    break
                j += step
    return float(best)
