"""Close pairs of lattice points and the signature-(2,2) quadratic form.

A close pair is an ordered pair (k, l) with R ≤ |k|² ≤ 2R and
|k|² ≤ |l|² ≤ |k|² + δ.  Pairs are counted with multiplicity (both ±
copies, k = l included).  The difference of squared norms is a quadratic
form of signature (2,2) on ℤ⁴, which the shell counter exercises
directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, DomainError
from .lattice import LatticeSpec, _raw_norms

_SHELL_CAP = 60  # direct ℤ⁴ enumeration beyond this is refused


@dataclass(frozen=True)
class ClosePairQuery:
    R: float
    delta: float

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R}")
        if self.delta < 0:
            raise DomainError(f"delta must be nonnegative, got {self.delta}")


@dataclass(frozen=True)
class QuadFormQ1:
    """Q(v) = |v₁ + v₂(α+iβ)|² − |v₃ + v₄(α+iβ)|²."""

    alpha: float
    beta: float

    @classmethod
    def from_lattice(cls, lattice: LatticeSpec) -> "QuadFormQ1":
        return cls(lattice.alpha, lattice.beta)


def q1_evaluate(form: QuadFormQ1, v) -> float:
    """(v₁+v₂α)² + (v₂β)² − (v₃+v₄α)² − (v₄β)²."""
    v1, v2, v3, v4 = v
    u1 = v1 + v2 * form.alpha
    u2 = v3 + v4 * form.alpha
    return (u1 * u1 + (v2 * form.beta) ** 2) - (u2 * u2 + (v4 * form.beta) ** 2)


def count_close_pairs(lattice: LatticeSpec, q: ClosePairQuery) -> int:
    """Exact cardinality of the close-pair set via a sorted-norm sweep.

    All squared norms up to 2R+δ are enumerated once (per point, not
    merged), sorted, and each k-norm in [R, 2R] is charged the number of
    norms in [|k|², |k|²+δ] by binary search: O(P log P), never O(P²).
    Norms are compared in extended precision to keep boundaries
    deterministic.
    """
    bound = 2.0 * q.R + q.delta
    norms = np.sort(
        _raw_norms(lattice.alpha, lattice.beta, bound).astype(np.longdouble)
    )
    lo = np.searchsorted(norms, np.longdouble(q.R), side="left")
    hi = np.searchsorted(norms, np.longdouble(2.0 * q.R), side="right")
    k_norms = norms[lo:hi]
    upper = np.searchsorted(norms, k_norms + np.longdouble(q.delta), side="right")
    lower = np.searchsorted(norms, k_norms, side="left")
    return int((upper - lower).sum())


class _Fenwick:
    """Prefix-count tree over small nonnegative integers."""

    def __init__(self, size: int):
        self.tree = [0] * (size + 1)

    def add(self, i: int):
        i += 1
        while i < len(self.tree):
            self.tree[i] += 1
            i += i & (-i)

    def prefix(self, i: int) -> int:
        # count of inserted values <= i
        i += 1
        s = 0
        while i > 0:
            s += self.tree[i]
            i -= i & (-i)
        return s


def count_shell_solutions(form: QuadFormQ1, a: float, b: float, T: float) -> int:
    """#{v ∈ ℤ⁴ : T ≤ ‖v‖ ≤ 2T, a < Q₁(v) < b} by direct enumeration.

    ‖·‖ is the Euclidean norm on ℤ⁴.  The search splits v into the halves
    (v₁,v₂) and (v₃,v₄) and resolves the joint norm/form constraints with
    an offline sweep, so the cost is near-linear in the number of halves.
    """
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if T > _SHELL_CAP:
        raise BudgetExceeded(f"shell enumeration is capped at T={_SHELL_CAP}")

    c = int(math.floor(2.0 * T))
    grid = np.arange(-c, c + 1)
    x, y = np.meshgrid(grid, grid, indexing="ij")
    x = x.ravel()
    y = y.ravel()
    n_half = x * x + y * y  # Euclidean norm of a half, integer
    u = x + y * form.alpha
    q_half = u * u + (y * form.beta) ** 2  # lattice squared norm of a half

    keep = n_half <= 4.0 * T * T
    n_half = n_half[keep]
    q_half = q_half[keep]

    t2 = T * T
    four_t2 = 4.0 * T * T
    max_n = int(four_t2)

    # points: the (v3, v4) halves, swept in order of increasing q
    order = np.argsort(q_half, kind="stable")
    pq = q_half[order]
    pn = n_half[order]

    # each (v1, v2) half contributes two prefix queries in q:
    #   #(q < q_half - a) - #(q <= q_half - b), restricted to the n-window
    total = 0
    events = []
    for i in range(pq.size):
        events.append((pq[i], 0, i))
    for j in range(q_half.size):
        events.append((q_half[j] - a, 1, j))  # strict upper edge, sign +1
        events.append((q_half[j] - b, 2, j))  # non-strict lower edge, sign -1
    # insertions at q equal to a strict "< x" query must land after it, and
    # before a non-strict "<= x" query: order ties as (<-query, insert, <=-query)
    events.sort(key=lambda e: (e[0], {1: 0, 0: 1, 2: 2}[e[1]]))

    fen = _Fenwick(max_n + 1)
    # per-query n-window, precomputed
    n_lo = np.ceil(t2 - n_half).astype(np.int64)
    np.clip(n_lo, 0, None, out=n_lo)
    n_hi = np.floor(four_t2 - n_half).astype(np.int64)

    for value, kind, idx in events:
        if kind == 0:
            fen.add(int(pn[idx]))
        else:
            lo = n_lo[idx]
            hi = n_hi[idx]
            if hi < lo:
                continue
            cnt = fen.prefix(int(hi)) - (fen.prefix(int(lo) - 1) if lo > 0 else 0)
            total += cnt if kind == 1 else -cnt
    return total


def close_pair_scaling_study(
    lattice: LatticeSpec, r_grid, delta: float
) -> list[tuple[float, int, float]]:
    """Rows (R, count, count/(R·δ·ln R)) over the given grid of R values."""
    rows = []
    for r in r_grid:
        if r < 10:
            raise DomainError(f"R must be at least 10, got {r}")
        count = count_close_pairs(lattice, ClosePairQuery(r, delta))
        rows.append((float(r), count, count / (r * delta * math.log(r))))
    return rows
