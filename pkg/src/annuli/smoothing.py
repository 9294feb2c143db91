"""Band-limited counting: truncated trigonometric sums over the dual lattice.

The smoothed disc count replaces the sharp count by its spectral
approximation, a sum over nonzero dual vectors k with |k| < √M, damped by
an even kernel ψ̂ supported in [−1, 1].  The smoothed annulus statistic is
the corresponding main term with width ρ = 1/L.

Sums are accumulated over distinct dual norms in ascending order with
exact compensated summation (math.fsum), so results are reproducible and
independent of how the dual points were produced.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .lattice import LatticeSpec, norm_table


def _bump(x):
    """C^∞ bump: exp(1 − 1/(1−x²)) on (−1, 1), zero outside."""
    arr = np.asarray(x, dtype=float)
    out = np.zeros_like(arr)
    inside = np.abs(arr) < 1.0
    xi = arr[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out if arr.ndim else float(out)


@dataclass(frozen=True)
class KernelSpec:
    """Even kernel ψ̂ with support in [−1, 1] and ψ̂(0) = 1."""

    name: str
    psi_hat: Callable[[np.ndarray], np.ndarray]


def default_kernel() -> KernelSpec:
    return KernelSpec(name="bump", psi_hat=_bump)


@dataclass(frozen=True)
class SmoothingParams:
    """Truncation scale M and inverse width L (annulus width ρ = 1/L)."""

    M: float
    L: float
    kernel: KernelSpec = field(default_factory=default_kernel)

    def __post_init__(self):
        if not self.M > 0:
            raise DomainError(f"M must be positive, got {self.M}")
        if not self.L > 0:
            raise DomainError(f"L must be positive, got {self.L}")
        if self.L >= math.sqrt(self.M):
            warnings.warn(
                f"L={self.L} is not small against sqrt(M)={math.sqrt(self.M):.3g}; "
                "the intended regime is L/sqrt(M) -> 0",
                stacklevel=2,
            )


def _dual_radii(lattice: LatticeSpec, sp: SmoothingParams):
    """Distinct |k| with 0 < |k| < √M over the dual lattice, with multiplicities."""
    norms, mult = norm_table(lattice, sp.M, use_dual=True)
    keep = (norms > 0) & (norms < sp.M)
    return np.sqrt(norms[keep]), mult[keep].astype(float)


def smooth_disc_count(lattice: LatticeSpec, t: float, sp: SmoothingParams) -> float:
    """πt²/β − (√t/βπ) Σ cos(2πt|k| + π/4)/|k|^{3/2} · ψ̂(|k|/√M)."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    r, mult = _dual_radii(lattice, sp)
    beta = lattice.beta
    main = math.pi * t * t / beta
    if r.size == 0:
        return main
    damp = sp.kernel.psi_hat(r / math.sqrt(sp.M))
    terms = mult * np.cos(2.0 * math.pi * t * r + math.pi / 4.0) * damp / r**1.5
    return main - math.sqrt(t) / (beta * math.pi) * math.fsum(terms)


class _StatisticSum:
    """t-independent factors of the smoothed statistic, reusable across t."""

    def __init__(self, lattice: LatticeSpec, sp: SmoothingParams):
        r, mult = _dual_radii(lattice, sp)
        damp = sp.kernel.psi_hat(r / math.sqrt(sp.M))
        self.r = r
        self.mult = mult
        self.amplitude = mult * np.sin(math.pi * r / sp.L) * damp / r**1.5
        self.prefactor = 2.0 / (lattice.beta * math.pi)
        self.shift = 1.0 / (2.0 * sp.L)

    def __call__(self, t: float) -> float:
        if not t > 0:
            raise DomainError(f"t must be positive, got {t}")
        if self.r.size == 0:
            return 0.0
        phase = np.sin(2.0 * math.pi * (t + self.shift) * self.r + math.pi / 4.0)
        return self.prefactor * math.fsum(self.amplitude * phase)


_STAT_CACHE: dict = {}


def statistic_sum(lattice: LatticeSpec, sp: SmoothingParams) -> _StatisticSum:
    key = (lattice.alpha, lattice.beta, sp.M, sp.L, sp.kernel.name)
    if key not in _STAT_CACHE:
        if len(_STAT_CACHE) > 32:
            _STAT_CACHE.clear()
        _STAT_CACHE[key] = _StatisticSum(lattice, sp)
    return _STAT_CACHE[key]


def smooth_statistic(lattice: LatticeSpec, t: float, sp: SmoothingParams) -> float:
    """Main term of the smoothed annulus statistic at width ρ = 1/L.

    (2/βπ) Σ sin(π|k|/L)/|k|^{3/2} · sin(2π(t + 1/2L)|k| + π/4) · ψ̂(|k|/√M);
    the O(1/√t) remainder is not added.
    """
    return statistic_sum(lattice, sp)(t)


def smooth_statistic_from_counts(
    lattice: LatticeSpec, t: float, sp: SmoothingParams
) -> float:
    """Defining form: two smoothed disc counts minus the annulus area, over √t.

    Agrees with smooth_statistic to O(1/√t); kept for cross-validation.
    """
    rho = 1.0 / sp.L
    area = (math.pi / lattice.beta) * (2.0 * t * rho + rho * rho)
    return (
        smooth_disc_count(lattice, t + rho, sp)
        - smooth_disc_count(lattice, t, sp)
        - area
    ) / math.sqrt(t)
