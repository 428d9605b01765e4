"""Restarted Taylor-series time propagation of the incompressible flow.

The solution of dv/dt = F(v) with F(v) = nu*lap(v) - P[(v.grad)v] is advanced
by its time-Taylor expansion around the current state,

    v(t0 + t) = sum_n c_n t^n,      c_0 = u,
    (n+1) c_{n+1} = nu * lap(c_n) - sum_{m=0}^{n} P[(c_m.grad) c_{n-m}],

with every quadratic product dealiased as it is formed. The expansion is used
as a one-step integrator: the step accepts a dt once the last retained term
satisfies ||c_N|| dt^N <= tol ||u|| and dt stays within half the empirical
convergence-radius estimate, halving dt otherwise (at most 20 times). n! c_n
reproduces the n-th generator power applied to u, which is what the symbolic
calculus cross-checks in one dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import FieldError, RadiusCollapseError, SolenoidalError
from .grid_spectral import (
    Grid,
    SpectralVectorField,
    dealias_defect,
    fftn_forward,
    ifftn_real,
    relative_divergence,
)
from .leray import DIV_FREE_RTOL, Viscosity, _project

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ORDER = 30
MAX_HALVINGS = 20
RADIUS_SAFETY = 0.5


@dataclass(frozen=True)
class TaylorExpansion:
    """Time-Taylor coefficients c_0..c_N of the flow around ``base_time``."""

    base_time: float
    coefficients: tuple[SpectralVectorField, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("expansion needs at least c_0")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def grid(self) -> Grid:
        return self.coefficients[0].grid


@dataclass(frozen=True)
class StepStats:
    """Bookkeeping for one accepted series step."""

    order_used: int
    dt: float
    truncation_estimate: float
    radius_estimate: float

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("step dt must be positive")
        if self.truncation_estimate < 0.0:
            raise ValueError("truncation estimate must be nonnegative")


class _SeriesBuilder:
    """Incrementally grows the coefficient list; caches physical-space values.

    For each known coefficient we keep its spectral array, its physical
    components, and its physical velocity gradients, so producing c_{n+1}
    needs only the new pairwise products plus one forward transform.
    """

    def __init__(self, grid: Grid, u_hat: np.ndarray, nu: float):
        self.grid = grid
        self.nu = nu
        self.coeffs: list[np.ndarray] = []
        self._phys: list[np.ndarray] = []
        self._grads: list[np.ndarray] = []
        self.norms: list[float] = []
        self._append(u_hat)

    def _append(self, c_hat: np.ndarray) -> None:
        grid = self.grid
        self.coeffs.append(c_hat)
        self.norms.append(math.sqrt(grid.volume * float(np.sum(np.abs(c_hat) ** 2))))
        self._phys.append(ifftn_real(grid, c_hat))
        grads = np.empty((grid.dim, grid.dim, *grid.shape), dtype=np.complex128)
        for j in range(grid.dim):
            grads[:, j] = c_hat * (1j * grid.k_deriv[j])
        self._grads.append(ifftn_real(grid, grads))

    def grow(self) -> None:
        """Compute the next coefficient from the recursion."""
        grid = self.grid
        n = len(self.coeffs) - 1
        adv = np.zeros((grid.dim, *grid.shape))
        for m in range(n + 1):
            adv += np.einsum("j...,ij...->i...", self._phys[m], self._grads[n - m])
        adv_hat = fftn_forward(grid, adv) * grid.dealias_keep
        new = (-self.nu * grid.ksq * self.coeffs[n] - _project(grid, adv_hat)) / (n + 1)
        self._append(new)

    def expansion(self, base_time: float = 0.0) -> TaylorExpansion:
        fields = tuple(SpectralVectorField(self.grid, c) for c in self.coeffs)
        return TaylorExpansion(base_time=base_time, coefficients=fields)

    def radius_estimate(self) -> float:
        return _radius_from_norms(self.norms)


def _radius_from_norms(norms: list[float]) -> float:
    """Ratio-test radius: min of the last three ||c_n||/||c_{n+1}||."""
    if len(norms) < 4:
        raise ValueError("radius estimate needs at least 4 coefficients")
    ratios = []
    for n in range(len(norms) - 4, len(norms) - 1):
        lo, hi = norms[n], norms[n + 1]
        ratios.append(math.inf if hi == 0.0 else lo / hi)
    return min(ratios)


def _validate_initial(u: SpectralVectorField, where: str) -> None:
    div = relative_divergence(u)
    if div > DIV_FREE_RTOL:
        raise SolenoidalError(f"{where} requires divergence-free initial data", div)
    defect = dealias_defect(u)
    if defect > 1e-10:
        raise FieldError(
            f"{where} requires dealiased initial data (relative defect {defect:.3e})"
        )


def taylor_coefficients(
    u: SpectralVectorField, nu: Viscosity | float, order: int
) -> TaylorExpansion:
    """Coefficients c_0..c_order of the series around the state ``u``."""
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    _validate_initial(u, "taylor_coefficients")
    builder = _SeriesBuilder(u.grid, np.array(u.data), nu_val)
    for _ in range(order):
        builder.grow()
    return builder.expansion()


def evaluate(e: TaylorExpansion, t: float) -> SpectralVectorField:
    """Horner evaluation sum_n c_n t^n; t = 0 returns c_0 unchanged."""
    if t == 0.0:
        return e.coefficients[0]
    acc = np.array(e.coefficients[-1].data)
    for c in reversed(e.coefficients[:-1]):
        acc *= t
        acc += c.data
    return SpectralVectorField(e.grid, acc)


def estimate_radius(e: TaylorExpansion) -> float:
    """Empirical convergence radius from the trailing coefficient ratios.

    Returns +inf when the trailing coefficients vanish (polynomial-in-time
    flow); requires at least 4 coefficients.
    """
    return _radius_from_norms([c.l2_norm() for c in e.coefficients])


def step(
    u: SpectralVectorField,
    nu: Viscosity | float,
    dt: float,
    tol: float = DEFAULT_TOL,
    max_order: int = DEFAULT_MAX_ORDER,
) -> tuple[SpectralVectorField, StepStats]:
    """One adaptive series step of at most ``dt``.

    Grows the expansion until ||c_N|| dt^N <= tol ||u|| (or N = max_order) and
    additionally requires dt <= 0.5 * radius estimate whenever at least four
    coefficients exist; when either bound is unreachable the step halves dt,
    at most 20 times, and reports the dt actually used. Raises
    ``RadiusCollapseError`` once the halving budget is exhausted.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    _validate_initial(u, "step")
    u_norm = u.l2_norm()
    if u_norm == 0.0:
        return u, StepStats(
            order_used=0, dt=dt, truncation_estimate=0.0, radius_estimate=math.inf
        )

    builder = _SeriesBuilder(u.grid, np.array(u.data), nu_val)
    bound = tol * u_norm
    dt_try = dt
    for _ in range(MAX_HALVINGS + 1):
        order_used = None
        for n in range(max_order + 1):
            while len(builder.norms) <= n:
                builder.grow()
            if builder.norms[n] * dt_try**n <= bound:
                order_used = n
                break
        if order_used is not None:
            # Radius safety: need at least 4 coefficients for the estimate.
            while len(builder.norms) < 4 and len(builder.norms) <= max_order:
                builder.grow()
            if len(builder.norms) >= 4:
                radius = builder.radius_estimate()
                if dt_try > RADIUS_SAFETY * radius:
                    dt_try *= 0.5
                    continue
            else:
                radius = math.inf
            expansion = builder.expansion()
            truncated = TaylorExpansion(
                base_time=expansion.base_time,
                coefficients=expansion.coefficients[: order_used + 1],
            )
            result = evaluate(truncated, dt_try)
            stats = StepStats(
                order_used=order_used,
                dt=dt_try,
                truncation_estimate=builder.norms[order_used] * dt_try**order_used,
                radius_estimate=radius,
            )
            return result, stats
        dt_try *= 0.5

    radius = builder.radius_estimate() if len(builder.norms) >= 4 else math.nan
    raise RadiusCollapseError(
        "series step failed to meet its truncation bound after 20 halvings",
        radius_estimate=radius,
        dt_last=dt_try * 2.0,
    )


def propagate(
    u: SpectralVectorField,
    nu: Viscosity | float,
    t_end: float,
    tol: float = DEFAULT_TOL,
    max_order: int = DEFAULT_MAX_ORDER,
    observer: Callable[[float, SpectralVectorField, StepStats], None] | None = None,
) -> SpectralVectorField:
    """Advance ``u`` to exactly ``t_end`` by repeated series steps.

    Each step attempts the whole remaining interval and lets the step logic
    shrink it; the observer is invoked after every accepted step with the
    reached time, the new field, and the step statistics.
    """
    if t_end < 0.0:
        raise ValueError("t_end must be nonnegative")
    v = u
    remaining = t_end
    while remaining > 0.0:
        v, stats = step(v, nu, remaining, tol=tol, max_order=max_order)
        remaining -= stats.dt
        if observer is not None:
            observer(t_end - remaining, v, stats)
    return v
