"""Independent ground truth: closed-form decaying flows, a classical RK4
pseudospectral integrator, and a reproducible random divergence-free field
generator.

The RK4 path shares only the right-hand side with the series propagator; its
time integration is entirely separate, which is what makes the two usable as
mutual oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolenoidalError, StabilityError
from .grid_spectral import (
    TWO_PI,
    Grid,
    SpectralVectorField,
    reflect_modes,
    relative_divergence,
)
from .leray import DIV_FREE_RTOL, Viscosity, leray_project, ns_rhs

TAYLOR_GREEN_2D = "taylor_green_2d"
TAYLOR_GREEN_3D_EMBEDDED = "taylor_green_3d_embedded"
BELTRAMI_ABC = "beltrami_abc"

_KINDS = (TAYLOR_GREEN_2D, TAYLOR_GREEN_3D_EMBEDDED, BELTRAMI_ABC)


@dataclass(frozen=True)
class AnalyticFlow:
    """A closed-form decaying Navier-Stokes solution on the 2*pi box.

    ``amplitude`` scales the Taylor-Green profiles; ``abc`` holds the three
    coefficients of the Beltrami field (ignored by the other kinds).
    """

    kind: str
    amplitude: float = 1.0
    abc: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown analytic flow kind {self.kind!r}")
        if not math.isfinite(self.amplitude):
            raise ValueError("flow amplitude must be finite")

    @property
    def dim(self) -> int:
        return 2 if self.kind == TAYLOR_GREEN_2D else 3

    def decay_rate(self, nu: float) -> float:
        """Exponential decay rate of the velocity: every mode sits on |k|^2
        eigenvalue 2 (Taylor-Green) or 1 (Beltrami)."""
        return nu if self.kind == BELTRAMI_ABC else 2.0 * nu


def _taylor_green_modes(coef: np.ndarray, amplitude: float, zero_pad: bool) -> None:
    # cos(x) sin(y) has modes -i/4 at (1,+-1)... with signs fixed by the
    # sin factor; writing them exactly keeps the field free of the sampling
    # noise that the viscous series term would amplify like (nu k^2)^n / n!.
    a = amplitude
    tail = (0,) if zero_pad else ()
    coef[(0, 1, 1) + tail] = -0.25j * a
    coef[(0, 1, -1) + tail] = +0.25j * a
    coef[(0, -1, 1) + tail] = -0.25j * a
    coef[(0, -1, -1) + tail] = +0.25j * a
    coef[(1, 1, 1) + tail] = +0.25j * a
    coef[(1, 1, -1) + tail] = +0.25j * a
    coef[(1, -1, 1) + tail] = -0.25j * a
    coef[(1, -1, -1) + tail] = -0.25j * a


def _flow_coefficients(flow: AnalyticFlow, grid: Grid) -> np.ndarray:
    coef = np.zeros((grid.dim, *grid.shape), dtype=np.complex128)
    if flow.kind == TAYLOR_GREEN_2D:
        _taylor_green_modes(coef, flow.amplitude, zero_pad=False)
    elif flow.kind == TAYLOR_GREEN_3D_EMBEDDED:
        _taylor_green_modes(coef, flow.amplitude, zero_pad=True)
    else:
        a, b, c = flow.abc
        # v1 = a sin z + c cos y
        coef[0, 0, 0, 1] = -0.5j * a
        coef[0, 0, 0, -1] = +0.5j * a
        coef[0, 0, 1, 0] = coef[0, 0, -1, 0] = 0.5 * c
        # v2 = b sin x + a cos z
        coef[1, 1, 0, 0] = -0.5j * b
        coef[1, -1, 0, 0] = +0.5j * b
        coef[1, 0, 0, 1] = coef[1, 0, 0, -1] = 0.5 * a
        # v3 = c sin y + b cos x
        coef[2, 0, 1, 0] = -0.5j * c
        coef[2, 0, -1, 0] = +0.5j * c
        coef[2, 1, 0, 0] = coef[2, -1, 0, 0] = 0.5 * b
    return coef


def analytic_field(
    flow: AnalyticFlow, t: float, nu: Viscosity | float, grid: Grid
) -> SpectralVectorField:
    """Spectral coefficients of the flow at time ``t``, written mode-exactly."""
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    if grid.dim != flow.dim:
        raise ValueError(
            f"flow kind {flow.kind!r} needs a {flow.dim}-D grid, got {grid.dim}-D"
        )
    if not math.isclose(grid.length, TWO_PI, rel_tol=1e-12):
        raise ValueError("analytic flows are defined on the 2*pi periodic box")
    decay = math.exp(-flow.decay_rate(nu_val) * t)
    return SpectralVectorField(grid, _flow_coefficients(flow, grid) * decay)


def rk4_step(
    v: SpectralVectorField, nu: Viscosity | float, dt: float
) -> SpectralVectorField:
    """One classical 4-stage Runge-Kutta step of ``ns_rhs``, re-projected."""
    k1 = ns_rhs(v, nu)
    k2 = ns_rhs(v + (0.5 * dt) * k1, nu)
    k3 = ns_rhs(v + (0.5 * dt) * k2, nu)
    k4 = ns_rhs(v + dt * k3, nu)
    out = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return leray_project(out)


def rk4_propagate(
    u: SpectralVectorField, nu: Viscosity | float, t_end: float, dt: float
) -> SpectralVectorField:
    """Advance ``u`` to ``t_end`` with fixed-step RK4 (final step shortened).

    Enforces the explicit diffusion bound dt <= 0.5*dx^2/nu for nu > 0 and
    rejects non-solenoidal initial data.
    """
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    if dt <= 0.0:
        raise ValueError("rk4 step size must be positive")
    if t_end < 0.0:
        raise ValueError("t_end must be nonnegative")
    if nu_val > 0.0:
        dt_max = 0.5 * u.grid.spacing**2 / nu_val
        if dt > dt_max:
            raise StabilityError("rk4 step exceeds the explicit stability bound", dt_max)
    div = relative_divergence(u)
    if div > DIV_FREE_RTOL:
        raise SolenoidalError("rk4_propagate requires divergence-free initial data", div)
    v = u
    remaining = t_end
    while remaining > 0.0:
        h = dt if remaining >= dt else remaining
        v = rk4_step(v, nu_val, h)
        remaining -= h
    return v


def random_divfree(
    seed: int, grid: Grid, peak_k: int, amplitude: float
) -> SpectralVectorField:
    """Reproducible random divergence-free field, band-limited to the 2/3 ball.

    Gaussian coefficients are drawn from a counter-based (Philox) generator
    keyed by ``seed``, weighted by |k|^4 * exp(-(|k|/peak_k)^2), Leray
    projected, Hermitian-symmetrized, zero-mean, and rescaled so the L2 norm
    equals ``amplitude`` (energy amplitude^2/2).
    """
    if peak_k < 1 or 3 * peak_k > grid.n:
        raise ValueError(
            f"peak_k must lie inside the dealias ball: 1 <= peak_k <= {grid.n // 3}"
        )
    if not (math.isfinite(amplitude) and amplitude > 0.0):
        raise ValueError("amplitude must be positive and finite")
    rng = np.random.Generator(np.random.Philox(seed))
    shape = (grid.dim, *grid.shape)
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    weight = grid.k_magnitude**4 * np.exp(-((grid.k_magnitude / peak_k) ** 2))
    coef *= weight * grid.dealias_keep
    coef[(slice(None),) + (0,) * grid.dim] = 0.0  # zero mean
    # Hermitian part, then projection (both preserve the other's property).
    coef = 0.5 * (coef + np.conj(reflect_modes(grid, coef)))
    field = leray_project(SpectralVectorField(grid, coef))
    norm = field.l2_norm()
    if norm == 0.0:
        raise ValueError("random field degenerated to zero; widen the spectrum")
    return (amplitude / norm) * field
