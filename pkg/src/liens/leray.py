"""Pressure elimination and the incompressible Navier-Stokes right-hand side.

The pressure Poisson equation is solved spectrally (division by -|k|^2 with a
zero-mean gauge), the Leray projector removes the gradient part of a field,
and ``ns_rhs`` evaluates

    F(v) = nu * lap(v) - P[(v.grad) v]

which coincides with nu*lap(v) - (v.grad)v - grad(p_v); both evaluation paths
are exposed so tests can assert their agreement. Quadratic products are formed
pointwise in physical space and dealiased immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FieldError, SolenoidalError
from .grid_spectral import (
    Grid,
    SpectralScalarField,
    SpectralVectorField,
    dealias_defect,
    fftn_forward,
    ifftn_real,
    relative_divergence,
)

DIV_FREE_RTOL = 1e-8
DEALIASED_RTOL = 1e-10


@dataclass(frozen=True)
class Viscosity:
    """Kinematic viscosity, nu >= 0."""

    nu: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ValueError(f"viscosity must be finite and nonnegative, got {self.nu}")


def _require_solenoidal(v: SpectralVectorField, where: str) -> None:
    div = relative_divergence(v)
    if div > DIV_FREE_RTOL:
        raise SolenoidalError(f"{where} requires a divergence-free field", div)


def _require_dealiased(v: SpectralVectorField, where: str) -> None:
    defect = dealias_defect(v)
    if defect > DEALIASED_RTOL:
        raise FieldError(
            f"{where} requires a dealiased field (relative defect {defect:.3e})"
        )


def _velocity_gradients(grid: Grid, v_hat: np.ndarray) -> np.ndarray:
    """Physical-space gradients g[i, j] = d v_i / d x_j, shape (dim, dim, ...)."""
    dim = grid.dim
    grads = np.empty((dim, dim, *grid.shape), dtype=np.complex128)
    for j in range(dim):
        grads[:, j] = v_hat * (1j * grid.k_deriv[j])
    return ifftn_real(grid, grads)


def _advection_hat(grid: Grid, v_hat: np.ndarray) -> np.ndarray:
    """Dealiased spectral coefficients of the convective term (v.grad)v."""
    v_phys = ifftn_real(grid, v_hat)
    grads = _velocity_gradients(grid, v_hat)
    adv = np.einsum("j...,ij...->i...", v_phys, grads)
    return fftn_forward(grid, adv) * grid.dealias_keep


def _project(grid: Grid, w_hat: np.ndarray) -> np.ndarray:
    """Leray projection of raw coefficients: w - k (k.w)/|k|^2, k=0 untouched."""
    k_dot_w = np.zeros(grid.shape, dtype=np.complex128)
    for a in range(grid.dim):
        k_dot_w += grid.k_deriv[a] * w_hat[a]
    k_dot_w *= grid.inv_ksq
    out = w_hat.copy()
    for a in range(grid.dim):
        out[a] -= grid.k_deriv[a] * k_dot_w
    return out


def leray_project(w: SpectralVectorField) -> SpectralVectorField:
    """Orthogonal projection onto divergence-free fields; annihilates gradients."""
    return SpectralVectorField(w.grid, _project(w.grid, w.data))


def compute_pressure(v: SpectralVectorField) -> SpectralScalarField:
    """Solve lap(p) = -sum_ij d_i v_j d_j v_i spectrally, zero-mean gauge.

    The input must be dealiased and divergence-free (the Poisson equation is
    derived from the divergence of the momentum equation under that
    constraint).
    """
    _require_solenoidal(v, "compute_pressure")
    _require_dealiased(v, "compute_pressure")
    grid = v.grid
    grads = _velocity_gradients(grid, v.data)  # grads[i, j] = d_j v_i
    source = np.einsum("ij...,ji...->...", grads, grads)
    source_hat = fftn_forward(grid, source) * grid.dealias_keep
    p_hat = source_hat * grid.inv_ksq
    return SpectralScalarField(grid, p_hat)


def ns_rhs(
    v: SpectralVectorField,
    nu: Viscosity | float,
    *,
    _pressure_sign: float = 1.0,
) -> SpectralVectorField:
    """Navier-Stokes right-hand side nu*lap(v) - P[(v.grad)v].

    Output is divergence-free and dealiased whenever the input is. The
    ``_pressure_sign`` keyword exists only for negative-control tests: it
    flips the sign of the pressure-gradient part of the projection, which
    must break the dissipativity identity.
    """
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    if nu_val < 0.0:
        raise ValueError("viscosity must be nonnegative")
    _require_solenoidal(v, "ns_rhs")
    _require_dealiased(v, "ns_rhs")
    grid = v.grid
    adv_hat = _advection_hat(grid, v.data)
    if _pressure_sign == 1.0:
        nonlinear = _project(grid, adv_hat)
    else:
        projected = _project(grid, adv_hat)
        nonlinear = adv_hat + _pressure_sign * (projected - adv_hat)
    rhs = -nu_val * grid.ksq * v.data - nonlinear
    return SpectralVectorField(grid, rhs)


def ns_rhs_via_pressure(v: SpectralVectorField, nu: Viscosity | float) -> SpectralVectorField:
    """Same right-hand side through the explicit pressure gradient,
    nu*lap(v) - (v.grad)v - grad(p_v); kept as the second evaluation path
    for the gauge-consistency checks."""
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    grid = v.grid
    adv_hat = _advection_hat(grid, v.data)
    p_hat = compute_pressure(v).data
    rhs = -nu_val * grid.ksq * v.data - adv_hat
    for a in range(grid.dim):
        rhs[a] -= 1j * grid.k_deriv[a] * p_hat
    return SpectralVectorField(grid, rhs)
