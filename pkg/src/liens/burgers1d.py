"""1-D viscous Burgers bench: the scalar specialization of the series
propagator (no projection) plus an independent RK4 reference.

Used to cross-check the symbolic generator powers against the numeric
Taylor recursion: n! * c_n of dv/dt = nu*v_xx - v*v_x must equal the n-fold
generator action on u evaluated on the grid. Products are formed pointwise
without dealiasing, so both routes discretize the same n-dimensional ODE
system; under-resolution shows up as honest disagreement.
"""

from __future__ import annotations

import numpy as np

from .errors import FieldError


def _spectral_derivative_table(n: int) -> np.ndarray:
    """i*k factors for one derivative, signed index, Nyquist zeroed."""
    j = np.fft.fftfreq(n, d=1.0 / n)
    j[n // 2] = 0.0
    return 1j * j


def _check_samples(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise FieldError(f"expected 1-D samples, got shape {u.shape}")
    if not np.isfinite(u).all():
        raise FieldError("samples contain non-finite values")
    return u


def taylor_coefficients_burgers(
    u0: np.ndarray, nu: float, order: int
) -> list[np.ndarray]:
    """Time-Taylor coefficients c_0..c_order of Burgers around u0:
    (n+1) c_{n+1} = nu * c_n'' - sum_m c_m * c_{n-m}'."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    u0 = _check_samples(u0)
    n = u0.size
    ik = _spectral_derivative_table(n)
    coeffs = [u0]
    firsts = [np.real(np.fft.ifft(ik * np.fft.fft(u0)))]
    for m in range(order):
        c_hat = np.fft.fft(coeffs[m])
        diffusion = nu * np.real(np.fft.ifft(ik**2 * c_hat))
        advection = np.zeros(n)
        for p in range(m + 1):
            advection += coeffs[p] * firsts[m - p]
        new = (diffusion - advection) / (m + 1)
        coeffs.append(new)
        firsts.append(np.real(np.fft.ifft(ik * np.fft.fft(new))))
    return coeffs


def evaluate_series(coeffs: list[np.ndarray], t: float) -> np.ndarray:
    """Horner evaluation of the truncated series at time t."""
    acc = coeffs[-1].copy()
    for c in reversed(coeffs[:-1]):
        acc *= t
        acc += c
    return acc


def burgers_rhs(u: np.ndarray, nu: float) -> np.ndarray:
    ik = _spectral_derivative_table(u.size)
    u_hat = np.fft.fft(u)
    u_x = np.real(np.fft.ifft(ik * u_hat))
    u_xx = np.real(np.fft.ifft(ik**2 * u_hat))
    return nu * u_xx - u * u_x


def rk4_burgers(u0: np.ndarray, nu: float, t_end: float, dt: float) -> np.ndarray:
    """Classical RK4 on the same pseudospectral Burgers system."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    u = _check_samples(u0).copy()
    remaining = t_end
    while remaining > 0.0:
        h = dt if remaining >= dt else remaining
        k1 = burgers_rhs(u, nu)
        k2 = burgers_rhs(u + 0.5 * h * k1, nu)
        k3 = burgers_rhs(u + 0.5 * h * k2, nu)
        k4 = burgers_rhs(u + h * k3, nu)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        remaining -= h
    return u
