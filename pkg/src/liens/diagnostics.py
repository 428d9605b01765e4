"""Scalar functionals and trajectory checks: energy, enstrophy-type norm,
dissipativity residual, energy balance, shell spectra, and the CSV schema
used by the command-line front end."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .grid_spectral import (
    RealVectorField,
    SpectralVectorField,
    inner_product,
)
from .leray import Viscosity, ns_rhs

SERIES_CSV_HEADER = "t,energy,enstrophy,div_max,balance_residual,order_used,dt"


@dataclass(frozen=True)
class TimeSeriesRecord:
    """Per-step diagnostics of a simulation trajectory."""

    t: float
    energy: float
    enstrophy: float
    div_max: float
    balance_residual: float
    order_used: int
    dt: float

    def __post_init__(self):
        values = (self.t, self.energy, self.enstrophy, self.div_max,
                  self.balance_residual, self.dt)
        if not all(math.isfinite(x) for x in values):
            raise ValueError("time-series record contains non-finite values")
        if self.energy < 0.0 or self.enstrophy < 0.0:
            raise ValueError("energy and enstrophy must be nonnegative")


def energy(v: SpectralVectorField | RealVectorField) -> float:
    """Kinetic energy (1/2) <v, v>; spectral fields use Parseval directly."""
    if isinstance(v, RealVectorField):
        return 0.5 * v.grid.cell_volume * float(np.sum(v.data**2))
    return 0.5 * v.grid.volume * float(np.sum(np.abs(v.data) ** 2))


def enstrophy_norm(v: SpectralVectorField) -> float:
    """Gradient-square integral sum_ij int (d_j v_i)^2 dx."""
    grid = v.grid
    return grid.volume * float(np.sum(grid.ksq * np.sum(np.abs(v.data) ** 2, axis=0)))


def dissipativity_residual(v: SpectralVectorField, nu: Viscosity | float) -> float:
    """<F(v), v> + nu * enstrophy_norm(v); vanishes identically for dealiased
    divergence-free fields, so its size measures aliasing or projection bugs."""
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    return inner_product(ns_rhs(v, nu_val), v) + nu_val * enstrophy_norm(v)


def _interior_residuals(
    series: Sequence[TimeSeriesRecord], nu_val: float
) -> np.ndarray:
    """Relative residuals of dE/dt + nu*enstrophy at interior records.

    dE/dt is the three-point central difference (nonuniform spacing
    supported); residuals are scaled by the largest of |dE/dt| and
    nu*enstrophy seen anywhere, so a constant-zero trajectory gives zeros.
    """
    t = np.array([r.t for r in series])
    if np.any(np.diff(t) <= 0):
        raise ValueError("records must be sorted by strictly increasing t")
    e = np.array([r.energy for r in series])
    ens = np.array([r.enstrophy for r in series])
    h_minus = t[1:-1] - t[:-2]
    h_plus = t[2:] - t[1:-1]
    dedt = (
        e[2:] * h_minus**2
        - e[:-2] * h_plus**2
        + e[1:-1] * (h_plus**2 - h_minus**2)
    ) / (h_minus * h_plus * (h_minus + h_plus))
    scale = max(float(np.max(np.abs(dedt))), float(np.max(nu_val * ens[1:-1])))
    if scale == 0.0:
        return np.zeros(len(series) - 2)
    return np.abs(dedt + nu_val * ens[1:-1]) / scale


def energy_balance(series: Sequence[TimeSeriesRecord], nu: Viscosity | float) -> float:
    """Maximum relative residual of dE/dt = -nu * enstrophy over the series;
    needs at least 3 records with strictly increasing t."""
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    if len(series) < 3:
        raise ValueError("energy balance needs at least 3 records")
    return float(np.max(_interior_residuals(series, nu_val)))


def balance_residuals(
    series: Sequence[TimeSeriesRecord], nu: Viscosity | float
) -> list[float]:
    """Pointwise balance residuals for CSV emission: interior records carry
    the relative residual, endpoints (and too-short series) carry 0."""
    nu_val = nu.nu if isinstance(nu, Viscosity) else float(nu)
    out = [0.0] * len(series)
    if len(series) < 3:
        return out
    for i, r in enumerate(_interior_residuals(series, nu_val)):
        out[i + 1] = float(r)
    return out


def shell_spectrum(v: SpectralVectorField) -> list[tuple[int, float]]:
    """Energy binned by integer |k| shells (|k| rounded to nearest, ties to
    even via ``np.rint``). The shell energies partition the total exactly."""
    grid = v.grid
    mode_energy = 0.5 * grid.volume * np.sum(np.abs(v.data) ** 2, axis=0)
    shells = np.rint(grid.k_magnitude).astype(int)
    totals = np.bincount(shells.ravel(), weights=mode_energy.ravel())
    return [(int(s), float(totals[s])) for s in range(len(totals))]


def format_float(x: float) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    return f"{x:.17g}"


def write_series_csv(path: str | Path, series: Iterable[TimeSeriesRecord]) -> None:
    lines = [SERIES_CSV_HEADER]
    for r in series:
        lines.append(
            ",".join(
                (
                    format_float(r.t),
                    format_float(r.energy),
                    format_float(r.enstrophy),
                    format_float(r.div_max),
                    format_float(r.balance_residual),
                    str(r.order_used),
                    format_float(r.dt),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_series_csv(path: str | Path) -> list[TimeSeriesRecord]:
    text = Path(path).read_text(encoding="ascii").strip().splitlines()
    if not text or text[0] != SERIES_CSV_HEADER:
        raise ValueError(f"bad series CSV header in {path}")
    records = []
    for line in text[1:]:
        cols = line.split(",")
        if len(cols) != 7:
            raise ValueError(f"bad series CSV row: {line!r}")
        records.append(
            TimeSeriesRecord(
                t=float(cols[0]),
                energy=float(cols[1]),
                enstrophy=float(cols[2]),
                div_max=float(cols[3]),
                balance_residual=float(cols[4]),
                order_used=int(cols[5]),
                dt=float(cols[6]),
            )
        )
    return records
