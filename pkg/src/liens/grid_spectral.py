"""Periodic-box field representation and spectral primitives.

Everything downstream (projection, propagation, diagnostics) is built on the
types and operations here: forward/inverse Fourier transforms with a fixed
normalization, spectral differentiation with a zeroed Nyquist mode, 2/3-rule
dealiasing, and a binary snapshot format for field I/O.

Conventions
-----------
* Physical samples live on the uniform grid x_j = j * l / n, axis order
  (x, y[, z]), built with ``indexing="ij"``.
* The forward transform is normalized by 1/n^dim, the inverse is the plain
  unnormalized sum, so the coefficient of ``exp(i k.x)`` is read off directly
  (``sin x`` has coefficient -i/2 at k=(1,0,...)).
* The integer mode index j runs 0..n-1; the signed index is j for
  j <= n/2 and j-n above, so the Nyquist index n/2 carries the positive sign.
* Differentiation multiplies by i*k and zeroes the Nyquist mode, keeping
  derivatives of real fields real.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as _sfft

from .errors import FieldError, SnapshotFormatError

TWO_PI = 2.0 * math.pi

SNAPSHOT_MAGIC = "LIENS1"

# Relative tolerances fixed by the field contracts.
HERMITIAN_RTOL = 1e-10
IMAG_RESIDUE_RTOL = 1e-12


def fft_worker_count() -> int:
    """Number of FFT worker threads: all available cores, capped by the
    LIENS_THREADS environment variable when set."""
    avail = os.cpu_count() or 1
    cap = os.environ.get("LIENS_THREADS")
    if cap:
        try:
            avail = min(avail, max(1, int(cap)))
        except ValueError:
            pass
    return avail


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box: ``dim`` axes, ``n`` points per axis, side ``length``.

    ``n`` must be a power of two with n >= 8; the box is isotropic (one n,
    one length for every axis).
    """

    dim: int
    n: int
    length: float = TWO_PI

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"grid dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid n must be a power of two >= 8, got {self.n}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"grid length must be positive and finite, got {self.length}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def volume(self) -> float:
        return self.length**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def mode_index_1d(self) -> np.ndarray:
        """Signed integer mode index per axis position, Nyquist at +n/2."""
        j = np.arange(self.n)
        return np.where(j <= self.n // 2, j, j - self.n)

    @cached_property
    def k_1d(self) -> np.ndarray:
        return (TWO_PI / self.length) * self.mode_index_1d.astype(np.float64)

    @cached_property
    def k_deriv_1d(self) -> np.ndarray:
        """Differentiation wavenumbers: as ``k_1d`` but with the Nyquist mode
        zeroed (its sign is ambiguous; zeroing keeps real fields real)."""
        k = self.k_1d.copy()
        k[self.n // 2] = 0.0
        return k

    def _axis_view(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Reshape a per-axis 1-D table so it broadcasts along grid axis ``axis``."""
        shape = [1] * self.dim
        shape[axis] = self.n
        return values.reshape(shape)

    @cached_property
    def k_deriv(self) -> tuple[np.ndarray, ...]:
        """Broadcastable differentiation wavenumber array per axis."""
        return tuple(self._axis_view(self.k_deriv_1d, a) for a in range(self.dim))

    @cached_property
    def ksq(self) -> np.ndarray:
        """|k|^2 built from the differentiation wavenumbers (full grid array)."""
        out = np.zeros(self.shape)
        for a in range(self.dim):
            out = out + self.k_deriv[a] ** 2
        return out

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        """1/|k|^2 with zeros where |k|^2 = 0 (mean mode and bare Nyquist planes)."""
        safe = np.where(self.ksq > 0.0, self.ksq, 1.0)
        return np.where(self.ksq > 0.0, 1.0 / safe, 0.0)

    @cached_property
    def dealias_keep(self) -> np.ndarray:
        """Boolean mask of surviving modes: every axis index satisfies 3|j| <= n."""
        keep = np.ones(self.shape, dtype=bool)
        j = self.mode_index_1d
        for a in range(self.dim):
            keep &= self._axis_view(3 * np.abs(j) <= self.n, a)
        return keep

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        """|k| per mode (Nyquist included at its full magnitude), for shell binning."""
        out = np.zeros(self.shape)
        for a in range(self.dim):
            out = out + self._axis_view(self.k_1d, a) ** 2
        return np.sqrt(out)

    @cached_property
    def x_1d(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Physical coordinate arrays, one per axis, ``indexing="ij"``."""
        return tuple(np.meshgrid(*(self.x_1d,) * self.dim, indexing="ij"))


# ---------------------------------------------------------------------------
# low-level transforms on raw arrays (trailing axes are the grid axes)
# ---------------------------------------------------------------------------


def _grid_axes(grid: Grid, arr: np.ndarray) -> tuple[int, ...]:
    return tuple(range(arr.ndim - grid.dim, arr.ndim))


def fftn_forward(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Forward transform of the trailing grid axes, 1/n^dim normalization."""
    return _sfft.fftn(
        values, axes=_grid_axes(grid, values), norm="forward", workers=fft_worker_count()
    )


def ifftn_real(grid: Grid, coefficients: np.ndarray) -> np.ndarray:
    """Unnormalized inverse transform of the trailing grid axes, real part only."""
    return _sfft.ifftn(
        coefficients,
        axes=_grid_axes(grid, coefficients),
        norm="forward",
        workers=fft_worker_count(),
    ).real


def reflect_modes(grid: Grid, coefficients: np.ndarray) -> np.ndarray:
    """Return the array re-indexed k -> -k on every grid axis."""
    out = coefficients
    for ax in _grid_axes(grid, coefficients):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


# ---------------------------------------------------------------------------
# field types
# ---------------------------------------------------------------------------


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RealVectorField:
    """Velocity-like field sampled in physical space; data shape (dim, n, ..)."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.shape != (self.grid.dim, *self.grid.shape):
            raise FieldError(
                f"physical field shape {arr.shape} does not match grid {(self.grid.dim, *self.grid.shape)}"
            )
        if not np.isfinite(arr).all():
            raise FieldError("physical field contains non-finite samples")
        object.__setattr__(self, "data", _freeze(arr))

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.cell_volume * float(np.sum(self.data**2)))


class _SpectralArithmetic:
    """Shared elementwise arithmetic for spectral field wrappers."""

    def with_data(self, data: np.ndarray):
        return type(self)(self.grid, data)

    def __add__(self, other):
        if type(other) is not type(self) or other.grid != self.grid:
            return NotImplemented
        return self.with_data(self.data + other.data)

    def __sub__(self, other):
        if type(other) is not type(self) or other.grid != self.grid:
            return NotImplemented
        return self.with_data(self.data - other.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self.with_data(self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_data(-self.data)

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.volume * float(np.sum(np.abs(self.data) ** 2)))


@dataclass(frozen=True)
class SpectralVectorField(_SpectralArithmetic):
    """Fourier coefficients of a real vector field; data shape (dim, n, ..).

    Hermitian symmetry (coefficient at -k equal to the conjugate at k) is an
    invariant maintained by every operation in this package; ``to_physical``
    enforces it on entry.
    """

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.complex128)
        if arr.shape != (self.grid.dim, *self.grid.shape):
            raise FieldError(
                f"spectral field shape {arr.shape} does not match grid {(self.grid.dim, *self.grid.shape)}"
            )
        if not np.isfinite(arr).all():
            raise FieldError("spectral field contains non-finite coefficients")
        object.__setattr__(self, "data", _freeze(arr))


@dataclass(frozen=True)
class SpectralScalarField(_SpectralArithmetic):
    """Fourier coefficients of a real scalar field (pressure and friends);
    the mean (k = 0) coefficient must be real."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            raise FieldError(
                f"spectral scalar shape {arr.shape} does not match grid {self.grid.shape}"
            )
        if not np.isfinite(arr).all():
            raise FieldError("spectral scalar contains non-finite coefficients")
        mean = arr[(0,) * self.grid.dim]
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
        if abs(mean.imag) > HERMITIAN_RTOL * max(scale, 1e-300):
            raise FieldError(
                f"mean coefficient of a real scalar field must be real "
                f"(imag {mean.imag:.3e})"
            )
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def mean_coefficient(self) -> complex:
        return complex(self.data[(0,) * self.grid.dim])


SpectralField = SpectralVectorField | SpectralScalarField


def hermitian_defect(field: SpectralField) -> float:
    """Relative size of the Hermitian-symmetry violation, 0 for a clean field."""
    arr = field.data
    norm = float(np.sqrt(np.sum(np.abs(arr) ** 2)))
    if norm == 0.0:
        return 0.0
    defect = arr - np.conj(reflect_modes(field.grid, arr))
    return float(np.sqrt(np.sum(np.abs(defect) ** 2))) / norm


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def to_spectral(f: RealVectorField) -> SpectralVectorField:
    """Forward transform; the k-th coefficient is (1/n^dim) sum f(x) e^{-ik.x}."""
    return SpectralVectorField(f.grid, fftn_forward(f.grid, f.data))


def to_physical(s: SpectralVectorField) -> RealVectorField:
    """Inverse transform back to physical samples.

    Rejects fields whose Hermitian symmetry is broken beyond 1e-10 relative;
    the imaginary residue of the inverse transform is checked against
    1e-12 relative and then discarded.
    """
    defect = hermitian_defect(s)
    if defect > HERMITIAN_RTOL:
        raise FieldError(
            f"spectral field breaks Hermitian symmetry (relative defect {defect:.3e})"
        )
    phys = _sfft.ifftn(
        s.data, axes=_grid_axes(s.grid, s.data), norm="forward", workers=fft_worker_count()
    )
    scale = float(np.max(np.abs(phys.real)))
    residue = float(np.max(np.abs(phys.imag)))
    if residue > IMAG_RESIDUE_RTOL * max(scale, 1e-300):
        raise FieldError(
            f"inverse transform left an imaginary residue {residue:.3e} "
            f"(field scale {scale:.3e})"
        )
    return RealVectorField(s.grid, phys.real)


def derivative(s: SpectralField, axis: int) -> SpectralField:
    """Spectral partial derivative along ``axis`` (Nyquist mode zeroed)."""
    grid = s.grid
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis {axis} out of range for dim {grid.dim}")
    return s.with_data(s.data * (1j * grid.k_deriv[axis]))


def dealias(s: SpectralField) -> SpectralField:
    """2/3-rule truncation: zero every mode with any axis index |j| > n/3."""
    return s.with_data(s.data * s.grid.dealias_keep)


def dealias_defect(s: SpectralField) -> float:
    """Relative energy fraction outside the 2/3 ball (0 for a dealiased field)."""
    norm = float(np.sqrt(np.sum(np.abs(s.data) ** 2)))
    if norm == 0.0:
        return 0.0
    outside = s.data * ~s.grid.dealias_keep
    return float(np.sqrt(np.sum(np.abs(outside) ** 2))) / norm


def divergence(v: SpectralVectorField) -> SpectralScalarField:
    """div v as a spectral scalar field (derivative conventions as above)."""
    grid = v.grid
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for a in range(grid.dim):
        acc += 1j * grid.k_deriv[a] * v.data[a]
    return SpectralScalarField(grid, acc)


def gradient_l2(v: SpectralVectorField) -> float:
    """L2 norm of the full velocity gradient, sqrt(sum_ij int (d_j v_i)^2 dx)."""
    grid = v.grid
    total = float(np.sum(grid.ksq * np.sum(np.abs(v.data) ** 2, axis=0)))
    return math.sqrt(grid.volume * total)


def relative_divergence(v: SpectralVectorField) -> float:
    """‖div v‖_2 / ‖grad v‖_2; zero for a constant (gradient-free) field."""
    grad = gradient_l2(v)
    if grad == 0.0:
        return 0.0
    return divergence(v).l2_norm() / grad


def div_max(v: SpectralVectorField) -> float:
    """Max-norm of the physical-space divergence."""
    return float(np.max(np.abs(ifftn_real(v.grid, divergence(v).data))))


def inner_product(a: SpectralVectorField, b: SpectralVectorField) -> float:
    """L2 inner product <a, b> = int a.b dx, evaluated via Parseval."""
    if a.grid != b.grid:
        raise FieldError("inner product requires matching grids")
    return a.grid.volume * float(np.sum(np.conj(a.data) * b.data).real)


def zero_vector_field(grid: Grid) -> SpectralVectorField:
    return SpectralVectorField(grid, np.zeros((grid.dim, *grid.shape), dtype=np.complex128))


# ---------------------------------------------------------------------------
# binary snapshot format
# ---------------------------------------------------------------------------
#
# Layout: one ASCII header line
#     LIENS1 dim n l component_count kind\n
# with kind in {physical, spectral}, followed by little-endian float64 data,
# component-major, x-fastest within a component. Spectral data interleaves
# real and imaginary parts per coefficient.


def write_snapshot(path: str | Path, field: RealVectorField | SpectralVectorField) -> None:
    grid = field.grid
    kind = "physical" if isinstance(field, RealVectorField) else "spectral"
    header = f"{SNAPSHOT_MAGIC} {grid.dim} {grid.n} {grid.length:.17g} {grid.dim} {kind}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for comp in field.data:
            flat = np.ravel(comp, order="F")
            if kind == "spectral":
                pairs = np.empty(2 * flat.size, dtype="<f8")
                pairs[0::2] = flat.real
                pairs[1::2] = flat.imag
                fh.write(pairs.tobytes())
            else:
                fh.write(flat.astype("<f8", copy=False).tobytes())


def read_snapshot(path: str | Path) -> RealVectorField | SpectralVectorField:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if len(parts) != 6 or parts[0] != SNAPSHOT_MAGIC:
            raise SnapshotFormatError(f"bad snapshot header: {header!r}")
        try:
            dim, n = int(parts[1]), int(parts[2])
            length = float(parts[3])
            ncomp = int(parts[4])
        except ValueError as exc:
            raise SnapshotFormatError(f"unparseable snapshot header: {header!r}") from exc
        kind = parts[5]
        if kind not in ("physical", "spectral"):
            raise SnapshotFormatError(f"unknown snapshot kind {kind!r}")
        grid = Grid(dim=dim, n=n, length=length)
        if ncomp != dim:
            raise SnapshotFormatError(
                f"snapshot component count {ncomp} does not match dim {dim}"
            )
        per_comp = n**dim * (2 if kind == "spectral" else 1)
        raw = fh.read()
    expected = 8 * per_comp * ncomp
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"snapshot payload has {len(raw)} bytes, expected {expected}"
        )
    values = np.frombuffer(raw, dtype="<f8")
    comps = []
    for c in range(ncomp):
        flat = values[c * per_comp : (c + 1) * per_comp]
        if kind == "spectral":
            flat = flat[0::2] + 1j * flat[1::2]
        comps.append(np.reshape(flat, grid.shape, order="F"))
    data = np.stack(comps)
    if kind == "spectral":
        return SpectralVectorField(grid, data)
    return RealVectorField(grid, data)
