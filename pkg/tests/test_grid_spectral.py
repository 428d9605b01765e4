"""Transforms, derivatives, dealiasing, and snapshot round-trips."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liens import Grid, RealVectorField, SpectralVectorField, dealias, derivative, to_physical, to_spectral
from liens.errors import FieldError, SnapshotFormatError
from liens.grid_spectral import (
    dealias_defect,
    divergence,
    hermitian_defect,
    inner_product,
    read_snapshot,
    reflect_modes,
    relative_divergence,
    write_snapshot,
)

from conftest import random_real_field


class TestGrid:
    def test_valid_construction(self):
        g = Grid(dim=2, n=64)
        assert g.shape == (64, 64)
        assert math.isclose(g.length, 2 * math.pi)
        assert math.isclose(g.volume, (2 * math.pi) ** 2)

    @pytest.mark.parametrize("dim", [0, 1, 4])
    def test_bad_dim(self, dim):
        with pytest.raises(ValueError, match="dim"):
            Grid(dim=dim, n=16)

    @pytest.mark.parametrize("n", [4, 10, 12, 17, 48])
    def test_bad_n(self, n):
        with pytest.raises(ValueError, match="power of two"):
            Grid(dim=2, n=n)

    def test_wavenumber_layout(self):
        g = Grid(dim=2, n=16)
        j = g.mode_index_1d
        assert j[0] == 0
        assert j[1] == 1
        assert j[8] == 8  # Nyquist carries the positive sign
        assert j[9] == -7
        assert j[-1] == -1
        # derivative table zeroes the Nyquist entry only
        assert g.k_deriv_1d[8] == 0.0
        assert g.k_deriv_1d[1] == pytest.approx(1.0)

    def test_wavenumber_scaling_with_length(self):
        g = Grid(dim=2, n=16, length=4 * math.pi)
        assert g.k_1d[1] == pytest.approx(0.5)

    def test_dealias_mask_boundary(self):
        g = Grid(dim=2, n=16)  # keep |j| <= 5 (3*5=15 <= 16 < 3*6)
        keep = g.dealias_keep
        assert keep[5, 0]
        assert not keep[6, 0]
        assert not keep[8, 0]


class TestTransforms:
    def test_sine_coefficients(self):
        g = Grid(dim=2, n=16)
        x, _ = g.mesh()
        f = RealVectorField(g, np.stack((np.sin(x), np.zeros(g.shape))))
        s = to_spectral(f)
        assert s.data[0, 1, 0] == pytest.approx(-0.5j, abs=1e-14)
        assert s.data[0, -1, 0] == pytest.approx(+0.5j, abs=1e-14)
        rest = s.data.copy()
        rest[0, 1, 0] = rest[0, -1, 0] = 0.0
        assert np.max(np.abs(rest)) < 1e-14

    def test_constant_field(self):
        g = Grid(dim=2, n=16)
        f = RealVectorField(g, np.full((2, 16, 16), 3.25))
        s = to_spectral(f)
        assert s.data[0, 0, 0] == pytest.approx(3.25)
        off = s.data.copy()
        off[:, 0, 0] = 0.0
        assert np.max(np.abs(off)) < 1e-14

    def test_cos_sin_product_coefficients(self):
        # cos(x) sin(y) expands to four modes of modulus 1/4:
        #   -i/4 at (1,1), +i/4 at (1,-1), -i/4 at (-1,1), +i/4 at (-1,-1)
        g = Grid(dim=2, n=32)
        x, y = g.mesh()
        f = RealVectorField(g, np.stack((np.cos(x) * np.sin(y), np.zeros(g.shape))))
        s = to_spectral(f)
        expected = {
            (1, 1): -0.25j,
            (1, -1): +0.25j,
            (-1, 1): -0.25j,
            (-1, -1): +0.25j,
        }
        for (kx, ky), want in expected.items():
            assert s.data[0, kx, ky] == pytest.approx(want, abs=1e-14)
            assert abs(s.data[0, kx, ky]) == pytest.approx(0.25, abs=1e-14)

    def test_roundtrip_random(self, grid2d, rng):
        f = random_real_field(grid2d, rng)
        back = to_physical(to_spectral(f))
        scale = np.max(np.abs(f.data))
        assert np.max(np.abs(back.data - f.data)) <= 1e-12 * scale

    def test_zero_spectral_to_physical(self, grid2d):
        s = SpectralVectorField(grid2d, np.zeros((2, *grid2d.shape), dtype=complex))
        assert np.all(to_physical(s).data == 0.0)

    def test_single_mode_inverse(self):
        g = Grid(dim=3, n=16)
        data = np.zeros((3, *g.shape), dtype=complex)
        data[0, 1, 0, 0] = -0.5j
        data[0, -1, 0, 0] = +0.5j
        f = to_physical(SpectralVectorField(g, data))
        x = g.mesh()[0]
        assert np.max(np.abs(f.data[0] - np.sin(x))) < 1e-13
        assert np.max(np.abs(f.data[1:])) < 1e-14

    def test_non_finite_rejected(self, grid2d):
        data = np.zeros((2, *grid2d.shape))
        data[0, 0, 0] = np.nan
        with pytest.raises(FieldError, match="non-finite"):
            RealVectorField(grid2d, data)

    def test_broken_symmetry_rejected(self, grid2d):
        data = np.zeros((2, *grid2d.shape), dtype=complex)
        data[0, 1, 0] = 1.0  # no conjugate partner
        with pytest.raises(FieldError, match="Hermitian"):
            to_physical(SpectralVectorField(grid2d, data))

    def test_parseval(self, grid2d, rng):
        f = random_real_field(grid2d, rng)
        s = to_spectral(f)
        phys = float(np.sum(f.data**2)) / grid2d.n**grid2d.dim
        spec = float(np.sum(np.abs(s.data) ** 2))
        assert phys == pytest.approx(spec, rel=1e-12)

    def test_inner_product_matches_quadrature(self, grid2d, rng):
        a = random_real_field(grid2d, rng)
        b = random_real_field(grid2d, rng)
        quad = grid2d.cell_volume * float(np.sum(a.data * b.data))
        spec = inner_product(to_spectral(a), to_spectral(b))
        assert spec == pytest.approx(quad, rel=1e-12)


class TestDerivative:
    def test_sin_to_cos(self):
        g = Grid(dim=2, n=32)
        x, _ = g.mesh()
        s = to_spectral(RealVectorField(g, np.stack((np.sin(x), np.zeros(g.shape)))))
        d = to_physical(derivative(s, 0))
        assert np.max(np.abs(d.data[0] - np.cos(x))) < 1e-12

    def test_constant_derivative_vanishes(self, grid2d):
        s = to_spectral(RealVectorField(grid2d, np.full((2, *grid2d.shape), 2.0)))
        d = derivative(s, 1)
        assert np.max(np.abs(d.data)) < 1e-14

    def test_laplacian_eigenfunction(self):
        g = Grid(dim=2, n=32)
        x, y = g.mesh()
        f = np.cos(x) * np.sin(y)
        s = to_spectral(RealVectorField(g, np.stack((f, np.zeros(g.shape)))))
        lap = derivative(derivative(s, 0), 0) + derivative(derivative(s, 1), 1)
        assert np.max(np.abs(to_physical(lap).data[0] + 2.0 * f)) < 1e-12

    def test_axis_out_of_range(self, grid2d):
        s = to_spectral(RealVectorField(grid2d, np.zeros((2, *grid2d.shape))))
        with pytest.raises(ValueError, match="axis"):
            derivative(s, 2)

    def test_derivative_of_real_field_is_real(self, grid2d, rng):
        s = to_spectral(random_real_field(grid2d, rng))
        to_physical(derivative(s, 0))  # raises if the residue exceeds 1e-12

    def test_derivative_commutes_with_dealias(self, grid2d, rng):
        s = to_spectral(random_real_field(grid2d, rng))
        a = dealias(derivative(s, 0))
        b = derivative(dealias(s), 0)
        assert np.array_equal(a.data, b.data)


class TestDealias:
    def test_low_modes_unchanged(self):
        g = Grid(dim=2, n=32)
        data = np.zeros((2, *g.shape), dtype=complex)
        data[0, 3, 0] = -0.5j
        data[0, -3, 0] = +0.5j
        data[1, 0, 2] = data[1, 0, -2] = 0.5
        s = SpectralVectorField(g, data)
        d = dealias(s)
        assert np.array_equal(d.data, s.data)

    def test_nyquist_mode_removed(self):
        g = Grid(dim=2, n=16)
        data = np.zeros((2, *g.shape), dtype=complex)
        data[0, 8, 0] = 1.0
        d = dealias(SpectralVectorField(g, data))
        assert np.max(np.abs(d.data)) == 0.0

    def test_energy_never_grows(self, grid2d, rng):
        s = to_spectral(random_real_field(grid2d, rng))
        assert dealias(s).l2_norm() <= s.l2_norm() + 1e-15

    def test_dealias_defect(self, grid2d):
        data = np.zeros((2, *grid2d.shape), dtype=complex)
        data[0, grid2d.n // 2, 0] = 1.0
        assert dealias_defect(SpectralVectorField(grid2d, data)) == pytest.approx(1.0)
        assert dealias_defect(dealias(SpectralVectorField(grid2d, data))) == 0.0


class TestHermitianHelpers:
    def test_reflect_modes_involution(self, grid2d, rng):
        s = to_spectral(random_real_field(grid2d, rng))
        twice = reflect_modes(grid2d, reflect_modes(grid2d, s.data))
        assert np.array_equal(twice, s.data)

    def test_real_field_has_zero_defect(self, grid2d, rng):
        s = to_spectral(random_real_field(grid2d, rng))
        assert hermitian_defect(s) < 1e-13


class TestDivergence:
    def test_gradient_field_divergence(self):
        g = Grid(dim=2, n=32)
        x, y = g.mesh()
        # v = grad(sin x sin y) => div v = lap = -2 sin x sin y
        v = np.stack((np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)))
        d = divergence(to_spectral(RealVectorField(g, v)))
        from liens.grid_spectral import ifftn_real

        phys = ifftn_real(g, d.data)
        assert np.max(np.abs(phys + 2.0 * np.sin(x) * np.sin(y))) < 1e-12

    def test_relative_divergence_zero_for_solenoidal(self, random_divfree_2d):
        assert relative_divergence(random_divfree_2d) < 1e-13


class TestSnapshots:
    def test_physical_roundtrip_bitexact(self, grid2d, rng, tmp_path):
        f = random_real_field(grid2d, rng)
        path = tmp_path / "field.liens"
        write_snapshot(path, f)
        back = read_snapshot(path)
        assert isinstance(back, RealVectorField)
        assert back.grid == grid2d
        assert np.array_equal(back.data, f.data)

    def test_spectral_roundtrip_bitexact(self, grid3d, rng, tmp_path):
        s = to_spectral(random_real_field(grid3d, rng))
        path = tmp_path / "field.liens"
        write_snapshot(path, s)
        back = read_snapshot(path)
        assert isinstance(back, SpectralVectorField)
        assert np.array_equal(back.data, s.data)

    def test_header_contents(self, grid2d, tmp_path):
        f = RealVectorField(grid2d, np.zeros((2, *grid2d.shape)))
        path = tmp_path / "field.liens"
        write_snapshot(path, f)
        header = path.read_bytes().split(b"\n", 1)[0].decode()
        parts = header.split()
        assert parts[0] == "LIENS1"
        assert parts[1] == "2"
        assert parts[2] == "32"
        assert float(parts[3]) == pytest.approx(2 * math.pi)
        assert parts[4] == "2"
        assert parts[5] == "physical"

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.liens"
        path.write_bytes(b"NOPE 2 32 6.28 2 physical\n")
        with pytest.raises(SnapshotFormatError, match="header"):
            read_snapshot(path)

    def test_truncated_payload_rejected(self, grid2d, tmp_path):
        f = RealVectorField(grid2d, np.zeros((2, *grid2d.shape)))
        path = tmp_path / "field.liens"
        write_snapshot(path, f)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(SnapshotFormatError, match="payload"):
            read_snapshot(path)

    def test_x_fastest_ordering(self, tmp_path):
        g = Grid(dim=2, n=8)
        data = np.zeros((2, 8, 8))
        data[0] = np.arange(64).reshape(8, 8)  # data[0][ix, iy] = 8*ix + iy
        path = tmp_path / "field.liens"
        write_snapshot(path, RealVectorField(g, data))
        payload = path.read_bytes().split(b"\n", 1)[1]
        first_row = np.frombuffer(payload[: 8 * 8], dtype="<f8")
        # x varies fastest: the first 8 values walk ix at iy=0
        assert np.array_equal(first_row, data[0, :, 0])


@settings(max_examples=20, deadline=None)
@given(amplitude=st.floats(min_value=0.1, max_value=10.0), seed=st.integers(0, 2**16))
def test_roundtrip_property(amplitude, seed):
    g = Grid(dim=2, n=16)
    local = np.random.default_rng(seed)
    f = random_real_field(g, local)
    f = RealVectorField(g, amplitude * f.data)
    back = to_physical(to_spectral(f))
    scale = max(np.max(np.abs(f.data)), 1e-30)
    assert np.max(np.abs(back.data - f.data)) <= 1e-12 * scale
