"""Core spectral infrastructure: transforms, derivatives, dealiasing."""

import numpy as np
import pytest

from crossdiff import (
    Field,
    SpectralField,
    bilaplacian,
    dealias,
    divergence,
    gradient,
    laplacian,
    make_grid,
    to_physical,
    to_spectral,
)


def random_field(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return Field(grid, scale * rng.standard_normal(grid.shape))


class TestMakeGrid:
    def test_unit_pi_box_gives_integer_wavenumbers(self):
        g = make_grid(1, np.pi, 8)
        assert g.dx == pytest.approx(np.pi / 4)
        np.testing.assert_allclose(g.k_axes[0], [0, 1, 2, 3, 4, -3, -2, -1])

    def test_spacing(self):
        g = make_grid(2, 10.0, 64)
        assert g.dx == pytest.approx(20.0 / 64)
        assert g.dx * g.n == 2 * g.half_width

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            make_grid(3, 10.0, 10)

    def test_rejects_bad_half_width_and_dim(self):
        with pytest.raises(ValueError):
            make_grid(1, 0.0, 16)
        with pytest.raises(ValueError):
            make_grid(4, 1.0, 16)
        with pytest.raises(ValueError):
            make_grid(1, 1.0, 4)

    def test_wavenumbers_antisymmetric_about_nyquist(self):
        g = make_grid(1, 3.0, 32)
        k = g.k_axes[0]
        nyq = g.n // 2
        for m in range(1, nyq):
            assert k[nyq + m] == pytest.approx(-k[nyq - m])


class TestTransforms:
    def test_constant_field_has_only_zero_mode(self):
        g = make_grid(2, 5.0, 16)
        sf = to_spectral(Field(g, np.full(g.shape, 3.25)))
        coeffs = sf.coefficients.copy()
        assert coeffs[0, 0] == pytest.approx(3.25 * g.size)
        coeffs[0, 0] = 0.0
        assert np.abs(coeffs).max() < 1e-12 * g.size

    def test_cosine_has_two_modes(self):
        g = make_grid(1, np.pi, 8)
        sf = to_spectral(Field(g, np.cos(g.x_axes[0])))
        assert (np.abs(sf.coefficients) > 1e-10).sum() == 2

    @pytest.mark.parametrize("dim,n", [(1, 64), (2, 32), (3, 16)])
    def test_roundtrip(self, dim, n):
        g = make_grid(dim, 4.0, n)
        f = random_field(g, seed=dim)
        back = to_physical(to_spectral(f))
        err = np.abs(back.values - f.values).max() / np.abs(f.values).max()
        assert err <= 1e-12

    def test_shape_mismatch_rejected(self):
        g = make_grid(1, 1.0, 16)
        with pytest.raises(ValueError):
            Field(g, np.zeros(8))
        with pytest.raises(ValueError):
            SpectralField(g, np.zeros((8,), dtype=complex))


class TestOperators:
    def test_laplacian_of_cosine(self):
        g = make_grid(1, np.pi, 8)
        f = Field(g, np.cos(g.x_axes[0]))
        lap = to_physical(laplacian(to_spectral(f)))
        np.testing.assert_allclose(lap.values, -f.values, atol=1e-12)

    def test_bilaplacian_of_cosine(self):
        g = make_grid(1, np.pi, 8)
        f = Field(g, np.cos(g.x_axes[0]))
        bil = to_physical(bilaplacian(to_spectral(f)))
        np.testing.assert_allclose(bil.values, f.values, atol=1e-12)

    @pytest.mark.parametrize("dim,n", [(1, 64), (2, 32), (3, 16)])
    def test_divergence_of_gradient_is_laplacian(self, dim, n):
        g = make_grid(dim, 2.5, n)
        sf = to_spectral(random_field(g, seed=10 + dim))
        via_ops = to_physical(divergence(gradient(sf)))
        direct = to_physical(laplacian(sf))
        scale = np.abs(direct.values).max()
        assert np.abs(via_ops.values - direct.values).max() <= 1e-12 * scale

    def test_pure_harmonic_derivatives_exact(self):
        g = make_grid(1, 5.0, 64)
        k0 = 3 * np.pi / 5.0  # mode index 3
        f = Field(g, np.sin(k0 * g.x_axes[0]))
        df = to_physical(gradient(to_spectral(f))[0])
        np.testing.assert_allclose(df.values, k0 * np.cos(k0 * g.x_axes[0]), atol=1e-12)


class TestDealias:
    def test_low_mode_unchanged(self):
        g = make_grid(1, np.pi, 16)
        f = Field(g, np.cos(g.x_axes[0]))
        back = to_physical(dealias(to_spectral(f)))
        np.testing.assert_allclose(back.values, f.values, atol=1e-14)

    def test_nyquist_mode_removed(self):
        g = make_grid(1, np.pi, 16)
        f = Field(g, np.cos(8 * g.x_axes[0]))  # pure Nyquist
        out = dealias(to_spectral(f))
        assert np.abs(out.coefficients).max() == 0.0

    def test_idempotent_and_energy_nonincreasing(self):
        g = make_grid(2, 3.0, 32)
        sf = to_spectral(random_field(g, seed=5))
        once = dealias(sf)
        twice = dealias(once)
        np.testing.assert_array_equal(once.coefficients, twice.coefficients)
        assert (np.abs(once.coefficients) ** 2).sum() <= (np.abs(sf.coefficients) ** 2).sum()


class TestParseval:
    @pytest.mark.parametrize("dim,n", [(1, 128), (2, 32), (3, 16)])
    def test_parseval_identity(self, dim, n):
        g = make_grid(dim, 2.0, n)
        f = random_field(g, seed=dim + 20)
        phys = (f.values**2).sum() * g.cell_volume
        spec = (np.abs(to_spectral(f).coefficients) ** 2).sum() * g.cell_volume / g.size
        assert phys == pytest.approx(spec, rel=1e-10)
