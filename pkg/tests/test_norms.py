"""Masses, L^p norms, Sobolev norms and weighted moments."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf

from crossdiff import (
    Field,
    GaussianIC,
    lp_norm,
    make_grid,
    mass,
    sobolev_sq,
    weighted_moment,
)

INF = math.inf


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return Field(grid, rng.standard_normal(grid.shape))


class TestMass:
    def test_constant(self):
        g = make_grid(2, 3.0, 16)
        assert mass(Field(g, np.full(g.shape, 2.5))) == pytest.approx(2.5 * 6.0**2)

    def test_gaussian_against_error_function(self):
        # sampled unit-mass Gaussian at t=1 vs the closed form of the
        # truncated integral, mass = erf(L / sqrt(4t))
        g = make_grid(1, 20.0, 256)
        gauss = GaussianIC(mass=1.0, width=math.sqrt(2.0)).realize(g)  # = G(x, t=1)
        expected = float(erf(20.0 / 2.0))
        assert mass(gauss) == pytest.approx(expected, abs=1e-10)
        assert mass(gauss) == pytest.approx(1.0, abs=1e-10)

    def test_linearity(self):
        g = make_grid(1, 2.0, 32)
        f, h = random_field(g, 1), random_field(g, 2)
        combined = Field(g, f.values + h.values)
        assert mass(combined) == pytest.approx(mass(f) + mass(h), rel=1e-12, abs=1e-12)


class TestLpNorm:
    def test_unit_box_indicator(self):
        g = make_grid(1, 0.5, 16)
        f = Field(g, np.ones(g.shape))
        for p in (1.0, 1.5, 2.0, 4.0, INF):
            assert lp_norm(f, p) == pytest.approx(1.0)

    def test_l1_dominates_mass(self):
        g = make_grid(2, 1.5, 16)
        for seed in range(4):
            f = random_field(g, seed)
            assert lp_norm(f, 1.0) >= abs(mass(f)) - 1e-12

    def test_2d_gaussian_l2(self):
        # unit-mass Gaussian at diffusion time 1: L2 norm = 1/sqrt(8 pi)
        g = make_grid(2, 16.0, 256)
        gauss = GaussianIC(mass=1.0, width=math.sqrt(2.0), center=(0.0, 0.0)).realize(g)
        assert lp_norm(gauss, 2.0) == pytest.approx(1.0 / math.sqrt(8 * math.pi), abs=1e-6)

    def test_rejects_p_below_one(self):
        g = make_grid(1, 1.0, 8)
        with pytest.raises(ValueError):
            lp_norm(Field(g, np.ones(g.shape)), 0.5)

    def test_holder_interpolation(self):
        # ||f||_p <= ||f||_inf^(1-1/p) ||f||_1^(1/p)
        g = make_grid(1, 3.0, 128)
        for seed in range(5):
            f = random_field(g, seed)
            for p in (1.5, 2.0, 4.0, 8.0):
                bound = lp_norm(f, INF) ** (1 - 1 / p) * lp_norm(f, 1.0) ** (1 / p)
                assert lp_norm(f, p) <= bound * (1 + 1e-12)

    def test_mass_stable_under_refinement(self):
        vals = []
        for n in (128, 256, 512):
            g = make_grid(1, 12.0, n)
            vals.append(mass(GaussianIC(mass=1.0, width=1.0).realize(g)))
        assert abs(vals[1] - vals[0]) <= 1e-10
        assert abs(vals[2] - vals[1]) <= 1e-10


class TestSobolev:
    def test_zero_field(self):
        g = make_grid(1, 1.0, 16)
        assert sobolev_sq(Field(g, np.zeros(g.shape)), 2) == 0.0

    def test_cosine_h1(self):
        g = make_grid(1, np.pi, 32)
        f = Field(g, np.cos(g.x_axes[0]))
        assert sobolev_sq(f, 1) == pytest.approx(2 * np.pi, rel=1e-12)

    def test_order_zero_is_l2_squared(self):
        g = make_grid(2, 2.0, 16)
        f = random_field(g, 7)
        assert sobolev_sq(f, 0) == pytest.approx(lp_norm(f, 2.0) ** 2, rel=1e-12)

    def test_rejects_bad_order(self):
        g = make_grid(1, 1.0, 8)
        with pytest.raises(ValueError):
            sobolev_sq(Field(g, np.ones(g.shape)), 4)

    def test_against_finite_differences(self):
        # smooth profile: spectral H^2 value vs a centered finite-difference
        # oracle, Richardson-extrapolated across three resolutions
        def fd_sobolev_sq(values, dx, order):
            total = (values**2).sum() * dx
            cur = values
            for _ in range(order):
                cur = (np.roll(cur, -1) - np.roll(cur, 1)) / (2 * dx)
                total += (cur**2).sum() * dx
            return total

        spectral = None
        fd = []
        for n in (256, 512, 1024):
            g = make_grid(1, 10.0, n)
            f = GaussianIC(mass=1.0, width=1.3, center=(0.4,)).realize(g)
            s = sobolev_sq(f, 2)
            if spectral is not None:
                assert s == pytest.approx(spectral, rel=1e-10)  # already converged
            spectral = s
            fd.append(fd_sobolev_sq(f.values, g.dx, 2))
        # second-order differences converge at O(dx^2); two Richardson
        # levels push the oracle to O(dx^6)
        lvl1 = [(4 * fd[i + 1] - fd[i]) / 3 for i in range(2)]
        oracle = (16 * lvl1[1] - lvl1[0]) / 15
        assert spectral == pytest.approx(oracle, rel=1e-6)


class TestWeightedMoment:
    def test_zero_field(self):
        g = make_grid(1, 1.0, 16)
        assert weighted_moment(Field(g, np.zeros(g.shape)), 1.0) == 0.0

    def test_constant_polynomial_integral(self):
        g = make_grid(1, 1.0, 512)
        f = Field(g, np.ones(g.shape))
        # rectangle rule on the quadratic weight carries the exact
        # Euler-Maclaurin correction dx^2/3 over [-1, 1)
        assert weighted_moment(f, 1.0) == pytest.approx(8.0 / 3.0, abs=1e-5)
        assert weighted_moment(f, 1.0) == pytest.approx(8.0 / 3.0 + g.dx**2 / 3.0, rel=1e-12)

    def test_gaussian_against_quadrature(self):
        g = make_grid(1, 16.0, 512)
        sigma = 1.0
        f = GaussianIC(mass=1.0, width=sigma).realize(g)

        def integrand(x):
            amp = (2 * math.pi * sigma**2) ** -0.5
            return (1 + x**2) * (amp * math.exp(-(x**2) / (2 * sigma**2))) ** 2

        expected, _ = quad(integrand, -16.0, 16.0, epsabs=1e-13, epsrel=1e-13)
        assert weighted_moment(f, 1.0) == pytest.approx(expected, abs=1e-8)

    def test_rejects_bad_exponent(self):
        g = make_grid(1, 1.0, 8)
        f = Field(g, np.ones(g.shape))
        for r in (0.0, -0.3, 1.2):
            with pytest.raises(ValueError):
                weighted_moment(f, r)
