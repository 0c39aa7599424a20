"""Heat kernel, exact semigroup, and smoothing-bound checks."""

import math
import warnings

import numpy as np
import pytest

from crossdiff import (
    Field,
    GaussianIC,
    KernelSpec,
    TruncationWarning,
    apply_semigroup,
    check_lp_lq_bound,
    gradient_semigroup_bound,
    heat_kernel_field,
    kernel_lp_norm_closed,
    lp_norm,
    make_grid,
    mass,
)

INF = math.inf


class TestHeatKernelField:
    def test_unit_peak_at_special_time(self):
        g = make_grid(1, 10.0, 256)
        f = heat_kernel_field(g, KernelSpec(1, 1.0 / (4 * math.pi)))
        assert np.abs(f.values).max() == pytest.approx(1.0, rel=1e-12)

    def test_unit_mass(self):
        g = make_grid(1, 20.0, 512)
        f = heat_kernel_field(g, KernelSpec(1, 1.0))
        assert mass(f) == pytest.approx(1.0, abs=1e-10)

    def test_2d_peak(self):
        g = make_grid(2, 16.0, 128)
        f = heat_kernel_field(g, KernelSpec(2, 1.0))
        assert lp_norm(f, INF) == pytest.approx(1.0 / (4 * math.pi), rel=1e-12)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            KernelSpec(1, 0.0)

    def test_warns_on_undersized_box(self):
        g = make_grid(1, 4.0, 64)
        with pytest.warns(TruncationWarning):
            heat_kernel_field(g, KernelSpec(1, 5.0))


class TestClosedFormNorms:
    def test_unit_l1(self):
        for dim in (1, 2, 3):
            for t in (0.3, 1.0, 7.5):
                assert kernel_lp_norm_closed(dim, t, 1.0) == pytest.approx(1.0)

    def test_2d_l2_value(self):
        assert kernel_lp_norm_closed(2, 1.0, 2.0) == pytest.approx(
            1.0 / math.sqrt(8 * math.pi), rel=1e-12
        )

    def test_linf_peak(self):
        assert kernel_lp_norm_closed(1, 1.0 / (4 * math.pi), INF) == pytest.approx(1.0)

    @pytest.mark.parametrize("dim,L,n", [(1, 16.0, 512), (2, 16.0, 256), (3, 14.0, 128)])
    def test_agrees_with_grid_quadrature(self, dim, L, n):
        g = make_grid(dim, L, n)
        for t in (0.5, 2.0):
            f = heat_kernel_field(g, KernelSpec(dim, t), warn_tail=False)
            for p in (1.0, 1.5, 2.0, 4.0, INF):
                closed = kernel_lp_norm_closed(dim, t, p)
                assert lp_norm(f, p) == pytest.approx(closed, rel=1e-6), (dim, t, p)


class TestApplySemigroup:
    def test_identity_at_zero(self):
        g = make_grid(1, 5.0, 64)
        f = Field(g, np.sin(g.x_axes[0] * np.pi / 5.0))
        out = apply_semigroup(f, 0.0)
        assert out is f

    def test_gaussian_propagation(self):
        g = make_grid(1, 20.0, 512)
        start = heat_kernel_field(g, KernelSpec(1, 1.0))
        evolved = apply_semigroup(start, 2.5)
        target = heat_kernel_field(g, KernelSpec(1, 3.5))
        assert np.abs(evolved.values - target.values).max() <= 1e-10

    def test_semigroup_property(self):
        g = make_grid(2, 8.0, 64)
        rng = np.random.default_rng(3)
        f = Field(g, rng.standard_normal(g.shape))
        one = apply_semigroup(f, 0.7)
        two = apply_semigroup(apply_semigroup(f, 0.3), 0.4)
        scale = np.abs(one.values).max()
        assert np.abs(one.values - two.values).max() <= 1e-12 * scale

    def test_mass_preserved(self):
        g = make_grid(1, 10.0, 128)
        f = GaussianIC(mass=2.0, width=1.0).realize(g)
        assert mass(apply_semigroup(f, 3.0)) == pytest.approx(mass(f), rel=1e-12)

    def test_positivity_up_to_undershoot(self):
        g = make_grid(1, 12.0, 256)
        f = GaussianIC(mass=1.0, width=0.5).realize(g)
        out = apply_semigroup(f, 1.0)
        assert out.values.min() >= -1e-10 * out.values.max()

    def test_rejects_negative_time(self):
        g = make_grid(1, 1.0, 8)
        with pytest.raises(ValueError):
            apply_semigroup(Field(g, np.ones(g.shape)), -0.1)


class TestSmoothingBound:
    def test_norms_decrease_at_equal_exponents(self):
        g = make_grid(1, 20.0, 512)
        f = heat_kernel_field(g, KernelSpec(1, 0.5))
        for p in (1.0, 2.0, INF):
            ratio = check_lp_lq_bound(f, 1.0, p, p)
            assert ratio <= 1.0 + 1e-12

    def test_mass_ratio_is_one(self):
        g = make_grid(1, 16.0, 256)
        f = GaussianIC(mass=0.7, width=1.0).realize(g)
        assert check_lp_lq_bound(f, 2.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_ratio_approaches_one_for_point_like_data(self):
        # q=1, p=inf sharpens as the source concentrates
        g = make_grid(1, 16.0, 1024)
        t = 0.5
        ratios = []
        for width in (1.0, 0.5, 0.25, 0.125):
            f = GaussianIC(mass=1.0, width=width).realize(g)
            ratios.append(check_lp_lq_bound(f, t, INF, 1.0))
        assert all(r <= 1.0 + 1e-8 for r in ratios)
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] > 0.98

    def test_rejects_q_above_p(self):
        g = make_grid(1, 4.0, 64)
        f = Field(g, np.ones(g.shape))
        with pytest.raises(ValueError):
            check_lp_lq_bound(f, 1.0, 1.0, 2.0)


class TestGradientBound:
    def test_constant_field_gives_zero(self):
        g = make_grid(1, 4.0, 64)
        f = Field(g, np.full(g.shape, 2.0))
        assert gradient_semigroup_bound(f, 1.0, 2.0, 2.0) == 0.0

    def test_gaussian_matches_closed_form(self):
        # for f = G(., s) the scaled ratio has an exact closed form;
        # q = p = 2 in one dimension:
        #   ||d/dx G(., s+t)||_2 = (8 pi)^(-1/4) (s+t)^(-3/4) / sqrt(2)
        #   ||G(., s)||_2 = (8 pi s)^(-1/4)
        s = 1.0
        g = make_grid(1, 24.0, 1024)
        f = heat_kernel_field(g, KernelSpec(1, s))
        for t in (0.5, 1.0, 2.0, 4.0):
            got = gradient_semigroup_bound(f, t, 2.0, 2.0)
            expected = (
                (8 * math.pi) ** -0.25
                * (s + t) ** -0.75
                / math.sqrt(2.0)
                * t**0.5
                / (8 * math.pi * s) ** -0.25
            )
            assert got == pytest.approx(expected, rel=1e-6)

    def test_bounded_over_time_sweep(self):
        g = make_grid(1, 24.0, 512)
        f = GaussianIC(mass=1.0, width=1.0).realize(g)
        sweep = [gradient_semigroup_bound(f, t, INF, 1.0) for t in np.geomspace(0.05, 10, 12)]
        assert all(np.isfinite(sweep))
        assert max(sweep) < 1.0  # comfortably bounded; no constant is pinned

    def test_scaled_ratio_change_under_time_doubling(self):
        # dim=1, f = G(., 1), q = p = 2: ratio(t) ~ t^(1/2) (1+t)^(-3/4),
        # so the t -> 2t multiplier is 2^(1/2) ((1+t)/(1+2t))^(3/4), inside
        # (0, 1] once t is past the hump at t = 2s
        g = make_grid(1, 24.0, 1024)
        f = heat_kernel_field(g, KernelSpec(1, 1.0))
        for t in (2.0, 3.0, 5.0):
            r1 = gradient_semigroup_bound(f, t, 2.0, 2.0)
            r2 = gradient_semigroup_bound(f, 2 * t, 2.0, 2.0)
            factor = r2 / r1
            expected = math.sqrt(2.0) * ((1 + t) / (1 + 2 * t)) ** 0.75
            assert factor == pytest.approx(expected, rel=1e-6)
            assert 0.0 < factor <= 1.0
