"""Spectral kernel tests against closed forms and scalar quadrature oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggpsim.exponents import PairPoint
from ggpsim.spectral import (
    Field,
    TorusGrid,
    boundary_mass_fraction,
    fractional_derivative,
    free_propagate,
    lebesgue_norm,
    make_gaussian,
    make_plane_wave,
    make_theta_constant,
    sobolev_norm,
    spacetime_norm,
    spectral_tail_fraction,
    weighted_l2_norm,
    xnorm,
    zero_field,
)

from oracles import free_gaussian, hs_norm_gaussian_1d, lq_norm_1d, weighted_l2_1d

from fractions import Fraction

REF_GRID = TorusGrid(n=1, L=80.0 * np.pi, N=2048)


def random_field(grid: TorusGrid, seed: int, mean_zero: bool = False) -> Field:
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if mean_zero:
        vals -= vals.mean()
    return Field(grid, vals)


class TestGridAndField:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            TorusGrid(n=3, L=10.0, N=64)
        with pytest.raises(ValueError):
            TorusGrid(n=1, L=10.0, N=7)
        with pytest.raises(ValueError):
            TorusGrid(n=1, L=-1.0, N=64)

    def test_frequencies_and_volume(self):
        g = TorusGrid(n=1, L=2 * np.pi, N=8)
        xi = g.axis_frequencies()
        assert np.allclose(xi, [0, 1, 2, 3, -4, -3, -2, -1])
        assert g.volume == 2 * np.pi
        g2 = TorusGrid(n=2, L=4.0, N=8)
        assert g2.volume == 16.0
        assert g2.dx == 0.25

    def test_field_shape_checked(self):
        g = TorusGrid(n=1, L=10.0, N=16)
        with pytest.raises(ValueError):
            Field(g, np.zeros(8, dtype=np.complex128))


class TestFreePropagator:
    def test_t0_is_identity(self):
        f = random_field(REF_GRID, 0)
        g = free_propagate(f, 0.0)
        assert np.max(np.abs(g.values - f.values)) <= 1e-13 * np.max(np.abs(f.values))

    def test_plane_wave_phase(self):
        f = make_plane_wave(REF_GRID, 1.0, 2.0)
        t = 0.7
        out = free_propagate(f, t)
        expected = np.exp(-1j * 4.0 * t) * f.values
        assert np.max(np.abs(out.values - expected)) <= 1e-12

    def test_gaussian_closed_form_reference_grid(self):
        sigma, t = 2.0, 1.0
        f = make_gaussian(REF_GRID, 1.0, sigma)
        out = free_propagate(f, t)
        x = REF_GRID.coordinates()[0]
        exact = free_gaussian(x, t, 1.0, sigma, n=1)
        assert np.max(np.abs(out.values - exact)) <= 1e-8

    def test_gaussian_closed_form_2d(self):
        grid = TorusGrid(n=2, L=40.0 * np.pi, N=256)
        sigma, t = 2.0, 0.5
        f = make_gaussian(grid, 0.3, sigma)
        out = free_propagate(f, t)
        exact = free_gaussian(grid.radius(), t, 0.3, sigma, n=2)
        assert np.max(np.abs(out.values - exact)) <= 1e-8

    def test_nonfinite_rejected(self):
        vals = np.zeros(REF_GRID.shape, dtype=np.complex128)
        vals[0] = np.nan
        with pytest.raises(ValueError):
            free_propagate(Field(REF_GRID, vals), 0.1)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-50, 50), st.floats(-50, 50), st.integers(0, 2**31))
    def test_unitarity_and_group_law(self, t, s, seed):
        grid = TorusGrid(n=1, L=16.0, N=64)
        f = random_field(grid, seed)
        ft = free_propagate(f, t)
        n0, n1 = lebesgue_norm(f, 2), lebesgue_norm(ft, 2)
        assert abs(n1 - n0) <= 1e-12 * n0
        two_step = free_propagate(ft, s)
        one_step = free_propagate(f, t + s)
        assert np.max(np.abs(two_step.values - one_step.values)) <= 1e-11 * np.max(
            np.abs(f.values)
        )

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-20, 20), st.floats(0.0, 2.0), st.integers(0, 2**31))
    def test_hs_invariance_under_flow(self, t, s, seed):
        grid = TorusGrid(n=1, L=16.0, N=64)
        f = random_field(grid, seed)
        a = sobolev_norm(f, s, 2)
        b = sobolev_norm(free_propagate(f, t), s, 2)
        assert abs(a - b) <= 1e-12 * max(a, 1.0)


class TestFractionalDerivative:
    def test_s0_on_mean_zero(self):
        f = random_field(REF_GRID, 1, mean_zero=True)
        g = fractional_derivative(f, 0.0)
        assert np.max(np.abs(g.values - f.values)) <= 1e-13 * np.max(np.abs(f.values))

    def test_plane_wave_eigenfunction(self):
        f = make_plane_wave(REF_GRID, 1.0, 2.0)
        g = fractional_derivative(f, 0.5)
        expected = np.sqrt(2.0) * f.values
        assert np.max(np.abs(g.values - expected)) <= 1e-12

    def test_composition(self):
        f = random_field(REF_GRID, 2, mean_zero=True)
        a = fractional_derivative(fractional_derivative(f, 0.3), 0.45)
        b = fractional_derivative(f, 0.75)
        scale = np.max(np.abs(b.values))
        assert np.max(np.abs(a.values - b.values)) <= 1e-12 * scale

    def test_negative_s_rejected(self):
        with pytest.raises(ValueError):
            fractional_derivative(zero_field(REF_GRID), -0.5)


class TestLebesgueNorm:
    def test_constant_field(self):
        g = TorusGrid(n=1, L=10.0, N=32)
        f = Field(g, np.full(g.shape, 3.0 - 4.0j))
        for q in (1.0, 2.0, 3.5):
            assert lebesgue_norm(f, q) == pytest.approx(5.0 * 10.0 ** (1 / q), rel=1e-14)
        assert lebesgue_norm(f, np.inf) == pytest.approx(5.0, rel=1e-14)

    def test_plancherel(self):
        f = random_field(REF_GRID, 3)
        phys = lebesgue_norm(f, 2)
        g = f.grid
        freq = np.sqrt(np.sum(np.abs(f.hat()) ** 2) * g.volume) / g.N**g.n
        assert abs(phys - freq) <= 1e-12 * phys

    def test_gaussian_q_3_2_vs_quadrature(self):
        f = make_gaussian(REF_GRID, 0.7, 2.0)
        oracle = lq_norm_1d(lambda x: 0.7 * np.exp(-x**2 / 8.0), 1.5, -60, 60)
        assert lebesgue_norm(f, 1.5) == pytest.approx(oracle, rel=1e-8)

    def test_q_below_one_rejected(self):
        with pytest.raises(ValueError):
            lebesgue_norm(zero_field(REF_GRID), 0.5)

    def test_hoelder_consistency(self):
        # ||f||_{q1} <= L^{n(1/q1 - 1/q2)} ||f||_{q2} for q1 < q2
        f = random_field(TorusGrid(n=1, L=12.0, N=128), 4)
        for q1, q2 in ((1.0, 2.0), (2.0, 5.0), (1.5, np.inf)):
            lhs = lebesgue_norm(f, q1)
            inv_q2 = 0.0 if np.isinf(q2) else 1.0 / q2
            rhs = 12.0 ** (1.0 / q1 - inv_q2) * lebesgue_norm(f, q2)
            assert lhs <= rhs * (1 + 1e-12)


class TestSobolevNorm:
    def test_s0_reduces_to_lebesgue(self):
        f = random_field(REF_GRID, 5)
        assert sobolev_norm(f, 0.0, 3.0) == lebesgue_norm(f, 3.0)

    def test_plane_wave_value(self):
        f = make_plane_wave(REF_GRID, 1.0, 2.0)
        expect = 2.0**0.25 * np.sqrt(REF_GRID.volume)
        assert sobolev_norm(f, 0.25, 2.0) == pytest.approx(expect, rel=1e-12)

    def test_modulated_gaussian_vs_quadrature(self):
        # carrier keeps the spectrum away from the |xi|^{2s} kink at 0
        f = make_gaussian(REF_GRID, 0.05, 2.0, carrier=2.0)
        oracle = hs_norm_gaussian_1d(0.25, 0.05, 2.0, carrier=2.0)
        assert sobolev_norm(f, 0.25, 2.0) == pytest.approx(oracle, rel=1e-8)

    def test_hs2_scaling_invariance(self):
        # f_lambda(x) = lambda^{2/(k2-1)} f(lambda x) leaves H-dot^{s2} alone;
        # lambda = 2 realized by halving the period at fixed N.  The carrier
        # keeps the spectrum clear of the multiplier kink on both grids.
        s2, lam, expo = 0.25, 2.0, 0.25  # n=1, p=5: s2 = 1/4, 2/(k2-1) = 1/4
        sigma, xi0 = 2.0, 2.0
        f = make_gaussian(REF_GRID, 1.0, sigma, carrier=xi0)
        fine = TorusGrid(n=1, L=REF_GRID.L / lam, N=REF_GRID.N)
        f_scaled = make_gaussian(fine, lam**expo, sigma / lam, carrier=xi0 * lam)
        a = sobolev_norm(f, s2, 2.0)
        b = sobolev_norm(f_scaled, s2, 2.0)
        assert abs(a - b) <= 1e-6 * a


class TestWeightedNorm:
    def test_alpha0_is_l2(self):
        f = random_field(REF_GRID, 6)
        assert weighted_l2_norm(f, 0.0) == lebesgue_norm(f, 2.0)

    def test_off_center_gaussian_vs_quadrature(self):
        # off-center data keeps |x|^{2 alpha} smooth on the support
        f = make_gaussian(REF_GRID, 0.4, 2.0, center=12.0)
        oracle = weighted_l2_1d(
            lambda x: 0.4 * np.exp(-((x - 12.0) ** 2) / 8.0), 1.0 / 6.0, -80, 80
        )
        assert weighted_l2_norm(f, 1.0 / 6.0) == pytest.approx(oracle, rel=1e-8)

    def test_negative_alpha_rejected(self):
        with pytest.raises(ValueError):
            weighted_l2_norm(zero_field(REF_GRID), -0.1)


class TestSpacetimeNorm:
    P1 = PairPoint(Fraction(1, 5), Fraction(7, 30))
    P2 = PairPoint(Fraction(13, 40), Fraction(7, 80))

    def test_zero_trajectory(self):
        times = np.linspace(0.0, 1.0, 11)
        fields = [zero_field(REF_GRID) for _ in times]
        assert spacetime_norm(times, fields, self.P1, 0.0) == 0.0

    def test_separable_oracle(self):
        # v(t,x) = e^{-t} g(x): norm factorizes into 1-D quadratures
        grid = TorusGrid(n=1, L=60.0, N=512)
        g = make_gaussian(grid, 0.8, 1.5)
        times = np.linspace(0.0, 1.0, 2001)
        fields = [Field(grid, np.exp(-t) * g.values) for t in times]
        q, r = 5.0, 30.0 / 7.0
        space = lq_norm_1d(lambda x: 0.8 * np.exp(-x**2 / 4.5), q, -40, 40)
        time_part = (1.0 - np.exp(-r)) / r  # integral of e^{-rt} on [0, 1]
        oracle = space * time_part ** (1.0 / r)
        val = spacetime_norm(times, fields, self.P1, 0.0)
        assert val == pytest.approx(oracle, rel=1e-6)

    def test_homogeneity(self):
        grid = TorusGrid(n=1, L=30.0, N=128)
        g = make_gaussian(grid, 0.5, 1.0)
        times = np.linspace(0.0, 1.0, 21)
        fields = [Field(grid, np.cos(t) * g.values) for t in times]
        lam = 3.7
        scaled = [f * lam for f in fields]
        a = spacetime_norm(times, fields, self.P2, 0.25)
        b = spacetime_norm(times, scaled, self.P2, 0.25)
        assert b == pytest.approx(lam * a, rel=1e-12)

    def test_sup_in_time_pair(self):
        grid = TorusGrid(n=1, L=30.0, N=128)
        g = make_gaussian(grid, 0.5, 1.0)
        times = np.linspace(0.0, 1.0, 21)
        fields = [Field(grid, (1.0 + t) * g.values) for t in times]
        val = spacetime_norm(times, fields, PairPoint(Fraction(1, 2), Fraction(0)), 0.0)
        assert val == pytest.approx(2.0 * lebesgue_norm(g, 2.0), rel=1e-12)

    def test_xnorm_is_component_sum(self):
        grid = TorusGrid(n=1, L=30.0, N=128)
        g = make_gaussian(grid, 0.5, 1.0)
        times = np.linspace(0.0, 1.0, 21)
        fields = [Field(grid, np.exp(-t) * g.values) for t in times]
        total = xnorm(times, fields, self.P1, self.P2, 0.25)
        parts = spacetime_norm(times, fields, self.P1, 0.0) + spacetime_norm(
            times, fields, self.P2, 0.25
        )
        assert total == parts

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            spacetime_norm([], [], self.P1, 0.0)


class TestGuards:
    def test_boundary_fraction_localized(self):
        f = make_gaussian(REF_GRID, 0.05, 2.0)
        assert boundary_mass_fraction(f) < 1e-12

    def test_boundary_fraction_constant(self):
        f = make_theta_constant(REF_GRID, 0.3)
        assert 0.09 < boundary_mass_fraction(f) < 0.11

    def test_tail_fraction(self):
        smooth = make_gaussian(REF_GRID, 0.05, 2.0)
        assert spectral_tail_fraction(smooth) < 1e-12
        k_high = int(0.4 * REF_GRID.N) * 2.0 * np.pi / REF_GRID.L
        rough = make_plane_wave(REF_GRID, 1.0, k_high)
        assert spectral_tail_fraction(rough) > 0.99
