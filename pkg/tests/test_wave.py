import math

import numpy as np
import pytest

from frontlab.errors import DomainError, RangeError, TailError
from frontlab.numerics import deriv2_4
from frontlab.wave import (
    WaveProfile,
    level_position,
    ode_residual,
    phi,
    phi_ode_residual,
    psi,
    shift_coefficient,
    solve_wave,
    wave_slope,
    wave_value,
)

SQRT2 = math.sqrt(2.0)


class TestProfile:
    def test_half_level_exact(self, wave_default):
        assert wave_default.omega[wave_default.i_zero] == 0.5
        assert wave_default.x[wave_default.i_zero] == 0.0

    def test_strictly_decreasing_in_unit_band(self, wave_default):
        w = wave_default.omega
        assert np.all(np.diff(w) < 0)
        assert np.all((w > 0) & (w < 1))
        assert np.all(wave_default.omega_p < 0)

    def test_equation_residual(self, wave_default):
        r = ode_residual(wave_default)
        assert np.max(np.abs(r[2:-2])) < 1e-8

    def test_left_tail_single_exponential(self, wave_default):
        # slope times e^{(1-sqrt2)x} must be flat deep in the saturated tail
        x = wave_default.x
        m = (x >= -18.0) & (x <= -12.0)
        c = wave_default.omega_p[m] * np.exp((1.0 - SQRT2) * x[m])
        assert np.ptp(c) < 0.01 * abs(np.mean(c))
        assert wave_default.left_decay_amp < 0

    def test_translation_invariance_of_launch(self, wave_default):
        other = solve_wave(eps=1e-8)
        assert np.max(np.abs(other.omega - wave_default.omega)) < 1e-9

    def test_argument_validation(self):
        with pytest.raises(DomainError):
            solve_wave(x_lo=-10.0)
        with pytest.raises(DomainError):
            solve_wave(x_hi=10.0)
        with pytest.raises(DomainError):
            solve_wave(h=0.02)
        with pytest.raises(DomainError):
            solve_wave(tol=1e-9)
        with pytest.raises(DomainError):
            solve_wave(eps=1e-3)


class TestLevels:
    def test_half_level_at_origin(self, wave_default):
        assert abs(level_position(wave_default, 0.5)) <= 1e-12

    def test_low_level_sits_ahead(self, wave_default):
        w = level_position(wave_default, 0.3)
        assert w > 0
        assert abs(wave_value(wave_default, w) - 0.3) <= 1e-12

    def test_roundtrip_random_levels(self, wave_default):
        rng = np.random.default_rng(42)
        for alpha in rng.uniform(0.01, 0.99, size=100):
            w = level_position(wave_default, alpha)
            assert abs(wave_value(wave_default, w) - alpha) <= 1e-12

    def test_monotone_inversion(self, wave_default):
        ws = [level_position(wave_default, a) for a in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert np.all(np.diff(ws) < 0)

    def test_out_of_range(self, wave_default):
        with pytest.raises(RangeError):
            level_position(wave_default, 1e-12)
        with pytest.raises(RangeError):
            level_position(wave_default, 1.0 - 1e-9)


class TestPhi:
    def test_zero_at_origin(self, phi_default):
        assert phi_default.phi[phi_default.i_zero] == 0.0

    def test_forced_equation_residual(self, wave_default, phi_default):
        r = phi_ode_residual(wave_default, phi_default)
        assert np.max(np.abs(r[2:-2])) < 1e-9

    def test_vanishes_leftwards(self, phi_default):
        assert abs(phi_default.phi[0]) < 5e-4

    def test_deep_grid_tail(self):
        wp = solve_wave(x_lo=-40.0, h=0.01)
        pt = phi(wp)
        assert abs(pt.phi[0]) < 1e-6
        assert np.max(np.abs(phi_ode_residual(wp, pt)[2:-2])) < 1e-6

    def test_residual_halving(self):
        coarse = solve_wave(h=0.01)
        fine = solve_wave(h=0.005)
        rc = np.max(np.abs(ode_residual(coarse)[2:-2]))
        rf = np.max(np.abs(ode_residual(fine)[2:-2]))
        assert rc / rf >= 8.0
        pc = np.max(np.abs(phi_ode_residual(coarse, phi(coarse))[2:-2]))
        pf = np.max(np.abs(phi_ode_residual(fine, phi(fine))[2:-2]))
        assert pc / pf >= 8.0

    def test_wrong_tail_rejected(self, wave_default):
        wp = wave_default
        doctored = WaveProfile(
            x_lo=wp.x_lo,
            x_hi=wp.x_hi,
            h=wp.h,
            x=wp.x,
            omega=wp.omega,
            omega_p=wp.omega_p * np.exp(0.2 * wp.x),
            left_decay_amp=wp.left_decay_amp,
            i_zero=wp.i_zero,
        )
        with pytest.raises(TailError):
            phi(doctored)


class TestPsi:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_zero_at_origin(self, wave_default, phi_default, alpha):
        assert abs(psi(wave_default, phi_default, alpha, 0.0)) <= 1e-13

    def test_recentred_equation(self, wave_default, phi_default):
        # Psi'' - 2*omega(W+x)*Psi = omega'(W+x) e^x on x <= 0
        tau = 0.02
        xs = np.linspace(-10.0, 0.0, 501)
        vals = psi(wave_default, phi_default, 0.5, xs)
        w0 = level_position(wave_default, 0.5)
        wt = np.array([wave_value(wave_default, w0 + x) for x in xs])
        wt_p = np.array([wave_slope(wave_default, w0 + x) for x in xs])
        r = deriv2_4(vals, tau) - 2.0 * wt * vals - wt_p * np.exp(xs)
        assert np.max(np.abs(r[2:-2])) < 1e-5

    def test_bounded_on_negative_axis(self, wave_default, phi_default):
        xs = np.linspace(-18.0, 0.0, 361)
        vals = np.abs(psi(wave_default, phi_default, 0.5, xs))
        assert np.max(vals) < 0.1
        assert xs[np.argmax(vals)] > -6.0
        assert vals[0] < 1e-3

    def test_domain_checks(self, wave_default, phi_default):
        with pytest.raises(DomainError):
            psi(wave_default, phi_default, 0.5, 0.5)
        with pytest.raises(RangeError):
            psi(wave_default, phi_default, 0.5, -100.0)


class TestShiftCoefficient:
    def test_degenerate_pair_is_zero(self, wave_default, phi_default):
        assert shift_coefficient(wave_default, phi_default, 0.3, 0.3) == 0.0

    def test_antisymmetry(self, wave_default, phi_default):
        ab = shift_coefficient(wave_default, phi_default, 0.3, 0.7)
        ba = shift_coefficient(wave_default, phi_default, 0.7, 0.3)
        assert ab == -ba
        assert ab > 0

    def test_grid_refinement(self, wave_default, phi_default):
        ref = shift_coefficient(wave_default, phi_default, 0.3, 0.7)
        fine = solve_wave(h=0.0025)
        fine_val = shift_coefficient(fine, phi(fine), 0.3, 0.7)
        assert abs(ref - fine_val) < 1e-4

    def test_level_validation(self, wave_default, phi_default):
        with pytest.raises(DomainError):
            shift_coefficient(wave_default, phi_default, 0.0, 0.5)
