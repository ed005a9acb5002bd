"""Tests for the event-driven front: exact cascade, log-space marching,
and the reach-time expansion fit."""

import math

import numpy as np
import pytest

from frontlab.dispersion import DispersionModel, critical_point, expansion_coefficients
from frontlab.errors import CascadeError, DataError, DegreeError, DomainError, FitError
from frontlab.solvable import (
    ReachTimes,
    SolvableIC,
    exact_cascade,
    fit_tx_expansion,
    ode_front,
)

LN2 = math.log(2.0)


@pytest.fixture(scope="module")
def cp_solvable():
    return critical_point(DispersionModel.solvable(1.0))


class TestInitialConditions:
    def test_step_values(self):
        ic = SolvableIC.zero()
        assert ic.value(0) == 1.0
        assert ic.value(1) == 0.0
        assert ic.log_value(5) == -math.inf

    def test_exponential_tail(self):
        ic = SolvableIC.exponential(gamma=1.5, power=2.0)
        vals = [ic.value(x) for x in range(1, 8)]
        assert all(0 < v < 1 for v in vals)
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert ic.log_value(3) == pytest.approx(-2.0 * math.log(3) - 4.5, abs=1e-14)

    def test_exponential_validation(self):
        with pytest.raises(DomainError):
            SolvableIC.exponential(gamma=-1.0)
        with pytest.raises(DomainError):
            SolvableIC.exponential(gamma=0.5, amp=3.0)  # value(1) = 1.82

    def test_table_validation(self):
        ic = SolvableIC.from_table([0.5, 0.25, 0.0])
        assert ic.value(2) == 0.25
        assert ic.value(9) == 0.0
        with pytest.raises(DomainError):
            SolvableIC.from_table([0.2, 0.5])
        with pytest.raises(DomainError):
            SolvableIC.from_table([1.0, 0.5])


class TestExactCascade:
    def test_first_two_events_step_ic(self):
        rt = exact_cascade(SolvableIC.zero(), 1.0, 5)
        assert rt.t[0] == pytest.approx(LN2, abs=1e-12)
        assert rt.t[1] == pytest.approx(LN2 - math.log(LN2), abs=1e-12)

    def test_first_event_general_coupling(self):
        # u(1,t) = a e^t - a crosses 1 at ln((1+a)/a)
        rt = exact_cascade(SolvableIC.zero(), 2.0, 3)
        assert rt.t[0] == pytest.approx(math.log(1.5), abs=1e-12)

    def test_nonzero_ic_closed_form(self):
        # u(1,t) = 1.3 e^t - 1 freezes at t1 = ln(2/1.3); before that
        # u(2,t) = e^t (1.3 t - 0.9) + 1, then rides e^t to 1 from u2(t1)
        ic = SolvableIC.from_table([0.3, 0.1])
        rt = exact_cascade(ic, 1.0, 2)
        t1 = math.log(2.0 / 1.3)
        u21 = math.exp(t1) * (1.3 * t1 - 0.9) + 1.0
        t2 = t1 + math.log(2.0 / (u21 + 1.0))
        assert rt.t[0] == pytest.approx(t1, abs=1e-13)
        assert rt.t[1] == pytest.approx(t2, abs=1e-13)

    def test_times_strictly_increasing(self):
        rt = exact_cascade(SolvableIC.zero(), 1.0, 40)
        assert np.all(np.diff(rt.t) > 0)

    def test_degree_guard(self):
        with pytest.raises(DegreeError):
            exact_cascade(SolvableIC.zero(), 1.0, 65)

    def test_domain_validation(self):
        with pytest.raises(DomainError):
            exact_cascade(SolvableIC.zero(), -1.0, 5)
        with pytest.raises(DomainError):
            exact_cascade(SolvableIC.zero(), 1.0, 0)


class TestOdeFront:
    def test_agrees_with_cascade_step_ic(self):
        rc = exact_cascade(SolvableIC.zero(), 1.0, 20)
        ro = ode_front(SolvableIC.zero(), 1.0, 60, dt=1e-3)
        assert np.abs(ro.t[:20] - rc.t).max() < 1e-8

    def test_agrees_with_cascade_exponential_ic(self):
        ic = SolvableIC.exponential(gamma=2.0)
        rc = exact_cascade(ic, 1.0, 20)
        ro = ode_front(ic, 1.0, 60, dt=1e-3)
        assert np.abs(ro.t[:20] - rc.t).max() < 1e-8

    def test_first_event(self):
        ro = ode_front(SolvableIC.zero(), 1.0, 30, dt=5e-4)
        assert ro.t[0] == pytest.approx(LN2, abs=1e-10)

    def test_dt_halving_fourth_order(self):
        # strong coupling makes the truncation error visible above roundoff
        ic = SolvableIC.zero()
        r1 = ode_front(ic, 20.0, 100, dt=1e-3)
        r2 = ode_front(ic, 20.0, 100, dt=5e-4)
        r3 = ode_front(ic, 20.0, 100, dt=2.5e-4)
        e12 = np.abs(r1.t - r2.t).max()
        e23 = np.abs(r2.t - r3.t).max()
        assert e23 < e12
        assert 8.0 < e12 / e23 < 32.0

    def test_stiff_coupling_against_cascade(self):
        # cascade constants grow like a^x, so only shallow sites are exact
        rc = exact_cascade(SolvableIC.zero(), 20.0, 5)
        ro = ode_front(SolvableIC.zero(), 20.0, 40, dt=2.5e-4)
        assert np.abs(ro.t[:5] - rc.t).max() < 1e-9

    def test_asymptotic_speed(self, cp_solvable):
        ro = ode_front(SolvableIC.zero(), 1.0, 300, dt=1e-3)
        assert ro.t[-1] / 300.0 == pytest.approx(1.0 / cp_solvable.v_c, rel=3e-2)

    def test_domain_validation(self):
        ic = SolvableIC.zero()
        with pytest.raises(DomainError):
            ode_front(ic, -1.0, 10)
        with pytest.raises(DomainError):
            ode_front(ic, 1.0, 10, dt=2e-3)
        with pytest.raises(DomainError):
            ode_front(ic, 1.0, 200_000)
        with pytest.raises(DomainError):
            ode_front(ic, 500.0, 10, dt=1e-3)  # coupling too stiff for dt


class TestFitTxExpansion:
    def _synthetic(self, cp, c, d, f, e, beta=1.5):
        x = np.arange(50, 4001, dtype=float)
        gv = cp.gamma_c * cp.v_c
        lx = np.log(x)
        t = x / cp.v_c + (beta * lx + c + d / np.sqrt(x) + f * lx / x + e / x) / gv
        return ReachTimes(a=1.0, x=x.astype(np.int64), t=t)

    def test_synthetic_recovery(self, cp_solvable):
        rt = self._synthetic(cp_solvable, c=0.7, d=5.2, f=-2.1, e=3.3)
        fit = fit_tx_expansion(rt, cp_solvable, (50, 4000))
        assert fit.c == pytest.approx(0.7, abs=1e-9)
        assert fit.d == pytest.approx(5.2, abs=1e-9)
        assert fit.f == pytest.approx(-2.1, abs=1e-8)
        assert fit.e == pytest.approx(3.3, abs=1e-8)
        assert fit.rms < 1e-12
        assert fit.log_coeff == 1.5

    def test_synthetic_free_log(self, cp_solvable):
        rt = self._synthetic(cp_solvable, c=0.7, d=5.2, f=-2.1, e=3.3, beta=1.37)
        fit = fit_tx_expansion(rt, cp_solvable, (50, 4000), free_log=True)
        assert fit.log_coeff == pytest.approx(1.37, abs=1e-9)
        assert fit.d == pytest.approx(5.2, abs=1e-7)

    def test_needs_enough_points(self, cp_solvable):
        rt = self._synthetic(cp_solvable, 0.0, 1.0, 0.0, 0.0)
        with pytest.raises(DataError):
            fit_tx_expansion(rt, cp_solvable, (100, 120))

    def test_narrow_window_ill_conditioned(self, cp_solvable):
        cp = cp_solvable
        x = np.arange(100_000, 100_061, dtype=float)
        gv = cp.gamma_c * cp.v_c
        t = x / cp.v_c + (1.5 * np.log(x) + 1.0 + 2.0 / np.sqrt(x)) / gv
        rt = ReachTimes(a=1.0, x=x.astype(np.int64), t=t)
        with pytest.raises(FitError):
            fit_tx_expansion(rt, cp, (100_000, 100_060))

    def test_reach_times_must_increase(self):
        with pytest.raises(DataError):
            ReachTimes(a=1.0, x=np.array([1, 2]), t=np.array([1.0, 1.0]))

    def test_amplitude_needs_ic_moments(self, cp_solvable):
        # the d coefficient presumes a thin-tailed start: a slowly decaying
        # power prefactor at the critical rate wrecks the fitted amplitude
        co = expansion_coefficients(cp_solvable)
        devs = {}
        for s in (4.0, 1.0):
            ic = SolvableIC.exponential(gamma=cp_solvable.gamma_c, power=s)
            rt = ode_front(ic, 1.0, 1000, dt=1e-3)
            fit = fit_tx_expansion(rt, cp_solvable, (100, 1000))
            devs[s] = abs(fit.d - co.d)
        assert devs[4.0] < 0.2
        assert devs[1.0] > 50.0 * devs[4.0]
