import math

import mpmath as mp
import numpy as np
import pytest

from frontlab.dispersion import (
    DispersionModel,
    critical_point,
    expansion_coefficients,
    velocity,
)
from frontlab.errors import BracketError, DomainError


LAT = DispersionModel.lattice(0.1, 0.002)
CONT = DispersionModel.continuum()
SOLV = DispersionModel.solvable(1.0)


def _v_mp(model, g):
    """Spread rate retyped in extended precision, straight from the formulas."""
    if model.kind == "continuum":
        return g + 1 / g
    if model.kind == "lattice":
        a, b = mp.mpf(model.a), mp.mpf(model.b)
        grow = 1 + (b / a**2) * (mp.exp(g * a) + mp.exp(-g * a) - 2) + b
        return mp.log(grow) / (g * b)
    return (1 + mp.mpf(model.a) * mp.exp(g)) / g


def scan_minimum(model, lo=0.1, hi=5.0, step=1e-4):
    """Independent oracle: dense scan for a bracket, then extended-precision
    bisection on a symmetric difference of v.  float64 differencing cannot
    resolve the flat minimum past ~1e-7, hence the 50-digit arithmetic."""
    gs = np.arange(lo, hi, step)
    vs = velocity(model, gs)
    i = int(np.argmin(vs))
    with mp.workdps(50):
        a, b = mp.mpf(gs[i - 1]), mp.mpf(gs[i + 1])
        h = mp.mpf("1e-12")
        for _ in range(120):
            m = (a + b) / 2
            if _v_mp(model, m + h) - _v_mp(model, m - h) < 0:
                a = m
            else:
                b = m
        return float((a + b) / 2)


class TestModelValidation:
    def test_lattice_requires_stability(self):
        with pytest.raises(DomainError):
            DispersionModel.lattice(0.1, 0.0051)

    def test_positive_steps(self):
        with pytest.raises(DomainError):
            DispersionModel.lattice(-0.1, 0.002)
        with pytest.raises(DomainError):
            DispersionModel.solvable(0.0)

    def test_continuum_carries_no_parameters(self):
        with pytest.raises(DomainError):
            DispersionModel("continuum", a=0.1)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            DispersionModel("spherical")


class TestVelocity:
    def test_lattice_at_published_critical_rate(self):
        # published critical pair for a=0.1, b=0.002
        assert velocity(LAT, 1.00074727697) == pytest.approx(1.99684036732, abs=1e-9)

    def test_continuum_minimum_value(self):
        assert velocity(CONT, 1.0) == 2.0

    def test_solvable_direct_substitution(self):
        assert velocity(SOLV, 1.0) == pytest.approx(1.0 + math.e, rel=1e-15)

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(DomainError):
            velocity(CONT, 0.0)
        with pytest.raises(DomainError):
            velocity(LAT, -1.0)

    def test_vectorized(self):
        g = np.array([0.5, 1.0, 2.0])
        v = velocity(CONT, g)
        assert np.allclose(v, g + 1.0 / g)


class TestCriticalPoint:
    def test_lattice_published_values(self):
        cp = critical_point(LAT)
        assert cp.gamma_c == pytest.approx(1.00074727697, abs=1e-9)
        assert cp.v_c == pytest.approx(1.99684036732, abs=1e-9)

    def test_continuum_exact(self):
        cp = critical_point(CONT)
        assert cp.gamma_c == 1.0
        assert cp.v_c == 2.0
        assert cp.v2 == 2.0
        assert cp.v3 == -6.0

    def test_solvable_against_scan_oracle(self):
        cp = critical_point(SOLV)
        assert cp.gamma_c == pytest.approx(scan_minimum(SOLV), abs=1e-10)
        # gamma_c also solves e^g (g - 1) = 1, hence v_c = e^{gamma_c}
        assert math.exp(cp.gamma_c) * (cp.gamma_c - 1.0) == pytest.approx(1.0, abs=1e-12)
        assert cp.v_c == pytest.approx(math.exp(cp.gamma_c), rel=1e-13)

    @pytest.mark.parametrize("model", [LAT, CONT, SOLV], ids=["lattice", "continuum", "solvable"])
    def test_scan_and_root_agree(self, model):
        cp = critical_point(model)
        assert cp.gamma_c == pytest.approx(scan_minimum(model), abs=1e-10)
        assert cp.v2 > 0

    @pytest.mark.parametrize("model", [LAT, CONT, SOLV], ids=["lattice", "continuum", "solvable"])
    def test_locally_strictly_convex(self, model):
        cp = critical_point(model)
        for eps in (1e-3, 1e-2, 0.1):
            assert velocity(model, cp.gamma_c + eps) > cp.v_c
            assert velocity(model, cp.gamma_c - eps) > cp.v_c

    def test_continuum_limit_of_lattice(self):
        cp = critical_point(DispersionModel.lattice(0.01, 0.00002))
        assert abs(cp.v_c - 2.0) < 1e-3
        assert abs(cp.gamma_c - 1.0) < 1e-3

    def test_tol_validation(self):
        with pytest.raises(DomainError):
            critical_point(CONT, tol=1e-3)

    def test_no_minimum_raises(self):
        # monotone "dispersion": fake a model whose v' never changes sign by
        # scanning a lattice with the minimum far outside the window is not
        # constructible; instead check the scan guard via a degenerate range.
        import frontlab.dispersion as disp

        old = disp.SCAN_HI
        disp.SCAN_HI = 0.06
        try:
            with pytest.raises(BracketError):
                critical_point(CONT)
        finally:
            disp.SCAN_HI = old


class TestExpansionCoefficients:
    def test_continuum_sqrt_t_coefficient(self):
        ec = expansion_coefficients(critical_point(CONT))
        assert ec.d_prime == pytest.approx(3.0 * math.sqrt(math.pi), abs=1e-12)

    def test_continuum_log_over_t_coefficient(self):
        ec = expansion_coefficients(critical_point(CONT))
        assert ec.f_prime == pytest.approx((45.0 - 54.0 * math.log(2)) / 8.0, abs=1e-12)
        assert ec.f_prime == pytest.approx(0.946, abs=5e-4)
        assert ec.g_fkpp == pytest.approx(ec.f_prime, abs=1e-15)

    def test_lattice_log_over_t_coefficient(self):
        ec = expansion_coefficients(critical_point(LAT))
        # closed form evaluates to 0.94621975...; the published rounded text
        # value 0.948 is only honoured loosely.
        assert ec.f_prime == pytest.approx(0.9462197562480275, abs=1e-12)
        assert ec.f_prime == pytest.approx(0.948, abs=2e-3)

    @pytest.mark.parametrize("model", [LAT, CONT, SOLV], ids=["lattice", "continuum", "solvable"])
    def test_inversion_identities(self, model):
        cp = critical_point(model)
        ec = expansion_coefficients(cp)
        assert ec.d_prime == pytest.approx(ec.d / (cp.gamma_c * math.sqrt(cp.v_c)), rel=1e-15)
        lhs = 9.0 / (4.0 * cp.gamma_c**2 * cp.v_c) - ec.f / (cp.gamma_c * cp.v_c)
        assert ec.f_prime == pytest.approx(lhs, rel=1e-12)

    def test_rejects_nonconvex_point(self):
        from frontlab.dispersion import CriticalPoint

        with pytest.raises(DomainError):
            expansion_coefficients(CriticalPoint(1.0, 2.0, -1.0, 0.0))
