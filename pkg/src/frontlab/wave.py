"""Critical travelling wave of the front equation and its companions.

The profile omega solves  omega'' + 2 omega' + omega - omega^2 = 0  with
omega(-inf) = 1, omega(+inf) = 0, normalized so omega(0) = 1/2.  On top of it
this module builds the level positions W(alpha), the response function Phi
driven by omega', and the recentred bounded solution Psi.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError, RangeError, SolverError, TailError
from .numerics import cumquad4, deriv1_4, interp_uniform

# decay rate of 1 - omega on the invaded side
_LAM = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class WaveProfile:
    """Tabulated critical wave on a uniform grid containing x = 0.

    left_decay_amp is the constant C in omega'(x) e^x ~ C e^{sqrt(2) x}
    as x -> -inf, measured from the leftmost stretch of the grid.
    """

    x_lo: float
    x_hi: float
    h: float
    x: np.ndarray
    omega: np.ndarray
    omega_p: np.ndarray
    left_decay_amp: float
    i_zero: int


@dataclass(frozen=True)
class PhiTable:
    """Phi on the same grid as its WaveProfile, plus construction byproducts.

    inner is the running integral of (omega' e^x)^2 including the analytic
    tail below the grid; outer is the second cumulation (zero at x = 0);
    phi_p is the derivative of phi obtained from the product rule, stored so
    consistency can be re-checked by finite differences.  psi_cache memoizes
    Phi(W)/omega'(W) per level.
    """

    x_lo: float
    x_hi: float
    h: float
    x: np.ndarray
    phi: np.ndarray
    phi_p: np.ndarray
    inner: np.ndarray
    outer: np.ndarray
    i_zero: int
    psi_cache: dict = field(default_factory=dict)


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def solve_wave(x_lo=-25.0, x_hi=25.0, h=0.005, tol=1e-13, eps=1e-10):
    """Integrate the wave equation and tabulate (omega, omega') on a grid.

    The trajectory is launched on the unstable manifold of omega = 1 with
    amplitude eps, run through the half-level crossing, and translated so
    the crossing sits at x = 0.  Launching from the saturated side is the
    well-conditioned direction; the decaying side has a degenerate double
    rate and cannot be shot backwards reliably.
    """
    if not x_lo <= -20.0:
        raise DomainError(f"x_lo={x_lo} must be <= -20")
    if not x_hi >= 20.0:
        raise DomainError(f"x_hi={x_hi} must be >= +20")
    if not 0.0 < h <= 0.01:
        raise DomainError(f"h={h} must be in (0, 0.01]")
    if not 0.0 < tol <= 1e-10:
        raise DomainError(f"tol={tol} must be in (0, 1e-10]")
    if not 0.0 < eps <= 1e-6:
        raise DomainError(f"eps={eps} must be in (0, 1e-6]")

    # snap the grid so that x = 0 is a node
    i0 = int(round(-x_lo / h))
    i1 = int(round(x_hi / h))
    x = np.arange(-i0, i1 + 1, dtype=float) * h
    x_lo_eff = x[0]

    def rhs(t, y):
        w, wp = y
        return (wp, -2.0 * wp - w + w * w)

    def half_crossing(t, y):
        return y[0] - 0.5

    half_crossing.direction = -1.0

    launch = eps
    x_half = None
    sol = None
    for _ in range(2):
        x_end = math.log(1.0 / launch) / _LAM + x_hi + 30.0
        sol = solve_ivp(
            rhs,
            (0.0, x_end),
            (1.0 - launch, -_LAM * launch),
            method="DOP853",
            rtol=tol,
            atol=tol * 1e-2,
            # the order-7 interpolant, not the order-8 integration, limits
            # the tabulated accuracy; short steps keep its error ~ step^8
            # below the differencing floor of the residual checks
            max_step=0.05,
            dense_output=True,
            events=half_crossing,
        )
        if not sol.success:
            raise IntegrationError(sol.message)
        if sol.t_events[0].size == 0:
            raise IntegrationError("trajectory never crossed the half level")
        x_half = float(sol.t_events[0][0])
        for _ in range(3):
            w, wp = sol.sol(x_half)
            x_half -= (w - 0.5) / wp
        if x_half + x_lo_eff >= 3.0:
            break
        # grid reaches deeper than the launch point: relaunch smaller
        launch *= math.exp(_LAM * (x_half + x_lo_eff - 4.0))
    else:
        raise IntegrationError("grid extends beyond the launchable tail")

    vals = sol.sol(x + x_half)
    omega, omega_p = vals[0].copy(), vals[1].copy()
    if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(omega_p))):
        raise SolverError("non-finite profile values")
    if not np.all(np.diff(omega) < 0.0):
        raise SolverError("tabulated profile is not strictly decreasing")
    if not np.all(omega_p < 0.0):
        raise SolverError("tabulated slope changes sign")
    if abs(omega[i0] - 0.5) > 1e-11:
        raise SolverError("half-level crossing not located to tolerance")
    omega[i0] = 0.5

    m = x <= x_lo_eff + 5.0
    amp = float(np.mean(omega_p[m] * np.exp((1.0 - math.sqrt(2.0)) * x[m])))

    return WaveProfile(
        x_lo=float(x_lo_eff),
        x_hi=float(x[-1]),
        h=float(h),
        x=_freeze(x),
        omega=_freeze(omega),
        omega_p=_freeze(omega_p),
        left_decay_amp=amp,
        i_zero=i0,
    )


def wave_value(wp, xq):
    """omega at an off-grid point, by local degree-5 interpolation."""
    return interp_uniform(wp.x_lo, wp.h, wp.omega, xq)


def wave_slope(wp, xq):
    """omega' at an off-grid point, by local degree-5 interpolation."""
    return interp_uniform(wp.x_lo, wp.h, wp.omega_p, xq)


def ode_residual(wp):
    """Defect of the tabulated pair in the wave equation.

    omega'' is re-derived from omega' by the order-4 difference stencil, so
    the defect measures true consistency of the table rather than repeating
    the integrator's own algebra.
    """
    d2 = deriv1_4(wp.omega_p, wp.h)
    return d2 + 2.0 * wp.omega_p + wp.omega - wp.omega * wp.omega


def level_position(wp, alpha):
    """The unique W with omega(W) = alpha, to 1e-12 in the level value."""
    if not wp.omega[-1] < alpha < wp.omega[0]:
        raise RangeError(f"level {alpha} outside tabulated range")
    # omega decreasing: first index with omega <= alpha
    k = int(np.searchsorted(-wp.omega, -alpha))
    k = min(max(k, 1), wp.x.size - 1)
    n = wp.x.size
    start = min(max(k - 3, 0), n - 6)
    idx = np.arange(start, start + 6)
    xs = wp.x[idx]
    ys = wp.omega[idx]

    from .numerics import bary_eval, bisect_root

    f = lambda xq: bary_eval(xs, ys, xq) - alpha
    return bisect_root(f, wp.x[k - 1], wp.x[k], xtol=1e-13)


def phi(wp):
    """Build Phi = omega'(x) * J(x) by two cumulative quadratures.

    J(x) integrates  e^{-2y} I(y) / omega'(y)^2  from 0, where I is the
    running integral of (omega' e^z)^2 with its analytic tail below the
    grid.  Both integrands are smooth; everything is order 4 on the grid.
    """
    x, w, s = wp.x, wp.omega, wp.omega_p

    # measure the tail decay of (omega' e^x)^2 and pin its integral below x_lo
    m = x <= wp.x_lo + 5.0
    ln_g = 2.0 * (np.log(-s[m]) + x[m])
    rate, _ = np.polyfit(x[m], ln_g, 1)
    want = 2.0 * math.sqrt(2.0)
    if abs(rate - want) > 0.05 * want:
        raise TailError(f"tail decay rate {rate:.4f}, expected {want:.4f}")

    g = (s * np.exp(x)) ** 2
    inner = g[0] / rate + cumquad4(g, wp.h)
    if not np.all(inner > 0.0):
        raise SolverError("inner integral lost positivity")

    # the two factors decay at comparable exponential rates, so divide
    # in log space instead of forming tiny/tiny
    outer_integrand = np.exp(np.log(inner) - 2.0 * x - 2.0 * np.log(-s))
    acc = cumquad4(outer_integrand, wp.h)
    outer = acc - acc[wp.i_zero]

    w_pp = -2.0 * s - w + w * w
    phi_vals = s * outer
    phi_p = w_pp * outer + s * outer_integrand

    return PhiTable(
        x_lo=wp.x_lo,
        x_hi=wp.x_hi,
        h=wp.h,
        x=wp.x,
        phi=_freeze(phi_vals),
        phi_p=_freeze(phi_p),
        inner=_freeze(inner),
        outer=_freeze(outer),
        i_zero=wp.i_zero,
    )


def phi_ode_residual(wp, pt):
    """Defect of the Phi table in  Phi'' + 2 Phi' + (1 - 2 omega) Phi = omega'.

    Phi'' comes from the order-4 stencil applied to the stored Phi', so the
    quadrature errors behind Phi actually show up here.
    """
    d2 = deriv1_4(pt.phi_p, pt.h)
    return d2 + 2.0 * pt.phi_p + (1.0 - 2.0 * wp.omega) * pt.phi - wp.omega_p


def _kappa(wp, pt, alpha):
    got = pt.psi_cache.get(alpha)
    if got is not None:
        return got
    w_pos = level_position(wp, alpha)
    val = interp_uniform(pt.x_lo, pt.h, pt.phi, w_pos) / wave_slope(wp, w_pos)
    pt.psi_cache[alpha] = val
    return val


def psi(wp, pt, alpha, xq):
    """Psi(x) = e^x [Phi(W+x) - (Phi(W)/omega'(W)) omega'(W+x)], x <= 0."""
    xq_arr = np.atleast_1d(np.asarray(xq, dtype=float))
    if np.any(xq_arr > 0.0):
        raise DomainError("psi is defined for x <= 0")
    w_pos = level_position(wp, alpha)
    if np.any(w_pos + xq_arr < wp.x_lo) or np.any(w_pos + xq_arr > wp.x_hi):
        raise RangeError("W + x leaves the tabulated grid")
    kap = _kappa(wp, pt, alpha)
    out = np.empty_like(xq_arr)
    for i, xi in enumerate(xq_arr):
        pos = w_pos + xi
        out[i] = math.exp(xi) * (
            interp_uniform(pt.x_lo, pt.h, pt.phi, pos) - kap * wave_slope(wp, pos)
        )
    return out if np.ndim(xq) else float(out[0])


def shift_coefficient(wp, pt, alpha, beta):
    """Predicted coefficient of the speed deficit in the inter-level shift:
    Phi(W(alpha))/omega'(W(alpha)) - Phi(W(beta))/omega'(W(beta))."""
    for lvl in (alpha, beta):
        if not 0.0 < lvl < 1.0:
            raise DomainError(f"level {lvl} outside (0, 1)")
    return _kappa(wp, pt, alpha) - _kappa(wp, pt, beta)
