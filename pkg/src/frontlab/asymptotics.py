"""Late-time analysis of simulated front trajectories.

Builds the residual series delta_t left after removing the predicted mean
motion from a level trace, fits nested candidate correction laws to it by
linear least squares, cross-checks the inter-level spacing against the
travelling-wave level offsets and the rescaled profile correction against
its predicted shape, and provides a stable evaluator for exponentially
weighted memory integrals of the form e^{-beta t} int phi_u e^{beta u} du.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import savgol_coeffs

from .errors import DataError, DomainError, FitError, SignalError
from .lattice_sim import profile_log_value
from .numerics import interp_uniform
from .wave import level_position, wave_slope, wave_value


@dataclass(frozen=True)
class DeltaSeries:
    """Residual delta_t = mu_t - v_c t + (3/(2 gamma_c)) ln t + d'/sqrt(t).

    provenance records the (v_c, gamma_c, d_prime) triple that was
    subtracted, so fits can be traced back to their normalization.
    """

    alpha: float
    times: np.ndarray
    delta: np.ndarray
    provenance: tuple


_MODEL_NAMES = {
    "a": ("C", "f_prime", "g"),
    "b": ("C", "f_prime", "g", "h", "i"),
    "c": ("C", "f_prime", "g", "h", "i", "j", "k"),
}


@dataclass(frozen=True)
class FitModel:
    """Candidate correction law for delta_t, nested by kind.

    (a) C + (f' ln t + g)/t
    (b) adds (h ln t + i)/t^{3/2}
    (c) adds (j ln t + k)/t^2
    """

    kind: str

    def __post_init__(self):
        if self.kind not in _MODEL_NAMES:
            raise DomainError("model kind must be one of 'a', 'b', 'c'")

    @property
    def names(self):
        return _MODEL_NAMES[self.kind]

    def design_columns(self, t):
        lt = np.log(t)
        cols = [np.ones_like(t), lt / t, 1.0 / t]
        if self.kind in ("b", "c"):
            cols += [lt * t**-1.5, t**-1.5]
        if self.kind == "c":
            cols += [lt / t**2, t**-2.0]
        return cols


@dataclass(frozen=True)
class FitResult:
    """Least-squares coefficients of a FitModel on a time window."""

    kind: str
    window: tuple
    names: tuple
    coeffs: np.ndarray
    rms: float
    cond: float

    @property
    def as_dict(self):
        return dict(zip(self.names, self.coeffs))


def delta_series(trace, cp, coeffs):
    """Remove the predicted mean motion from a level trace.

    Subtracts v_c t, restores the logarithmic retreat (3/(2 gamma_c)) ln t
    and the d'/sqrt(t) correction, leaving the bounded residual whose slow
    part the candidate fits describe.
    """
    t = np.asarray(trace.times, dtype=float)
    if t.size == 0:
        raise DataError("trace is empty")
    if np.any(t <= 0.0):
        raise DataError("delta series needs strictly positive times")
    if np.any(np.diff(t) <= 0.0):
        raise DataError("trace times must increase")
    d = trace.mu - cp.v_c * t + 1.5 / cp.gamma_c * np.log(t) + coeffs.d_prime / np.sqrt(t)
    if not np.all(np.isfinite(d)):
        raise DataError("non-finite residual values")
    return DeltaSeries(
        alpha=trace.alpha,
        times=t,
        delta=d,
        provenance=(float(cp.v_c), float(cp.gamma_c), float(coeffs.d_prime)),
    )


def _snap_window(t, window):
    """Indices of the samples nearest the nominal endpoints, inclusive."""
    w1, w2 = float(window[0]), float(window[1])
    if not w1 < w2:
        raise DomainError("window endpoints must increase")
    i1 = int(np.argmin(np.abs(t - w1)))
    i2 = int(np.argmin(np.abs(t - w2)))
    if i2 <= i1:
        raise DataError("window contains too few samples")
    return i1, i2


def _lstsq_scaled(cols, y):
    """Least squares with unit-norm column scaling; returns
    (coefficients, rms residual, condition number of the scaled design)."""
    raw = np.column_stack(cols)
    norms = np.linalg.norm(raw, axis=0)
    if np.any(norms == 0.0):
        raise FitError("degenerate design column")
    a = raw / norms
    cond = np.linalg.cond(a)
    sol, *_ = np.linalg.lstsq(a, y, rcond=None)
    coeffs = sol / norms
    res = y - raw @ coeffs
    rms = float(np.sqrt(np.mean(res**2)))
    return coeffs, rms, cond


def fit(ds, model, window):
    """Fit a candidate correction law to a delta series on a window.

    The window endpoints snap to the nearest sample times (inclusive), the
    design matrix is scaled to unit column norms before solving, and a
    condition number above 1e12 is reported as FitError rather than being
    truncated away.
    """
    if isinstance(model, str):
        model = FitModel(model)
    t = ds.times
    i1, i2 = _snap_window(t, window)
    tw = t[i1 : i2 + 1]
    yw = ds.delta[i1 : i2 + 1]
    cols = model.design_columns(tw)
    if tw.size < 2 * len(cols):
        raise DataError("need at least two samples per fitted parameter")
    coeffs, rms, cond = _lstsq_scaled(cols, yw)
    if cond > 1e12:
        raise FitError(f"design condition number {cond:.3e} exceeds 1e12")
    return FitResult(
        kind=model.kind,
        window=(float(tw[0]), float(tw[-1])),
        names=model.names,
        coeffs=coeffs,
        rms=rms,
        cond=cond,
    )


@dataclass(frozen=True)
class SpacingReport:
    """Inter-level spacing against the wave-offset prediction.

    shift holds s_t = mu^alpha - mu^beta - (W^alpha - W^beta) on the
    analysis window; (c0, c1, r_squared) describe the fit s = c0 + c1/t on
    the upper half of that window.
    """

    alpha: float
    beta: float
    wave_spacing: float
    times: np.ndarray
    shift: np.ndarray
    fit_window: tuple
    c0: float
    c1: float
    r_squared: float


def conjecture1_check(trace_a, trace_b, wp, window=None):
    """Compare the spacing of two level traces with the wave prediction.

    The spacing excess s_t should settle at 0 like c1/t; the report carries
    the series for plotting against 1/t and the (c0, c1) fit on the upper
    half of the window with its R^2.
    """
    ta, tb = trace_a.times, trace_b.times
    if ta.size != tb.size or np.any(np.abs(ta - tb) > 1e-9):
        raise DataError("traces must share sample times")
    if ta.size < 4:
        raise DataError("too few samples for a spacing check")
    spacing = level_position(wp, trace_a.alpha) - level_position(wp, trace_b.alpha)
    if window is None:
        window = (ta[0], ta[-1])
    i1, i2 = _snap_window(ta, window)
    t = ta[i1 : i2 + 1]
    s = trace_a.mu[i1 : i2 + 1] - trace_b.mu[i1 : i2 + 1] - spacing

    half = 0.5 * (t[0] + t[-1])
    m = t >= half
    if np.count_nonzero(m) < 4:
        raise DataError("upper half-window has too few samples")
    coeffs, _, _ = _lstsq_scaled([np.ones(int(m.sum())), 1.0 / t[m]], s[m])
    pred = coeffs[0] + coeffs[1] / t[m]
    ss_res = float(np.sum((s[m] - pred) ** 2))
    ss_tot = float(np.sum((s[m] - np.mean(s[m])) ** 2))
    r2 = 1.0 if ss_tot < 1e-28 else 1.0 - ss_res / ss_tot
    return SpacingReport(
        alpha=trace_a.alpha,
        beta=trace_b.alpha,
        wave_spacing=float(spacing),
        times=t,
        shift=s,
        fit_window=(float(t[m][0]), float(t[m][-1])),
        c0=float(coeffs[0]),
        c1=float(coeffs[1]),
        r_squared=float(r2),
    )


@dataclass(frozen=True)
class ProfileReport:
    """Profile correction against its predicted first-order shape.

    lhs is (u(mu + x, t) - omega(W + x))/eta_t on the sample set, rhs the
    predicted combination Phi(W+x) - (Phi(W)/omega'(W)) omega'(W+x).
    distance is the sup norm of the unscaled remainder
    u - omega - eta_t * rhs, the quantity the first-order statement makes
    small beyond O(eta_t); scaled_distance = distance/|eta_t| is the sup
    gap of lhs - rhs itself, which bottoms out at (discretization bias)/
    eta_t and so grows again once eta_t falls below that bias.
    value_at_zero is the x = 0 entry of lhs - rhs; it vanishes to
    root-finding tolerance because mu is defined by the same interpolant.
    """

    alpha: float
    t: float
    eta: float
    x: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    distance: float
    scaled_distance: float
    value_at_zero: float


def _eta_noise_floor(times, t):
    """Propagated measurement noise of the smoothed rate estimate.

    Each position sample carries ~1e-11 of interpolation and root-finding
    noise; the derivative filter amplifies it by its coefficient norm.
    """
    dt = times[1] - times[0]
    m = max(2, int(math.ceil(max(1.0, t / 100.0) / dt)))
    c = savgol_coeffs(2 * m + 1, polyorder=4, deriv=1, delta=dt, use="dot")
    return 1e-11 * float(np.linalg.norm(c))


def theorem2_check(state, trace, wp, pt, x0=3.0):
    """Check the first-order shape of the profile correction at one time.

    Interpolates the simulated profile at mu_t + x for x in [-x0, 0],
    rescales its deviation from the travelling wave by the rate deficit
    eta_t, and measures the sup-norm distance to the predicted shape.
    """
    if not 0.0 < x0 <= 5.0:
        raise DomainError("x0 must lie in (0, 5]")
    if trace.eta is None:
        raise DataError("trace carries no rate-deficit estimate")
    k = int(np.argmin(np.abs(trace.times - state.t)))
    if abs(trace.times[k] - state.t) > 1e-9:
        raise DataError("trace does not sample the state time")
    eta = float(trace.eta[k])
    if not math.isfinite(eta):
        raise DataError("rate deficit undefined at the state time")
    if abs(eta) < 10.0 * _eta_noise_floor(trace.times, state.t):
        raise SignalError("rate deficit below 10x its noise floor")

    mu = float(trace.mu[k])
    w_pos = level_position(wp, trace.alpha)
    n = int(round(x0 / 0.05)) + 1
    xs = np.linspace(-x0, 0.0, n)

    lhs = np.empty(n)
    rhs = np.empty(n)
    kappa = interp_uniform(pt.x_lo, pt.h, pt.phi, w_pos) / wave_slope(wp, w_pos)
    for i, x in enumerate(xs):
        u = math.exp(profile_log_value(state, mu + x))
        lhs[i] = (u - wave_value(wp, w_pos + x)) / eta
        rhs[i] = interp_uniform(pt.x_lo, pt.h, pt.phi, w_pos + x) - kappa * wave_slope(
            wp, w_pos + x
        )
    gap = lhs - rhs
    scaled = float(np.max(np.abs(gap)))
    return ProfileReport(
        alpha=trace.alpha,
        t=float(state.t),
        eta=eta,
        x=xs,
        lhs=lhs,
        rhs=rhs,
        distance=scaled * abs(eta),
        scaled_distance=scaled,
        value_at_zero=float(gap[-1]),
    )


def _e2(x):
    # x + expm1(-x), guarding the cancellation at small x
    if x < 1e-3:
        return x * x * (0.5 - x / 6.0 + x * x / 24.0)
    return x + math.expm1(-x)


def lemma_oracle(phi_samples, beta, t0, ts):
    """Evaluate R_t = int_{t0}^t phi_u e^{-beta (t - u)} du at given times.

    phi_samples is a pair (u, phi) of sample arrays starting at t0; phi is
    taken piecewise linear between samples and each panel is integrated in
    closed form, so only decaying exponentials are ever formed.  Sampling
    coarser than 0.1/beta is refused.
    """
    u, vals = (np.asarray(a, dtype=float) for a in phi_samples)
    if beta <= 0.0:
        raise DomainError("decay rate must be positive")
    if u.ndim != 1 or u.size != vals.size or u.size < 2:
        raise DataError("need matching sample arrays with at least 2 points")
    du = np.diff(u)
    if np.any(du <= 0.0):
        raise DataError("sample times must increase strictly")
    if not np.all(np.isfinite(vals)):
        raise DataError("non-finite samples")
    if abs(u[0] - t0) > 1e-12 * max(1.0, abs(t0)):
        raise DomainError("samples must start at t0")
    if np.max(du) > 0.1 / beta:
        raise DataError("sampling too coarse for the decay rate")
    ts_arr = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(np.diff(ts_arr) < 0.0):
        raise DomainError("output times must be sorted")
    if ts_arr.size and (ts_arr[0] < t0 - 1e-12 or ts_arr[-1] > u[-1] + 1e-12):
        raise DomainError("output times outside the sampled range")

    out = np.empty(ts_arr.size)
    r = 0.0
    k = 0  # current panel [u[k], u[k+1]]
    for j, t in enumerate(ts_arr):
        while k + 1 < u.size - 1 and u[k + 1] < t:
            dlt = du[k]
            slope = (vals[k + 1] - vals[k]) / dlt
            e = -math.expm1(-beta * dlt) / beta
            r = r * math.exp(-beta * dlt) + vals[k] * e + slope * _e2(beta * dlt) / beta**2
            k += 1
        dl = t - u[k]
        if dl <= 0.0:
            out[j] = r
            continue
        slope = (vals[k + 1] - vals[k]) / du[k]
        e = -math.expm1(-beta * dl) / beta
        out[j] = r * math.exp(-beta * dl) + vals[k] * e + slope * _e2(beta * dl) / beta**2
    return out if np.ndim(ts) else float(out[0])
