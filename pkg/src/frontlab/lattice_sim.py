"""Log-space simulator for the discrete logistic front

    h <- h + (b/a^2) (h_left + h_right - 2 h) + b h (1 - h)

on the lattice x = a Z, advanced in ln h so the exponential leading edge
keeps full relative precision hundreds of decades below 1.  Sub-lattice
front positions mu_alpha(t) come from cubic interpolation of ln h through
the level crossing, and eta_estimate turns a position trace into the rate
deficit eta_t = v_c - dmu/dt by local polynomial differentiation.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import savgol_coeffs

from .dispersion import DispersionModel, critical_point
from .errors import DataError, DomainError, LevelNotBracketed, NumericsError
from .numerics import bary_eval, bisect_root

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in normal installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@dataclass(frozen=True)
class SimParams:
    """Lattice spacing a, time step b, and measurement setup.

    The scheme is stable and order-preserving for b/a^2 <= 1/2.  v_c is the
    reference speed used for the moving window cap and the eta estimate;
    left as None it is taken from the dispersion relation of the scheme.
    """

    a: float
    b: float
    t_max: float
    alphas: tuple
    snap_threshold: float = -1e-16
    sample_stride: int = 50
    v_c: float = None

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise DomainError("lattice spacing and time step must be positive")
        if self.b / self.a**2 > 0.5:
            raise DomainError("need b/a^2 <= 1/2 for a stable update")
        if self.b >= 0.5:
            raise DomainError("time step too large for the logistic term")
        if self.t_max < 0:
            raise DomainError("t_max must be non-negative")
        if not self.alphas or not all(0.0 < al < 1.0 for al in self.alphas):
            raise DomainError("levels must lie strictly inside (0, 1)")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise DomainError("sample_stride must be a positive integer")
        if not -1e-8 <= self.snap_threshold < 0:
            raise DomainError("snap threshold must sit in [-1e-8, 0)")

    def reference_speed(self):
        if self.v_c is not None:
            return float(self.v_c)
        return critical_point(DispersionModel.lattice(self.a, self.b)).v_c


@dataclass(frozen=True)
class FrontState:
    """Active window of ln h values with its lattice geometry.

    Cells left of the window are saturated (h = 1) and cells right of it
    vacuum (h = 0).  base_index is the lattice site of lnh[0], so physical
    positions are a*(base_index + k).
    """

    t: float
    base_index: int
    lnh: np.ndarray
    a: float


@dataclass(frozen=True)
class LevelTrace:
    """Front position mu(t) at level alpha, with eta = v_c - dmu/dt once
    eta_estimate has filled it in."""

    alpha: float
    times: np.ndarray
    mu: np.ndarray
    eta: np.ndarray = None


@njit(cache=True, nogil=True)
def _advance(lnh, B, r, n0, nsteps, a, b, v_ref, snap_thr, cap_limit, buf):
    """nsteps lattice updates in place; returns window pointers (B, r).

    Array slot j holds lattice site j - 2; slots 0 and 1 are permanent
    saturated sentinels.  At most one fresh cell per step, seeded with
    (b/a^2) h_left exactly, and only inside the moving cap
    v_ref t + 10 sqrt(t) + 50.
    """
    ba = b / (a * a)
    log_ba = math.log(ba)
    for k in range(nsteps):
        t_new = (n0 + k + 1) * b
        cap_site = (v_ref * t_new + 10.0 * math.sqrt(t_new) + 50.0) / a
        for i in range(B, r + 1):
            li = lnh[i]
            g = ba * (math.expm1(lnh[i - 1] - li) + math.expm1(lnh[i + 1] - li))
            g -= b * math.expm1(li)
            v = li + math.log1p(g)
            buf[i] = 0.0 if v > snap_thr else v
        grow = r + 1 <= cap_limit and (r - 1) <= cap_site
        if grow:
            buf[r + 1] = log_ba + lnh[r]
        for i in range(B, r + 1):
            lnh[i] = buf[i]
        if grow:
            r += 1
            lnh[r] = buf[r]
        while lnh[B + 1] == 0.0:
            B += 1
    return B, r


def _check_window(lnh, B, r):
    win = lnh[B : r + 1]
    if not np.all(np.isfinite(win)):
        raise NumericsError("non-finite ln h inside the active window")
    if np.any(np.diff(win) > 1e-12):
        raise NumericsError("front profile lost monotonicity")


def _measure(lnh, B, r, a, site_of_index0, alpha):
    """Sub-lattice level position: cubic through the four nearest samples,
    two on each side of ln(alpha), then bisection to 1e-12."""
    target = math.log(alpha)
    win = lnh[B : r + 1]
    # first cell strictly below the level; profile is non-increasing
    below = np.nonzero(win < target)[0]
    if below.size == 0:
        raise LevelNotBracketed(f"no cell below level {alpha}")
    j = B + below[0]
    if j - 2 < 0 or j + 1 > r:
        raise LevelNotBracketed(f"level {alpha} lacks two samples per side")
    xs = (np.arange(j - 2, j + 2) + site_of_index0) * a
    ys = lnh[j - 2 : j + 2]
    return bisect_root(
        lambda x: bary_eval(xs, ys, x) - target, xs[1], xs[2], xtol=1e-12
    )


def measure_level(state, alpha):
    """Physical position where interpolated ln h crosses ln(alpha)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    arr = np.concatenate(([0.0, 0.0], state.lnh, [-math.inf]))
    return _measure(arr, 2, 1 + state.lnh.size, state.a, state.base_index - 2, alpha)


def profile_log_value(state, x):
    """ln h at a physical position, by the same four-cell interpolation
    that measure_level inverts, so values and positions round-trip."""
    arr = np.concatenate(([0.0, 0.0], state.lnh, [-math.inf]))
    c = x / state.a - (state.base_index - 2)
    j = int(math.floor(c))
    if j - 1 < 0 or j + 2 > state.lnh.size + 1:
        raise DomainError("position outside the resolved window")
    nodes = np.arange(j - 1, j + 3)
    xs = (nodes + state.base_index - 2) * state.a
    return float(bary_eval(xs, arr[j - 1 : j + 3], x))


def step(state, params):
    """One lattice update of a FrontState window."""
    arr = np.concatenate(([0.0, 0.0], state.lnh, [-math.inf, -math.inf]))
    buf = np.empty_like(arr)
    n0 = int(round(state.t / params.b))
    B, r = _advance(
        arr, 2, 1 + state.lnh.size, n0, 1,
        params.a, params.b, params.reference_speed(),
        params.snap_threshold, arr.size - 2, buf,
    )
    _check_window(arr, B, r)
    return FrontState(
        t=(n0 + 1) * params.b,
        base_index=state.base_index + (B - 2),
        lnh=arr[B : r + 1].copy(),
        a=params.a,
    )


def _drive(params, snapshot_times=()):
    """March the step initial condition to t_max, sampling every stride.

    Returns (traces, snapshots); snapshots are FrontState copies at the
    requested times, which must be sample-aligned step multiples.
    """
    v_ref = params.reference_speed()
    n_total = int(round(params.t_max / params.b))
    stride = int(params.sample_stride)
    snap_steps = set()
    for ts in snapshot_times:
        ns = int(round(ts / params.b))
        if abs(ns * params.b - ts) > 1e-9 or ns % stride or ns > n_total:
            raise DomainError("snapshot times must be sample-aligned step multiples")
        snap_steps.add(ns)

    horizon = max(params.t_max, 1.0)
    capacity = int((v_ref * horizon + 10.0 * math.sqrt(horizon) + 50.0) / params.a) + 10
    lnh = np.full(capacity, -math.inf)
    lnh[0] = lnh[1] = 0.0  # sentinels: sites -2, -1
    lnh[2] = 0.0  # site 0, the step edge
    buf = np.empty_like(lnh)
    B, r = 2, 2
    ts_list = []
    mu_list = [[] for _ in params.alphas]
    snapshots = {}
    n = 0
    chunk_idx = 0
    while n < n_total:
        nsteps = min(stride, n_total - n)
        B, r = _advance(
            lnh, B, r, n, nsteps, params.a, params.b, v_ref,
            params.snap_threshold, capacity - 2, buf,
        )
        n += nsteps
        chunk_idx += 1
        if chunk_idx % 32 == 0:
            _check_window(lnh, B, r)
        t_now = n * params.b
        if n % stride == 0:
            try:
                mus = [_measure(lnh, B, r, params.a, -2, al) for al in params.alphas]
            except LevelNotBracketed:
                if ts_list:
                    raise
                mus = None  # front not yet resolvable at every level
            if mus is not None:
                ts_list.append(t_now)
                for vals, mu in zip(mu_list, mus):
                    vals.append(mu)
        if n in snap_steps:
            snapshots[n] = FrontState(
                t=t_now, base_index=B - 2, lnh=lnh[B : r + 1].copy(), a=params.a
            )
    _check_window(lnh, B, r)
    times = np.array(ts_list)
    traces = [
        LevelTrace(alpha=al, times=times.copy(), mu=np.array(vals))
        for al, vals in zip(params.alphas, mu_list)
    ]
    ordered = [snapshots[int(round(ts / params.b))] for ts in snapshot_times]
    return traces, ordered


def run(params):
    """Level traces mu_alpha(t) for the step initial condition."""
    traces, _ = _drive(params)
    return traces


def run_with_snapshots(params, snapshot_times):
    """Like run, also returning FrontState copies at the requested times.

    The times must lie on the sampling grid (multiples of stride*b) and not
    exceed t_max.  Returns (traces, states) with states ordered like the
    request.
    """
    return _drive(params, snapshot_times=tuple(snapshot_times))


def eta_estimate(trace, v_c):
    """Rate deficit eta_t = v_c - dmu/dt from a sampled position trace.

    The derivative at each sample is that of a degree-4 least-squares
    polynomial over a centered window of half-width max(1, t/100); entries
    without full window coverage are NaN.  Needs uniform sampling.
    """
    t, mu = trace.times, trace.mu
    if t.size < 3:
        raise DataError("need at least 3 samples to differentiate")
    dt = t[1] - t[0]
    if np.any(np.abs(np.diff(t) - dt) > 1e-9 * max(dt, 1.0)):
        raise DataError("trace must be uniformly sampled")
    if dt > 0.5:
        raise DataError("sampling too sparse for the smoothing span")
    half = np.maximum(1.0, t / 100.0)
    m = np.maximum(2, np.ceil(half / dt).astype(int))
    eta = np.full(t.size, np.nan)
    ks = np.arange(t.size)
    for mm in np.unique(m):
        coeffs = savgol_coeffs(2 * mm + 1, polyorder=4, deriv=1, delta=dt, use="dot")
        idx = np.nonzero((m == mm) & (ks >= mm) & (ks < t.size - mm))[0]
        for k in idx:
            eta[k] = v_c - coeffs @ mu[k - mm : k + mm + 1]
    return replace(trace, eta=eta)
