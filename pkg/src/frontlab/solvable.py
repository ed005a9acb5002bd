"""Event-driven front on the half line: u'(x,t) = u(x,t) + a u(x-1,t) until
u(x,t) reaches 1, after which the site is frozen.  Sites x <= 0 start at 1.

Two independent integration paths are provided.  exact_cascade represents
every site as piecewise  e^s R(s) + c  (closed under the coupling) and
locates freeze events by safeguarded Newton; it is exact but its polynomial
degrees grow with x.  ode_front integrates ln u with a classical order-4
scheme over a moving window and scales to x ~ 1e5, which the expansion fits
need.  fit_tx_expansion extracts the large-x coefficients of the reach
times from either path.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CascadeError,
    DataError,
    DegreeError,
    DomainError,
    FitError,
    NumericsError,
)
from .numerics import horner_comp

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in normal installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_LOG_FLOOR = -720.0  # below this ln u the site is not yet worth storing
_EDGE = -700.0  # window edge: extend once the last site rises above this


@dataclass(frozen=True)
class SolvableIC:
    """Initial site values: u0(x) = 1 for x <= 0, non-increasing in [0,1).

    kind 'zero' is the step; 'exponential' is amp * x^(-power) e^(-gamma x);
    'table' lists explicit values for x = 1..len(table), zero beyond.
    """

    kind: str
    gamma: float = 0.0
    power: float = 0.0
    amp: float = 1.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "exponential", "table"):
            raise DomainError(f"unknown initial condition kind {self.kind!r}")
        if self.kind == "exponential":
            if self.gamma <= 0 or self.power < 0 or self.amp <= 0:
                raise DomainError("exponential tail needs gamma > 0, power >= 0, amp > 0")
            if self.value(1) >= 1.0:
                raise DomainError("initial value at x = 1 must stay below 1")
        if self.kind == "table":
            vals = np.asarray(self.table, dtype=float)
            if vals.size and (np.any(vals < 0) or np.any(vals >= 1)):
                raise DomainError("table values must lie in [0, 1)")
            if np.any(np.diff(vals) > 0):
                raise DomainError("table values must be non-increasing")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def exponential(cls, gamma, power=0.0, amp=1.0):
        return cls("exponential", gamma=gamma, power=power, amp=amp)

    @classmethod
    def from_table(cls, values):
        return cls("table", table=tuple(float(v) for v in values))

    def value(self, x):
        if x <= 0:
            return 1.0
        lv = self.log_value(x)
        return math.exp(lv) if lv > -745.0 else 0.0

    def log_value(self, x):
        """ln u0(x) for x >= 1, -inf where u0 vanishes."""
        if self.kind == "zero":
            return -math.inf
        if self.kind == "exponential":
            return math.log(self.amp) - self.power * math.log(x) - self.gamma * x
        if 1 <= x <= len(self.table):
            v = self.table[x - 1]
            return math.log(v) if v > 0 else -math.inf
        return -math.inf


@dataclass(frozen=True)
class ReachTimes:
    """Saturation times t[k] for sites x[k] = 1..x_max, strictly increasing."""

    a: float
    x: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        if self.x.size != self.t.size:
            raise DataError("site and time arrays disagree in length")
        if np.any(np.diff(self.t) <= 0):
            raise DataError("reach times must increase strictly with x")


# ---------------------------------------------------------------------------
# exact piecewise-polynomial cascade


def _freeze_root(coeffs, c, hi):
    """Root of e^s R(s) + c - 1 on [0, hi]; safeguarded Newton to 1e-13.

    The value is increasing through 1, so g(0) < 0 <= g(hi) brackets it.
    """
    der = [k * coeffs[k] for k in range(1, len(coeffs))] or [0.0]

    def g(s):
        return math.exp(s) * horner_comp(coeffs, s) + c - 1.0

    lo = 0.0
    glo = g(lo)
    ghi = g(hi)
    if glo >= 0 or ghi < 0:
        raise CascadeError("freeze event not bracketed inside the piece")
    s = 0.5 * hi
    for _ in range(200):
        gs = g(s)
        if gs < 0:
            lo = s
        else:
            hi = s
        gp = math.exp(s) * (horner_comp(coeffs, s) + horner_comp(der, s))
        step_ok = gp != 0.0
        if step_ok:
            s_new = s - gs / gp
            step_ok = lo < s_new < hi
        s_new = s_new if step_ok else 0.5 * (lo + hi)
        if hi - lo < 1e-13:
            return s_new
        s = s_new
    return s


def _cascade(ic, a, x_max):
    """Reach times plus the full piecewise representation per site."""
    times = np.empty(x_max + 1)
    times[0] = 0.0
    # pieces per site: list of (t0, t1, coeffs in s = t - t0, c)
    prev_pieces = []
    prev_freeze = 0.0
    all_pieces = [None]
    for x in range(1, x_max + 1):
        val = ic.value(x)
        out = []
        t_x = None
        for t0, t1, r_prev, c_prev in prev_pieces + [(prev_freeze, math.inf, (0.0,), 1.0)]:
            c = -a * c_prev
            coeffs = [val - c]
            coeffs += [a * r_prev[k] / (k + 1) for k in range(len(r_prev))]
            if math.isinf(t1):
                # constant forcing: closed-form crossing of 1
                t_x = t0 + math.log((1.0 + a) / coeffs[0])
                out.append((t0, t_x, tuple(coeffs), c))
                break
            span = t1 - t0
            end = math.exp(span) * horner_comp(coeffs, span) + c
            if end >= 1.0:
                t_x = t0 + _freeze_root(coeffs, c, span)
                out.append((t0, t_x, tuple(coeffs), c))
                break
            out.append((t0, t1, tuple(coeffs), c))
            val = end
        if t_x is None or t_x <= times[x - 1]:
            raise CascadeError(f"site {x} failed to freeze after its predecessor")
        times[x] = t_x
        prev_pieces = out
        prev_freeze = t_x
        all_pieces.append(out)
    return times, all_pieces


def exact_cascade(ic, a, x_max):
    """Reach times t_1..t_{x_max} from the exact piecewise representation."""
    if a <= 0:
        raise DomainError("coupling a must be positive")
    x_max = int(x_max)
    if x_max < 1:
        raise DomainError("x_max must be at least 1")
    if x_max > 64:
        raise DegreeError("piece polynomials beyond degree 64 are not trustworthy")
    times, _ = _cascade(ic, a, x_max)
    return ReachTimes(a=a, x=np.arange(1, x_max + 1), t=times[1:].copy())


# ---------------------------------------------------------------------------
# log-space marching for large x


@njit(cache=True)
def _rhs(src, dst, lo, hi, a):
    # predecessor of the leftmost active site is frozen at u = 1
    dst[lo] = 1.0 + a * math.exp(-src[lo])
    for i in range(lo + 1, hi + 1):
        dst[i] = 1.0 + a * math.exp(src[i - 1] - src[i])


@njit(cache=True)
def _rk4(lam, lo, hi, a, h, k1, k2, k3, k4, tmp):
    _rhs(lam, k1, lo, hi, a)
    for i in range(lo, hi + 1):
        tmp[i] = lam[i] + 0.5 * h * k1[i]
    _rhs(tmp, k2, lo, hi, a)
    for i in range(lo, hi + 1):
        tmp[i] = lam[i] + 0.5 * h * k2[i]
    _rhs(tmp, k3, lo, hi, a)
    for i in range(lo, hi + 1):
        tmp[i] = lam[i] + h * k3[i]
    _rhs(tmp, k4, lo, hi, a)
    for i in range(lo, hi + 1):
        lam[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True)
def _hermite_root(y0, f0, y1, f1, h):
    # cubic through (0,y0,f0) and (h,y1,f1); bisect its zero crossing
    lo = 0.0
    hi = 1.0
    for _ in range(80):
        m = 0.5 * (lo + hi)
        m2 = m * m
        m3 = m2 * m
        val = (
            y0 * (2.0 * m3 - 3.0 * m2 + 1.0)
            + f0 * h * (m3 - 2.0 * m2 + m)
            + y1 * (3.0 * m2 - 2.0 * m3)
            + f1 * h * (m3 - m2)
        )
        if val < 0.0:
            lo = m
        else:
            hi = m
    return 0.5 * (lo + hi) * h


@njit(cache=True)
def _march(lam, lnu0, lo, hi, t_start, dt, a, x_max, t_reach, max_steps,
           k1, k2, k3, k4, tmp, buf):
    n_step = 0
    t = t_start
    while lo <= x_max:
        if n_step >= max_steps:
            return 1, lo, hi
        t_next = t_start + (n_step + 1) * dt
        # advance [t, t_next], splitting at freeze events
        while t < t_next:
            h = t_next - t
            y0 = lam[lo]
            f0 = 1.0 + a * math.exp(-y0)
            for i in range(lo, hi + 1):
                buf[i] = lam[i]
            _rk4(lam, lo, hi, a, h, k1, k2, k3, k4, tmp)
            if lam[lo] <= 0.0:
                t = t_next
                break
            y1 = lam[lo]
            f1 = 1.0 + a * math.exp(-y1)
            for i in range(lo, hi + 1):
                lam[i] = buf[i]
            s = _hermite_root(y0, f0, y1, f1, h)
            if s > 0.0:
                _rk4(lam, lo, hi, a, s, k1, k2, k3, k4, tmp)
            t = t + s
            t_reach[lo] = t
            lam[lo] = 0.0
            lo += 1
            if lo > x_max:
                return 0, lo, hi
        # admit new sites once the edge value is representable; hold back
        # sites whose early growth rate ~ x/t would destabilize the stepper
        while hi < x_max and lam[hi] > _EDGE:
            x_new = hi + 1
            if dt * (1.0 + x_new / t) > 1.0:
                break
            law = lam[hi] + math.log(a * t / x_new)
            own = lnu0[x_new] + t
            if own == -math.inf:
                seed = law
            elif law >= own:
                seed = law + math.log1p(math.exp(own - law))
            else:
                seed = own + math.log1p(math.exp(law - own))
            lam[x_new] = seed
            hi = x_new
        n_step += 1
        if n_step % 4096 == 0:
            for i in range(lo, hi + 1):
                if not math.isfinite(lam[i]):
                    return 2, lo, hi
                if i > lo and lam[i] > lam[i - 1] + 1e-9:
                    return 3, lo, hi
    return 0, lo, hi


def _linear_log_values(ic, a, t0, x_max):
    """ln u(x, t0) from the exact pre-freeze solution, site by site.

    While no site has frozen the dynamics are linear, so u splits into the
    boundary-driven part a^x e^t m_x(t) and the initial-value part
    e^t sum_k u0(x-k) (a t)^k / k!.  Both are evaluated as stable series.
    Stops once values drop below the storage floor.
    """
    log_at = math.log(a * t0)
    out = []
    for x in range(1, x_max + 1):
        # boundary part: (a t)^x / x! * S, S = 1 - t/(x+1) + t^2/((x+1)(x+2))...
        s_val = 1.0
        term = 1.0
        m = 0
        while abs(term) > 1e-18:
            m += 1
            term *= -t0 / (x + m)
            s_val += term
        lb = x * log_at - math.lgamma(x + 1) + t0 + math.log(s_val)
        # initial-value part
        terms = []
        for k in range(0, x):
            lu = ic.log_value(x - k)
            if lu > -math.inf:
                terms.append(lu + k * log_at - math.lgamma(k + 1))
        if terms:
            top = max(terms)
            lh = t0 + top + math.log(sum(math.exp(v - top) for v in terms))
            val = max(lb, lh) + math.log1p(math.exp(-abs(lb - lh)))
        else:
            val = lb
        if val >= 0.0:
            raise NumericsError("site already saturated at the hand-off time")
        out.append(val)
        if val < _LOG_FLOOR and x > 1:
            break
    return np.array(out)


def ode_front(ic, a, x_max, dt=5e-4):
    """Reach times by order-4 log-space marching over a moving window.

    Hands off from the exact linear-regime solution at t0 well before the
    first freeze, then steps ln u with RK4; freeze events are located on the
    cubic interpolant of the bracketing step and sites are pinned at u = 1.
    """
    if a <= 0:
        raise DomainError("coupling a must be positive")
    x_max = int(x_max)
    if not 1 <= x_max <= 100_000:
        raise DomainError("x_max must be in [1, 1e5]")
    if not 0.0 < dt <= 1e-3:
        raise DomainError("dt must be in (0, 1e-3]")

    # site 1 is closed-form for all time: u = (u0(1)+a) e^t - a
    t_first = math.log((1.0 + a) / (ic.value(1) + a))
    t0 = min(0.25, 0.5 * t_first)
    if dt > 0.5 * t0:
        raise DomainError("dt too coarse relative to the hand-off time")
    if dt * (2.0 + math.e * a) > 0.8:
        raise DomainError("dt too coarse for this coupling strength")

    lam = np.full(x_max + 1, -math.inf)
    lam[0] = 0.0
    # same stability cap as the marching admission rule: dt (1 + x/t0) <= 1
    x_stable = max(1, int((1.0 / dt - 1.0) * t0))
    init = _linear_log_values(ic, a, t0, min(x_max, x_stable))
    lam[1 : 1 + init.size] = init
    hi = init.size
    lnu0 = np.empty(x_max + 1)
    lnu0[0] = 0.0
    for x in range(1, x_max + 1):
        lnu0[x] = ic.log_value(x)

    t_reach = np.empty(x_max + 1)
    t_reach[0] = 0.0
    max_steps = int((t_first + 3.0 * x_max / min(1.0, a) + 100.0) / dt)
    k1 = np.empty(x_max + 1)
    k2 = np.empty(x_max + 1)
    k3 = np.empty(x_max + 1)
    k4 = np.empty(x_max + 1)
    tmp = np.empty(x_max + 1)
    buf = np.empty(x_max + 1)
    code, lo, hi = _march(
        lam, lnu0, 1, hi, t0, dt, a, x_max, t_reach, max_steps,
        k1, k2, k3, k4, tmp, buf,
    )
    if code == 1:
        raise NumericsError("front failed to traverse the requested range")
    if code == 2:
        raise NumericsError(f"non-finite log value near site {lo}")
    if code == 3:
        raise NumericsError(f"log profile lost monotonicity near site {lo}")
    return ReachTimes(a=a, x=np.arange(1, x_max + 1), t=t_reach[1:].copy())


# ---------------------------------------------------------------------------
# large-x expansion of the reach times


@dataclass(frozen=True)
class TxFit:
    """Least-squares coefficients of the reach-time expansion
    t_x = x/v_c + (log_coeff ln x + c + d/sqrt(x) + f ln(x)/x + e/x)/(gamma_c v_c)."""

    log_coeff: float
    c: float
    d: float
    f: float
    e: float
    rms: float
    cond: float
    n: int
    window: tuple


def fit_tx_expansion(rt, cp, x_range, free_log=False):
    """Fit the subleading reach-time series on x in x_range = (lo, hi).

    The leading x/v_c term is always removed; the (3/2) ln x term is removed
    too unless free_log is set, in which case its coefficient is fitted and
    reported (a consistency probe).  Everything is linear in the parameters,
    so plain scaled least squares does the job.
    """
    lo, hi = x_range
    m = (rt.x >= lo) & (rt.x <= hi)
    if np.count_nonzero(m) < 50:
        raise DataError("need at least 50 reach times inside the window")
    x = rt.x[m].astype(float)
    gv = cp.gamma_c * cp.v_c
    y = (rt.t[m] - x / cp.v_c) * gv
    lx = np.log(x)
    cols = [np.ones_like(x), 1.0 / np.sqrt(x), lx / x, 1.0 / x]
    if free_log:
        cols.insert(0, lx)
    else:
        y = y - 1.5 * lx
    design = np.column_stack(cols)
    norms = np.linalg.norm(design, axis=0)
    coef, _, _, sv = np.linalg.lstsq(design / norms, y, rcond=None)
    cond = sv[0] / sv[-1]
    if cond > 1e12:
        raise FitError(f"design matrix condition {cond:.3e} exceeds 1e12")
    coef = coef / norms
    resid = y - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    if free_log:
        log_coeff, c, d, f, e = coef
    else:
        c, d, f, e = coef
        log_coeff = 1.5
    return TxFit(
        log_coeff=float(log_coeff),
        c=float(c),
        d=float(d),
        f=float(f),
        e=float(e),
        rms=rms,
        cond=float(cond),
        n=int(np.count_nonzero(m)),
        window=(float(lo), float(hi)),
    )
