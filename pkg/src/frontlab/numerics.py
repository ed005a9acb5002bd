"""Small numerical kernels shared by the other modules.

Uniform-grid quadrature and differentiation stencils of order 4, local
polynomial interpolation, a plain bisection root finder, and a compensated
Horner evaluator for ill-conditioned polynomials.
"""

import numpy as np

from .errors import BracketError, DataError


def cumquad4(y, h):
    """Cumulative integral of samples y on a uniform grid of spacing h.

    Each subinterval is integrated with the cubic through its four nearest
    nodes, so the running sum is 4th-order accurate at every node (not just
    at even ones).  Returns an array F with F[0] = 0 and
    F[i] = integral from x[0] to x[i].
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 4:
        raise DataError("need at least 4 samples for order-4 quadrature")
    inc = np.empty(y.size - 1)
    inc[0] = 9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]
    inc[1:-1] = -y[:-3] + 13.0 * y[1:-2] + 13.0 * y[2:-1] - y[3:]
    inc[-1] = y[-4] - 5.0 * y[-3] + 19.0 * y[-2] + 9.0 * y[-1]
    out = np.empty(y.size)
    out[0] = 0.0
    np.cumsum(inc, out=out[1:])
    out *= h / 24.0
    return out


def deriv1_4(y, h):
    """First derivative of uniformly sampled y, 4th order everywhere.

    Centered five-point stencil in the interior, one-sided five-point
    stencils of the same order at the two nodes next to each boundary.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 5:
        raise DataError("need at least 5 samples for the order-4 stencil")
    d = np.empty_like(y)
    d[2:-2] = y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]
    d[0] = -25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]
    d[1] = -3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]
    d[-2] = 3.0 * y[-1] + 10.0 * y[-2] - 18.0 * y[-3] + 6.0 * y[-4] - y[-5]
    d[-1] = 25.0 * y[-1] - 48.0 * y[-2] + 36.0 * y[-3] - 16.0 * y[-4] + 3.0 * y[-5]
    d /= 12.0 * h
    return d


def deriv2_4(y, h):
    """Second derivative of uniformly sampled y, 4th order in the interior.

    The two nodes at each edge use one-sided six-point stencils of the same
    order.  Note the roundoff floor scales like eps/h^2.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 6:
        raise DataError("need at least 6 samples for the order-4 stencil")
    d = np.empty_like(y)
    d[2:-2] = -y[:-4] + 16.0 * y[1:-3] - 30.0 * y[2:-2] + 16.0 * y[3:-1] - y[4:]
    d[0] = 45.0 * y[0] - 154.0 * y[1] + 214.0 * y[2] - 156.0 * y[3] + 61.0 * y[4] - 10.0 * y[5]
    d[1] = 10.0 * y[0] - 15.0 * y[1] - 4.0 * y[2] + 14.0 * y[3] - 6.0 * y[4] + y[5]
    d[-2] = 10.0 * y[-1] - 15.0 * y[-2] - 4.0 * y[-3] + 14.0 * y[-4] - 6.0 * y[-5] + y[-6]
    d[-1] = 45.0 * y[-1] - 154.0 * y[-2] + 214.0 * y[-3] - 156.0 * y[-4] + 61.0 * y[-5] - 10.0 * y[-6]
    d /= 12.0 * h * h
    return d


def bary_eval(xs, ys, x):
    """Value at x of the interpolating polynomial through (xs, ys).

    First-form barycentric evaluation; meant for small stencils (k <= 8).
    Exact node hits are returned directly.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    d = x - xs
    hit = np.nonzero(d == 0.0)[0]
    if hit.size:
        return float(ys[hit[0]])
    k = xs.size
    w = np.empty(k)
    for j in range(k):
        w[j] = 1.0 / np.prod(xs[j] - np.delete(xs, j))
    q = w / d
    return float(np.dot(q, ys) / np.sum(q))


def interp_uniform(x0, h, y, xq, order=6):
    """Local polynomial interpolation of samples y at x0 + i*h.

    Picks the `order` nodes nearest xq (clamped at the ends) and evaluates
    the interpolating polynomial there.  Scalar xq only.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < order:
        raise DataError(f"need at least {order} samples")
    t = (xq - x0) / h
    if t < -0.5 or t > n - 0.5:
        raise DataError(f"query {xq} outside sampled range")
    start = int(np.floor(t)) - (order // 2 - 1)
    start = min(max(start, 0), n - order)
    idx = np.arange(start, start + order)
    return bary_eval(x0 + idx * h, y[idx], xq)


def bisect_root(f, lo, hi, xtol=1e-13, maxit=200):
    """Bisection for a sign change of f on [lo, hi]; returns the midpoint
    once the bracket is narrower than xtol."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]")
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        if hi - lo < xtol:
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# Error-free transforms (Dekker/Knuth); no fused multiply-add on this
# interpreter, so products are split explicitly.

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def horner_comp(coeffs, t):
    """Evaluate sum coeffs[k] * t**k with a compensated Horner scheme.

    Result is as accurate as if computed in twice the working precision,
    which matters for the cancellative polynomials this package builds.
    """
    c = np.asarray(coeffs, dtype=float)
    s = float(c[-1])
    e = 0.0
    for k in range(c.size - 2, -1, -1):
        p, pe = _two_prod(s, t)
        s, se = _two_sum(p, float(c[k]))
        e = e * t + (pe + se)
    return s + e
