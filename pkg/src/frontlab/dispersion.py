"""Linear dispersion relations of the three front models and their critical points.

Each model describes the speed v(gamma) of an exponential leading edge
e^{-gamma (x - v t)} under the linearised dynamics:

* ``continuum``:  v(gamma) = gamma + 1/gamma
* ``lattice``:    explicit Euler stencil with space step a and time step b,
  v(gamma) = ln[1 + (b/a^2)(e^{gamma a} + e^{-gamma a} - 2) + b] / (gamma b)
* ``solvable``:   one-sided lattice coupling of strength a,
  v(gamma) = (1 + a e^{gamma}) / gamma

The minimum of v over gamma > 0 defines the critical pair (gamma_c, v_c)
that controls front selection, and the second and third derivatives of v at
the minimum fix the coefficients of the large-time position expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError, SolverError

__all__ = [
    "DispersionModel",
    "CriticalPoint",
    "ExpansionCoefficients",
    "velocity",
    "critical_point",
    "expansion_coefficients",
]

# Bracketing scan for the v' sign change; wide enough for all three models.
SCAN_LO = 0.05
SCAN_HI = 10.0
_SCAN_STEPS = 2000


@dataclass(frozen=True)
class DispersionModel:
    """Which linear dispersion v(gamma) is in force.

    kind is one of {"continuum", "lattice", "solvable"}.  For the lattice
    model, a is the space step and b the time step; for the solvable model,
    a is the (dimensionless) coupling strength.  The continuum model carries
    no parameters.
    """

    kind: str
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        if self.kind == "continuum":
            if self.a is not None or self.b is not None:
                raise DomainError("continuum model carries no parameters")
        elif self.kind == "lattice":
            if self.a is None or self.b is None:
                raise DomainError("lattice model requires both a and b")
            if self.a <= 0 or self.b <= 0:
                raise DomainError(f"lattice steps must be positive, got a={self.a}, b={self.b}")
            if self.b / self.a**2 > 0.5:
                raise DomainError(
                    f"lattice stability requires b/a^2 <= 1/2, got {self.b / self.a ** 2:g}"
                )
        elif self.kind == "solvable":
            if self.a is None or self.a <= 0:
                raise DomainError(f"solvable coupling must be positive, got a={self.a}")
            if self.b is not None:
                raise DomainError("solvable model has no time step parameter")
        else:
            raise DomainError(f"unknown dispersion kind {self.kind!r}")

    @classmethod
    def continuum(cls) -> "DispersionModel":
        return cls("continuum")

    @classmethod
    def lattice(cls, a: float, b: float) -> "DispersionModel":
        return cls("lattice", a=a, b=b)

    @classmethod
    def solvable(cls, a: float = 1.0) -> "DispersionModel":
        return cls("solvable", a=a)


@dataclass(frozen=True)
class CriticalPoint:
    """Minimum of v(gamma): rate gamma_c, velocity v_c, and v'', v''' there."""

    gamma_c: float
    v_c: float
    v2: float
    v3: float


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Closed-form coefficients of the large-argument position expansions.

    For reach times as a function of distance x the series is
    t_x = x/v_c + [3/2 ln x + c + d/sqrt(x) + f ln(x)/x + O(1/x)] / (gamma_c v_c);
    inverted to position as a function of time it reads
    x_t = v_c t - 3/(2 gamma_c) ln t + c' - d'/sqrt(t) + f' ln(t)/t + O(1/t).

    d and f' have closed forms in (gamma_c, v_c, v2, v3); d' and f follow from
    the inversion identities d' = d/(gamma_c sqrt(v_c)) and
    f' = 9/(4 gamma_c^2 v_c) - f/(gamma_c v_c).  g_fkpp is the conjectured
    continuum ln(t)/t coefficient (9/8)(5 - 6 ln 2), a model-independent
    constant kept here for convenience.
    """

    d: float
    d_prime: float
    f: float
    f_prime: float
    g_fkpp: float


def _v_and_derivs(model: DispersionModel, g):
    """v, v', v'', v''' at gamma = g (scalar or ndarray), all in closed form."""
    g = np.asarray(g, dtype=float)
    if model.kind == "continuum":
        v = g + 1.0 / g
        v1 = 1.0 - g**-2
        v2 = 2.0 * g**-3
        v3 = -6.0 * g**-4
        return v, v1, v2, v3
    if model.kind == "solvable":
        # v = u/gamma with u = 1 + a e^gamma
        e = model.a * np.exp(g)
        u, u1 = 1.0 + e, e
        v = u / g
        v1 = (u1 * g - u) / g**2
        v2 = (e * g**2 - 2 * u1 * g + 2 * u) / g**3
        v3 = (e * g**3 - 3 * e * g**2 + 6 * u1 * g - 6 * u) / g**4
        return v, v1, v2, v3
    # lattice: v = L/(b gamma) with L = ln F,
    # F = 1 + b + (4b/a^2) sinh^2(gamma a / 2)  (stable form of the stencil symbol)
    a, b = model.a, model.b
    F = 1.0 + b + (4.0 * b / a**2) * np.sinh(g * a / 2.0) ** 2
    F1 = (2.0 * b / a) * np.sinh(g * a)
    F2 = 2.0 * b * np.cosh(g * a)
    F3 = 2.0 * a * b * np.sinh(g * a)
    L = np.log(F)
    L1 = F1 / F
    L2 = F2 / F - L1**2
    L3 = F3 / F - 3.0 * F2 * F1 / F**2 + 2.0 * L1**3
    v = L / (b * g)
    v1 = (L1 * g - L) / (b * g**2)
    v2 = (L2 * g**2 - 2 * L1 * g + 2 * L) / (b * g**3)
    v3 = (L3 * g**3 - 3 * L2 * g**2 + 6 * L1 * g - 6 * L) / (b * g**4)
    return v, v1, v2, v3


def velocity(model: DispersionModel, gamma):
    """Edge speed v(gamma) for the given model; exact closed form.

    gamma may be a scalar or an array; every entry must be positive.
    """
    g = np.asarray(gamma, dtype=float)
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise DomainError(f"gamma must be positive and finite, got {gamma!r}")
    v = _v_and_derivs(model, g)[0]
    return float(v) if np.isscalar(gamma) or np.ndim(gamma) == 0 else v


def critical_point(model: DispersionModel, tol: float = 1e-12) -> CriticalPoint:
    """Locate the minimum of v(gamma) on the scan interval.

    Bisection on v' down to a bracket of width 1e-13, then three Newton
    polish steps using the closed-form v''.  The returned point satisfies
    |v'(gamma_c)| <= tol * |v''(gamma_c)|.
    """
    if not (0 < tol <= 1e-6):
        raise DomainError(f"tol must lie in (0, 1e-6], got {tol}")

    gs = np.linspace(SCAN_LO, SCAN_HI, _SCAN_STEPS + 1)
    v1 = _v_and_derivs(model, gs)[1]
    sign_change = np.nonzero((v1[:-1] < 0) & (v1[1:] >= 0))[0]
    if len(sign_change) == 0:
        raise BracketError(
            f"no sign change of v' on [{SCAN_LO}, {SCAN_HI}] for model {model.kind}"
        )
    i = sign_change[0]
    lo, hi = gs[i], gs[i + 1]

    def vp(g):
        return float(_v_and_derivs(model, g)[1])

    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if vp(mid) < 0:
            lo = mid
        else:
            hi = mid
    g = 0.5 * (lo + hi)
    for _ in range(3):
        _, d1, d2, _ = _v_and_derivs(model, g)
        g -= float(d1) / float(d2)

    v, d1, d2, d3 = (float(q) for q in _v_and_derivs(model, g))
    if not abs(d1) <= tol * abs(d2):
        raise SolverError(f"Newton polish left |v'|={abs(d1):.3e} > tol*|v''| for {model.kind}")
    if d2 <= 0:
        raise BracketError(f"v'' <= 0 at the located point gamma={g:g}; not a minimum")
    return CriticalPoint(gamma_c=g, v_c=v, v2=d2, v3=d3)


def expansion_coefficients(cp: CriticalPoint) -> ExpansionCoefficients:
    """Closed-form expansion coefficients at a critical point."""
    if cp.v2 <= 0:
        raise DomainError(f"v'' must be positive at the minimum, got {cp.v2}")
    gc, vc, v2, v3 = cp.gamma_c, cp.v_c, cp.v2, cp.v3
    ln2 = math.log(2.0)
    d = 3.0 * math.sqrt(math.pi * 2.0 * vc / v2) * gc**-1.5
    d_prime = d / (gc * math.sqrt(vc))
    f_prime = (54.0 - 54.0 * ln2 + 3.0 * gc * v3 / v2) / (4.0 * gc**4 * v2)
    f = 9.0 / (4.0 * gc) - gc * vc * f_prime
    g_fkpp = (9.0 / 8.0) * (5.0 - 6.0 * ln2)
    return ExpansionCoefficients(d=d, d_prime=d_prime, f=f, f_prime=f_prime, g_fkpp=g_fkpp)
