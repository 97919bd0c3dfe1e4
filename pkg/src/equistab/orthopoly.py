"""Jacobi and Gegenbauer polynomials.

Values come from the upward three-term recurrence in the degree, which is
stable on ``[-1, 1]``.  Derivatives use the parameter-shift identities

    d/dx P_n^(a,b)(x) = (n + a + b + 1)/2 * P_{n-1}^(a+1,b+1)(x)
    d/dx C_n^(d)(x)   = 2 d C_{n-1}^(d+1)(x)

and fall back to a central difference (step ``FD_STEP``) only when a shifted
family would leave its parameter domain.

The Jacobi recurrence used (normalisation P_0 = 1, P_n(1) = (a+1)_n / n!)::

    2n (n+a+b) (2n+a+b-2) P_n
        = (2n+a+b-1) [ (2n+a+b)(2n+a+b-2) x + a^2 - b^2 ] P_{n-1}
          - 2 (n+a-1)(n+b-1)(2n+a+b) P_{n-2}

with P_1 = (a+1) + (a+b+2)(x-1)/2.  When the leading factor vanishes
(a + b a negative integer, only reachable at the a = -1 or b = -1 boundary)
the explicit binomial sum is used instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

FD_STEP = 1e-5


class ParameterDomainError(ValueError):
    """Polynomial parameters outside the admissible range."""


class BoundaryParameterWarning(UserWarning):
    """Jacobi parameter at -1: accepted, but outside the tested regime."""


@dataclass(frozen=True)
class Jacobi:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha >= -1 and self.beta >= -1):
            raise ParameterDomainError(
                f"Jacobi parameters need alpha, beta >= -1, got ({self.alpha}, {self.beta})"
            )

    @property
    def boundary(self) -> bool:
        return self.alpha == -1 or self.beta == -1

    def ode_coefficients(self, degree: int):
        """(B(x) as a callable, eigenvalue) of (1-x^2) f'' + B f' + lam f = 0."""
        a, b = self.alpha, self.beta
        return (lambda x: b - a - (a + b + 2) * x), degree * (degree + 1 + a + b)


@dataclass(frozen=True)
class Gegenbauer:
    delta: float

    def __post_init__(self):
        if not (self.delta > -0.5) or self.delta == 0:
            raise ParameterDomainError(
                f"Gegenbauer parameter needs delta > -1/2 and delta != 0, got {self.delta}"
            )

    def ode_coefficients(self, degree: int):
        d = self.delta
        return (lambda x: -(2 * d + 1) * x), degree * (degree + 2 * d)


PolyKind = Jacobi | Gegenbauer


def _check_degree(degree):
    if int(degree) != degree or degree < 0:
        raise ParameterDomainError(f"degree must be a non-negative integer, got {degree}")
    return int(degree)


def _jacobi_binomial_sum(n, a, b, x):
    # DLMF 18.5.8; generalized binomials via falling products
    def binom(top, k):
        out = 1.0
        for i in range(k):
            out *= (top - i) / (i + 1)
        return out

    xm = (x - 1) / 2
    xp = (x + 1) / 2
    total = np.zeros_like(x, dtype=float)
    for s in range(n + 1):
        total = total + binom(n + a, n - s) * binom(n + b, s) * xm**s * xp ** (n - s)
    return total


def _jacobi(n, a, b, x):
    p0 = np.ones_like(x, dtype=float)
    if n == 0:
        return p0
    p1 = (a + 1) + (a + b + 2) * (x - 1) / 2
    for k in range(2, n + 1):
        s = 2 * k + a + b
        lead = 2 * k * (k + a + b) * (s - 2)
        if lead == 0:
            return _jacobi_binomial_sum(n, a, b, x)
        p0, p1 = p1, ((s - 1) * (s * (s - 2) * x + a * a - b * b) * p1
                      - 2 * (k + a - 1) * (k + b - 1) * s * p0) / lead
    return p1


def _gegenbauer(n, d, x):
    c0 = np.ones_like(x, dtype=float)
    if n == 0:
        return c0
    c1 = 2 * d * x
    for k in range(2, n + 1):
        c0, c1 = c1, (2 * x * (k + d - 1) * c1 - (k + 2 * d - 2) * c0) / k
    return c1


def eval_poly(kind: PolyKind, degree: int, x):
    """P_j^(alpha,beta)(x) or C_j^(delta)(x); scalar or array ``x``."""
    n = _check_degree(degree)
    xa = np.asarray(x, dtype=float)
    if isinstance(kind, Jacobi):
        if kind.boundary:
            warnings.warn(
                f"Jacobi parameter -1 in {kind}: outside the tested regime",
                BoundaryParameterWarning,
                stacklevel=2,
            )
        out = _jacobi(n, kind.alpha, kind.beta, xa)
    elif isinstance(kind, Gegenbauer):
        out = _gegenbauer(n, kind.delta, xa)
    else:
        raise TypeError(f"unknown polynomial kind {kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def _derivative(kind, n, x):
    if n == 0:
        return np.zeros_like(x)
    if isinstance(kind, Jacobi):
        a, b = kind.alpha, kind.beta
        return (n + a + b + 1) / 2 * _jacobi(n - 1, a + 1, b + 1, x)
    return 2 * kind.delta * _gegenbauer(n - 1, kind.delta + 1, x)


def _second_derivative(kind, n, x):
    if n <= 1:
        return np.zeros_like(x)
    if isinstance(kind, Jacobi):
        a, b = kind.alpha, kind.beta
        return ((n + a + b + 1) * (n + a + b + 2) / 4) * _jacobi(n - 2, a + 2, b + 2, x)
    d = kind.delta
    return 4 * d * (d + 1) * _gegenbauer(n - 2, d + 2, x)


def derivatives(kind: PolyKind, degree: int, x):
    """(f, f', f'') at ``x`` via the parameter-shift identities."""
    n = _check_degree(degree)
    xa = np.asarray(x, dtype=float)
    f = eval_poly(kind, n, xa)
    return f, _derivative(kind, n, xa), _second_derivative(kind, n, xa)


def derivatives_fd(kind: PolyKind, degree: int, x, h: float = FD_STEP):
    """Central-difference (f, f', f'') with step ``h``; cross-check path."""
    xa = np.asarray(x, dtype=float)
    fm = eval_poly(kind, degree, xa - h)
    f0 = eval_poly(kind, degree, xa)
    fp = eval_poly(kind, degree, xa + h)
    return f0, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h)


def poly_ode_residual(kind: PolyKind, degree: int, x):
    """(1 - x^2) f'' + B(x) f' + lam_j f for the polynomial's own ODE."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) >= 1):
        raise ParameterDomainError("residual is only checked for |x| < 1")
    B, lam = kind.ode_coefficients(degree)
    f, df, d2f = derivatives(kind, degree, xa)
    out = (1 - xa * xa) * d2f + B(xa) * df + lam * f
    return float(out) if np.ndim(out) == 0 else out


def gegenbauer_explicit(degree: int, delta: float, x):
    """Closed forms for degrees 0..3."""
    d = delta
    x = np.asarray(x, dtype=float)
    if degree == 0:
        return np.ones_like(x)
    if degree == 1:
        return 2 * d * x
    if degree == 2:
        return -d + 2 * d * (1 + d) * x**2
    if degree == 3:
        return -2 * d * (1 + d) * x + (4 / 3) * d * (1 + d) * (2 + d) * x**3
    raise ValueError("explicit list covers degrees 0..3 only")


def jacobi_at_one(degree: int, alpha: float) -> float:
    """P_n^(a,b)(1) = (a+1)_n / n!."""
    return math.prod((alpha + 1 + i) / (i + 1) for i in range(degree))
