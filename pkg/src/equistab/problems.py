"""Boundary-value families for equivariant harmonic self-maps.

Three families are covered: isoparametric actions on spheres, their lifts to
SO(n+2) and the conjugation-type action on SU(3).  For all of them the orbit
space is an interval ``(0, L)`` and the compactified chart

    t = (2/G) arctan(e^x),   x in R

sends the singular endpoints to infinity.  ``G`` is ``g`` for spheres, ``2g``
for SO(n+2) (its ODE is the sphere ODE with g replaced by 2g) and 2 for SU(3),
where the chart is t = arctan(e^x).

Writing ``T = tanh x``, ``M = m0 + m1``, ``d = m0 - m1`` and ``phi = G t``
(so sin(phi) = sech x, cos(phi) = -T), the sphere-type equation in the x-chart
reads

    r'' = -b r' + [(G-2) sin(2(r-t)) (M - dT) + 2 sin(2(r-t)+phi) (d - MT)] / (4G)
    b   = (d + (2 - M) T) / 2

which reduces to r'' - (m-1) T r' - (m/2) sin 2r = 0 for g = 1.  For SU(3)

    r'' = T r' - (1+T)/2 sin 2r + (1-T)^(3/2) sin(r) / sqrt(2).

The SU(3) form follows from the t-chart equation by the chain rule and agrees
with the Euler-Lagrange equation of the reduced energy
    int (r'^2 + (1+T) cos^2 r - sqrt(2) cos r (1-T)^(3/2)) sech x dx.

Linearising at a solution gives the Jacobi equation
``xi'' + b xi' + (c + lam w) xi = 0`` with w = sech^2 (spheres, SO) and
w = sech^2 / 4 (SU(3)).  Eigenvalues ``lam`` are in the x-normalisation; the
t-chart value is ``eigen_scale * lam`` with eigen_scale = w / (dt/dx)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate

from . import _backend as kb


class DomainError(ValueError):
    code = "domain"


class TangentialTensionUnknown(DomainError):
    """Exceptional g = 4 triple: the reduction to an ODE is not justified."""

    code = "tangential-part-unknown"


class SingularityError(ValueError):
    code = "singular-endpoint"


class PreconditionError(ValueError):
    code = "precondition"


class Family(str, Enum):
    SPHERE = "sphere"
    SO = "so"
    SU3 = "su3"


class SolutionKind(str, Enum):
    IDENTITY = "identity"
    LINEAR_ONE_MINUS_G = "linear-1-g"
    LINEAR_ONE_MINUS_TWO_G = "linear-1-2g"
    SU3_IDENTITY = "su3-identity"
    NUMERIC = "numeric"


def _exceptional(g, m0, m1):
    lo, hi = sorted((m0, m1))
    if g != 4:
        return False
    if lo == 2 and hi >= 3 and hi % 2 == 1:
        return True
    if lo == 4 and hi >= 7 and hi % 4 == 3:
        return True
    return (lo, hi) in ((4, 5), (6, 9))


def admissible(g: int, m0: int, m1: int) -> bool:
    """True if (g, m0, m1), up to order, is the datum of a cohomogeneity-one action on a sphere."""
    if min(g, m0, m1) < 1:
        return False
    lo, hi = sorted((m0, m1))
    if g == 1:
        return m0 == m1
    if g == 2:
        return True
    if g == 3:
        return m0 == m1 and m0 in (1, 2, 4, 8)
    if g == 4:
        return lo == 1 or (lo, hi) == (2, 2) or _exceptional(g, m0, m1)
    if g == 6:
        return m0 == m1 and m0 in (1, 2)
    return False


@dataclass(frozen=True)
class ProblemSpec:
    """A (family, g, m0, m1, k) boundary-value problem.

    For SU(3) the multiplicities are unused and ``k`` holds ell, with
    r(infinity) = (2 ell + 1) pi/2.
    """

    family: Family
    g: int = 1
    m0: int = 1
    m1: int = 1
    k: int = 1

    @property
    def G(self) -> int:
        """Angular rate of the chart: t = (2/G) arctan(e^x)."""
        if self.family is Family.SU3:
            return 2
        return 2 * self.g if self.family is Family.SO else self.g

    @property
    def M(self) -> int:
        return self.m0 + self.m1

    @property
    def ell(self) -> int:
        return self.k

    @property
    def L(self) -> float:
        return math.pi / self.G

    @property
    def target(self) -> float:
        """Limit of r at the right end."""
        if self.family is Family.SU3:
            return (2 * self.k + 1) * math.pi / 2
        return self.k * self.L

    @property
    def multiplicity_flag(self) -> bool:
        """Set when nonlinear families are not asserted to exist (m outside 2..5)."""
        if self.family is Family.SU3:
            return False
        return not (2 <= self.m0 <= 5)

    def with_k(self, k: int) -> "ProblemSpec":
        return ProblemSpec(self.family, self.g, self.m0, self.m1, k)

    def label(self) -> str:
        if self.family is Family.SU3:
            return f"su3(ell={self.k})"
        return f"{self.family.value}({self.g},{self.m0},{self.m1},k={self.k})"

    def to_dict(self) -> dict:
        return {"family": self.family.value, "g": self.g, "m0": self.m0, "m1": self.m1, "k": self.k}


def make_problem(family, g: int | None = None, m0: int | None = None, m1: int | None = None,
                 k_or_ell: int = 1) -> ProblemSpec:
    """Validated :class:`ProblemSpec`.

    Raises :class:`TangentialTensionUnknown` for (4,2,2l+1), (4,4,4l+3), (4,4,5)
    and (4,6,9), and :class:`DomainError` for anything else outside the list.
    """
    fam = Family(family)
    if int(k_or_ell) != k_or_ell:
        raise DomainError(f"boundary datum must be an integer, got {k_or_ell}")
    if fam is Family.SU3:
        return ProblemSpec(fam, 1, 1, 1, int(k_or_ell))
    if g is None or m0 is None or m1 is None:
        raise DomainError("sphere and SO problems need g, m0 and m1")
    for name, v in (("g", g), ("m0", m0), ("m1", m1)):
        if int(v) != v or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v}")
    g, m0, m1 = int(g), int(m0), int(m1)
    if not admissible(g, m0, m1):
        raise DomainError(f"({g},{m0},{m1}) is not the datum of a cohomogeneity-one action on a sphere")
    if _exceptional(g, m0, m1):
        raise TangentialTensionUnknown(
            f"({g},{m0},{m1}): the tangential part of the tension field is not known to vanish"
        )
    return ProblemSpec(fam, g, m0, m1, int(k_or_ell))


# --------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class ChartMap:
    """t = (2/G) arctan(e^x) on (0, L), L = pi/G."""

    G: float
    eigen_scale: float

    @property
    def L(self) -> float:
        return math.pi / self.G

    def t_of_x(self, x):
        return 2.0 / self.G * np.arctan(np.exp(np.clip(x, -745, 709)))

    def x_of_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t <= 0) | (t >= self.L)):
            raise SingularityError("t must lie strictly inside (0, L)")
        out = np.log(np.tan(self.G * t / 2.0))
        return float(out) if out.ndim == 0 else out

    def dt_dx(self, x):
        return sech(x) / self.G


def chart(spec: ProblemSpec) -> ChartMap:
    if spec.family is Family.SU3:
        # the lam / (4 cosh^2) term already carries (dt/dx)^2 = sech^2 / 4
        return ChartMap(G=2, eigen_scale=1.0)
    return ChartMap(G=spec.G, eigen_scale=float(spec.G**2))


def sech(x):
    ax = np.abs(x)
    e = np.exp(-ax)
    out = 2.0 * e / (1.0 + e * e)
    return float(out) if np.ndim(out) == 0 else out


def log_cosh(x):
    return np.logaddexp(x, -np.asarray(x, dtype=float)) - math.log(2.0)


# --------------------------------------------------------------------------
# harmonic map ODEs


def _check_t(spec, t):
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t >= spec.L)):
        raise SingularityError(f"t must lie strictly inside (0, {spec.L}); got {t}")


def harmonic_rhs_t(spec: ProblemSpec, t, r, rdot):
    """r-double-dot from the t-chart Euler-Lagrange equation."""
    _check_t(spec, t)
    t, r, rdot = (np.asarray(v, dtype=float) for v in (t, r, rdot))
    if spec.family is Family.SU3:
        out = -(2 * np.sin(4 * t) * rdot + 4 * np.sin(t) ** 2 * np.sin(2 * r)
                - 8 * np.cos(t) ** 3 * np.sin(r)) / np.sin(2 * t) ** 2
    else:
        G, M, d = spec.G, spec.M, spec.m0 - spec.m1
        gt = G * t
        a = 2 * (r - t)
        num = ((G * M * np.sin(2 * gt) + 2 * G * d * np.sin(gt)) * rdot
               - G * (G - 2) * np.sin(a) * (M + d * np.cos(gt))
               - 2 * G * np.sin(a + gt) * (M * np.cos(gt) + d))
        out = -num / (4 * np.sin(gt) ** 2)
    return float(out) if out.ndim == 0 else out


def _sphere_pq(G, M, d, T, phi):
    """Forcing split as sin(2r) P + cos(2r) Q.

    Q is the value at r = 0; it is written in closed form for G = 1, 2 so
    that r = 0 stays an exact rest point there.
    """
    t = phi / G
    A, B = (G - 2) * (M - d * T), 2 * (d - M * T)
    P = A * np.cos(2 * t) + B * np.cos(phi - 2 * t)
    if G == 2:
        Q = 0.0 * P
    elif G == 1:
        Q = -2 * d * np.sin(phi) ** 3
    else:
        Q = -A * np.sin(2 * t) + B * np.sin(phi - 2 * t)
    return P, Q


def harmonic_rhs_x(spec: ProblemSpec, x, r, rprime):
    """r'' in the compactified chart (see the module docstring)."""
    x, r, rp = (np.asarray(v, dtype=float) for v in (x, r, rprime))
    T = np.tanh(x)
    if spec.family is Family.SU3:
        om = 1.0 - T
        out = T * rp - 0.5 * (1 + T) * np.sin(2 * r) + om * np.sqrt(om) * np.sin(r) / math.sqrt(2.0)
    else:
        G, M, d = spec.G, spec.M, spec.m0 - spec.m1
        phi = 2 * np.arctan(np.exp(np.clip(x, -745, 709)))
        b = 0.5 * (d + (2 - M) * T)
        P, Q = _sphere_pq(G, M, d, T, phi)
        out = -b * rp + (np.sin(2 * r) * P + np.cos(2 * r) * Q) / (4 * G)
    return float(out) if out.ndim == 0 else out


def harmonic_linearisation(spec: ProblemSpec, side: int, r_limit: float, h: float = 1e-6):
    """(b, c) of u'' + b u' + c u = 0, the limit of the harmonic ODE at r = r_limit.

    ``side`` is -1 (x -> -inf) or +1.
    """
    x = 40.0 * side
    f0 = harmonic_rhs_x(spec, x, r_limit, 0.0)
    c = -(harmonic_rhs_x(spec, x, r_limit + h, 0.0) - harmonic_rhs_x(spec, x, r_limit - h, 0.0)) / (2 * h)
    b = -(harmonic_rhs_x(spec, x, r_limit, h) - f0) / h
    return b, c


def decaying_root(b: float, c: float, side: int) -> float:
    """Root of k^2 + b k + c = 0 whose mode decays towards the given side."""
    disc = b * b - 4 * c
    if disc < 0:
        raise PreconditionError("oscillatory endpoint: no real indicial root")
    s = math.sqrt(disc)
    # -inf end: larger root (e^{kx} -> 0 needs k > 0); +inf end: smaller root
    return (-b + s) / 2 if side < 0 else (-b - s) / 2


def indicial_roots(spec: ProblemSpec):
    """(kappa_left, kappa_right): decaying exponents at -inf (about 0) and +inf (about the target)."""
    kl = decaying_root(*harmonic_linearisation(spec, -1, 0.0), -1)
    kr = decaying_root(*harmonic_linearisation(spec, +1, spec.target), +1)
    return kl, kr


# --------------------------------------------------------------------------
# closed-form solutions


@dataclass(frozen=True)
class LinearSolution:
    spec: ProblemSpec
    kind: SolutionKind
    slope: float  # r(t) = slope * t

    def r_t(self, t):
        return self.slope * np.asarray(t, dtype=float)

    def rdot_t(self, t):
        return self.slope * np.ones_like(np.asarray(t, dtype=float))

    def r_x(self, x):
        return self.slope * chart(self.spec).t_of_x(x)

    def rprime_x(self, x):
        return self.slope * chart(self.spec).dt_dx(x)


def resolve_kind(spec: ProblemSpec, kind) -> SolutionKind:
    kind = SolutionKind(kind)
    if spec.family is Family.SU3 and kind is SolutionKind.IDENTITY:
        return SolutionKind.SU3_IDENTITY
    return kind


def solution_k(spec: ProblemSpec, kind) -> int:
    """Boundary datum k at which the closed-form solution ``kind`` lives."""
    kind = resolve_kind(spec, kind)
    if kind in (SolutionKind.IDENTITY, SolutionKind.SU3_IDENTITY):
        return 0 if spec.family is Family.SU3 else 1
    if kind is SolutionKind.LINEAR_ONE_MINUS_G:
        return 1 - spec.g
    if kind is SolutionKind.LINEAR_ONE_MINUS_TWO_G:
        return 1 - 2 * spec.g
    raise DomainError(f"{kind.value} has no closed form")


def linear_solution(spec: ProblemSpec, kind) -> LinearSolution:
    kind = resolve_kind(spec, kind)
    fam = spec.family
    if kind is SolutionKind.SU3_IDENTITY:
        if fam is not Family.SU3:
            raise DomainError("su3-identity belongs to the SU(3) family")
    elif kind is SolutionKind.IDENTITY:
        if fam is Family.SU3:
            raise DomainError("use su3-identity for SU(3)")
    elif kind is SolutionKind.LINEAR_ONE_MINUS_G:
        if fam is not Family.SPHERE:
            raise DomainError("r = (1-g)t is a sphere solution")
    elif kind is SolutionKind.LINEAR_ONE_MINUS_TWO_G:
        if fam is not Family.SO:
            raise DomainError("r = (1-2g)t is an SO(n+2) solution")
    else:
        raise DomainError(f"{kind.value} has no closed form")
    if kind in (SolutionKind.LINEAR_ONE_MINUS_G, SolutionKind.LINEAR_ONE_MINUS_TWO_G) and spec.m0 != spec.m1:
        raise DomainError(f"{kind.value} exists only for m0 = m1")
    k = solution_k(spec, kind)
    if spec.k != k:
        raise DomainError(f"{kind.value} solves the problem with k = {k}, not k = {spec.k}")
    slope = 1.0 if kind in (SolutionKind.IDENTITY, SolutionKind.SU3_IDENTITY) else float(1 - spec.G)
    return LinearSolution(spec, kind, slope)


# --------------------------------------------------------------------------
# Jacobi coefficients


def su3_metric_endomorphism(t: float) -> np.ndarray:
    """P_t = 4 diag(1, cos^2 t, cos^2 t, sin^2(t/2), sin^2(t/2), cos^2(t/2), cos^2(t/2))."""
    c, s2, c2 = math.cos(t) ** 2, math.sin(t / 2) ** 2, math.cos(t / 2) ** 2
    return 4.0 * np.diag([1.0, c, c, s2, s2, c2, c2])


def profile_eval(x, x0, h, prof_r, prof_dr, target, kappa_left, kappa_right):
    """Vectorised cubic Hermite evaluation of a sampled profile (same rule as the kernels)."""
    x = np.asarray(x, dtype=float)
    n = len(prof_r)
    s = (x - x0) / h
    r = np.empty_like(x)
    dr = np.empty_like(x)
    left = s <= 0
    right = s >= n - 1
    mid = ~(left | right)
    el = np.exp(kappa_left * (x[left] - x0))
    r[left] = prof_r[0] * el
    dr[left] = kappa_left * r[left]
    er = np.exp(kappa_right * (x[right] - (x0 + (n - 1) * h)))
    r[right] = target + (prof_r[-1] - target) * er
    dr[right] = kappa_right * (prof_r[-1] - target) * er
    i = np.minimum(s[mid].astype(int), n - 2)
    u = s[mid] - i
    r0, r1 = prof_r[i], prof_r[i + 1]
    d0, d1 = prof_dr[i] * h, prof_dr[i + 1] * h
    u2, u3 = u * u, u * u * u
    r[mid] = (2 * u3 - 3 * u2 + 1) * r0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * r1 + (u3 - u2) * d1
    dr[mid] = ((6 * u2 - 6 * u) * r0 + (3 * u2 - 4 * u + 1) * d0 + (-6 * u2 + 6 * u) * r1
               + (3 * u2 - 2 * u) * d1) / h
    return r, dr


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class LinearOdeCoefficients:
    """xi'' + b xi' + (c + lam w) xi = 0 in the x-chart, with its Sturm-Liouville form.

    ``(p xi')' + q xi + lam z xi = 0`` with p = exp(int_0^x b), q = c p, z = w p.
    ``model``/``params``/``prof_*`` describe the same equation to the compiled
    kernels; ``model`` is None for coefficient sets known only as callables.
    ``rays`` fixes the Pruefer boundary angles (alpha, beta); when None they come
    from the decaying indicial roots, cot(alpha) = kappa_left, cot(beta) = kappa_right.
    """

    b: Callable
    c: Callable
    w: Callable
    log_p: Callable
    chart: ChartMap | None = None
    label: str = ""
    model: int | None = None
    params: tuple = ()
    prof_r: np.ndarray = field(default_factory=lambda: np.zeros(1))
    prof_dr: np.ndarray = field(default_factory=lambda: np.zeros(1))
    rays: tuple | None = None
    domain: tuple | None = None

    def sl_p(self, x):
        return _scalar(np.exp(self.log_p(x)))

    def sl_q(self, x):
        return _scalar(self.c(x) * np.exp(self.log_p(x)))

    def sl_z(self, x):
        return _scalar(self.w(x) * np.exp(self.log_p(x)))

    def sl_p_t(self, x):
        """p of the t-chart divergence form, p_t = p_x dt/dx (up to a constant)."""
        return _scalar(np.exp(self.log_p(x)) * self.chart.dt_dx(x))

    @property
    def eigen_scale(self) -> float:
        return self.chart.eigen_scale if self.chart is not None else 1.0

    def kappa(self, side: int, x_far: float = 40.0) -> float:
        """Decaying indicial root of the constant-coefficient limit at one end."""
        x = side * x_far
        return decaying_root(float(self.b(x)), float(self.c(x)), side)

    def boundary_rays(self) -> tuple:
        if self.rays is not None:
            return self.rays
        a = math.atan2(1.0, self.kappa(-1)) % math.pi
        b = math.atan2(1.0, self.kappa(+1))
        return a, (b if b > 0 else math.pi)

    @staticmethod
    def from_callables(b, c, w, log_p=None, chart=None, label="", rays=None, domain=None):
        """Coefficients given only as callables; log p by quadrature of b from 0."""
        if log_p is None:
            def log_p(x):
                xs = np.atleast_1d(np.asarray(x, dtype=float))
                out = np.array([integrate.quad(lambda s: float(b(s)), 0.0, xi, epsabs=1e-13, epsrel=1e-12)[0]
                                for xi in xs])
                return out[0] if np.ndim(x) == 0 else out
        return LinearOdeCoefficients(b=b, c=c, w=w, log_p=log_p, chart=chart, label=label,
                                     rays=rays, domain=domain)

    @staticmethod
    def constant(b0: float, c0: float, w0: float, domain=(0.0, math.pi), rays=(0.0, math.pi)):
        """Constant coefficients on a finite interval; Dirichlet rays by default."""
        return LinearOdeCoefficients(
            b=lambda x: b0 + 0 * np.asarray(x, dtype=float),
            c=lambda x: c0 + 0 * np.asarray(x, dtype=float),
            w=lambda x: w0 + 0 * np.asarray(x, dtype=float),
            log_p=lambda x: b0 * np.asarray(x, dtype=float),
            label=f"const(b={b0},c={c0},w={w0})", model=kb.CONST, params=(b0, c0, w0),
            rays=rays, domain=domain,
        )


def _sphere_b(spec):
    M, d = spec.M, spec.m0 - spec.m1

    def b(x):
        return _scalar(0.5 * (d + (2 - M) * np.tanh(x)))

    def log_p(x):
        x = np.asarray(x, dtype=float)
        return _scalar(0.5 * d * x + 0.5 * (2 - M) * log_cosh(x))

    return b, log_p


def jacobi_coefficients(spec: ProblemSpec, kind_or_profile, max_residual: float = 1e-6
                        ) -> LinearOdeCoefficients:
    """Jacobi-equation coefficients at a closed-form solution or a sampled profile.

    A profile is any object with uniformly spaced ``x`` and arrays ``r``,
    ``rprime`` plus ``residual_norm``; it must satisfy the harmonic ODE to
    ``max_residual``.
    """
    ch = chart(spec)
    G, M, d = spec.G, spec.M, spec.m0 - spec.m1
    base = [float(G), float(spec.m0), float(spec.m1), spec.target, 0.0, 1.0, 1.0, -1.0]

    if isinstance(kind_or_profile, (str, SolutionKind)):
        kind = resolve_kind(spec, kind_or_profile)
        linear_solution(spec, kind)  # validates family, m0 = m1 and k
        if kind is SolutionKind.SU3_IDENTITY:
            def c(x):
                T = np.tanh(x)
                return _scalar(-0.5 - 1.5 * T * T)
            return _su3_coeffs(ch, c, kb.SU3_IDENTITY, base, None, None, f"{spec.label()} identity")
        b, log_p = _sphere_b(spec)
        if kind is SolutionKind.IDENTITY:
            def c(x):
                T = np.tanh(x)
                return _scalar(-0.5 * (M - d * T) + (M / G) * sech(x) ** 2)
            model = kb.SPHERE_IDENTITY
        else:
            m = spec.m0

            def c(x):
                T = np.tanh(x)
                return _scalar(-m * T * T + (m - 2.0 * m / G) * sech(x) ** 2)
            model = kb.SPHERE_LINEAR
        return LinearOdeCoefficients(b=b, c=c, w=lambda x: _scalar(sech(x) ** 2), log_p=log_p, chart=ch,
                                     label=f"{spec.label()} {kind.value}", model=model, params=tuple(base))

    prof = kind_or_profile
    if getattr(prof, "residual_norm", math.inf) > max_residual:
        raise PreconditionError(
            f"profile residual {getattr(prof, 'residual_norm', None)} exceeds {max_residual}"
        )
    x = np.asarray(prof.x, dtype=float)
    r = np.ascontiguousarray(prof.r, dtype=float)
    dr = np.ascontiguousarray(prof.rprime, dtype=float)
    h = (x[-1] - x[0]) / (len(x) - 1)
    if len(x) < 2 or np.max(np.abs(np.diff(x) - h)) > 1e-9 * max(1.0, abs(h)):
        raise PreconditionError("profile samples must be uniformly spaced")
    kl, kr = indicial_roots(spec)
    params = [float(G), float(spec.m0), float(spec.m1), spec.target, float(x[0]), h, kl, kr]

    def rx(xx):
        return profile_eval(np.atleast_1d(xx), x[0], h, r, dr, spec.target, kl, kr)[0]

    if spec.family is Family.SU3:
        def c(xx):
            T = np.tanh(xx)
            om = 1 - T
            rr = rx(xx)
            out = (1 + T) * np.cos(2 * rr) - om * np.sqrt(om) * np.cos(rr) / math.sqrt(2.0)
            return _scalar(out[0] if np.ndim(xx) == 0 else out)
        return _su3_coeffs(ch, c, kb.SU3_PROFILE, params, r, dr, f"{spec.label()} numeric")

    b, log_p = _sphere_b(spec)

    def c(xx):
        T = np.tanh(xx)
        phi = 2 * np.arctan(np.exp(np.clip(xx, -745, 709)))
        a = 2 * (rx(xx) - phi / G)
        out = -((G - 2) * np.cos(a) * (M - d * T) + 2 * np.cos(a + phi) * (d - M * T)) / (2 * G)
        return _scalar(out[0] if np.ndim(xx) == 0 else out)

    return LinearOdeCoefficients(b=b, c=c, w=lambda xx: _scalar(sech(xx) ** 2), log_p=log_p, chart=ch,
                                 label=f"{spec.label()} numeric", model=kb.SPHERE_PROFILE,
                                 params=tuple(params), prof_r=r, prof_dr=dr)


def _su3_coeffs(ch, c, model, params, r, dr, label):
    extra = {} if r is None else {"prof_r": r, "prof_dr": dr}
    return LinearOdeCoefficients(
        b=lambda x: _scalar(-np.tanh(x)), c=c, w=lambda x: _scalar(0.25 * sech(x) ** 2),
        log_p=lambda x: _scalar(-log_cosh(x)), chart=ch, label=label, model=model,
        params=tuple(params), **extra,
    )
