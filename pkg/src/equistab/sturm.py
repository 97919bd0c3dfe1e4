"""Singular Sturm-Liouville eigenvalues by the Pruefer method.

For ``xi'' + b xi' + (c + lam w) xi = 0`` write xi = rho sin(theta),
xi' = rho cos(theta); then

    theta' = cos^2(theta) + b sin(theta) cos(theta) + (c + lam w) sin^2(theta).

The infinite x-chart is truncated to [-X, X].  At each end the boundary ray
is cot(theta) = kappa, where kappa is the decaying root of the frozen
equation k^2 + b k + (c + lam w) = 0 at that end.  The left angle starts in
[0, pi), the right angle in (0, pi]; both are carried to the midpoint and

    D(lam) = theta_L(x_m) - theta_R(x_m)

is continuous and increasing in lam.  The j-th eigenvalue (j >= 1) is the root
of D = (j - 1) pi and the number of eigenvalues below lam is ceil(D / pi).
Indices start at 1; index j here is index j - 1 of the usual lam_0 < lam_1 < ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import _backend as kb
from . import _pykernels
from .problems import LinearOdeCoefficients, decaying_root

X_DEFAULT = 12.0
X_LIMIT = 24.0
RK_TOL = 1e-11
HMAX = 0.1
SAMPLE_STEP = 0.01


class SturmError(RuntimeError):
    code = "sturm"


class NotFoundError(SturmError):
    code = "eigenvalue-not-found"


class NotEigenvalueError(SturmError):
    code = "lambda-not-eigenvalue"


@dataclass
class EigenPair:
    j: int
    lambda_x: float
    lambda_t: float
    x: np.ndarray
    xi: np.ndarray
    zero_count: int
    uncertainty: float = 0.0

    def zeros(self) -> np.ndarray:
        return sign_change_points(self.x, self.xi)


@dataclass
class SpectrumReport:
    label: str
    pairs: list
    weyl_slope: float | None
    weyl_target: float | None
    eigen_scale: float = 1.0
    x_max: float = X_DEFAULT
    problem: dict | None = None
    solution: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lambda_x for p in self.pairs])

    def rows(self):
        """(j, lambda_x, lambda_t, zero_count, uncertainty) per pair."""
        return [(p.j, p.lambda_x, p.lambda_t, p.zero_count, p.uncertainty) for p in self.pairs]

    def to_dict(self, with_eigenfunctions: bool = False) -> dict:
        out = {
            "label": self.label,
            "problem": self.problem,
            "solution": self.solution,
            "eigen_scale": self.eigen_scale,
            "x_max": self.x_max,
            "weyl_slope": self.weyl_slope,
            "weyl_target": self.weyl_target,
            "pairs": [
                {"j": p.j, "lambda_x": p.lambda_x, "lambda_t": p.lambda_t,
                 "zero_count": p.zero_count, "uncertainty": p.uncertainty}
                for p in self.pairs
            ],
        }
        if with_eigenfunctions and self.pairs:
            out["x"] = self.pairs[0].x.tolist()
            for d, p in zip(out["pairs"], self.pairs):
                d["xi"] = p.xi.tolist()
        out.update(self.meta)
        return out


# ---------------------------------------------------------------- helpers


def sign_change_points(x, y) -> np.ndarray:
    """Linearly interpolated locations of strict sign changes of sampled ``y``."""
    x = np.asarray(x)
    y = np.asarray(y)
    keep = y != 0
    xs, ys = x[keep], y[keep]
    idx = np.nonzero(np.sign(ys[:-1]) != np.sign(ys[1:]))[0]
    return xs[idx] - ys[idx] * (xs[idx + 1] - xs[idx]) / (ys[idx + 1] - ys[idx])


def count_sign_changes(y) -> int:
    y = np.asarray(y)
    y = y[y != 0]
    return int(np.count_nonzero(np.sign(y[:-1]) != np.sign(y[1:])))


def interlaced(zeros_a, zeros_b) -> bool:
    """Exactly one point of ``zeros_b`` between consecutive points of ``zeros_a``."""
    zb = np.asarray(zeros_b)
    for lo, hi in zip(zeros_a[:-1], zeros_a[1:]):
        if np.count_nonzero((zb > lo) & (zb < hi)) != 1:
            return False
    return True


def _domain(coeffs: LinearOdeCoefficients, X):
    if coeffs.domain is not None:
        return float(coeffs.domain[0]), float(coeffs.domain[1])
    X = X_DEFAULT if X is None else float(X)
    return -X, X


def _rays(coeffs, lam, a, b):
    if coeffs.rays is not None:
        return coeffs.rays
    kl = decaying_root(float(coeffs.b(a)), float(coeffs.c(a) + lam * coeffs.w(a)), -1)
    kr = decaying_root(float(coeffs.b(b)), float(coeffs.c(b) + lam * coeffs.w(b)), +1)
    alpha = math.atan2(1.0, kl) % math.pi
    beta = math.atan2(1.0, kr)
    return alpha, (beta if beta > 0 else math.pi)


def _pruefer_callable(coeffs, lam, a, b, xm, alpha, beta, tol, hmax):
    def f(x, y):
        bb, cc, ww = float(coeffs.b(x)), float(coeffs.c(x)), float(coeffs.w(x))
        s, co = math.sin(y[0]), math.cos(y[0])
        return (co * co + bb * s * co + (cc + lam * ww) * s * s,)

    _, yl, sl, _ = _pykernels.rk_until_callable(f, a, xm, [alpha], tol, hmax)
    _, yr, sr, _ = _pykernels.rk_until_callable(f, b, xm, [beta], tol, hmax)
    return float(yl[0]), float(yr[0]), sl if sl != kb.OK else sr


def pruefer_mismatch(coeffs: LinearOdeCoefficients, lam: float, X: float | None = None,
                     tol: float = RK_TOL, hmax: float = HMAX) -> float:
    """D(lam) = theta_L - theta_R at the midpoint."""
    a, b = _domain(coeffs, X)
    xm = 0.5 * (a + b)
    alpha, beta = _rays(coeffs, lam, a, b)
    if coeffs.model is None:
        tl, tr, status = _pruefer_callable(coeffs, lam, a, b, xm, alpha, beta, tol, hmax)
    else:
        tl, tr, status = kb.kernels.pruefer_match(coeffs.model, list(coeffs.params), coeffs.prof_r,
                                                  coeffs.prof_dr, float(lam), a, b, xm, alpha, beta, tol, hmax)
    if status != kb.OK or not math.isfinite(tl - tr):
        raise SturmError(f"Pruefer integration failed at lambda = {lam} (status {status})")
    return tl - tr


def pruefer_count(coeffs: LinearOdeCoefficients, lam: float, domain=None, X: float | None = None,
                  tol: float = RK_TOL) -> int:
    """Number of eigenvalues strictly below ``lam``.

    ``domain`` (x_lo, x_hi) overrides the symmetric truncation [-X, X].
    """
    if domain is not None:
        lo, hi = domain
        if not lo < hi:
            raise ValueError("domain needs x_lo < x_hi")
        coeffs = _with_domain(coeffs, (lo, hi))
    D = pruefer_mismatch(coeffs, lam, X, tol)
    return max(0, math.ceil(D / math.pi - 1e-12))


def _with_domain(coeffs, dom):
    from dataclasses import replace

    return replace(coeffs, domain=(float(dom[0]), float(dom[1])))


def weyl_constant(coeffs: LinearOdeCoefficients, X: float | None = None) -> float:
    """pi^2 / (int sqrt(w) dx)^2, the x-normalised Weyl slope."""
    if coeffs.domain is not None:
        a, b = coeffs.domain
    else:
        a, b = -60.0, 60.0
    length = integrate.quad(lambda s: math.sqrt(max(float(coeffs.w(s)), 0.0)), a, b, limit=400)[0]
    return math.pi**2 / length**2


def _bracket(F, guess, step, max_expand=60):
    lo = hi = guess
    flo = fhi = F(guess)
    n = 0
    while flo >= 0:
        n += 1
        if n > max_expand:
            raise NotFoundError("bracket expansion cap reached below the estimate")
        hi, fhi = lo, flo
        lo -= step
        step *= 2
        flo = F(lo)
    while fhi <= 0:
        n += 1
        if n > max_expand:
            raise NotFoundError("bracket expansion cap reached above the estimate")
        lo, flo = hi, fhi
        hi += step
        step *= 2
        fhi = F(hi)
    return lo, hi


def _solve_j(coeffs, j, tol, X, guess, step, rk_tol=RK_TOL):
    target = (j - 1) * math.pi

    def F(lam):
        return pruefer_mismatch(coeffs, lam, X, rk_tol) - target

    lo, hi = _bracket(F, guess, step)
    return optimize.brentq(F, lo, hi, xtol=tol / 4, rtol=4 * np.finfo(float).eps, maxiter=200)


def eigenvalue(coeffs: LinearOdeCoefficients, j: int, tol: float = 1e-9, X: float | None = None,
               guess: float | None = None, with_uncertainty: bool = False):
    """j-th eigenvalue (j >= 1) in the x-normalisation.

    Root of D(lam) = (j-1) pi by Brent's method inside a bracket grown
    geometrically from the Weyl estimate.  On the infinite chart the value is
    recomputed at X + 2 with a ten times tighter integration tolerance, so the
    difference covers truncation and integration error; X grows by 2 (up to
    24) until the two agree to ``tol``.
    With ``with_uncertainty`` returns ``(lam, uncertainty, X_used)``.
    """
    if int(j) != j or j < 1:
        raise ValueError("index j starts at 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if guess is None:
        guess = weyl_constant(coeffs) * j * j
    step = max(1.0, 0.25 * abs(guess))
    lam = _solve_j(coeffs, j, tol, X, guess, step)
    if coeffs.domain is not None:
        return (lam, tol / 4, None) if with_uncertainty else lam
    X = X_DEFAULT if X is None else float(X)
    while True:
        lam2 = _solve_j(coeffs, j, tol, X + 2, lam, max(tol, 1e-6), RK_TOL / 10)
        unc = abs(lam2 - lam)
        if unc < tol or X + 2 >= X_LIMIT:
            break
        X, lam = X + 2, lam2
    return (lam, unc, X) if with_uncertainty else lam


def eigenfunction(coeffs: LinearOdeCoefficients, lam: float, X: float | None = None,
                  step: float = SAMPLE_STEP, threshold: float = 1e-6):
    """(x, xi, zero_count) for an eigenvalue ``lam``.

    Integrated from both ends along the decaying rays, scaled to agree at the
    midpoint in least squares, and normalised to max |xi| = 1 with xi > 0 near
    the left end.  Raises NotEigenvalueError if the normalised Wronskian at the
    midpoint exceeds ``threshold``.
    """
    a, b = _domain(coeffs, X)
    xm = 0.5 * (a + b)
    n_half = max(2, int(round((xm - a) / step)))
    xl = np.linspace(a, xm, n_half + 1)
    xr = np.linspace(b, xm, n_half + 1)
    alpha, beta = _rays(coeffs, lam, a, b)
    yl = _linear_on_grid(coeffs, lam, xl, (math.sin(alpha), math.cos(alpha)))
    yr = _linear_on_grid(coeffs, lam, xr, (math.sin(beta), math.cos(beta)))
    vl, vr = yl[-1], yr[-1]
    wr = (vl[0] * vr[1] - vl[1] * vr[0]) / (np.linalg.norm(vl) * np.linalg.norm(vr))
    if not abs(wr) <= threshold:
        raise NotEigenvalueError(f"normalised Wronskian {wr:.3e} at lambda = {lam}")
    s = float(vl @ vr) / float(vr @ vr)
    x = np.concatenate([xl, xr[::-1][1:]])
    xi = np.concatenate([yl[:, 0], s * yr[::-1][1:, 0]])
    xi = xi / np.max(np.abs(xi))
    if xi[np.nonzero(np.abs(xi) > 1e-300)[0][0]] < 0:
        xi = -xi
    return x, xi, count_sign_changes(xi)


def _linear_on_grid(coeffs, lam, grid, y0):
    if coeffs.model is None:
        def f(x, y):
            bb, cc, ww = float(coeffs.b(x)), float(coeffs.c(x)), float(coeffs.w(x))
            return (y[1], -bb * y[1] - (cc + lam * ww) * y[0])

        Y = np.empty((len(grid), 2))
        Y[0] = y0
        y = list(y0)
        for i in range(1, len(grid)):
            _, yy, status, _ = _pykernels.rk_until_callable(f, grid[i - 1], grid[i], y, RK_TOL, HMAX)
            y = list(yy)
            Y[i] = y
    else:
        Y, status, _ = kb.kernels.rk_grid(coeffs.model, list(coeffs.params), coeffs.prof_r, coeffs.prof_dr,
                                          kb.LINEAR, float(lam), grid, list(y0), RK_TOL, HMAX)
    if status != kb.OK:
        raise SturmError(f"eigenfunction integration failed at lambda = {lam}")
    return Y


def weyl_fit(j, lam_t):
    """Leading coefficient of a least-squares fit of lam_t against (j^2, j, 1).

    Uses the upper half of the index range; the j term absorbs the O(j)
    remainder.  None for fewer than two points.
    """
    j = np.asarray(j, dtype=float)
    lam_t = np.asarray(lam_t, dtype=float)
    if len(j) < 2:
        return None
    start = (len(j) - 1) // 2
    jj, ll = j[start:], lam_t[start:]
    cols = [jj**2, jj, np.ones_like(jj)][: min(3, len(jj))]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), ll, rcond=None)
    return float(coef[0])


def spectrum(coeffs: LinearOdeCoefficients, j_max: int, tol: float = 1e-9, X: float | None = None,
             problem: dict | None = None, solution: str | None = None,
             eigenfunctions: bool = True) -> SpectrumReport:
    """Eigenpairs j = 1..j_max with zero counts and the fitted Weyl slope."""
    if int(j_max) != j_max or j_max < 1:
        raise ValueError("j_max must be a positive integer")
    scale = coeffs.eigen_scale
    pairs = []
    prev = []
    for j in range(1, j_max + 1):
        guess = None
        if len(prev) >= 2:
            guess = prev[-1] + (prev[-1] - prev[-2]) * 1.05
        elif len(prev) == 1:
            guess = prev[-1] + 3 * weyl_constant(coeffs)
        lam, unc, X_used = eigenvalue(coeffs, j, tol, X, guess=guess, with_uncertainty=True)
        prev.append(lam)
        if eigenfunctions:
            x, xi, zc = eigenfunction(coeffs, lam, X_used if X_used is not None else X,
                                      threshold=max(1e-6, 1e3 * tol))
        else:
            x, xi, zc = np.empty(0), np.empty(0), -1
        pairs.append(EigenPair(j, lam, scale * lam, x, xi, zc, unc))
    slope = weyl_fit([p.j for p in pairs], [p.lambda_t for p in pairs])
    return SpectrumReport(
        label=coeffs.label, pairs=pairs, weyl_slope=slope,
        weyl_target=scale * weyl_constant(coeffs), eigen_scale=scale,
        x_max=X if X is not None else X_DEFAULT, problem=problem, solution=solution,
    )
