"""Shooting for the harmonic self-map boundary-value problems in the x-chart.

Near x = -inf the solution leaves the flat state r = 0 along its unstable
mode r ~ A exp(kappa_left x); the amplitude ``A`` is the shooting parameter.
Near x = +inf it must arrive at the target on the stable mode,
r ~ target + B exp(kappa_right x).

A trajectory is classified at x_end (or where it blows up) by the sign of its
unstable component about the target, s = sign(u' - kappa_right u) with
u = r - target.  Sign changes of s along an amplitude scan bracket solutions.
Bisection alone cannot certify a solution to 1e-8: the unstable mode grows
like exp(kappa_u x), so a forward-only trajectory departs from the target
long before x_end.  Bracketed amplitudes are therefore polished by Newton's
method on (A, B), matching a forward solution from the left seed and a
backward solution from the right seed at the midpoint.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend as kb
from .problems import (
    Family,
    ProblemSpec,
    SolutionKind,
    decaying_root,
    harmonic_linearisation,
    harmonic_rhs_x,
    linear_solution,
    make_problem,
    solution_k,
)

X_START = -12.0
X_END = 12.0
X_MATCH = 0.0
HMAX = 0.1
SAMPLE_STEP = 0.01
DEFAULT_AMPLITUDES = (1e-4, 1e4)
BLOWUP = 1.25 * math.pi
_DUMMY = np.zeros(2)


class ShootingError(RuntimeError):
    code = "shooting"


class BracketError(ShootingError):
    code = "bracket"


class ConvergenceError(ShootingError):
    code = "convergence"


@dataclass
class Trajectory:
    x: np.ndarray
    r: np.ndarray
    rprime: np.ndarray
    diverged: bool
    x_reached: float
    exit_sign: int = 0  # sign of r - target where the trajectory left, 0 if it did not


@dataclass(frozen=True)
class Seed:
    r0: float
    rprime0: float
    kappa: float


@dataclass
class SolutionProfile:
    spec: ProblemSpec
    x: np.ndarray
    r: np.ndarray
    rprime: np.ndarray
    shooting_parameter: float
    nodal_number: int
    boundary_defect: float
    residual_norm: float
    uncertainty: float = 0.0
    right_parameter: float = 0.0
    kappa_left: float = 1.0
    kappa_right: float = -1.0
    flags: list = field(default_factory=list)

    @property
    def samples(self):
        return list(zip(self.x.tolist(), self.r.tolist(), self.rprime.tolist()))

    @property
    def r_limit(self) -> float:
        """Right limit estimated along the stable mode from the last sample."""
        return float(self.r[-1] - self.rprime[-1] / self.kappa_right)

    def closed_form(self, tol: float = 1e-6) -> str | None:
        """Name of the linear solution this profile coincides with, if any."""
        for kind in (SolutionKind.IDENTITY, SolutionKind.LINEAR_ONE_MINUS_G,
                     SolutionKind.LINEAR_ONE_MINUS_TWO_G):
            try:
                sol = linear_solution(self.spec, kind)
            except ValueError:
                continue
            if np.max(np.abs(sol.r_x(self.x) - self.r)) < tol:
                return sol.kind.value
        return None

    def mirror(self) -> "SolutionProfile":
        """x -> -x image  target - r(-x); a solution again when m0 = m1."""
        r = self.spec.target - self.r[::-1]
        return SolutionProfile(
            self.spec, -self.x[::-1], r, self.rprime[::-1].copy(),
            float("nan"), nodal_number(r), self.boundary_defect, self.residual_norm, self.uncertainty,
            flags=list(self.flags) + ["mirror"],
        )

    def metadata(self) -> dict:
        return {
            "problem": self.spec.to_dict(),
            "shooting_parameter": self.shooting_parameter,
            "right_parameter": self.right_parameter,
            "nodal_number": self.nodal_number,
            "boundary_defect": self.boundary_defect,
            "residual_norm": self.residual_norm,
            "uncertainty": self.uncertainty,
            "kappa_left": self.kappa_left,
            "kappa_right": self.kappa_right,
            "r_limit": self.r_limit,
            "target": self.spec.target,
            "closed_form": self.closed_form(),
            "flags": list(self.flags),
        }

    def to_dict(self) -> dict:
        out = self.metadata()
        out["samples"] = {"x": self.x.tolist(), "r": self.r.tolist(), "rprime": self.rprime.tolist()}
        return out

    @staticmethod
    def from_dict(d: dict) -> "SolutionProfile":
        p = d["problem"]
        spec = make_problem(p["family"], p.get("g"), p.get("m0"), p.get("m1"), p["k"])
        s = d["samples"]
        return SolutionProfile(
            spec, np.array(s["x"], dtype=float), np.array(s["r"], dtype=float),
            np.array(s["rprime"], dtype=float), d["shooting_parameter"], d["nodal_number"],
            d["boundary_defect"], d["residual_norm"], d.get("uncertainty", 0.0),
            d.get("right_parameter", 0.0), d.get("kappa_left", 1.0), d.get("kappa_right", -1.0),
            list(d.get("flags", [])),
        )

    @staticmethod
    def from_json(text: str) -> "SolutionProfile":
        return SolutionProfile.from_dict(json.loads(text))


def _model(spec: ProblemSpec):
    kind = kb.SU3_IDENTITY if spec.family is Family.SU3 else kb.SPHERE_IDENTITY
    return kind, [float(spec.G), float(spec.m0), float(spec.m1), spec.target]


def endpoint_roots(spec: ProblemSpec):
    """(kappa_left, kappa_unstable_right, kappa_right) of the linearised endpoint equations."""
    kl = decaying_root(*harmonic_linearisation(spec, -1, 0.0), -1)
    b, c = harmonic_linearisation(spec, +1, spec.target)
    disc = b * b - 4 * c
    if disc <= 0:
        raise ShootingError(f"target {spec.target} is not a hyperbolic rest point at +inf")
    s = math.sqrt(disc)
    return kl, (-b + s) / 2, (-b - s) / 2


def unstable_manifold_seed(spec: ProblemSpec, x_start: float, amplitude: float, x_ref: float = 0.0) -> Seed:
    """Initial data on the unstable mode r = A exp(kappa (x - x_ref)) of the flat state.

    Negative amplitudes leave r = 0 downwards; they carry the mirror images of
    the positive branch when m0 = m1.
    """
    if x_start > -8:
        raise ValueError("seed point must satisfy x_start <= -8")
    b, c = harmonic_linearisation(spec, -1, 0.0)
    if b * b - 4 * c < 0 or (-b + math.sqrt(b * b - 4 * c)) / 2 <= 0:
        raise ShootingError("no positive indicial root at the left end")
    kappa = decaying_root(b, c, -1)
    r0 = amplitude * math.exp(kappa * (x_start - x_ref))
    return Seed(r0, kappa * r0, kappa)


def _rk_tol(tol):
    return min(1e-12, max(1e-14, tol * 1e-4))


def integrate_ivp(spec: ProblemSpec, x_start: float, r0: float, rprime0: float, x_end: float,
                  tol: float = 1e-10, samples=None, bound: float = 0.0) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration of the x-chart ODE.

    ``samples`` are the output abscissae (default: step 0.01).  With
    ``bound > 0`` integration stops once |r - target| > bound or
    |r'| > 1e3 bound; the trajectory then reports ``diverged`` and the side.
    """
    if not (1e-14 < tol < 1e-3):
        raise ValueError("tol must lie in (1e-14, 1e-3)")
    if not x_start < x_end:
        raise ValueError("need x_start < x_end")
    if samples is None:
        n = max(2, int(round((x_end - x_start) / SAMPLE_STEP)) + 1)
        samples = np.linspace(x_start, x_end, n)
    samples = np.asarray(samples, dtype=float)
    if samples[0] != x_start:
        samples = np.concatenate([[x_start], samples[samples > x_start]])
    kind, params = _model(spec)
    Y, status, _ = kb.kernels.rk_grid(kind, params, _DUMMY, _DUMMY, kb.HARMONIC, 0.0, samples,
                                      [r0, rprime0], tol, HMAX, bound)
    good = np.isfinite(Y[:, 0])
    last = int(np.nonzero(good)[0][-1])
    diverged = status == kb.DIVERGED
    exit_sign = 0
    if diverged:
        # rerun to the blow-up point for the exit side
        xr, y, _, _ = kb.kernels.rk_until(kind, params, _DUMMY, _DUMMY, kb.HARMONIC, 0.0, samples[last],
                                          x_end, Y[last], tol, HMAX, bound)
        exit_sign = int(np.sign(y[0] - spec.target))
        x_reached = float(xr)
    elif status != kb.OK:
        raise ShootingError(f"integrator failed (status {status}) near x = {samples[last]}")
    else:
        x_reached = float(samples[-1])
    return Trajectory(samples[: last + 1], Y[: last + 1, 0], Y[: last + 1, 1], diverged, x_reached, exit_sign)


# ----------------------------------------------------------------- shooting


def classify(spec: ProblemSpec, amplitude: float, x_start: float = X_START, x_end: float = X_END,
             tol: float = 1e-12) -> int:
    """Sign of the unstable component about the target at x_end or at blow-up."""
    kind, params = _model(spec)
    seed = unstable_manifold_seed(spec, x_start, amplitude)
    _, y, status, _ = kb.kernels.rk_until(kind, params, _DUMMY, _DUMMY, kb.HARMONIC, 0.0, x_start, x_end,
                                          [seed.r0, seed.rprime0], tol, HMAX, BLOWUP)
    if status == kb.UNDERFLOW:
        raise ShootingError(f"step underflow at amplitude {amplitude}")
    _, _, kd = endpoint_roots(spec)
    u = y[0] - spec.target
    return int(np.sign(y[1] - kd * u))


def _bisect(spec, lo, hi, s_lo, x_start, x_end, tol, max_iter):
    """Log-bisection to the switching amplitude; returns the last (lo, hi)."""
    sgn = 1.0 if lo > 0 else -1.0
    for _ in range(max_iter):
        mid = sgn * math.sqrt(lo * hi)
        if not min(lo, hi) < mid < max(lo, hi):
            break
        s = classify(spec, mid, x_start, x_end, tol)
        if s == 0:
            return mid, mid
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _match(spec, A, B, x_start, x_end, xm, tol, kl, kd):
    kind, params = _model(spec)
    yl0 = [A * math.exp(kl * x_start), kl * A * math.exp(kl * x_start)]
    _, yl, sl, _ = kb.kernels.rk_until(kind, params, _DUMMY, _DUMMY, kb.HARMONIC, 0.0, x_start, xm, yl0, tol, HMAX)
    e = math.exp(kd * x_end)
    _, yr, sr, _ = kb.kernels.rk_until(kind, params, _DUMMY, _DUMMY, kb.HARMONIC_DEV, 0.0, x_end, xm,
                                       [B * e, kd * B * e], tol, HMAX)
    if sl != kb.OK or sr != kb.OK:
        return np.array([np.inf, np.inf])
    return np.asarray(yl) - np.asarray(yr) - np.array([spec.target, 0.0])


def _initial_B(spec, A, x_start, x_end, xm, tol, kl, ku, kd):
    seed = unstable_manifold_seed(spec, x_start, A)
    grid = np.linspace(xm, x_end, int(round((x_end - xm) / 0.05)) + 1)
    tr = integrate_ivp(spec, x_start, seed.r0, seed.rprime0, x_end, max(tol, 1e-13),
                       samples=np.concatenate([[x_start], grid]), bound=BLOWUP)
    sel = tr.x >= xm
    x, u, up = tr.x[sel], tr.r[sel] - spec.target, tr.rprime[sel]
    if len(x) == 0:
        return 0.0
    i = int(np.argmin(np.abs(u) + np.abs(up)))
    return float((up[i] - ku * u[i]) / (kd - ku) * math.exp(-kd * x[i]))


def polish(spec: ProblemSpec, A0: float, x_start: float = X_START, x_end: float = X_END,
           xm: float = X_MATCH, tol: float = 1e-12, B0: float | None = None, max_iter: int = 40):
    """Newton on (A, B) for the two-sided matching problem; returns (A, B, mismatch)."""
    kl, ku, kd = endpoint_roots(spec)
    B = _initial_B(spec, A0, x_start, x_end, xm, tol, kl, ku, kd) if B0 is None else B0
    A = A0
    F = _match(spec, A, B, x_start, x_end, xm, tol, kl, kd)
    norm = float(np.max(np.abs(F)))
    for _ in range(max_iter):
        if norm < 1e-13:
            break
        dA = 1e-7 * max(abs(A), 1e-8)
        dB = 1e-7 * max(abs(B), 1e-3)
        J = np.column_stack([
            (_match(spec, A + dA, B, x_start, x_end, xm, tol, kl, kd) - F) / dA,
            (_match(spec, A, B + dB, x_start, x_end, xm, tol, kl, kd) - F) / dB,
        ])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        t = 1.0
        while t > 1e-4:
            A1, B1 = A + t * step[0], B + t * step[1]
            if A1 * A0 > 0:
                F1 = _match(spec, A1, B1, x_start, x_end, xm, tol, kl, kd)
                n1 = float(np.max(np.abs(F1)))
                if n1 < norm:
                    A, B, F, norm = A1, B1, F1, n1
                    break
            t /= 2
        else:
            break
    return A, B, norm


def residual_norm(spec: ProblemSpec, x, r, rprime, margin: int = 3) -> float:
    """sup |r''_sampled - rhs| with r'' from a sixth-order central difference of r'."""
    x = np.asarray(x)
    h = x[1] - x[0]
    d = rprime
    c = (-d[:-6] + 9 * d[1:-5] - 45 * d[2:-4] + 45 * d[4:-2] - 9 * d[5:-1] + d[6:]) / (60 * h)
    rhs = harmonic_rhs_x(spec, x[3:-3], r[3:-3], rprime[3:-3])
    diff = np.abs(c - rhs)
    if margin > 3:
        diff = diff[margin - 3: len(diff) - (margin - 3)]
    return float(np.max(diff))


def nodal_number(r) -> int:
    """Strict sign changes of r - pi/2."""
    v = np.asarray(r) - math.pi / 2
    v = v[v != 0]
    return int(np.count_nonzero(np.sign(v[:-1]) != np.sign(v[1:])))


def build_profile(spec: ProblemSpec, A: float, B: float, x_start: float = X_START, x_end: float = X_END,
                  xm: float = X_MATCH, tol: float = 1e-12, step: float = SAMPLE_STEP,
                  mismatch: float = 0.0) -> SolutionProfile:
    kind, params = _model(spec)
    kl, _, kd = endpoint_roots(spec)
    nl = int(round((xm - x_start) / step))
    nr = int(round((x_end - xm) / step))
    xl = np.linspace(x_start, xm, nl + 1)
    xr = np.linspace(x_end, xm, nr + 1)
    Yl, sl, _ = kb.kernels.rk_grid(kind, params, _DUMMY, _DUMMY, kb.HARMONIC, 0.0, xl,
                                   [A * math.exp(kl * x_start), kl * A * math.exp(kl * x_start)], tol, HMAX)
    e = math.exp(kd * x_end)
    Yr, sr, _ = kb.kernels.rk_grid(kind, params, _DUMMY, _DUMMY, kb.HARMONIC_DEV, 0.0, xr,
                                   [B * e, kd * B * e], tol, HMAX)
    if sl != kb.OK or sr != kb.OK:
        raise ShootingError("profile integration failed")
    Yr[:, 0] += spec.target
    x = np.concatenate([xl, xr[::-1][1:]])
    Y = np.concatenate([Yl, Yr[::-1][1:]])
    r, rp = Y[:, 0], Y[:, 1]
    limit = r[-1] - rp[-1] / kd
    defect = abs(limit - spec.target) + mismatch
    flags = ["low-multiplicity"] if spec.multiplicity_flag else []
    return SolutionProfile(spec, x, r, rp, A, nodal_number(r), float(defect),
                           residual_norm(spec, x, r, rp), 0.0, B, kl, kd, flags)


def _certify(spec, A_lo, A_hi, x_start, x_end, tol):
    A0 = math.copysign(math.sqrt(A_lo * A_hi), A_lo)
    rk = _rk_tol(tol)
    A, B, mis = polish(spec, A0, x_start, x_end, tol=rk)
    prof = build_profile(spec, A, B, x_start, x_end, tol=rk, mismatch=mis)
    # coarser integration for the parameter uncertainty
    A2, _, _ = polish(spec, A, x_start, x_end, tol=min(1e-6, rk * 10), B0=B)
    prof.uncertainty = float(abs(A2 - A))
    return prof


def shoot(spec: ProblemSpec, bracket, target_k: int | None = None, tol: float = 1e-8,
          x_start: float = X_START, x_end: float = X_END, max_iter: int = 200) -> SolutionProfile:
    """Certified solution between two amplitudes of opposite classification.

    Log-bisection on the amplitude, then two-sided Newton until the
    matching and right-limit defect is below ``tol``.
    """
    if target_k is not None:
        spec = spec.with_k(target_k)
    lo, hi = (float(a) for a in bracket)
    if lo * hi <= 0:
        raise ValueError("bracket amplitudes must be nonzero and of one sign")
    if abs(lo) > abs(hi):
        lo, hi = hi, lo
    s_lo = classify(spec, lo, x_start, x_end)
    s_hi = classify(spec, hi, x_start, x_end)
    if s_lo == 0:
        lo = hi = lo
    elif s_hi == 0:
        lo = hi = hi
    elif s_lo == s_hi:
        raise BracketError(f"amplitudes {lo:g} and {hi:g} exit on the same side of the target")
    else:
        lo, hi = _bisect(spec, lo, hi, s_lo, x_start, x_end, 1e-12, max_iter)
    prof = _certify(spec, lo, hi, x_start, x_end, tol)
    if not (prof.boundary_defect < tol and abs(prof.r_limit - spec.target) < tol):
        raise ConvergenceError(
            f"no certified solution near amplitude {prof.shooting_parameter:g} "
            f"(defect {prof.boundary_defect:.2e})"
        )
    return prof


def _same(p, q, tol=1e-6):
    if p.closed_form() is not None and p.closed_form() == q.closed_form():
        return True
    return len(p.x) == len(q.x) and float(np.max(np.abs(p.r - q.r))) < tol


def find_family(spec: ProblemSpec, amplitude_range=DEFAULT_AMPLITUDES, grid: int = 64, tol: float = 1e-8,
                x_start: float = X_START, x_end: float = X_END, workers: int = 1,
                diagnostics: list | None = None, both_signs: bool = True) -> list:
    """All solutions hitting the target found by a log-spaced amplitude scan.

    ``amplitude_range`` bounds |A|; with ``both_signs`` the mirrored branch
    A < 0 is scanned too.  Candidates whose profiles agree to 1e-6, or
    which match the same closed-form solution, are merged (smaller boundary
    defect wins); every certified candidate is appended to ``diagnostics``
    if given.  Results do not depend on ``workers``.
    """
    if grid < 16:
        raise ValueError("grid must be at least 16")
    a, b = (float(v) for v in amplitude_range)
    if not (0 < a < b):
        return []
    mags = np.geomspace(a, b, grid)
    branches = [mags, -mags] if both_signs else [mags]
    amps = np.concatenate(branches)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            signs = list(ex.map(lambda A: classify(spec, A, x_start, x_end), amps))
    else:
        signs = [classify(spec, A, x_start, x_end) for A in amps]

    brackets = []
    for k in range(len(branches)):
        off = k * grid
        for i in range(off, off + grid - 1):
            if signs[i] == 0:
                brackets.append((amps[i], amps[i]))
            elif signs[i + 1] != 0 and signs[i] != signs[i + 1]:
                brackets.append((amps[i], amps[i + 1]))

    def refine(br):
        try:
            return shoot(spec, br, tol=tol, x_start=x_start, x_end=x_end)
        except (ShootingError, ValueError):
            return None

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            found = list(ex.map(refine, brackets))
    else:
        found = [refine(br) for br in brackets]
    cands = [p for p in found if p is not None and p.residual_norm < 10 * tol]
    cands.sort(key=lambda p: (p.nodal_number, p.shooting_parameter))
    if diagnostics is not None:
        diagnostics.extend(cands)
    best = []
    for p in cands:
        for i, q in enumerate(best):
            if _same(p, q):
                if p.boundary_defect < q.boundary_defect:
                    best[i] = p
                break
        else:
            best.append(p)
    return sorted(best, key=lambda p: (p.nodal_number, p.shooting_parameter))


def mirror_partner(profile: SolutionProfile, family, tol: float = 1e-6):
    """Member of ``family`` equal to the mirror image of ``profile``, or None."""
    m = profile.mirror()
    for q in family:
        if len(q.x) == len(m.x) and np.allclose(q.x, m.x) and np.max(np.abs(q.r - m.r)) < tol:
            return q
    return None


def closed_form_profile(spec: ProblemSpec, kind, step: float = SAMPLE_STEP,
                        x_start: float = X_START, x_end: float = X_END) -> SolutionProfile:
    """Sampled closed-form solution packaged as a profile (exact samples)."""
    spec = spec.with_k(solution_k(spec, kind))
    sol = linear_solution(spec, kind)
    n = int(round((x_end - x_start) / step))
    x = np.linspace(x_start, x_end, n + 1)
    r, rp = sol.r_x(x), sol.rprime_x(x)
    kl, _, kd = endpoint_roots(spec)
    return SolutionProfile(spec, x, r, rp, float(sol.slope * 2 / spec.G), nodal_number(r),
                           float(abs(r[-1] - rp[-1] / kd - spec.target)),
                           residual_norm(spec, x, r, rp), 0.0, 0.0, kl, kd)
