"""Closed-form Jacobi spectra, verification against the numeric solver, stability verdicts.

Every covered operator has eigenfunctions of the form

    xi_j(x) = cosh(x)^p * Q_{j-1}(s tanh x),    lambda_j = j^2 + a j + c0

with Q a Jacobi or Gegenbauer polynomial.  The covered pairs are

    sphere identity         p = -1, Q = P^((m1+1)/2, (m0+1)/2), lambda = -M/g + j(j + M/2)
    sphere r = (1-g)t       p = -1, Q = C^((m+2)/2),            lambda = j(j+m) + 2m/g - 2m
    SO identity             p = -1, Q = P^((m1+1)/2, (m0+1)/2), lambda = -M/(2g) + j(j + M/2)
    SO r = (1-2g)t          p = -1, Q = C^((m+2)/2),            lambda = j(j+m) + m/g - 2m
    SU(3) identity          p = 2,  Q = C^(9/2), s = 1/2,       lambda = j(j+7) - 14

The SU(3) entry is kept as stated for comparison.  Only its j = 1 member
solves the equation, and cosh^2 is not square integrable, so it is not an
eigenpair of the bounded problem.  :func:`su3_identity_bounded_spectrum`
gives the actual spectrum, lambda_j = 4j^2 + 8j - 6 with
xi_j = sech(x) C^(2)_{j-1}(tanh x).
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import sturm
from .orthopoly import Gegenbauer, Jacobi, derivatives
from .problems import (
    DomainError,
    Family,
    PreconditionError,
    ProblemSpec,
    SolutionKind,
    admissible,
    jacobi_coefficients,
    make_problem,
    resolve_kind,
    solution_k,
)

STABILITY_TOL = 1e-9
COMPARE_WINDOW = 8.0
EIG_TOL = 1e-5

STABLE = "stable"
WEAKLY_STABLE = "weakly_stable"
UNSTABLE = "unstable"


class NoClosedFormError(DomainError):
    code = "no-closed-form"


@dataclass(frozen=True)
class AnalyticSpectrum:
    """lambda_j = j^2 + a j + c0, xi_j(x) = cosh(x)^power * poly_{j-1}(arg_scale * tanh x)."""

    problem: ProblemSpec
    kind: SolutionKind
    a: float
    c0: float
    poly: object
    power: int = -1
    arg_scale: float = 1.0
    validity: str = ""

    def lambda_formula(self, j: int) -> float:
        if int(j) != j or j < 1:
            raise ValueError("index j starts at 1")
        return j * j + self.a * j + self.c0

    def lambdas(self, j_max: int) -> np.ndarray:
        return np.array([self.lambda_formula(j) for j in range(1, j_max + 1)])

    def eigenfunction_formula(self, j: int, x):
        return self.eigenfunction_derivatives(j, x)[0]

    def eigenfunction_derivatives(self, j: int, x):
        """(xi, xi', xi'') by the chain rule and the polynomial derivative identities."""
        if int(j) != j or j < 1:
            raise ValueError("index j starts at 1")
        x = np.asarray(x, dtype=float)
        T = np.tanh(x)
        S2 = 1.0 / np.cosh(x) ** 2
        s = self.arg_scale
        f, df, d2f = derivatives(self.poly, j - 1, s * T)
        u1 = s * S2
        u2 = -2.0 * s * S2 * T
        p = self.power
        C = np.cosh(x)
        P = C**p
        P1 = p * C**p * T
        P2 = p * C**p * (p * T * T + S2)
        xi = P * f
        xi1 = P1 * f + P * df * u1
        xi2 = P2 * f + 2 * P1 * df * u1 + P * (d2f * u1 * u1 + df * u2)
        if np.ndim(xi) == 0:
            return float(xi), float(xi1), float(xi2)
        return xi, xi1, xi2

    @property
    def label(self) -> str:
        return f"{self.problem.label()} {self.kind.value}"

    def to_dict(self, j_max: int = 10) -> dict:
        return {
            "label": self.label,
            "problem": self.problem.to_dict(),
            "solution": self.kind.value,
            "validity": self.validity,
            "lambdas": self.lambdas(j_max).tolist(),
        }


def analytic_spectrum(spec: ProblemSpec, kind) -> AnalyticSpectrum:
    """Closed-form spectrum for one of the five covered (family, solution) pairs."""
    try:
        kind = resolve_kind(spec, kind)
        spec = spec.with_k(solution_k(spec, kind))
    except (DomainError, ValueError) as exc:
        raise NoClosedFormError(f"no closed-form spectrum for {spec.label()} {kind}") from exc
    fam, g, M = spec.family, spec.g, spec.M
    jac = None if fam is Family.SU3 else Jacobi((spec.m1 + 1) / 2, (spec.m0 + 1) / 2)
    if fam is Family.SPHERE and kind is SolutionKind.IDENTITY:
        return AnalyticSpectrum(spec, kind, M / 2, -M / g, jac,
                                validity="sphere identity: sech(x) P_{j-1}^((m1+1)/2,(m0+1)/2)(tanh x)")
    if fam is Family.SO and kind is SolutionKind.IDENTITY:
        return AnalyticSpectrum(spec, kind, M / 2, -M / (2 * g), jac,
                                validity="SO identity: sech(x) P_{j-1}^((m1+1)/2,(m0+1)/2)(tanh x)")
    if fam is Family.SU3 and kind is SolutionKind.SU3_IDENTITY:
        return AnalyticSpectrum(spec, kind, 7.0, -14.0, Gegenbauer(4.5), power=2, arg_scale=0.5,
                                validity="SU(3) identity: cosh^2(x) C_{j-1}^(9/2)(tanh(x)/2)")
    m = spec.m0
    if spec.m0 == spec.m1:
        if fam is Family.SPHERE and kind is SolutionKind.LINEAR_ONE_MINUS_G:
            return AnalyticSpectrum(spec, kind, m, 2 * m / g - 2 * m, Gegenbauer((m + 2) / 2),
                                    validity="sphere r = (1-g)t: sech(x) C_{j-1}^((m+2)/2)(tanh x)")
        if fam is Family.SO and kind is SolutionKind.LINEAR_ONE_MINUS_TWO_G:
            return AnalyticSpectrum(spec, kind, m, m / g - 2 * m, Gegenbauer((m + 2) / 2),
                                    validity="SO r = (1-2g)t: sech(x) C_{j-1}^((m+2)/2)(tanh x)")
    raise NoClosedFormError(f"no closed-form spectrum for {spec.label()} {kind.value}")


def su3_identity_bounded_spectrum() -> AnalyticSpectrum:
    """Square-integrable spectrum of the SU(3) identity operator: 4j^2 + 8j - 6."""
    spec = make_problem("su3", k_or_ell=0)
    return _Scaled(spec, SolutionKind.SU3_IDENTITY, 2.0, -1.5, Gegenbauer(2.0), power=-1, arg_scale=1.0,
                   validity="SU(3) identity, decaying branch: sech(x) C_{j-1}^(2)(tanh x)")


@dataclass(frozen=True)
class _Scaled(AnalyticSpectrum):
    """Same form with lambda multiplied by 4 (weight sech^2/4)."""

    def lambda_formula(self, j: int) -> float:
        return 4.0 * super().lambda_formula(j)


def analytic_residual(spec: ProblemSpec, kind, j: int, x) -> float:
    """xi'' + b xi' + (c + lambda w) xi for the closed-form j-th pair (target 0)."""
    an = analytic_spectrum(spec, kind)
    co = jacobi_coefficients(an.problem, an.kind)
    xi, d1, d2 = an.eigenfunction_derivatives(j, x)
    lam = an.lambda_formula(j)
    return d2 + co.b(x) * d1 + (co.c(x) + lam * co.w(x)) * xi


# -------------------------------------------------------------- verification


@dataclass
class VerifyEntry:
    j: int
    lambda_numeric: float
    lambda_analytic: float
    abs_diff: float
    rel_diff: float
    eig_sup_diff: float | None
    passed: bool


@dataclass
class VerificationReport:
    label: str
    tol: float
    eig_tol: float
    entries: list

    @property
    def passed(self) -> bool:
        return bool(self.entries) and all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "tol": self.tol,
            "eig_tol": self.eig_tol,
            "passed": self.passed,
            "entries": [vars(e).copy() for e in self.entries],
        }


def _window_normalised(x, y, window):
    keep = np.abs(x) <= window
    y = y[keep]
    return y / np.max(np.abs(y))


def verify_spectrum(numeric: sturm.SpectrumReport, analytic: AnalyticSpectrum, tol: float = 1e-6,
                    eig_tol: float = EIG_TOL, window: float = COMPARE_WINDOW) -> VerificationReport:
    """Per-j eigenvalue and eigenfunction comparison of a numeric report with a closed form.

    Eigenfunctions are compared in sup norm on |x| <= ``window`` after both
    are scaled to unit maximum there and aligned in sign.
    """
    if numeric.problem != analytic.problem.to_dict() or numeric.solution != analytic.kind.value:
        raise PreconditionError(
            f"report {numeric.label!r} does not belong to {analytic.label!r}"
        )
    entries = []
    for p in numeric.pairs:
        la = analytic.lambda_formula(p.j)
        d = abs(p.lambda_x - la)
        rel = d / max(abs(la), 1e-300)
        sup = None
        if len(p.x):
            xn = _window_normalised(p.x, p.xi, window)
            xa = _window_normalised(p.x, np.asarray(analytic.eigenfunction_formula(p.j, p.x)), window)
            if float(xn @ xa) < 0:
                xa = -xa
            sup = float(np.max(np.abs(xn - xa)))
        ok = d < tol and (sup is None or sup < eig_tol)
        entries.append(VerifyEntry(p.j, float(p.lambda_x), float(la), float(d), float(rel), sup, bool(ok)))
    return VerificationReport(analytic.label, tol, eig_tol, entries)


# --------------------------------------------------------------- stability


@dataclass
class StabilityVerdict:
    lambda_1: float
    classification: str
    index: int
    tol: float
    label: str = ""

    def to_dict(self) -> dict:
        return vars(self).copy()


def classify_lambda(lam: float, tol: float) -> str:
    if lam > tol:
        return STABLE
    if lam < -tol:
        return UNSTABLE
    return WEAKLY_STABLE


def stability_verdict(spectrum, tol: float | None = None, j_max: int = 10) -> StabilityVerdict:
    """Classification from lambda_1; the index counts eigenvalues below -tol.

    Default tol is 1e-9 for closed forms and the larger of the lambda_1
    uncertainty and the solver tolerance for numeric reports.
    """
    if isinstance(spectrum, AnalyticSpectrum):
        lams = spectrum.lambdas(j_max)
        tol = STABILITY_TOL if tol is None else tol
        label = spectrum.label
    else:
        if not spectrum.pairs:
            raise PreconditionError("spectrum has no eigenvalues")
        lams = spectrum.lambdas
        if tol is None:
            tol = max(spectrum.pairs[0].uncertainty, spectrum.meta.get("tol", STABILITY_TOL))
        label = spectrum.label
    lam1 = float(lams[0])
    return StabilityVerdict(lam1, classify_lambda(lam1, tol), int(np.sum(lams < -tol)), float(tol), label)


def numeric_spectrum(spec: ProblemSpec, kind, j_max: int, tol: float = 1e-9, eigenfunctions: bool = True,
                     X: float | None = None) -> sturm.SpectrumReport:
    """Sturm spectrum of the Jacobi operator at a closed-form solution."""
    kind = resolve_kind(spec, kind)
    spec = spec.with_k(solution_k(spec, kind))
    co = jacobi_coefficients(spec, kind)
    rep = sturm.spectrum(co, j_max, tol=tol, X=X, problem=spec.to_dict(), solution=kind.value,
                         eigenfunctions=eigenfunctions)
    rep.meta["tol"] = tol
    return rep


# ------------------------------------------------------ reproduction table

COVERED = (
    (Family.SPHERE, SolutionKind.IDENTITY),
    (Family.SPHERE, SolutionKind.LINEAR_ONE_MINUS_G),
    (Family.SO, SolutionKind.IDENTITY),
    (Family.SO, SolutionKind.LINEAR_ONE_MINUS_TWO_G),
    (Family.SU3, SolutionKind.SU3_IDENTITY),
)

# None marks a free multiplicity; "=" ties m1 to m0.
SPHERE_IDENTITY_STABLE = ((1, 1, 1), (2, None, None), (3, 1, 1), (3, 2, 2), (3, 4, 4), (3, 8, 8),
                          (4, None, 1), (4, 2, 2), (6, 1, 1), (6, 2, 2))
SO_IDENTITY_STABLE = ((1, None, "="), (2, None, None), (3, 1, 1), (3, 2, 2), (3, 4, 4), (3, 8, 8),
                      (4, None, 1), (4, 2, 2), (6, 1, 1), (6, 2, 2))
SPHERE_LINEAR_STABLE = ((1, None), (2, None), (3, 1), (3, 2), (4, 1), (4, 2), (6, 1))
SO_LINEAR_STABLE = ((1, None), (2, 1), (2, 2), (3, 1), (4, 1), (6, 1))
# Listed as stable although the closed form gives lambda_1 = 0.
EXPECTED_BORDERLINE = (
    (Family.SPHERE, SolutionKind.LINEAR_ONE_MINUS_G, 4, 2, 2),
    (Family.SO, SolutionKind.LINEAR_ONE_MINUS_TWO_G, 2, 2, 2),
)


def parameter_sets(family, kind, g_max: int = 6, m_max: int = 8) -> list:
    """All admissible (g, m0, m1) with g <= g_max, m_i <= m_max for a covered pair."""
    fam = Family(family)
    if fam is Family.SU3:
        return [(1, 1, 1)]
    linear = resolve_kind(make_problem(fam, 1, 1, 1), kind) is not SolutionKind.IDENTITY
    out = []
    for g in range(1, g_max + 1):
        for m0 in range(1, m_max + 1):
            for m1 in range(1, m_max + 1):
                if linear and m0 != m1:
                    continue
                if not admissible(g, m0, m1):
                    continue
                try:
                    make_problem(fam, g, m0, m1, 1)
                except DomainError:
                    continue
                out.append((g, m0, m1))
    return out


def theorem_triples(family, m_max: int = 8) -> list:
    """Identity stability list instantiated with multiplicities up to ``m_max``."""
    table = SPHERE_IDENTITY_STABLE if Family(family) is Family.SPHERE else SO_IDENTITY_STABLE
    out = []
    for g, a, b in table:
        for m0 in ([a] if a is not None else range(1, m_max + 1)):
            for m1 in ([m0] if b == "=" else [b] if b is not None else range(1, m_max + 1)):
                if m0 <= m_max and m1 <= m_max and (g, m0, m1) not in out:
                    out.append((g, m0, m1))
    return out


def theorem_pairs(family, m_max: int = 8) -> list:
    """Linear-solution stability list as (g, m) with m up to ``m_max``."""
    table = SPHERE_LINEAR_STABLE if Family(family) is Family.SPHERE else SO_LINEAR_STABLE
    out = []
    for g, m in table:
        out.extend((g, mm) for mm in ([m] if m is not None else range(1, m_max + 1)))
    return out


@dataclass
class ReproRow:
    section: str  # "prop", "stable-list" or "unstable"
    family: str
    solution: str
    g: int
    m0: int
    m1: int
    j: int
    lambda_analytic: float
    lambda_numeric: float
    abs_diff: float
    expected: str = ""
    verdict: str = ""
    flag: str = ""
    passed: bool = True

    FIELDS = ("section", "family", "solution", "g", "m0", "m1", "j", "lambda_analytic", "lambda_numeric",
              "abs_diff", "expected", "verdict", "flag", "passed")


@dataclass
class ReproductionTable:
    rows: list
    tol: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def flagged(self) -> list:
        return [r for r in self.rows if r.flag]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ReproRow.FIELDS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, f)) for f in ReproRow.FIELDS])
        return buf.getvalue()

    def to_text(self) -> str:
        head = f"{'section':<12}{'family':<8}{'solution':<14}{'g':>3}{'m0':>4}{'m1':>4}{'j':>4}" \
               f"{'analytic':>14}{'numeric':>20}{'|diff|':>10}  {'verdict':<14}{'ok':<4}flag"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.section:<12}{r.family:<8}{r.solution:<14}{r.g:>3}{r.m0:>4}{r.m1:>4}{r.j:>4}"
                f"{r.lambda_analytic:>14.6f}{r.lambda_numeric:>20.12f}{r.abs_diff:>10.1e}  "
                f"{r.verdict:<14}{'yes' if r.passed else 'NO':<4}{r.flag}"
            )
        n_fail = len(self.failures())
        lines.append(f"{len(self.rows)} rows, {n_fail} failing, {len(self.flagged())} flagged")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"tol": self.tol, "passed": self.passed, "rows": [
            {f: getattr(r, f) for f in ReproRow.FIELDS} for r in self.rows], **self.meta}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _spec_for(family, kind, g, m0, m1):
    if Family(family) is Family.SU3:
        return make_problem("su3", k_or_ell=0)
    return make_problem(family, g, m0, m1, 1)


def reproduction_table(j_max: int = 8, m_max: int = 8, g_max: int = 6, tol: float = 1e-6,
                       stability_tol: float = STABILITY_TOL, workers: int = 1) -> ReproductionTable:
    """All five closed-form spectra and both stability lists against the numeric solver.

    Prop rows pass when |lambda_numeric - lambda_analytic| < tol.  Stability
    rows classify the closed-form lambda_1 and pass when the numeric lambda_1
    agrees with it and the verdict matches the list (stable), or ``unstable``
    for the g = 1 identity with m >= 2.  A lambda_1 = 0 entry on a stable list
    is flagged; it passes as weakly_stable only for the two known borderline
    linear cases.
    """
    jobs = []
    for fam, kind in COVERED:
        for g, m0, m1 in parameter_sets(fam, kind, g_max, m_max):
            jobs.append((fam, kind, g, m0, m1))

    def run(job):
        fam, kind, g, m0, m1 = job
        spec = _spec_for(fam, kind, g, m0, m1)
        an = analytic_spectrum(spec, kind)
        rep = numeric_spectrum(spec, kind, j_max, eigenfunctions=False)
        return an.lambdas(j_max), rep.lambdas

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(jb) for jb in jobs]
    by_key = dict(zip(jobs, results))

    rows = []
    for (fam, kind, g, m0, m1), (la, ln) in zip(jobs, results):
        for j in range(1, j_max + 1):
            d = abs(float(ln[j - 1]) - float(la[j - 1]))
            rows.append(ReproRow("prop", fam.value, kind.value, g, m0, m1, j, float(la[j - 1]),
                                 float(ln[j - 1]), d, passed=bool(d < tol)))

    def stab_row(section, fam, kind, g, m0, m1, expected):
        la, ln = by_key[(fam, kind, g, m0, m1)]
        lam_a, lam_n = float(la[0]), float(ln[0])
        verdict = classify_lambda(lam_a, stability_tol)
        d = abs(lam_n - lam_a)
        flag = ""
        ok = verdict == expected
        if expected == STABLE and verdict == WEAKLY_STABLE:
            flag = "borderline: lambda_1 = 0 on a stable list"
            if (fam, kind, g, m0, m1) in EXPECTED_BORDERLINE:
                ok = True
            else:
                flag += " (unexpected)"
        ok = ok and d < tol
        return ReproRow(section, fam.value, kind.value, g, m0, m1, 1, lam_a, lam_n, d, expected, verdict, flag,
                        bool(ok))

    for fam in (Family.SPHERE, Family.SO):
        for g, m0, m1 in theorem_triples(fam, m_max):
            if g <= g_max:
                rows.append(stab_row("stable-list", fam, SolutionKind.IDENTITY, g, m0, m1, STABLE))
        kind = SolutionKind.LINEAR_ONE_MINUS_G if fam is Family.SPHERE else SolutionKind.LINEAR_ONE_MINUS_TWO_G
        for g, m in theorem_pairs(fam, m_max):
            if g <= g_max:
                rows.append(stab_row("stable-list", fam, kind, g, m, m, STABLE))
    for m in range(2, m_max + 1):
        rows.append(stab_row("unstable", Family.SPHERE, SolutionKind.IDENTITY, 1, m, m, UNSTABLE))
    return ReproductionTable(rows, tol, {"j_max": j_max, "m_max": m_max, "g_max": g_max,
                                         "stability_tol": stability_tol})
