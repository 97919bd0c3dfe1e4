"""Command-line front end.

    equistab solve     --family sphere --g 1 --m0 3 --m1 3 --k 1 --scan
    equistab spectrum  --family su3 --solution identity --jmax 5
    equistab verify    --family sphere --g 2 --m0 2 --m1 2 --solution identity --jmax 5 --tol 1e-6
    equistab scan      --family sphere --g 2 --m0 3 --m1 3 --k 1
    equistab reproduce --mmax 8 --jmax 8

Settings come from built-in defaults, then ``--config FILE`` (sections
[problem], [numeric], [output] with ``key = value`` lines), then flags.  Flag
names equal the config keys.  The default output directory is
``$EQUISTAB_OUTPUT`` or ``./equistab-out``.

Exit codes: 0 success, 1 configuration error, 2 numeric failure, 3 a
verification check failed (the report is still written).
"""

from __future__ import annotations

import argparse
import configparser
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, io, shooting, spectra, sturm
from .problems import (
    DomainError,
    Family,
    PreconditionError,
    SolutionKind,
    jacobi_coefficients,
    make_problem,
    resolve_kind,
    solution_k,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("solve", "spectrum", "verify", "scan", "reproduce")
FORMATS = ("json", "csv", "svg")
OUTPUT_ENV = "EQUISTAB_OUTPUT"

# key -> (section, type, bounds)
KEYS = {
    "family": ("problem", str, None),
    "g": ("problem", int, (1, 6)),
    "m0": ("problem", int, (1, 64)),
    "m1": ("problem", int, (1, 64)),
    "k": ("problem", int, (-64, 64)),
    "solution": ("problem", str, None),
    "tol": ("numeric", float, (1e-14, 1e-2)),
    "xmax": ("numeric", float, (6.0, 24.0)),
    "jmax": ("numeric", int, (1, 200)),
    "amin": ("numeric", float, (1e-12, 1e12)),
    "amax": ("numeric", float, (1e-12, 1e12)),
    "grid": ("numeric", int, (16, 4096)),
    "workers": ("numeric", int, (1, 64)),
    "mmax": ("numeric", int, (1, 16)),
    "gmax": ("numeric", int, (1, 6)),
    "output": ("output", str, None),
    "formats": ("output", str, None),
}

DEFAULT_TOL = {"solve": 1e-8, "scan": 1e-8, "spectrum": 1e-9, "verify": 1e-6, "reproduce": 1e-6}


class ConfigError(ValueError):
    pass


class NumericFailure(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"numeric failure in stage '{stage}': {exc}")
        self.stage = stage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="equistab", description="Equivariant harmonic self-maps and their Jacobi spectra.")
    p.add_argument("--version", action="version", version=f"equistab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        s = sub.add_parser(cmd)
        s.add_argument("--config", help="config file with [problem]/[numeric]/[output] sections")
        for key, (_, typ, _) in KEYS.items():
            s.add_argument(f"--{key}", type=typ, default=None)
        if cmd == "solve":
            s.add_argument("--scan", action="store_true", help="write every solution of the family")
    return p


def _read_config_file(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        if section not in ("problem", "numeric", "output"):
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in cp.items(section):
            if key not in KEYS:
                raise ConfigError(f"unknown config key {key!r} in [{section}]")
            if KEYS[key][0] != section:
                raise ConfigError(f"key {key!r} belongs in [{KEYS[key][0]}]")
            try:
                out[key] = KEYS[key][1](raw.strip())
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < flags, validated."""
    cmd = args.command
    cfg = {
        "command": cmd,
        "family": None, "g": None, "m0": None, "m1": None, "k": None, "solution": None,
        "tol": DEFAULT_TOL[cmd], "xmax": sturm.X_DEFAULT, "jmax": 8,
        "amin": shooting.DEFAULT_AMPLITUDES[0], "amax": shooting.DEFAULT_AMPLITUDES[1],
        "grid": 64, "workers": 1, "mmax": 8, "gmax": 6,
        "output": os.environ.get(OUTPUT_ENV) or "equistab-out", "formats": ",".join(FORMATS),
    }
    if args.config:
        cfg.update(_read_config_file(args.config))
    for key in KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["scan"] = bool(getattr(args, "scan", False))

    for key, (_, _, bounds) in KEYS.items():
        v = cfg[key]
        if bounds is not None and v is not None and not (bounds[0] <= v <= bounds[1]):
            raise ConfigError(f"{key} = {v} outside [{bounds[0]}, {bounds[1]}]")
    if cfg["amin"] >= cfg["amax"]:
        raise ConfigError("amin must be below amax")
    fmts = [f.strip() for f in str(cfg["formats"]).split(",") if f.strip()]
    bad = [f for f in fmts if f not in FORMATS]
    if bad or not fmts:
        raise ConfigError(f"formats must be a subset of {','.join(FORMATS)}, got {cfg['formats']!r}")
    cfg["formats"] = ",".join(f for f in FORMATS if f in fmts)
    stored = cfg["solution"] is not None and Path(str(cfg["solution"])).is_file()
    if cmd != "reproduce" and not stored:
        if cfg["family"] is None:
            raise ConfigError("family is required")
        try:
            Family(cfg["family"])
        except ValueError as exc:
            raise ConfigError(f"unknown family {cfg['family']!r}") from exc
        if cmd in ("spectrum", "verify") and cfg["solution"] is None:
            cfg["solution"] = "identity"
    out = Path(cfg["output"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} not usable: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return cfg


# ------------------------------------------------------------- helpers


def _solution_arg(cfg):
    """(kind, profile) from the ``solution`` setting; exactly one may be set."""
    sol = cfg["solution"]
    if sol is None:
        return None, None
    try:
        kind = SolutionKind(sol)
    except ValueError:
        path = Path(sol)
        if not path.is_file():
            raise ConfigError(f"solution {sol!r} is neither a solution kind nor a profile file")
        try:
            return None, shooting.SolutionProfile.from_json(path.read_text(encoding="utf-8"))
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read profile {sol}: {exc}") from exc
    return (None if kind is SolutionKind.NUMERIC else kind), None


def _spec(cfg, kind=None):
    fam = Family(cfg["family"])
    k = cfg["k"]
    if kind is not None:
        probe = make_problem(fam, cfg["g"], cfg["m0"], cfg["m1"], 0)
        k_sol = solution_k(probe, kind)
        if k is None:
            k = k_sol
    if k is None:
        k = 0 if fam is Family.SU3 else 1
    return make_problem(fam, cfg["g"], cfg["m0"], cfg["m1"], k)


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9-]+", "_", text).strip("_")


class _Writer:
    def __init__(self, cfg):
        self.cfg = cfg
        self.dir = Path(cfg["output"])
        self.formats = cfg["formats"].split(",")
        self.written = []
        self.config = {k: v for k, v in cfg.items()}

    def json(self, stem, payload):
        if "json" in self.formats:
            self.written.append(io.write_json(self.dir / f"{stem}.json", payload, self.config))

    def csv(self, stem, header, rows):
        if "csv" in self.formats:
            self.written.append(io.write_csv(self.dir / f"{stem}.csv", header, rows, self.config))

    def plot(self, stem, series, **kw):
        if "svg" in self.formats:
            self.written.append(io.write_svg(self.dir / f"{stem}.svg", series, self.config, **kw))
            names, cols = [], []
            for i, (x, y, label) in enumerate(series):
                if not cols:
                    names.append("x")
                    cols.append(np.asarray(x))
                if len(x) == len(cols[0]) and np.allclose(x, cols[0]):
                    names.append(_slug(str(label)) or f"y{i}")
                    cols.append(np.asarray(y))
            self.written.append(io.write_dat(self.dir / f"{stem}.dat", names, cols, self.config))

    def text(self, name, text):
        self.written.append(io.atomic_write(self.dir / name, text))


def _write_profile(w: _Writer, stem, prof):
    w.json(stem, prof.to_dict())
    w.csv(stem, ["x", "r", "rprime"], zip(prof.x, prof.r, prof.rprime))
    w.plot(stem, [(prof.x, prof.r, f"n={prof.nodal_number}"),
                  (prof.x, np.full_like(prof.x, prof.spec.target), "target")],
           title=prof.spec.label(), xlabel="x", ylabel="r(x)")


def _family_rows(fam):
    return [(i, p.nodal_number, p.shooting_parameter, p.right_parameter, p.boundary_defect, p.residual_norm,
             p.uncertainty, p.r_limit, p.closed_form() or "") for i, p in enumerate(fam)]


FAMILY_HEADER = ["index", "nodal_number", "shooting_parameter", "right_parameter", "boundary_defect",
                 "residual_norm", "uncertainty", "r_limit", "closed_form"]


def _find_family(cfg, spec):
    try:
        return shooting.find_family(spec, (cfg["amin"], cfg["amax"]), grid=cfg["grid"],
                                    tol=cfg["tol"], workers=cfg["workers"])
    except (shooting.ShootingError, FloatingPointError) as exc:
        raise NumericFailure("shooting", exc) from exc


# ------------------------------------------------------------- commands


def cmd_solve(cfg, w):
    kind, prof = _solution_arg(cfg)
    if prof is not None:
        raise ConfigError("solve takes a solution kind, not a stored profile")
    spec = _spec(cfg, kind)
    if kind is not None:
        stem = f"solve-{_slug(spec.label())}-{resolve_kind(spec, kind).value}"
        _write_profile(w, stem, shooting.closed_form_profile(spec, kind))
        return EXIT_OK
    fam = _find_family(cfg, spec)
    if not fam:
        raise NumericFailure("shooting", f"no certified solution for {spec.label()} in the amplitude range")
    base = f"solve-{_slug(spec.label())}"
    chosen = fam if cfg["scan"] else fam[:1]
    for i, p in enumerate(chosen):
        _write_profile(w, f"{base}-{i}", p)
    if cfg["scan"]:
        w.json(f"{base}-family", {"problem": spec.to_dict(), "solutions": [p.metadata() for p in fam]})
        w.csv(f"{base}-family", FAMILY_HEADER, _family_rows(fam))
    return EXIT_OK


def cmd_scan(cfg, w):
    kind, prof = _solution_arg(cfg)
    spec = _spec(cfg)
    fam = _find_family(cfg, spec)
    stem = f"scan-{_slug(spec.label())}"
    w.json(stem, {"problem": spec.to_dict(), "solutions": [p.metadata() for p in fam]})
    w.csv(stem, FAMILY_HEADER, _family_rows(fam))
    if fam:
        w.plot(stem, [(p.x, p.r, f"n={p.nodal_number}") for p in fam], title=spec.label(), xlabel="x",
               ylabel="r(x)")
    for p in fam:
        print(f"nodal_number={p.nodal_number} A={p.shooting_parameter:.10g} "
              f"defect={p.boundary_defect:.2e} closed_form={p.closed_form() or '-'}")
    return EXIT_OK


def _coefficients(cfg):
    kind, prof = _solution_arg(cfg)
    if prof is not None:
        spec = prof.spec
        try:
            return spec, None, jacobi_coefficients(spec, prof)
        except PreconditionError as exc:
            raise ConfigError(str(exc)) from exc
    if kind is None:
        raise ConfigError("numeric spectra need a stored profile: --solution PATH")
    spec = _spec(cfg, kind)
    kind = resolve_kind(spec, kind)
    return spec, kind, jacobi_coefficients(spec, kind)


def property_checks(coeffs, rep, X=None) -> dict:
    """Zero counts j - 1, interlacing of consecutive eigenfunctions, Pruefer count steps of one."""
    zero_ok = all(p.zero_count == p.j - 1 for p in rep.pairs)
    inter_ok = all(sturm.interlaced(a.zeros(), b.zeros()) for a, b in zip(rep.pairs, rep.pairs[1:]))
    steps = []
    for p in rep.pairs:
        d = max(1e-6, 100 * p.uncertainty)
        below = sturm.pruefer_count(coeffs, p.lambda_x - d, X=X)
        above = sturm.pruefer_count(coeffs, p.lambda_x + d, X=X)
        steps.append(below == p.j - 1 and above == p.j)
    return {"zero_counts": bool(zero_ok), "interlacing": bool(inter_ok), "pruefer_steps": bool(all(steps))}


def _spectrum(cfg, coeffs, spec, kind, eig_tol):
    try:
        rep = sturm.spectrum(coeffs, cfg["jmax"], tol=eig_tol, X=cfg["xmax"], problem=spec.to_dict(),
                             solution=kind.value if kind is not None else SolutionKind.NUMERIC.value)
    except (sturm.SturmError, FloatingPointError) as exc:
        raise NumericFailure("spectrum", exc) from exc
    rep.meta["tol"] = eig_tol
    return rep


def _write_spectrum(w, stem, rep, extra):
    w.json(stem, {**rep.to_dict(with_eigenfunctions=False), **extra})
    w.csv(stem, ["j", "lambda_x", "lambda_t", "zero_count", "uncertainty"], rep.rows())
    if rep.pairs and len(rep.pairs[0].x):
        x = rep.pairs[0].x
        w.csv(f"{stem}-eigenfunctions", ["x"] + [f"xi_{p.j}" for p in rep.pairs],
              zip(x, *[p.xi for p in rep.pairs]))
        w.plot(f"{stem}-eigenfunctions", [(p.x, p.xi, f"xi_{p.j}") for p in rep.pairs],
               title=f"{rep.label} eigenfunctions", xlabel="x", ylabel="xi(x)")
    j = np.array([p.j for p in rep.pairs], dtype=float)
    w.plot(f"{stem}-eigenvalues", [(j, rep.lambdas, "lambda_x")], title=f"{rep.label} eigenvalues",
           xlabel="j", ylabel="lambda", markers=True)


def cmd_spectrum(cfg, w):
    spec, kind, coeffs = _coefficients(cfg)
    rep = _spectrum(cfg, coeffs, spec, kind, cfg["tol"])
    checks = property_checks(coeffs, rep, cfg["xmax"])
    verdict = spectra.stability_verdict(rep)
    name = kind.value if kind is not None else "numeric"
    _write_spectrum(w, f"spectrum-{_slug(spec.label())}-{name}", rep,
                    {"verdict": verdict.to_dict(), "checks": checks})
    for row in rep.rows():
        print("j=%d lambda_x=%.12g zero_count=%d" % (row[0], row[1], row[3]))
    print(f"verdict: {verdict.classification} (lambda_1 = {verdict.lambda_1:.12g})")
    return EXIT_OK


def cmd_verify(cfg, w):
    spec, kind, coeffs = _coefficients(cfg)
    eig_tol = min(1e-9, cfg["tol"] * 1e-3)
    rep = _spectrum(cfg, coeffs, spec, kind, eig_tol)
    checks = property_checks(coeffs, rep, cfg["xmax"])
    name = kind.value if kind is not None else "numeric"
    stem = f"verify-{_slug(spec.label())}-{name}"
    payload = {"spectrum": rep.to_dict(), "checks": checks,
               "verdict": spectra.stability_verdict(rep).to_dict()}
    ok = all(checks.values())
    if kind is not None:
        an = spectra.analytic_spectrum(spec, kind)
        report = spectra.verify_spectrum(rep, an, tol=cfg["tol"])
        payload["comparison"] = report.to_dict()
        ok = ok and report.passed
        w.csv(stem, ["j", "lambda_numeric", "lambda_analytic", "abs_diff", "rel_diff", "eig_sup_diff", "passed"],
              [(e.j, e.lambda_numeric, e.lambda_analytic, e.abs_diff, e.rel_diff, e.eig_sup_diff, e.passed)
               for e in report.entries])
        for e in report.entries:
            print(f"j={e.j} numeric={e.lambda_numeric:.12g} analytic={e.lambda_analytic:.12g} "
                  f"diff={e.abs_diff:.2e} {'ok' if e.passed else 'FAIL'}")
    payload["passed"] = bool(ok)
    w.json(stem, payload)
    print("checks: " + " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))
    print("verification " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_reproduce(cfg, w):
    try:
        table = spectra.reproduction_table(j_max=cfg["jmax"], m_max=cfg["mmax"], g_max=cfg["gmax"],
                                           tol=cfg["tol"], workers=cfg["workers"])
    except (sturm.SturmError, FloatingPointError) as exc:
        raise NumericFailure("reproduce", exc) from exc
    stem = "reproduce"
    w.json(stem, table.to_dict())
    w.csv(stem, spectra.ReproRow.FIELDS, [[getattr(r, f) for f in spectra.ReproRow.FIELDS] for r in table.rows])
    text = table.to_text()
    w.text(f"{stem}.txt", f"# equistab {__version__}\n" + text)
    for r in table.failures() + [r for r in table.flagged() if r.passed]:
        print(f"{'FAIL' if not r.passed else 'flag'} {r.section} {r.family} {r.solution} "
              f"({r.g},{r.m0},{r.m1}) j={r.j} analytic={r.lambda_analytic:.10g} "
              f"numeric={r.lambda_numeric:.10g} {r.verdict} {r.flag}")
    print(text.splitlines()[-1])
    return EXIT_OK if table.passed else EXIT_VERIFY


HANDLERS = {"solve": cmd_solve, "spectrum": cmd_spectrum, "verify": cmd_verify, "scan": cmd_scan,
            "reproduce": cmd_reproduce}


def run(cfg: dict) -> tuple:
    """Execute a resolved config; returns (exit status, written paths)."""
    w = _Writer(cfg)
    status = HANDLERS[cfg["command"]](cfg, w)
    return status, w.written


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        status, written = run(cfg)
    except ConfigError as exc:
        print(f"equistab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, PreconditionError) as exc:
        print(f"equistab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"equistab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in written:
        print(f"wrote {p}")
    return status


if __name__ == "__main__":
    sys.exit(main())
