"""Deterministic, atomic output writers: JSON, CSV, gnuplot .dat and SVG polylines.

Every file carries the package version and the resolved job configuration.
CSV and .dat files put them on leading ``#`` comment lines, followed by
the header row.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__

CSV_DIGITS = 17


def atomic_write(path, text: str) -> Path:
    """Write ``text`` (UTF-8) through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def clean(obj):
    """JSON-safe copy: numpy scalars and arrays become Python values, non-finite floats None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def json_text(payload: dict, config: dict | None = None) -> str:
    doc = {"version": __version__, "config": clean(config or {}), **clean(payload)}
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, payload: dict, config: dict | None = None) -> Path:
    return atomic_write(path, json_text(payload, config))


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{CSV_DIGITS}g}"
    return str(v)


def _preamble(config: dict | None) -> list:
    return [
        f"# equistab {__version__}",
        "# config " + json.dumps(clean(config or {}), sort_keys=True, separators=(",", ":")),
    ]


def csv_text(header, rows, config: dict | None = None) -> str:
    lines = _preamble(config)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_csv_cell(fmt(v)) for v in row))
    return "\n".join(lines) + "\n"


def _csv_cell(s: str) -> str:
    if any(ch in s for ch in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def write_csv(path, header, rows, config: dict | None = None) -> Path:
    return atomic_write(path, csv_text(header, rows, config))


def read_csv(path) -> tuple:
    """(header, rows as lists of strings), skipping ``#`` lines."""
    import csv

    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_dat(path, names, columns, config: dict | None = None) -> Path:
    """Whitespace-separated columns for gnuplot; blank line between column blocks is not used."""
    lines = _preamble(config)
    lines.append("# " + " ".join(names))
    for row in zip(*columns):
        lines.append(" ".join(fmt(v) for v in row))
    return atomic_write(path, "\n".join(lines) + "\n")


# ------------------------------------------------------------------ SVG

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def svg_plot(series, title: str = "", xlabel: str = "x", ylabel: str = "y", width: int = 640,
             height: int = 400, markers: bool = False, config: dict | None = None) -> str:
    """Line plot of ``series`` = [(x, y, label), ...] as a standalone SVG document."""
    xs = np.concatenate([np.asarray(s[0], dtype=float) for s in series]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(s[1], dtype=float) for s in series]) if series else np.zeros(1)
    fin = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = (float(xs[fin].min()), float(xs[fin].max())) if fin.any() else (0.0, 1.0)
    y0, y1 = (float(ys[fin].min()), float(ys[fin].max())) if fin.any() else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    ml, mr, mt, mb = 70, 150, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f"<!-- equistab {__version__} -->",
    ]
    if config is not None:
        cfg = json.dumps(clean(config), sort_keys=True).replace("--", "- -")
        out.append(f"<!-- config {cfg} -->")
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{X(t):.2f}" y1="{mt + ph}" x2="{X(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X(t):.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{Y(t):.2f}" x2="{ml}" y2="{Y(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{mt - 15}" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for i, (sx, sy, label) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        sx, sy = np.asarray(sx, dtype=float), np.asarray(sy, dtype=float)
        ok = np.isfinite(sx) & np.isfinite(sy)
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(sx[ok], sy[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if markers:
            for a, b in zip(sx[ok], sy[ok]):
                out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="2.5" fill="{color}"/>')
        ly = mt + 15 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 35}" y="{ly + 4}">{_esc(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(path, series, config: dict | None = None, **kw) -> Path:
    return atomic_write(path, svg_plot(series, config=config, **kw))
