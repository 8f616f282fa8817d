"""Writers for the CSV table and per-curve plot-data files.

Plot data: one file per curve, ``#`` header lines, then two whitespace
separated columns ``x y``.  Files sit next to the CSV as
``<stem>.<view>.<curve>.dat``.
"""

from __future__ import annotations

import re
from pathlib import Path

from .experiments import curves
from .results import rows_to_csv


def _slug(parts):
    text = "_".join(str(p) for p in parts)
    return re.sub(r"[^A-Za-z0-9.+-]+", "-", text).strip("-")


def _curve_name(key, view):
    if view == "required":
        algo, model, p, q, lam, regime = key
        return _slug([algo, model, f"p{p:g}", f"q{q:g}", f"lam{lam:g}", regime])
    algo, model, p, q, lam, n, regime = key
    return _slug([algo, model, f"p{p:g}", f"q{q:g}", f"lam{lam:g}", f"n{n}", regime])


_AXES = {
    "success": ("m", "success_rate"),
    "overlap": ("m", "mean_overlap"),
    "required": ("n", "median_required_m"),
}


def plot_data_text(description, xlabel, ylabel, points):
    lines = [f"# {description}", f"# {xlabel} {ylabel}"]
    lines.extend(f"{x!r} {y!r}" for x, y in points)
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def views_for(kind):
    if kind == "required-queries":
        return ("required",)
    if kind in ("success-rate", "overlap", "amp-compare"):
        return ("success", "overlap")
    return ()


def write_outputs(spec, rows):
    out = Path(spec.out)
    _write(out, rows_to_csv(rows))
    written = [out]
    stem = out.with_suffix("")
    for view in views_for(spec.kind):
        xlabel, ylabel = _AXES[view]
        for key, pts in curves(rows, view).items():
            path = Path(f"{stem}.{view}.{_curve_name(key, view)}.dat")
            desc = " ".join(str(k) for k in key)
            _write(path, plot_data_text(desc, xlabel, ylabel, sorted((float(x), float(y)) for x, y in pts.items())))
            written.append(path)
    for i, (desc, xlabel, ylabel, pts) in enumerate(spec.theory):
        path = Path(f"{stem}.theory.{i}.{_slug([desc])}.dat")
        _write(path, plot_data_text(desc, xlabel, ylabel, [(float(x), float(y)) for x, y in pts]))
        written.append(path)
    return written
