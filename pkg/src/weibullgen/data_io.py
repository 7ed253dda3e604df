"""Embedded harvester datasets, CSV ingestion, reports and SVG plots."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .distributions import Family, FamilyParams
from .errors import InputError
from .estimation import FitResult, Sample, as_sample
from .selection import GofResult, SelectionReport, TttCurve

SCHEMA_VERSION = 1
TEST_MODE_ENV = "WEIBULLGEN_TEST_MODE"
ZERO_TIMESTAMP = "1970-01-01T00:00:00Z"

# Days between consecutive failures of two harvester components.
_DATASETS: dict[str, tuple[float, ...]] = {
    "pricker_a": (
        1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 5, 5, 5,
        6, 6, 7, 8, 9, 11, 11, 12, 14, 16, 18, 18, 18, 22, 22, 23, 29, 32, 34, 38, 41, 46, 53, 53,
    ),
    "pricker_b": (
        1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4, 4, 5, 5, 5, 5, 5, 5, 5,
        6, 7, 7, 8, 8, 8, 8, 8, 9, 9, 11, 11, 11, 11, 11, 11, 12, 13, 14, 16, 16, 21, 23, 24, 27,
        28, 38, 43, 44,
    ),
    "transmission_a": (
        1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 3, 4, 5, 6, 6, 6, 6, 7, 7, 8, 8, 8,
        11, 11, 12, 13, 13, 13, 14, 15, 16, 17, 18, 18, 19, 19, 21, 22, 23, 29, 31, 32, 34, 44, 52,
    ),
    "transmission_b": (
        1, 2, 3, 3, 4, 5, 6, 6, 7, 9, 11, 12, 12, 18, 19, 21, 23, 28, 31, 31, 35, 37, 39, 46, 61,
    ),
}

DATASET_CHECKSUMS: dict[str, str] = {
    "pricker_a": "06161f81d6581344db63537e441c4b5ab83ac2d92b47949ce51556e719f4f306",
    "pricker_b": "5d64a9a6014bf9788210b2e35be0a11f146513e1e3e40146dd87fc5e41e16abd",
    "transmission_a": "571b5c99177a1a8fe1100761e8f0245cd9ca70bcc05ebd22aa1a69f1051be0ca",
    "transmission_b": "f31c6e4a61201ac269fb8a5f1f7126f7650158278ccb3e607507d42f256c9301",
}

DATASET_IDS = tuple(_DATASETS)


def dataset_checksum(values: Sequence[float]) -> str:
    """SHA-256 of the values written with ``repr`` and joined by commas."""
    text = ",".join(repr(float(v)) for v in values)
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def load_embedded(dataset_id: str) -> Sample:
    """One of the four embedded datasets, checked against its checksum."""
    try:
        values = _DATASETS[dataset_id]
    except KeyError:
        raise InputError(f"unknown dataset {dataset_id!r}; expected one of {', '.join(DATASET_IDS)}") from None
    if dataset_checksum(values) != DATASET_CHECKSUMS[dataset_id]:
        raise InputError(f"embedded dataset {dataset_id!r} fails its checksum")
    return Sample(np.asarray(values, dtype=float))


def load_csv(path, header: bool = False) -> Sample:
    """Read one positive number per record; ``header`` skips the first row.

    Blank lines are ignored. Bad records raise ``InputError`` naming the
    line, column and offending token.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    values = []
    for lineno, row in enumerate(rows, start=1):
        if header and lineno == 1:
            continue
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 1:
            raise InputError(f"{path}:{lineno}:2: expected one value per record, got {len(row)} fields")
        token = row[0].strip()
        try:
            x = float(token)
        except ValueError:
            raise InputError(f"{path}:{lineno}:1: not a number: {token!r}") from None
        if not math.isfinite(x) or x <= 0:
            raise InputError(f"{path}:{lineno}:1: failure times must be positive and finite: {token!r}")
        values.append(x)
    if not values:
        raise InputError(f"{path}: no data records")
    return Sample(np.asarray(values))


def write_csv(sample, path, header: str | None = None) -> None:
    sample = as_sample(sample)
    with Path(path).open("w", newline="") as fh:
        if header:
            fh.write(header + "\n")
        for v in sample.values:
            fh.write(repr(float(v)) + "\n")


def load_dataset(source: str, header: bool = False) -> Sample:
    """Embedded id or CSV path."""
    if source in _DATASETS:
        return load_embedded(source)
    return load_csv(source, header=header)


def in_test_mode() -> bool:
    return os.environ.get(TEST_MODE_ENV, "").strip().lower() not in ("", "0", "false", "no")


def timestamp() -> str:
    if in_test_mode():
        return ZERO_TIMESTAMP
    from datetime import datetime, timezone

    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


@dataclass
class Report:
    """Everything one CLI run produced, plus what is needed to rerun it."""

    dataset: str
    sample: Sample
    config: dict = field(default_factory=dict)
    seed: int | None = None
    ttt: TttCurve | None = None
    ttt_shape: str | None = None
    fits: dict[Family, FitResult] = field(default_factory=dict)
    gof: dict[Family, GofResult] = field(default_factory=dict)
    selection: SelectionReport | None = None
    plan: object | None = None  # MaintenancePlan
    bootstrap: object | None = None  # BootstrapResult
    generated_at: str = field(default_factory=timestamp)

    def to_dict(self) -> dict:
        from . import __version__

        fits = []
        for fam, fit in self.fits.items():
            entry = fit.to_dict()
            if fam in self.gof:
                entry["gof"] = self.gof[fam].to_dict()
            fits.append(entry)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "tool": "weibullgen",
            "tool_version": __version__,
            "generated_at": self.generated_at,
            "dataset": self.dataset,
            "config": self.config,
            "seed": self.seed,
            "summary": self.sample.summary(),
            "ttt": None if self.ttt is None else {
                "shape": self.ttt_shape,
                "r_over_n": self.ttt.r_over_n,
                "g": self.ttt.g,
            },
            "fits": fits,
            "selection": None if self.selection is None else self.selection.to_dict(),
            "bootstrap": None if self.bootstrap is None else self.bootstrap.to_dict(),
            "plan": None if self.plan is None else self.plan.to_dict(),
        }
        return _clean(doc)


def report_json(report) -> str:
    doc = report.to_dict() if isinstance(report, Report) else _clean(report)
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_report(report, path, format: str = "json") -> None:
    """Write a report as one JSON document or as a directory of CSV files."""
    path = Path(path)
    doc = report.to_dict() if isinstance(report, Report) else _clean(report)
    try:
        if format == "json":
            if path.parent != Path(""):
                path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(report_json(doc))
        elif format == "csv-bundle":
            _write_bundle(doc, path)
        else:
            raise ValueError(f"unknown report format {format!r}; use json or csv-bundle")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report to {path}: {exc.strerror}") from exc


def read_report(path) -> dict:
    path = Path(path)
    if path.is_dir():
        return {name: _read_csv_rows(path / f"{name}.csv") for name in BUNDLE_FILES}
    return json.loads(path.read_text())


BUNDLE_FILES = ("ttt", "fits", "selection", "plan")
SELECTION_COLUMNS = ("family", "aic", "aicc", "ks_d", "ks_p", "admissible")
FITS_COLUMNS = ("family", "parameter", "estimate", "std_error", "ci_lower", "ci_upper", "loglik", "converged")
PLAN_COLUMNS = ("family", "u", "y_star", "y_star_days", "ci_lower", "ci_upper", "level", "replicates", "effective", "seed")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path: Path, columns, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c)) for c in columns])


def _read_csv_rows(path: Path) -> list[dict]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def _write_bundle(doc: dict, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    ttt = doc.get("ttt") or {"r_over_n": [], "g": []}
    _write_rows(directory / "ttt.csv", ("r_over_n", "g"),
                [{"r_over_n": a, "g": b} for a, b in zip(ttt["r_over_n"], ttt["g"])])

    rows = []
    for fit in doc.get("fits", []):
        for name, est in fit["params"].items():
            ci = fit["wald_ci_95"].get(name) if fit.get("wald_ci_95") else None
            rows.append({
                "family": fit["family"], "parameter": name, "estimate": est,
                "std_error": (fit.get("std_errors") or {}).get(name),
                "ci_lower": ci[0] if ci else None, "ci_upper": ci[1] if ci else None,
                "loglik": fit["loglik"], "converged": fit["converged"],
            })
    _write_rows(directory / "fits.csv", FITS_COLUMNS, rows)

    sel = doc.get("selection")
    if sel is not None:
        gof_rows = sel["results"]
    else:
        gof_rows = [fit["gof"] for fit in doc.get("fits", []) if "gof" in fit]
    _write_rows(directory / "selection.csv", SELECTION_COLUMNS, gof_rows)

    plan = doc.get("plan")
    plan_rows = []
    if plan is not None:
        row = dict(plan)
        ci = plan.get("ci") or [None, None]
        row["ci_lower"], row["ci_upper"] = ci
        plan_rows.append(row)
    _write_rows(directory / "plan.csv", PLAN_COLUMNS, plan_rows)


# SVG plots

_W, _H = 480, 360
_M = 48  # margin


def _fmt(x: float) -> str:
    return f"{x:.3f}"


class _Canvas:
    def __init__(self, xmax: float, ymax: float, title: str, xlabel: str, ylabel: str):
        self.xmax, self.ymax = xmax, ymax
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
            f'<title>{escape(title)}</title>',
            f'<rect x="{_M}" y="{_M}" width="{_W - 2 * _M}" height="{_H - 2 * _M}" fill="none" stroke="black"/>',
            f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
            f'<text x="14" y="{_H / 2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 14 {_H / 2})">{escape(ylabel)}</text>',
        ]

    def xy(self, x, y) -> tuple[float, float]:
        px = _M + (_W - 2 * _M) * x / self.xmax
        py = _H - _M - (_H - 2 * _M) * y / self.ymax
        return px, py

    def points(self, xs, ys) -> str:
        return " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in (self.xy(x, y) for x, y in zip(xs, ys)))

    def add(self, element: str) -> None:
        self.parts.append(element)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def ttt_svg(curve: TttCurve) -> str:
    c = _Canvas(1.0, 1.0, "TTT plot", "r/n", "G(r/n)")
    x0, y0 = c.xy(0, 0)
    x1, y1 = c.xy(1, 1)
    c.add(f'<line class="diagonal" x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
          f'stroke="gray" stroke-dasharray="4 3"/>')
    c.add(f'<polyline class="ttt" data-n="{len(curve)}" fill="none" stroke="{_COLOURS[0]}" '
          f'points="{c.points(curve.r_over_n, curve.g)}"/>')
    return c.render()


def survival_svg(sample, overlays: Mapping[Family, FamilyParams]) -> str:
    """Empirical survival step (1 - EDF) with fitted survival curves."""
    if not overlays:
        raise ValueError("survival plot needs at least one fitted family to overlay")
    t = as_sample(sample).sorted
    n = t.size
    xmax = float(t[-1]) * 1.05
    c = _Canvas(xmax, 1.0, "Survival", "t (days)", "S(t)")
    xs, ys = [0.0], [1.0]
    for i, ti in enumerate(t):
        xs += [float(ti), float(ti)]
        ys += [ys[-1], 1.0 - (i + 1) / n]
    xs.append(xmax)
    ys.append(ys[-1])
    c.add(f'<polyline class="empirical" fill="none" stroke="black" points="{c.points(xs, ys)}"/>')
    grid = np.linspace(xmax / 400, xmax, 400)
    for i, (fam, params) in enumerate(overlays.items()):
        fam = Family.parse(fam)
        s = np.asarray(params.survival(grid), dtype=float)
        colour = _COLOURS[(i + 1) % len(_COLOURS)]
        c.add(f'<polyline class="fitted" data-family="{fam.value}" fill="none" stroke="{colour}" '
              f'points="{c.points(grid, s)}"/>')
        lx, ly = _W - _M - 60, _M + 16 + 14 * i
        c.add(f'<text class="label" data-family="{fam.value}" x="{lx}" y="{ly}" font-size="11" '
              f'fill="{colour}">{fam.value}</text>')
    return c.render()


def write_plot(obj, path, sample=None) -> None:
    """Write a TTT curve, or a survival overlay when ``obj`` maps families to fits.

    Overlay values may be parameter objects or ``FitResult``s; ``sample`` is
    required for the overlay.
    """
    if isinstance(obj, TttCurve):
        text = ttt_svg(obj)
    else:
        if sample is None:
            raise ValueError("survival overlay needs the sample for the empirical curve")
        if isinstance(obj, FitResult):
            obj = {obj.family: obj}
        overlays = {Family.parse(k): (v.params if isinstance(v, FitResult) else v) for k, v in dict(obj).items()}
        text = survival_svg(sample, overlays)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write plot to {path}: {exc.strerror}") from exc


def write_ttt_csv(curve: TttCurve, path) -> None:
    _write_rows(Path(path), ("r_over_n", "g"), [{"r_over_n": float(a), "g": float(b)} for a, b in curve.points])
