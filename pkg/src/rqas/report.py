"""Validation statistics, severity ranking and plot artefacts (CSV + SVG)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .pes import transfer_probabilities
from .variants import VariantDataset


class InsufficientDataError(ValueError):
    pass


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise InsufficientDataError("need two equal-length samples of size >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    den = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if den == 0:
        raise InsufficientDataError("zero variance")
    return float(np.dot(dx, dy)) / den


def linear_fit(x, y) -> tuple[float, float]:
    """Least-squares ``y = slope * x + intercept``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    slope = float(np.dot(dx, y - y.mean()) / np.dot(dx, dx))
    return slope, float(y.mean() - slope * x.mean())


@dataclass
class ValidationReport:
    pearson_r: float
    r2: float
    n_points: int
    slope: float
    intercept: float
    rank_concordance: bool
    included: list
    excluded: list
    log10_activity: list = field(default_factory=list)
    log10_rqas: list = field(default_factory=list)
    kinetics_discrepancy: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def validate_pairs(activities_pct, rqas_log10, ids=None) -> ValidationReport:
    """Pearson statistics on (log10 activity, log10 RQAS) pairs."""
    act = np.asarray(activities_pct, dtype=float)
    y = np.asarray(rqas_log10, dtype=float)
    if act.size < 3:
        raise InsufficientDataError(f"validation needs >= 3 points with activity, got {act.size}")
    x = np.log10(act)
    r = pearson_r(x, y)
    slope, intercept = linear_fit(x, y)
    ids = list(ids) if ids is not None else [str(i) for i in range(act.size)]
    # exact order agreement: sorting by activity and by RQAS gives the same sequence
    by_act = [ids[i] for i in np.argsort(-x, kind="stable")]
    by_rqas = [ids[i] for i in np.argsort(-y, kind="stable")]
    strict = len(set(x.tolist())) == x.size and len(set(y.tolist())) == y.size
    return ValidationReport(
        pearson_r=r, r2=r * r, n_points=int(act.size), slope=slope, intercept=intercept,
        rank_concordance=bool(strict and by_act == by_rqas), included=ids, excluded=[],
        log10_activity=x.tolist(), log10_rqas=y.tolist(),
    )


def validate(results, dataset: VariantDataset, include_wildtype: bool = True) -> ValidationReport:
    by_id = {r.variant: r for r in results}
    ids, act, y, excluded = [], [], [], []
    for rec in dataset:
        if rec.id not in by_id:
            continue
        if not rec.has_activity or (rec.id == "WT" and not include_wildtype):
            excluded.append(rec.id)
            continue
        ids.append(rec.id)
        act.append(rec.exp_activity_pct)
        y.append(by_id[rec.id].log10_rqas)
    rep = validate_pairs(act, y, ids)
    rep.excluded = excluded
    rep.kinetics_discrepancy = kinetics_discrepancy(dataset)
    rep.notes.append(
        "Tabulated P_tunnel values are not reproduced by the rectangular-barrier WKB formula "
        "with the stated constants; see kinetics_discrepancy for the per-variant gap."
    )
    return rep


def kinetics_discrepancy(dataset: VariantDataset) -> list:
    """Published P_tunnel versus the formula evaluated on the same tabulated V0 and width."""
    out = []
    for rec in dataset:
        if rec.V0_kcalmol is None or rec.width_A is None or rec.published_P_tunnel is None:
            continue
        p = transfer_probabilities(rec.V0_kcalmol, rec.width_A)
        published = math.log10(rec.published_P_tunnel)
        out.append({
            "variant": rec.id,
            "log10_P_tunnel_published": published,
            "log10_P_tunnel_formula": p.log10_P_tunnel,
            "log10_gap": published - p.log10_P_tunnel,
        })
    return out


def rank_variants(results) -> list:
    """Descending RQAS, ties broken by id."""
    if not results:
        raise ValueError("nothing to rank")
    return sorted(results, key=lambda r: (-r.log10_rqas, r.variant))


def ranking_csv(results, dataset: VariantDataset | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "variant", "d_OO", "log10_RQAS", "severity_predicted", "severity_reported"])
    for i, r in enumerate(rank_variants(results), start=1):
        reported = ""
        if dataset is not None:
            try:
                reported = dataset.lookup(r.variant).severity.name
            except KeyError:
                pass
        w.writerow([i, r.variant, repr(r.d_oo), repr(r.log10_rqas), r.severity_predicted, reported])
    return buf.getvalue()


# --- plots ------------------------------------------------------------------------

_W, _H = 800, 600
_LEFT, _RIGHT, _TOP, _BOTTOM = 90, 40, 50, 70


def _axis_map(lo, hi, out_lo, out_hi):
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    return lambda v: out_lo + (v - lo) * (out_hi - out_lo) / (hi - lo)


def render_scatter_svg(xs, ys, labels, title, xlabel, ylabel, fit=None, annotation="") -> str:
    """Scatter plot on linear axes, optional fitted line. 800x600 viewBox."""
    fx = _axis_map(min(xs), max(xs), _LEFT, _W - _RIGHT)
    fy = _axis_map(min(ys), max(ys), _H - _BOTTOM, _TOP)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" width="{_W}" height="{_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="28" text-anchor="middle" font-size="18">{escape(title)}</text>',
        f'<line x1="{_LEFT}" y1="{_H - _BOTTOM}" x2="{_W - _RIGHT}" y2="{_H - _BOTTOM}" stroke="black"/>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_H - _BOTTOM}" stroke="black"/>',
        f'<text x="{_W / 2:.1f}" y="{_H - 20}" text-anchor="middle" font-size="14">{escape(xlabel)}</text>',
        f'<text x="22" y="{_H / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 22 {_H / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for v in np.linspace(min(xs), max(xs), 5):
        parts.append(f'<text x="{fx(v):.2f}" y="{_H - _BOTTOM + 18}" text-anchor="middle" '
                     f'font-size="11">{v:.3g}</text>')
    for v in np.linspace(min(ys), max(ys), 5):
        parts.append(f'<text x="{_LEFT - 6}" y="{fy(v) + 4:.2f}" text-anchor="end" '
                     f'font-size="11">{v:.3g}</text>')
    if fit is not None:
        slope, intercept = fit
        x0, x1 = min(xs), max(xs)
        parts.append(
            f'<line x1="{fx(x0):.2f}" y1="{fy(slope * x0 + intercept):.2f}" '
            f'x2="{fx(x1):.2f}" y2="{fy(slope * x1 + intercept):.2f}" stroke="crimson" '
            f'stroke-dasharray="6 4"/>'
        )
    for x, y, lab in zip(xs, ys, labels):
        parts.append(f'<circle cx="{fx(x):.2f}" cy="{fy(y):.2f}" r="5" fill="steelblue"/>')
        parts.append(f'<text x="{fx(x) + 7:.2f}" y="{fy(y) - 7:.2f}" font-size="11">{escape(lab)}</text>')
    if annotation:
        parts.append(f'<text x="{_W - _RIGHT}" y="{_TOP + 10}" text-anchor="end" '
                     f'font-size="13">{escape(annotation)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(results, report: ValidationReport | None, outdir, svg: bool = True) -> list:
    """Write cliff and validation data (CSV) and optional SVG renderings."""
    if not results:
        raise ValueError("no results to plot")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    xs = [r.d_oo for r in results]
    ys = [r.log10_rqas for r in results]
    ids = [r.variant for r in results]
    cliff_fit = linear_fit(xs, ys) if len(set(xs)) > 1 else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "d_OO", "log10_RQAS", "fit_log10_RQAS"])
    for x, y, vid in zip(xs, ys, ids):
        fitted = repr(cliff_fit[0] * x + cliff_fit[1]) if cliff_fit else ""
        w.writerow([vid, repr(x), repr(y), fitted])
    p = outdir / "cliff.csv"
    p.write_text(buf.getvalue())
    written.append(p)
    if svg:
        note = f"slope = {cliff_fit[0]:.3f} per A" if cliff_fit else ""
        p = outdir / "cliff.svg"
        p.write_text(render_scatter_svg(xs, ys, ids, "Activity versus active-site distance",
                                        "d_OO (A)", "log10 RQAS", cliff_fit, note))
        written.append(p)

    if report is not None:
        vx, vy = report.log10_activity, report.log10_rqas
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variant", "log10_activity", "log10_RQAS"])
        for vid, lx, ly in zip(report.included, vx, vy):
            w.writerow([vid, repr(lx), repr(ly)])
        p = outdir / "validation.csv"
        p.write_text(buf.getvalue())
        written.append(p)
        if svg:
            p = outdir / "validation.svg"
            p.write_text(render_scatter_svg(
                vx, vy, report.included, "Measured activity versus predicted score",
                "log10 activity (%)", "log10 RQAS", (report.slope, report.intercept),
                f"r^2 = {report.r2:.3f}"))
            written.append(p)
    return written

