"""CSV, manifest and SVG writers."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % x
    return str(x)


def write_csv(path, columns, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return Path(path)


_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _axis(vals, log):
    v = np.asarray(vals, dtype=float)
    if log:
        v = np.log10(v[v > 0]) if np.any(v > 0) else np.zeros(1)
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def svg_lineplot(series, logx=False, logy=False, title="", xlabel="", ylabel="",
                 width=640, height=420):
    """Polyline plot as an SVG string; ``series`` is a list of ``(label, xs, ys)``."""
    pad_l, pad_r, pad_t, pad_b = 70, 160, 40, 50
    allx = np.concatenate([np.asarray(s[1], float) for s in series])
    ally = np.concatenate([np.asarray(s[2], float) for s in series])
    x0, x1 = _axis(allx, logx)
    y0, y1 = _axis(ally, logy)
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        x = math.log10(x) if logx else x
        return pad_l + (x - x0) / (x1 - x0) * pw

    def py(y):
        y = math.log10(y) if logy else y
        return pad_t + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{width / 2:.0f}" y="20" text-anchor="middle">{title}</text>',
           f'<text x="{pad_l + pw / 2:.0f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
           f'<text x="15" y="{pad_t + ph / 2:.0f}" transform="rotate(-90 15 {pad_t + ph / 2:.0f})" '
           f'text-anchor="middle">{ylabel}</text>']
    for lo, hi, log, horiz in ((x0, x1, logx, True), (y0, y1, logy, False)):
        for t in np.linspace(lo, hi, 5):
            label = f"1e{t:.1f}" if log else f"{t:.3g}"
            if horiz:
                X = pad_l + (t - lo) / (hi - lo) * pw
                out.append(f'<text x="{X:.1f}" y="{pad_t + ph + 16}" text-anchor="middle">{label}</text>')
            else:
                Y = pad_t + ph - (t - lo) / (hi - lo) * ph
                out.append(f'<text x="{pad_l - 6}" y="{Y + 4:.1f}" text-anchor="end">{label}</text>')
    for k, (label, xs, ys) in enumerate(series):
        pts = [(px(x), py(y)) for x, y in zip(xs, ys)
               if (not logx or x > 0) and (not logy or y > 0)]
        c = _COLORS[k % len(_COLORS)]
        if pts:
            path = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{path}"/>')
        ly = pad_t + 14 + 18 * k
        out.append(f'<line x1="{width - pad_r + 10}" y1="{ly - 4}" x2="{width - pad_r + 30}" '
                   f'y2="{ly - 4}" stroke="{c}" stroke-width="2"/>')
        out.append(f'<text x="{width - pad_r + 35}" y="{ly}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_result(result, path):
    """SVG of a result according to its ``plot`` entry; returns ``None`` without one."""
    pl = result.plot
    if not pl or not result.rows:
        return None
    x = result.column(pl["x"])
    series = []
    groups = [None]
    if pl.get("group"):
        g = result.column(pl["group"])
        groups = list(dict.fromkeys(g.tolist()))
    for grp in groups:
        sel = np.ones(len(x), bool) if grp is None else (result.column(pl["group"]) == grp)
        for name in pl["y"]:
            label = name if grp is None else f"{name} {pl['group']}={_fmt(grp)}"
            series.append((label, x[sel].astype(float), result.column(name)[sel].astype(float)))
    Path(path).write_text(svg_lineplot(series, pl.get("logx", False), pl.get("logy", False),
                                       title=result.kind, xlabel=pl["x"]))
    return Path(path)
