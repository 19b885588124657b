use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::output::{file_name, PlotSpec};
use crate::Failure;

#[derive(Deserialize)]
struct ReportHead {
    csv: String,
    plot: PlotSpec,
}

const TEMPLATE: &str = r##"#!/usr/bin/env python3
# Draws __TITLE__ from __CSV__ into an SVG next to this script.
# Standard library only.
import csv
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
CSV = os.path.join(HERE, __CSV__)
SVG = os.path.join(HERE, __SVG__)
TITLE = __TITLE__
X = __X__
YS = __YS__
LOG_Y = __LOG__

W, H, PAD = 640, 420, 60
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def number(s):
    try:
        v = float(s)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def load():
    if not os.path.exists(CSV):
        return {}
    with open(CSV, newline="") as fh:
        rows = list(csv.DictReader(fh))
    series = {}
    for y in YS:
        pts = []
        for r in rows:
            a, b = number(r.get(X)), number(r.get(y))
            if a is None or b is None or (LOG_Y and b <= 0):
                continue
            pts.append((a, math.log10(b) if LOG_Y else b))
        if pts:
            series[y] = sorted(pts)
    return series


def ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def main():
    series = load()
    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" font-family="sans-serif" font-size="12">' % (W, H)]
    out.append('<rect width="100%" height="100%" fill="white"/>')
    out.append('<text x="%d" y="24" text-anchor="middle" font-size="15">%s</text>' % (W // 2, TITLE))
    x0, x1, y0, y1 = PAD, W - PAD, H - PAD, PAD
    out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (x0, y0, x1, y0))
    out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (x0, y0, x0, y1))
    ylab = ("log10 " if LOG_Y else "") + ", ".join(YS)
    out.append('<text x="%d" y="%d" text-anchor="middle">%s</text>' % (W // 2, H - 15, X))
    out.append('<text x="15" y="%d" transform="rotate(-90 15 %d)" text-anchor="middle">%s</text>' % (H // 2, H // 2, ylab))
    if not series:
        out.append('<text x="%d" y="%d" text-anchor="middle" fill="gray">no data</text>' % (W // 2, H // 2))
    else:
        xs = [p[0] for s in series.values() for p in s]
        ys = [p[1] for s in series.values() for p in s]
        xl, xh, yl, yh = min(xs), max(xs), min(ys), max(ys)
        if xh == xl:
            xl, xh = xl - 0.5, xh + 0.5
        if yh == yl:
            yl, yh = yl - 0.5, yh + 0.5
        sx = lambda v: x0 + (v - xl) / (xh - xl) * (x1 - x0)
        sy = lambda v: y0 - (v - yl) / (yh - yl) * (y0 - y1)
        for t in ticks(xl, xh):
            out.append('<text x="%.1f" y="%d" text-anchor="middle">%.3g</text>' % (sx(t), y0 + 16, t))
        for t in ticks(yl, yh):
            out.append('<text x="%d" y="%.1f" text-anchor="end">%.3g</text>' % (x0 - 6, sy(t) + 4, t))
        for i, (name, pts) in enumerate(series.items()):
            c = COLORS[i % len(COLORS)]
            path = " ".join("%.2f,%.2f" % (sx(a), sy(b)) for a, b in pts)
            out.append('<polyline fill="none" stroke="%s" stroke-width="1.5" points="%s"/>' % (c, path))
            for a, b in pts:
                out.append('<circle cx="%.2f" cy="%.2f" r="2.5" fill="%s"/>' % (sx(a), sy(b), c))
            out.append('<text x="%d" y="%d" fill="%s">%s</text>' % (x1 - 150, y1 + 16 * (i + 1), c, name))
    out.append("</svg>")
    with open(SVG, "w") as fh:
        fh.write("\n".join(out) + "\n")
    print(SVG)


if __name__ == "__main__":
    main()
"##;

fn py_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

/// Writes `<stem>.plot.py` beside a JSON report and returns its path.
pub fn emit(report: &Path) -> Result<PathBuf, Failure> {
    let text = fs::read_to_string(report)
        .map_err(|e| Failure::unreadable(format!("cannot read report {}: {e}", report.display())))?;
    let head: ReportHead = serde_json::from_str(&text)
        .map_err(|e| Failure::unreadable(format!("{} is not an ergolab report: {e}", report.display())))?;
    let stem = report.with_extension("");
    let script = crate::output::with_suffix(&stem, "plot.py");
    let svg = file_name(&crate::output::with_suffix(&stem, "svg"));
    let ys = serde_json::to_string(&head.plot.ys).expect("list serializes");
    let body = TEMPLATE
        .replace("__CSV__", &py_str(&head.csv))
        .replace("__SVG__", &py_str(&svg))
        .replace("__TITLE__", &py_str(&head.plot.title))
        .replace("__X__", &py_str(&head.plot.x))
        .replace("__YS__", &ys)
        .replace("__LOG__", if head.plot.log_y { "True" } else { "False" });
    fs::write(&script, body)
        .map_err(|e| Failure::unreadable(format!("cannot write {}: {e}", script.display())))?;
    Ok(script)
}
