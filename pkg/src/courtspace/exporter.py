"""File exports: motion-chart frames, hull and MDS SVGs, markdown report, phase-model JSON.

Every writer is deterministic: fixed key order, fixed precision, no
generation timestamps.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .errors import InputError, IoFailure
from .geometry import HullMetrics
from .ingest import CourtSpec, Frame, sorted_tags
from .segmentation import Label, Metric, SpacingSummary

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def round3(x: float) -> float:
    """Round to 3 decimals, half-even on the shortest decimal representation."""
    q = Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN)
    return float(q) + 0.0


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


@dataclass(frozen=True)
class RenderSpec:
    court: CourtSpec = field(default_factory=CourtSpec)
    pixels_per_meter: float = 20.0
    show_hull: bool = True
    show_ids: bool = True
    palette: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.pixels_per_meter > 0:
            raise ValueError("pixels_per_meter must be > 0")

    def color(self, tag: str, index: int) -> str:
        return self.palette.get(tag, PALETTE[index % len(PALETTE)])


# motion frames ----------------------------------------------------------------


def motion_frames_json(frames: Sequence[Frame]) -> str:
    if len(frames) == 0:
        raise InputError("no frames to export")
    items = []
    for f in frames:
        pos = {tag: [round3(f.positions[tag][0]), round3(f.positions[tag][1])] for tag in f.tags}
        items.append({"t_ms": int(f.t_ms), "positions": pos})
    return json.dumps(items, separators=(",", ":")) + "\n"


def export_motion_frames(frames: Sequence[Frame], path) -> Path:
    """JSON array of ``{"t_ms": int, "positions": {tag: [x, y]}}`` at 3 decimals."""
    return write_text(path, motion_frames_json(frames))


def load_motion_frames(path) -> list[Frame]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return [Frame(int(d["t_ms"]), {str(k): (float(v[0]), float(v[1])) for k, v in d["positions"].items()}) for d in data]


# SVG ----------------------------------------------------------------------------


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _svg_open(width: float, height: float) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
    ]


def hull_svg(frame: Frame, hull: HullMetrics, spec: RenderSpec | None = None) -> str:
    spec = spec or RenderSpec()
    if hull.t_ms != frame.t_ms:
        raise InputError(f"hull t={hull.t_ms} does not belong to frame t={frame.t_ms}")
    s = spec.pixels_per_meter
    court = spec.court
    W, H = court.length_m * s, court.width_m * s

    def px(p):
        # court y grows upward, SVG y grows downward
        return p[0] * s, H - p[1] * s

    out = _svg_open(W, H)
    out.append(f"<title>t = {frame.t_ms} ms, hull area {hull.area_m2:.3f} m2</title>")
    out.append(f'<rect x="0.00" y="0.00" width="{_f(W)}" height="{_f(H)}" fill="#f4e3c1" stroke="#333333" stroke-width="2"/>')
    out.append(f'<line x1="{_f(W / 2)}" y1="0.00" x2="{_f(W / 2)}" y2="{_f(H)}" stroke="#333333" stroke-width="1.5"/>')
    if spec.show_hull:
        verts = [px(v) for v in hull.hull_vertices]
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in verts)
        if len(verts) >= 3:
            out.append(f'<polygon points="{pts}" fill="#4a90d9" fill-opacity="0.35" stroke="#1f4e79" stroke-width="2"/>')
        elif len(verts) == 2:
            out.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e79" stroke-width="2"/>')
    for i, tag in enumerate(frame.tags):
        x, y = px(frame.positions[tag])
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(0.3 * s)}" fill="{spec.color(tag, i)}"/>')
        if spec.show_ids:
            out.append(
                f'<text x="{_f(x + 0.4 * s)}" y="{_f(y - 0.4 * s)}" font-family="sans-serif" font-size="{_f(0.6 * s)}">{escape(tag)}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_hull_svg(frame: Frame, hull: HullMetrics, spec: RenderSpec | None, path) -> Path:
    return write_text(path, hull_svg(frame, hull, spec))


def mds_svg(layouts, shares, spec: RenderSpec | None = None, columns: int = 4, panel_px: float = 240.0) -> str:
    """One square panel per cluster, all panels on a common scale."""
    spec = spec or RenderSpec()
    share_of = shares.shares() if hasattr(shares, "shares") else dict(shares)
    n = len(layouts)
    cols = max(1, min(columns, n))
    rows = max(1, math.ceil(n / cols))
    W, H = cols * panel_px, rows * panel_px
    extent = max([float(abs(lay.coords).max()) for lay in layouts if lay.coords.size] + [1e-9])
    half = panel_px / 2.0
    scale = (half - 30.0) / extent

    out = _svg_open(W, H)
    for idx, lay in enumerate(layouts):
        ox, oy = (idx % cols) * panel_px, (idx // cols) * panel_px
        cx, cy = ox + half, oy + half + 8.0
        share = share_of.get(lay.cluster_id, 0.0)
        out.append(f'<g id="C{lay.cluster_id}">')
        out.append(f'<rect x="{_f(ox + 2)}" y="{_f(oy + 2)}" width="{_f(panel_px - 4)}" height="{_f(panel_px - 4)}" fill="#ffffff" stroke="#999999"/>')
        out.append(
            f'<text x="{_f(ox + 10)}" y="{_f(oy + 20)}" font-family="sans-serif" font-size="14" font-weight="bold">'
            f"C{lay.cluster_id} ({share:.2f}%)</text>"
        )
        out.append(f'<line x1="{_f(ox + 10)}" y1="{_f(cy)}" x2="{_f(ox + panel_px - 10)}" y2="{_f(cy)}" stroke="#dddddd"/>')
        out.append(f'<line x1="{_f(cx)}" y1="{_f(oy + 28)}" x2="{_f(cx)}" y2="{_f(oy + panel_px - 10)}" stroke="#dddddd"/>')
        for i, (tag, (u, v)) in enumerate(zip(lay.labels, lay.coords)):
            x, y = cx + u * scale, cy - v * scale
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="5.00" fill="{spec.color(tag, i)}"/>')
            out.append(f'<text x="{_f(x + 7)}" y="{_f(y - 7)}" font-family="sans-serif" font-size="12">{escape(tag)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_mds_svg(layouts, shares, spec: RenderSpec | None, path) -> Path:
    return write_text(path, mds_svg(layouts, shares, spec))


# report -------------------------------------------------------------------------

TABLE_ROWS = ("Min", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max")


def _num(x) -> str:
    return "NA" if x is None else f"{round3(x):.3f}"


def report_markdown(
    summaries: Mapping[Metric, Mapping[Label, SpacingSummary]],
    crosstab=None,
    curve: Sequence[tuple[int, float]] | None = None,
    chosen_k: int | None = None,
) -> str:
    lines = ["# Spacing and game-phase report", ""]
    lines += ["## Average distances (m) and convex hull areas (m²)", ""]
    columns = [
        (Metric.MEAN_DISTANCE, Label.OFFENSE),
        (Metric.MEAN_DISTANCE, Label.DEFENSE),
        (Metric.HULL_AREA, Label.OFFENSE),
        (Metric.HULL_AREA, Label.DEFENSE),
    ]
    lines.append("| | Average distances: attack | Average distances: defence | Convex hull area: attack | Convex hull area: defence |")
    lines.append("|---|---:|---:|---:|---:|")
    cells = {}
    for metric, label in columns:
        summ = (summaries.get(metric) or {}).get(label)
        cells[(metric, label)] = dict(summ.rows()) if summ is not None else {}
    for row in TABLE_ROWS:
        vals = [_num(cells[c].get(row)) for c in columns]
        lines.append(f"| {row} | " + " | ".join(vals) + " |")
    counts = []
    for label in (Label.OFFENSE, Label.DEFENSE):
        summ = (summaries.get(Metric.MEAN_DISTANCE) or {}).get(label)
        counts.append(f"{label.value.lower()}: {summ.n if summ else 0}")
    lines += ["", "Frames per label: " + ", ".join(counts) + ".", ""]

    lines += ["## BD/TD by number of clusters", ""]
    if curve:
        lines += ["| k | BD/TD | gain |", "|---:|---:|---:|"]
        prev = None
        for k, r in curve:
            gain = "" if prev is None else _num(r - prev)
            lines.append(f"| {k} | {_num(r)} | {gain} |")
            prev = r
        if chosen_k is not None:
            lines += ["", f"Chosen k = {chosen_k}."]
    else:
        lines.append("_No BD/TD curve computed._")
    lines.append("")

    lines += ["## Clusters versus offense/defense", ""]
    if crosstab is not None and len(crosstab) > 0:
        lines += ["| Cluster | Frames | Share (%) | Offense (%) | Defense (%) |", "|---|---:|---:|---:|---:|"]
        for r in crosstab.rows:
            lines.append(
                f"| C{r.cluster} | {r.n_frames} | {r.share_of_total:.2f} | {r.offense_pct:.2f} | {r.defense_pct:.2f} |"
            )
    else:
        lines.append("_No cluster crosstab available._")
    lines.append("")
    return "\n".join(lines)


def write_report(summaries, crosstab, curve, path, chosen_k: int | None = None) -> Path:
    return write_text(path, report_markdown(summaries, crosstab, curve, chosen_k))


def parse_report_table(text: str) -> dict[tuple[str, str], float]:
    """Read the spacing table back: ``{(row, column header): value}``; NA cells are skipped."""
    out = {}
    header = None
    for line in text.splitlines():
        if line.startswith("| |"):
            header = [c.strip() for c in line.strip("|").split("|")][1:]
            continue
        if header and line.startswith("|---"):
            continue
        if header and line.startswith("| "):
            cells = [c.strip() for c in line.strip().strip("|").split("|")]
            if cells[0] not in TABLE_ROWS:
                break
            for name, val in zip(header, cells[1:]):
                if val != "NA":
                    out[(cells[0], name)] = float(val)
        elif header and out:
            break
    return out


def write_phase_model(model, layouts, path) -> Path:
    return write_text(path, model.to_json(layouts))


def write_json(obj, path) -> Path:
    return write_text(path, json.dumps(obj, indent=2) + "\n")


def tag_colors(tags) -> dict[str, str]:
    return {t: PALETTE[i % len(PALETTE)] for i, t in enumerate(sorted_tags(tags))}
