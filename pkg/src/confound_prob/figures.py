"""Self-contained SVG figures.

Each plotted datum gets a ``<text class="datum">`` node whose ``data-*``
attributes carry the exact numbers from the results file (10 significant
digits), so figures can be checked by parsing rather than by pixels.
"""

from __future__ import annotations

import math
from statistics import median
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from .report import fmt

# Domains are coloured in sorted-name order from this list, cycling.
PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")
FIGURES = ("e-vs-p", "case-bars", "prior-sensitivity")

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=160, top=40, bottom=60)


def domain_colors(domains: Sequence[str]) -> dict[str, str]:
    return {d: PALETTE[i % len(PALETTE)] for i, d in enumerate(sorted(set(domains)))}


def moving_median(values: Sequence[float], window: int = 3) -> list[float]:
    """Centred running median; the window shrinks at the ends."""
    half = window // 2
    return [median(values[max(0, i - half): i + half + 1]) for i in range(len(values))]


class _Canvas:
    def __init__(self, title: str, width: int = WIDTH, height: int = HEIGHT):
        self.width, self.height = width, height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
            f'<text class="title" x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def text(self, x, y, s, **attrs) -> None:
        extra = "".join(f" {k.replace('_', '-')}={quoteattr(str(v))}" for k, v in attrs.items())
        self.add(f'<text x="{x:.2f}" y="{y:.2f}"{extra}>{escape(str(s))}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


class _Axes:
    def __init__(self, canvas: _Canvas, xlim, ylim):
        self.c = canvas
        self.x0, self.x1 = MARGIN["left"], canvas.width - MARGIN["right"]
        self.y0, self.y1 = canvas.height - MARGIN["bottom"], MARGIN["top"]
        self.xlim, self.ylim = xlim, ylim

    def px(self, x: float) -> float:
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * (self.x1 - self.x0)

    def py(self, y: float) -> float:
        lo, hi = self.ylim
        return self.y0 - (y - lo) / (hi - lo) * (self.y0 - self.y1)

    def frame(self, xlabel: str, ylabel: str, xticks, yticks) -> None:
        c = self.c
        c.add(f'<line class="axis" x1="{self.x0}" y1="{self.y0}" x2="{self.x1}" y2="{self.y0}" stroke="black"/>')
        c.add(f'<line class="axis" x1="{self.x0}" y1="{self.y0}" x2="{self.x0}" y2="{self.y1}" stroke="black"/>')
        for t in xticks:
            c.text(self.px(t), self.y0 + 16, f"{t:g}", text_anchor="middle", **{"class": "tick"})
        for t in yticks:
            c.text(self.x0 - 6, self.py(t) + 4, f"{t:g}", text_anchor="end", **{"class": "tick"})
        c.text((self.x0 + self.x1) / 2, self.y0 + 40, xlabel, text_anchor="middle", **{"class": "label"})
        c.add(
            f'<text class="label" x="18" y="{(self.y0 + self.y1) / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {(self.y0 + self.y1) / 2:.1f})">{escape(ylabel)}</text>'
        )


def _legend(c: _Canvas, colors: dict[str, str]) -> None:
    x = c.width - MARGIN["right"] + 14
    for i, (name, color) in enumerate(colors.items()):
        y = MARGIN["top"] + 14 + 16 * i
        c.add(f'<rect class="legend" x="{x}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
        c.text(x + 16, y, name, **{"class": "legend"})


def _nice_max(x: float) -> float:
    return max(1.0, math.ceil(x * 1.05 * 2) / 2)


def e_vs_p(rows: Sequence[dict]) -> str:
    """Scatter of posterior exceedance against E-value with a running-median trend."""
    if not rows:
        raise ValueError("no results to plot")
    colors = domain_colors([r["domain"] for r in rows])
    c = _Canvas("Posterior P(Gamma >= E) against the E-value")
    xmax = _nice_max(max(r["evalue"] for r in rows))
    ax = _Axes(c, (1.0, xmax), (0.0, 1.0))
    ax.frame("E-value", "P(Gamma >= Gamma*)", [1.0 + (xmax - 1.0) * k / 4 for k in range(5)], [0, 0.25, 0.5, 0.75, 1.0])

    ordered = sorted(rows, key=lambda r: (r["evalue"], r["case_id"]))
    trend = moving_median([r["p_exceed"] for r in ordered], 3)
    pts = " ".join(f"{ax.px(r['evalue']):.2f},{ax.py(t):.2f}" for r, t in zip(ordered, trend))
    c.add(f'<polyline class="trend" points="{pts}" fill="none" stroke="#444" stroke-dasharray="5,4"/>')
    for r, t in zip(ordered, trend):
        c.text(ax.px(r["evalue"]), ax.py(t), "", **{"class": "trend-datum", "data-evalue": fmt(r["evalue"]),
                                                     "data-p-exceed": fmt(t), "visibility": "hidden"})

    for r in rows:
        x, y = ax.px(r["evalue"]), ax.py(r["p_exceed"])
        c.add(f'<circle class="point" cx="{x:.2f}" cy="{y:.2f}" r="5" fill="{colors[r["domain"]]}"/>')
        c.text(x + 7, y - 6, fmt(r["p_exceed"]), **{
            "class": "datum", "data-case": r["case_id"], "data-domain": r["domain"],
            "data-evalue": fmt(r["evalue"]), "data-p-exceed": fmt(r["p_exceed"]), "font-size": "8"})
    _legend(c, colors)
    return c.render()


def case_bars(rows: Sequence[dict]) -> str:
    """Horizontal bars, most vulnerable case on top."""
    if not rows:
        raise ValueError("no results to plot")
    ordered = sorted(rows, key=lambda r: (-r["p_exceed"], r["case_id"]))
    colors = domain_colors([r["domain"] for r in rows])
    bar_h = 22
    height = MARGIN["top"] + MARGIN["bottom"] + bar_h * len(ordered)
    c = _Canvas("Case-level posterior exceedance probability", height=max(HEIGHT, height))
    ax = _Axes(c, (0.0, 1.0), (0.0, 1.0))
    ax.frame("P(Gamma >= Gamma*)", "", [0, 0.25, 0.5, 0.75, 1.0], [])
    for i, r in enumerate(ordered):
        y = MARGIN["top"] + i * bar_h + 3
        w = ax.px(r["p_exceed"]) - ax.x0
        c.add(f'<rect class="bar" x="{ax.x0}" y="{y}" width="{w:.2f}" height="{bar_h - 6}" '
              f'fill="{colors[r["domain"]]}"/>')
        c.text(ax.x0 - 6, y + bar_h / 2, r["case_id"], text_anchor="end", **{"class": "case-label"})
        c.text(ax.x0 + w + 4, y + bar_h / 2, fmt(r["p_exceed"]), **{
            "class": "datum", "data-rank": i + 1, "data-case": r["case_id"], "data-domain": r["domain"],
            "data-p-exceed": fmt(r["p_exceed"])})
    _legend(c, colors)
    return c.render()


def prior_sensitivity(sweeps: dict[str, Sequence[tuple[float, float]]]) -> str:
    """One polyline per case across the sigma_gamma grid."""
    if not sweeps:
        raise ValueError("no sweep results to plot")
    colors = {cid: PALETTE[i % len(PALETTE)] for i, cid in enumerate(sweeps)}
    c = _Canvas("Exceedance probability across prior scales")
    sgs = [sg for pts in sweeps.values() for sg, _ in pts]
    lo, hi = min(sgs), max(sgs)
    if hi == lo:
        lo, hi = lo * 0.5, hi * 1.5
    ax = _Axes(c, (lo, hi), (0.0, 1.0))
    ax.frame("sigma_gamma", "P(Gamma >= Gamma*)", sorted(set(sgs)), [0, 0.25, 0.5, 0.75, 1.0])
    for cid, pts in sweeps.items():
        coords = " ".join(f"{ax.px(sg):.2f},{ax.py(p):.2f}" for sg, p in pts)
        c.add(f'<polyline class="series" data-case={quoteattr(cid)} points="{coords}" fill="none" '
              f'stroke="{colors[cid]}" stroke-width="1.5"/>')
        for sg, p in pts:
            c.add(f'<circle class="vertex" cx="{ax.px(sg):.2f}" cy="{ax.py(p):.2f}" r="3" fill="{colors[cid]}"/>')
            c.text(ax.px(sg) + 4, ax.py(p) - 4, fmt(p), **{
                "class": "datum", "data-case": cid, "data-sigma-gamma": fmt(sg), "data-p-exceed": fmt(p),
                "font-size": "8"})
    _legend(c, colors)
    return c.render()
