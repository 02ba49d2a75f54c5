"""Minimal deterministic SVG line plots (one polyline per series)."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

WIDTH, HEIGHT = 480, 320
MARGIN = 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _scale(values: np.ndarray, lo: float, hi: float, a: float, b: float) -> np.ndarray:
    if hi == lo:
        return np.full_like(values, 0.5 * (a + b), dtype=float)
    return a + (values - lo) * (b - a) / (hi - lo)


def line_plot_svg(x, y, title: str, xlabel: str, ylabel: str, log: bool = False, markers: bool = False) -> str:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if log:
        floor = 1e-300
        x = np.log10(np.maximum(x, floor))
        y = np.log10(np.maximum(y, floor))
    if x.size:
        x0, x1 = float(x.min()), float(x.max())
        y0, y1 = float(min(y.min(), 0.0 if not log else y.min())), float(y.max())
    else:
        x0 = x1 = y0 = y1 = 0.0
    px = _scale(x, x0, x1, MARGIN, WIDTH - MARGIN / 2)
    py = _scale(y, y0, y1, HEIGHT - MARGIN, MARGIN / 2)
    pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
    tick = (lambda v: f"1e{v:.1f}") if log else (lambda v: f"{v:.3g}")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN / 2:.0f}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{MARGIN}" y2="{MARGIN / 2:.0f}" stroke="black"/>',
        f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="14" y="{HEIGHT / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.0f})">{ylabel}</text>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" font-size="10">{tick(x0)}</text>',
        f'<text x="{WIDTH - MARGIN / 2:.0f}" y="{HEIGHT - MARGIN + 16}" text-anchor="end" font-size="10">{tick(x1)}</text>',
        f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end" font-size="10">{tick(y0)}</text>',
        f'<text x="{MARGIN - 4}" y="{MARGIN / 2 + 8:.0f}" text-anchor="end" font-size="10">{tick(y1)}</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>',
    ]
    if markers:
        parts += [f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="3" fill="steelblue"/>' for a, b in zip(px, py)]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(report, kernel, out_dir: str | Path) -> list[Path]:
    """Kernel decay and log-log tissue error plots; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    H = np.asarray(kernel.values, dtype=float)
    tau = kernel.dt * np.arange(H.size)
    k_path = out / "kernel.svg"
    k_path.write_text(line_plot_svg(tau, H, "memory kernel", "tau", "H(tau)"))
    paths = [k_path]
    if report is not None:
        eps = [r.epsilon for r in report.rows]
        err = [r.e_tissue for r in report.rows]
        e_path = out / "error.svg"
        e_path.write_text(line_plot_svg(eps, err, "tissue error vs epsilon", "log10 epsilon", "log10 e_tissue",
                                        log=True, markers=True))
        paths.append(e_path)
    return paths


def polyline_point_count(svg_text: str) -> int:
    root = ET.fromstring(svg_text)
    ns = {"s": "http://www.w3.org/2000/svg"}
    poly = root.find("s:polyline", ns)
    if poly is None:
        return 0
    pts = poly.get("points", "").split()
    return len(pts)

