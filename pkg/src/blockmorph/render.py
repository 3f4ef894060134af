"""Deterministic artifact writers: minimal PNG and SVG generation.

Everything here is plain string/bytes assembly (no plotting library), so
identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .ingest import Block


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    return (struct.pack(">I", len(payload)) + tag + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF))


def grayscale_png(cells: np.ndarray, cell_px: int = 24) -> bytes:
    """8-bit grayscale PNG from a (rows, cols) array of [0,1] lightness."""
    cells = np.clip(np.asarray(cells, dtype=float), 0.0, 1.0)
    gray = np.round(cells * 255.0).astype(np.uint8)
    img = np.repeat(np.repeat(gray, cell_px, axis=0), cell_px, axis=1)
    h, w = img.shape
    raw = b"".join(b"\x00" + img[r].tobytes() for r in range(h))
    return (b"\x89PNG\r\n\x1a\n"
            + _png_chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0))
            + _png_chunk(b"IDAT", zlib.compress(raw, 9))
            + _png_chunk(b"IEND", b""))


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def diverging_color(v: float) -> str:
    """Blue-white-red ramp anchored at -1, 0, +1."""
    v = max(-1.0, min(1.0, float(v)))
    neg = (33, 102, 172)
    mid = (247, 247, 247)
    pos = (178, 24, 43)
    a, b, t = (mid, pos, v) if v >= 0 else (mid, neg, -v)
    rgb = tuple(round(a[i] + (b[i] - a[i]) * t) for i in range(3))
    return "#%02x%02x%02x" % rgb


def height_color(h: float, h_max: float) -> str:
    """Dark-with-height blue ramp for extruded footprints."""
    t = min(max(h / h_max if h_max > 0 else 0.0, 0.0), 1.0)
    r = round(224 - 160 * t)
    g = round(232 - 140 * t)
    b = round(240 - 80 * t)
    return "#%02x%02x%02x" % (r, g, b)


def _ring_path(pts: np.ndarray, tx, ty) -> str:
    coords = " ".join(f"{_fmt(tx(x))},{_fmt(ty(y))}" for x, y in pts)
    return coords


def block_svg(block: Block, size: int = 120) -> str:
    """Footprint thumbnail: block boundary plus height-shaded buildings."""
    pts = block.boundary.outer.pts
    x0, y0 = float(pts[:, 0].min()), float(pts[:, 1].min())
    x1, y1 = float(pts[:, 0].max()), float(pts[:, 1].max())
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.05 * span
    scale = size / (span + 2 * pad)

    def tx(x):
        return (x - x0 + pad) * scale

    def ty(y):
        return size - (y - y0 + pad) * scale

    h_max = max((b.height for b in block.buildings), default=1.0)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
             f'height="{size}" viewBox="0 0 {size} {size}">']
    parts.append(f'<polygon points="{_ring_path(pts, tx, ty)}" fill="#f4f1ea" '
                 'stroke="#555555" stroke-width="1"/>')
    for hole in block.boundary.holes:
        parts.append(f'<polygon points="{_ring_path(hole.pts, tx, ty)}" '
                     'fill="#ffffff" stroke="#555555" stroke-width="0.5"/>')
    for b in sorted(block.buildings, key=lambda b: b.id):
        color = height_color(b.height, h_max)
        parts.append(f'<polygon points="{_ring_path(b.footprint.outer.pts, tx, ty)}" '
                     f'fill="{color}" stroke="#333333" stroke-width="0.5"/>')
    parts.append("</svg>")
    return "".join(parts)


def som_grid_svg(payload: dict, cell_px: int = 48) -> str:
    """Colored neuron grid; empty neurons are hatched."""
    rows, cols = payload["rows"], payload["cols"]
    w, h = cols * cell_px, rows * cell_px
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             f'viewBox="0 0 {w} {h}">',
             '<defs><pattern id="empty" width="6" height="6" '
             'patternUnits="userSpaceOnUse" patternTransform="rotate(45)">'
             '<rect width="6" height="6" fill="#ffffff"/>'
             '<line x1="0" y1="0" x2="0" y2="6" stroke="#bbbbbb" '
             'stroke-width="2"/></pattern></defs>']
    for cell in payload["cells"]:
        x = cell["col"] * cell_px
        y = cell["row"] * cell_px
        if cell["empty"]:
            fill = "url(#empty)"
        else:
            r, g, b = cell["rgb"]
            fill = "#%02x%02x%02x" % (r, g, b)
        parts.append(f'<rect x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" '
                     f'fill="{fill}" stroke="#888888" stroke-width="1"/>')
        n = len(cell["samples"])
        if n:
            parts.append(f'<text x="{x + 3}" y="{y + 12}" font-size="9" '
                         f'font-family="monospace" fill="#222222">{n}</text>')
    parts.append("</svg>")
    return "".join(parts)


def pearson_svg(matrix: np.ndarray, order: tuple[str, ...],
                cell_px: int = 32) -> str:
    """Correlation heatmap with a diverging color scale."""
    n = len(order)
    margin = 56
    w = h = margin + n * cell_px
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             f'viewBox="0 0 {w} {h}" font-family="monospace" font-size="10">']
    for i, name in enumerate(order):
        parts.append(f'<text x="{margin - 4}" y="{margin + i * cell_px + cell_px * 0.65}" '
                     f'text-anchor="end">{name}</text>')
        parts.append(f'<text x="{margin + i * cell_px + cell_px / 2}" y="{margin - 6}" '
                     f'text-anchor="middle">{name}</text>')
    for i in range(n):
        for j in range(n):
            v = float(matrix[i, j])
            x = margin + j * cell_px
            y = margin + i * cell_px
            parts.append(f'<rect x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" '
                         f'fill="{diverging_color(v)}" stroke="#ffffff" stroke-width="1">'
                         f'<title>{order[i]} vs {order[j]}: {v:.4f}</title></rect>')
            parts.append(f'<text x="{x + cell_px / 2}" y="{y + cell_px * 0.62}" '
                         f'text-anchor="middle" fill="#333333">{v:.2f}</text>')
    parts.append("</svg>")
    return "".join(parts)
