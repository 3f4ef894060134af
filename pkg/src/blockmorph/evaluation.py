"""Comparison reports across metric sets plus SOM-grid, encoding-map and
correlation artifacts.

All outputs are deterministic: identical inputs and seeds reproduce files
byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import render
from .errors import UnknownBlock
from .ingest import Corpus
from .metrics import INDICATORS, MetricRecord
from .retrieval import Query, results_to_json, retrieve
from .rng import SplitMix64
from .som import EncodingStore, EncodingVector, SomModel

REPORT_VERSION = 1


def _pca_rgb(weights: np.ndarray) -> list[tuple[int, int, int]]:
    """Three principal-component scores scaled to 0..255 per channel.

    Component signs are fixed (largest-magnitude loading positive) and
    zero-variance channels map to neutral 127.
    """
    centered = weights - weights.mean(axis=0, keepdims=True)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    comps = min(3, vt.shape[0])
    scores = np.zeros((len(weights), 3))
    for c in range(comps):
        row = vt[c]
        if row[np.argmax(np.abs(row))] < 0:
            row = -row
        scores[:, c] = centered @ row
    rgb = np.full((len(weights), 3), 127, dtype=int)
    for c in range(3):
        lo, hi = scores[:, c].min(), scores[:, c].max()
        if hi > lo:
            rgb[:, c] = np.round((scores[:, c] - lo) / (hi - lo) * 255).astype(int)
    return [tuple(int(v) for v in row) for row in rgb]


def export_som_grid(model: SomModel, assignments: dict[int, list[str]],
                    seed: int | None = None, samples_per_cell: int = 4) -> dict:
    """Grid payload: per-neuron weights, PCA color, and sample block ids."""
    rng = SplitMix64(model.config.seed if seed is None else seed)
    rgb = _pca_rgb(model.weights)
    cells = []
    for j in range(model.config.neuron_count):
        row, col = model.grid_position(j)
        ids = sorted(assignments.get(j, []))
        if len(ids) > samples_per_cell:
            ids = sorted(rng.sample(ids, samples_per_cell))
        cells.append({
            "index": j,
            "row": row,
            "col": col,
            "weights": [float(v) for v in model.weights[j]],
            "rgb": list(rgb[j]),
            "samples": ids,
            "empty": not assignments.get(j),
        })
    return {
        "set_name": model.set_name,
        "rows": model.config.grid_rows,
        "cols": model.config.grid_cols,
        "cells": cells,
    }


def encoding_lightness(enc: EncodingVector, model: SomModel) -> np.ndarray:
    """Per-neuron lightness 1 - d/max(d) arranged on the grid.

    When every distance is 0 the formula has no information; all cells
    render dark (lightness 0).
    """
    values = np.asarray(enc.values, dtype=float)
    peak = float(values.max())
    light = 1.0 - values / peak if peak > 0 else np.zeros_like(values)
    return light.reshape(model.config.grid_rows, model.config.grid_cols)


def export_encoding_map(enc: EncodingVector, model: SomModel,
                        cell_px: int = 24) -> bytes:
    """Grayscale PNG of the encoding vector on the neuron grid."""
    return render.grayscale_png(encoding_lightness(enc, model), cell_px=cell_px)


def export_correlation_heatmap(pearson: np.ndarray,
                               order: tuple[str, ...] = INDICATORS) -> tuple[str, str]:
    """(CSV text, SVG text) for the correlation matrix."""
    lines = ["," + ",".join(order)]
    for i, name in enumerate(order):
        lines.append(name + "," + ",".join(f"{float(v):.6f}" for v in pearson[i]))
    csv_text = "\n".join(lines) + "\n"
    return csv_text, render.pearson_svg(np.asarray(pearson), order)


def compare_sets(targets: list[str], k: int, models: dict[str, SomModel],
                 stores: dict[str, EncodingStore], corpus: Corpus,
                 records: list[MetricRecord], exclude_self: bool = True) -> dict:
    """Ranked retrievals for each target under every available metric set."""
    record_by_id = {r.block_id: r for r in records}
    blocks = corpus.block_map()
    report_targets = []
    for tid in targets:
        if tid not in blocks or tid not in record_by_id:
            raise UnknownBlock(f"target block {tid!r} not in corpus")
        per_set = {}
        for set_name in sorted(models):
            q = Query(set_name=set_name, block_id=tid, k=k,
                      exclude_self=exclude_self)
            per_set[set_name] = results_to_json(
                retrieve(q, models[set_name], stores[set_name]))
        report_targets.append({
            "block_id": tid,
            "metrics": record_by_id[tid].as_dict(),
            "results": per_set,
        })
    return {
        "version": REPORT_VERSION,
        "k": k,
        "exclude_self": exclude_self,
        "sets": sorted(models),
        "targets": report_targets,
    }


def _report_html(report: dict, corpus: Corpus) -> str:
    blocks = corpus.block_map()
    css = ("body{font-family:sans-serif;margin:16px;}"
           "table{border-collapse:collapse;font-size:12px;}"
           "td,th{border:1px solid #ccc;padding:2px 6px;text-align:right;}"
           ".cards{display:flex;gap:8px;flex-wrap:wrap;margin:4px 0 16px;}"
           ".card{border:1px solid #ddd;padding:4px;font-size:11px;"
           "font-family:monospace;text-align:center;}")
    parts = ["<!DOCTYPE html><html><head><meta charset=\"utf-8\">"
             f"<title>metric-set comparison</title><style>{css}</style></head><body>",
             f"<h1>Metric-set comparison (k={report['k']})</h1>"]
    for entry in report["targets"]:
        tid = entry["block_id"]
        parts.append(f"<h2>Target {tid}</h2>")
        parts.append('<div class="cards"><div class="card">'
                     f'{render.block_svg(blocks[tid])}<br>target</div></div>')
        row_names = "".join(f"<th>{n}</th>" for n in INDICATORS)
        row_vals = "".join(f"<td>{entry['metrics'][n]:.4g}</td>" for n in INDICATORS)
        parts.append(f"<table><tr>{row_names}</tr><tr>{row_vals}</tr></table>")
        for set_name in report["sets"]:
            parts.append(f"<h3>{set_name}</h3>")
            parts.append('<div class="cards">')
            for item in entry["results"][set_name]:
                bid = item["block_id"]
                parts.append('<div class="card">'
                             f'{render.block_svg(blocks[bid])}<br>'
                             f'#{item["rank"]} {bid}<br>d={item["distance"]:.6f}</div>')
            parts.append("</div>")
    parts.append("</body></html>")
    return "".join(parts)


def write_comparison(outdir, targets: list[str], k: int,
                     models: dict[str, SomModel], stores: dict[str, EncodingStore],
                     corpus: Corpus, records: list[MetricRecord],
                     pearson: np.ndarray, exclude_self: bool = True) -> dict:
    """Write the full artifact layout for one comparison run.

    Layout: report.json, report.html, som_grid_<set>.json/.svg,
    encoding_<block>_<set>.png, pearson.csv/.svg.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report = compare_sets(targets, k, models, stores, corpus, records,
                          exclude_self=exclude_self)
    (outdir / "report.json").write_text(json.dumps(report, indent=1) + "\n",
                                        encoding="utf-8")
    (outdir / "report.html").write_text(_report_html(report, corpus),
                                        encoding="utf-8")
    for set_name, model in sorted(models.items()):
        store = stores[set_name]
        assignments: dict[int, list[str]] = {j: [] for j in range(model.config.neuron_count)}
        for bid, row in zip(store.block_ids, store.matrix):
            assignments[int(np.argmin(row))].append(bid)
        payload = export_som_grid(model, assignments)
        (outdir / f"som_grid_{set_name}.json").write_text(
            json.dumps(payload, indent=1) + "\n", encoding="utf-8")
        (outdir / f"som_grid_{set_name}.svg").write_text(
            render.som_grid_svg(payload), encoding="utf-8")
        for tid in targets:
            vec = store.by_id(tid)
            enc = EncodingVector(block_id=tid, values=vec)
            png = export_encoding_map(enc, model)
            (outdir / f"encoding_{tid}_{set_name}.png").write_bytes(png)
    csv_text, svg_text = export_correlation_heatmap(pearson)
    (outdir / "pearson.csv").write_text(csv_text, encoding="utf-8")
    (outdir / "pearson.svg").write_text(svg_text, encoding="utf-8")
    return report
