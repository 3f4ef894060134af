"""The 15 block-scale morphology indicators, their normalization, the
pairwise Pearson matrix, and the four named metric sets.

Indicator order is fixed and shared by every file format:
MaxH, MinH, AveH, SDH, WAH, AS, BCR, FAR, CAR, OSR, GHWR, NOB, BA, BSF, BSS.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConstantIndicator,
    DegenerateBlock,
    ParseError,
    UnknownSet,
    ZeroVariance,
)
from .geometry import (
    aabb_area,
    delaunay_mst,
    min_obb_area,
    perimeter,
    polygon_area,
    polygon_centroid,
)
from .ingest import Block, Corpus

INDICATORS = ("MaxH", "MinH", "AveH", "SDH", "WAH", "AS", "BCR", "FAR",
              "CAR", "OSR", "GHWR", "NOB", "BA", "BSF", "BSS")

SET_COMPOSITIONS: dict[str, tuple[str, ...]] = {
    "Spacemate": ("AS", "BCR", "FAR", "OSR"),
    "BlockShape": ("FAR", "BA", "BSF", "BSS"),
    "OneBMC": ("WAH", "BCR", "NOB", "BA"),
    "AllBlockMetric": INDICATORS,
}

METRICS_VERSION = 1


@dataclass(frozen=True)
class MetricRecord:
    """All 15 indicator values for one block."""

    block_id: str
    max_h: float
    min_h: float
    ave_h: float
    sdh: float
    wah: float
    as_: float
    bcr: float
    far: float
    car: float
    osr: float
    ghwr: float
    nob: int
    ba: float
    bsf: float
    bss: float

    _FIELD_BY_INDICATOR = {
        "MaxH": "max_h", "MinH": "min_h", "AveH": "ave_h", "SDH": "sdh",
        "WAH": "wah", "AS": "as_", "BCR": "bcr", "FAR": "far", "CAR": "car",
        "OSR": "osr", "GHWR": "ghwr", "NOB": "nob", "BA": "ba", "BSF": "bsf",
        "BSS": "bss",
    }

    def value(self, indicator: str) -> float:
        return float(getattr(self, self._FIELD_BY_INDICATOR[indicator]))

    def vector(self, indicators=INDICATORS) -> np.ndarray:
        return np.asarray([self.value(k) for k in indicators], dtype=float)

    def as_dict(self) -> dict:
        d = {"block_id": self.block_id}
        d.update({k: self.value(k) for k in INDICATORS})
        d["NOB"] = self.nob
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MetricRecord":
        kw = {f: d[k] for k, f in cls._FIELD_BY_INDICATOR.items()}
        kw["nob"] = int(kw["nob"])
        return cls(block_id=d["block_id"], **kw)


@dataclass
class MetricSet:
    """A named ordered indicator subset plus corpus min/max per indicator."""

    name: str
    indicators: tuple[str, ...]
    norm_params: tuple[tuple[str, float, float], ...] | None = None


@dataclass
class FeatureMatrix:
    """Per-block normalized feature rows for one metric set."""

    set_name: str
    indicators: tuple[str, ...]
    norm_params: tuple[tuple[str, float, float], ...]
    block_ids: tuple[str, ...]
    rows: np.ndarray  # (N, M), entries in [0, 1]


def select_set(name: str) -> MetricSet:
    """The fixed composition for one of the four set names."""
    if name not in SET_COMPOSITIONS:
        raise UnknownSet(
            f"unknown metric set {name!r}; expected one of {sorted(SET_COMPOSITIONS)}")
    return MetricSet(name=name, indicators=tuple(SET_COMPOSITIONS[name]))


def compute_metrics(block: Block) -> MetricRecord:
    """All 15 indicators for one block.

    Storeys are taken from the block's buildings as-is; floor plates are
    uniform (each storey contributes the footprint area). SDH and GHWR are
    defined as 0 for single-building blocks.
    """
    n = len(block.buildings)
    if n < 1:
        raise DegenerateBlock(f"block {block.id} has no buildings")
    heights = np.asarray([b.height for b in block.buildings], dtype=float)
    storeys = np.asarray([b.storeys for b in block.buildings], dtype=float)
    areas = np.asarray([polygon_area(b.footprint) for b in block.buildings])
    perims = np.asarray([perimeter(b.footprint) for b in block.buildings])

    block_area = polygon_area(block.boundary)
    footprint_total = float(areas.sum())
    if footprint_total > block_area * (1 + 1e-9):
        raise DegenerateBlock(
            f"block {block.id}: footprints cover {footprint_total:.1f} m^2 "
            f"> block area {block_area:.1f} m^2")

    h_min = float(heights.min())
    h_max = float(heights.max())
    # means live in the height hull; clamp away 1-ulp division noise
    ave_h = min(max(float(heights.mean()), h_min), h_max)
    sdh = float(math.sqrt(((heights - ave_h) ** 2).sum() / (n - 1))) if n > 1 else 0.0
    wah = min(max(float((areas * heights).sum() / footprint_total), h_min), h_max)

    floor_area = float((areas * storeys).sum())
    bcr = footprint_total / block_area
    far = floor_area / block_area
    walls = float((perims * heights).sum())
    ground = block_area - footprint_total
    car = (walls + footprint_total + ground) / block_area
    osr = ground / floor_area

    if n > 1:
        centroids = [polygon_centroid(b.footprint) for b in block.buildings]
        mst = delaunay_mst(centroids)
        mean_gap = mst.total_length / (n - 1)
        ghwr = ave_h / mean_gap if mean_gap > 1e-9 else 0.0
    else:
        ghwr = 0.0

    return MetricRecord(
        block_id=block.id,
        max_h=h_max,
        min_h=h_min,
        ave_h=ave_h,
        sdh=sdh,
        wah=wah,
        as_=float(storeys.mean()),
        bcr=bcr,
        far=far,
        car=car,
        osr=osr,
        ghwr=ghwr,
        nob=n,
        ba=block_area,
        bsf=block_area / aabb_area(block.boundary),
        bss=block_area / min_obb_area(block.boundary),
    )


def corpus_metrics(corpus: Corpus) -> list[MetricRecord]:
    """Metric records for every block, in block-id order."""
    return [compute_metrics(b) for b in sorted(corpus.blocks, key=lambda b: b.id)]


def fit_norm_params(records: list[MetricRecord],
                    mset: MetricSet) -> tuple[tuple[str, float, float], ...]:
    params = []
    for ind in mset.indicators:
        vals = [r.value(ind) for r in records]
        lo, hi = min(vals), max(vals)
        if not (lo < hi):
            raise ConstantIndicator(f"indicator {ind} is constant ({lo}) over the corpus")
        params.append((ind, float(lo), float(hi)))
    return tuple(params)


def normalize(records: list[MetricRecord], mset: MetricSet) -> FeatureMatrix:
    """Min-max scale the set's indicators over the corpus to [0, 1].

    The fitted (min, max) pairs are recorded on the MetricSet so queries can
    reuse them later.
    """
    if len(records) < 2:
        raise ConstantIndicator("need at least 2 blocks to normalize")
    if mset.norm_params is None:
        mset.norm_params = fit_norm_params(records, mset)
    rows = np.empty((len(records), len(mset.indicators)), dtype=float)
    for j, (ind, lo, hi) in enumerate(mset.norm_params):
        for i, r in enumerate(records):
            rows[i, j] = (r.value(ind) - lo) / (hi - lo)
    return FeatureMatrix(
        set_name=mset.name,
        indicators=mset.indicators,
        norm_params=mset.norm_params,
        block_ids=tuple(r.block_id for r in records),
        rows=rows,
    )


def pearson_matrix(records: list[MetricRecord]) -> np.ndarray:
    """Pairwise Pearson correlations of the 15 indicators (15x15)."""
    if len(records) < 3:
        raise ZeroVariance("need at least 3 blocks for correlations")
    data = np.asarray([r.vector() for r in records], dtype=float)
    std = data.std(axis=0)
    flat = [INDICATORS[i] for i in np.nonzero(std == 0)[0]]
    if flat:
        raise ZeroVariance(f"indicators with zero variance: {', '.join(flat)}")
    m = np.corrcoef(data, rowvar=False)
    return np.clip(m, -1.0, 1.0)


# --- metrics file ----------------------------------------------------------


def save_metrics(records: list[MetricRecord], pearson: np.ndarray, path) -> None:
    doc = {
        "version": METRICS_VERSION,
        "indicator_order": list(INDICATORS),
        "set_compositions": {k: list(v) for k, v in SET_COMPOSITIONS.items()},
        "records": [r.as_dict() for r in records],
        "pearson": [[float(v) for v in row] for row in pearson],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_metrics(path) -> tuple[list[MetricRecord], np.ndarray]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        records = [MetricRecord.from_dict(d) for d in doc["records"]]
        pearson = np.asarray(doc["pearson"], dtype=float)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return records, pearson


def write_csv(records: list[MetricRecord], path) -> None:
    """Fixed 16-column CSV: block_id followed by the indicator order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("block_id",) + INDICATORS)
        for r in records:
            w.writerow([r.block_id] + [repr(r.value(k)) if k != "NOB" else r.nob
                                       for k in INDICATORS])
