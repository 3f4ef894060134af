"""Deterministic synthetic fixtures: direct corpora for tests and demo
GeoJSON extracts that exercise the full ingest path.

Generated geometry deliberately varies block shape (rotations, triangles,
L-shapes, diagonal avenues) so every indicator has corpus-wide variance.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .geometry import PolygonM, Ring, point_in_polygon
from .ingest import Block, Building, Corpus
from .rng import SplitMix64

METERS_PER_STOREY = 3.0


def _rotate(pts: np.ndarray, angle: float, cx: float, cy: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    x = pts[:, 0] - cx
    y = pts[:, 1] - cy
    return np.column_stack([cx + c * x - s * y, cy + s * x + c * y])


def _block_shell(rng: SplitMix64, kind: int) -> np.ndarray:
    w = 80.0 + rng.next_double() * 180.0
    h = 60.0 + rng.next_double() * 140.0
    if kind == 0:      # rectangle
        pts = [(0, 0), (w, 0), (w, h), (0, h)]
    elif kind == 1:    # right triangle
        pts = [(0, 0), (w, 0), (0, h)]
    elif kind == 2:    # trapezoid
        inset = 0.15 * w + rng.next_double() * 0.2 * w
        pts = [(0, 0), (w, 0), (w - inset, h), (inset, h)]
    else:              # L-shape
        pts = [(0, 0), (w, 0), (w, h / 2), (w / 2, h / 2), (w / 2, h), (0, h)]
    return np.asarray(pts, dtype=float)


def _place_buildings(rng: SplitMix64, boundary: PolygonM,
                     count: int) -> list[tuple[np.ndarray, float]]:
    pts = boundary.outer.pts
    x0, y0 = pts[:, 0].min(), pts[:, 1].min()
    x1, y1 = pts[:, 0].max(), pts[:, 1].max()
    placed: list[tuple[np.ndarray, float]] = []
    boxes: list[tuple[float, float, float, float]] = []
    attempts = 0
    while len(placed) < count and attempts < 200:
        attempts += 1
        bw = 8.0 + rng.next_double() * 20.0
        bh = 8.0 + rng.next_double() * 20.0
        cx = x0 + rng.next_double() * (x1 - x0)
        cy = y0 + rng.next_double() * (y1 - y0)
        rect = np.asarray([
            (cx - bw / 2, cy - bh / 2), (cx + bw / 2, cy - bh / 2),
            (cx + bw / 2, cy + bh / 2), (cx - bw / 2, cy + bh / 2),
        ])
        if not all(point_in_polygon((float(px), float(py)), boundary) for px, py in rect):
            continue
        box = (rect[:, 0].min() - 1.0, rect[:, 1].min() - 1.0,
               rect[:, 0].max() + 1.0, rect[:, 1].max() + 1.0)
        if any(not (box[2] < b[0] or b[2] < box[0] or box[3] < b[1] or b[3] < box[1])
               for b in boxes):
            continue
        height = 4.0 + rng.next_double() * 72.0
        placed.append((rect, height))
        boxes.append(box)
    if not placed:
        # guaranteed fallback: a small square at the polygon centroid
        from .geometry import polygon_centroid

        c = polygon_centroid(boundary)
        for half in (6.0, 4.0, 2.5, 1.5):
            rect = np.asarray([
                (c.x - half, c.y - half), (c.x + half, c.y - half),
                (c.x + half, c.y + half), (c.x - half, c.y + half),
            ])
            if all(point_in_polygon((float(px), float(py)), boundary) for px, py in rect):
                placed.append((rect, 4.0 + rng.next_double() * 40.0))
                break
    return placed


def synthetic_corpus(n_blocks: int = 500, seed: int = 941) -> Corpus:
    """A corpus of varied synthetic blocks laid out on a coarse lattice."""
    rng = SplitMix64(seed)
    cols = max(1, int(math.ceil(math.sqrt(n_blocks))))
    blocks: list[Block] = []
    width = max(6, len(str(n_blocks)))
    for i in range(n_blocks):
        shell = _block_shell(rng, kind=i % 4)
        angle = rng.next_double() * math.pi / 2 if i % 3 else 0.0
        cx = shell[:, 0].mean()
        cy = shell[:, 1].mean()
        shell = _rotate(shell, angle, cx, cy)
        ox = (i % cols) * 600.0
        oy = (i // cols) * 600.0
        shell = shell + np.asarray([ox, oy])
        boundary = PolygonM(Ring(shell))
        count = 1 + rng.randint(8)
        members = []
        for bi, (rect, height) in enumerate(_place_buildings(rng, boundary, count)):
            members.append(Building(
                id=f"B{i:0{width}d}_b{bi}",
                footprint=PolygonM(Ring(rect)),
                height=round(height, 3),
                storeys=max(1, int(math.floor(height / METERS_PER_STOREY + 0.5))),
            ))
        blocks.append(Block(id=f"B{i:0{width}d}", boundary=boundary,
                            buildings=members))
    return Corpus(crs_note="synthetic local metric plane",
                  blocks=blocks,
                  provenance={"generator": {"kind": "synthetic_corpus",
                                            "n_blocks": n_blocks, "seed": seed}})


def synthetic_geojson(lines: int = 12, seed: int = 2718,
                      center: tuple[float, float] = (-73.95, 40.75),
                      ) -> tuple[dict, dict]:
    """Building and road FeatureCollections for a jittered grid city.

    A diagonal avenue and an anti-diagonal cross the grid (varying block
    shapes); two non-slicing service roads exercise the class filter. Every
    cell keeps at least one known-height building so imputation never drops
    a whole block.
    """
    rng = SplitMix64(seed)
    lon0, lat0 = center
    dlon, dlat = 0.0016, 0.0012
    lon_lines = [lon0 + i * dlon + (rng.next_double() - 0.5) * 0.25 * dlon
                 for i in range(lines)]
    lat_lines = [lat0 + j * dlat + (rng.next_double() - 0.5) * 0.25 * dlat
                 for j in range(lines)]
    lon_min, lon_max = min(lon_lines), max(lon_lines)
    lat_min, lat_max = min(lat_lines), max(lat_lines)

    classes = ["residential", "residential", "secondary", "residential", "primary"]
    road_features = []
    for i, lon in enumerate(lon_lines):
        road_features.append({
            "type": "Feature",
            "properties": {"highway": classes[i % len(classes)]},
            "geometry": {"type": "LineString",
                         "coordinates": [[lon, lat_min], [lon, lat_max]]},
        })
    for j, lat in enumerate(lat_lines):
        road_features.append({
            "type": "Feature",
            "properties": {"highway": classes[j % len(classes)]},
            "geometry": {"type": "LineString",
                         "coordinates": [[lon_min, lat], [lon_max, lat]]},
        })
    road_features.append({
        "type": "Feature",
        "properties": {"highway": "primary"},
        "geometry": {"type": "LineString",
                     "coordinates": [[lon_min, lat_min], [lon_max, lat_max]]},
    })
    road_features.append({
        "type": "Feature",
        "properties": {"highway": "secondary"},
        "geometry": {"type": "LineString",
                     "coordinates": [[lon_min, lat_max], [lon_max, lat_min]]},
    })
    for frac in (0.31, 0.67):
        lat = lat_min + frac * (lat_max - lat_min)
        road_features.append({
            "type": "Feature",
            "properties": {"highway": "service"},
            "geometry": {"type": "LineString",
                         "coordinates": [[lon_min, lat], [lon_max, lat]]},
        })

    building_features = []
    bid = 0
    slots = ((0.06, 0.06), (0.52, 0.06), (0.06, 0.52), (0.52, 0.52))
    for i in range(lines - 1):
        for j in range(lines - 1):
            cw = lon_lines[i + 1] - lon_lines[i]
            ch = lat_lines[j + 1] - lat_lines[j]
            count = 1 + rng.randint(4)
            chosen = sorted(rng.sample(list(range(4)), count))
            for s, slot in enumerate(chosen):
                fx, fy = slots[slot]
                sw = (0.12 + rng.next_double() * 0.22) * cw
                sh = (0.12 + rng.next_double() * 0.22) * ch
                bx = lon_lines[i] + (fx + rng.next_double() * 0.12) * cw
                by = lat_lines[j] + (fy + rng.next_double() * 0.12) * ch
                ring = [[bx, by], [bx + sw, by], [bx + sw, by + sh], [bx, by + sh], [bx, by]]
                props: dict = {}
                u = rng.next_double()
                height = round(4.0 + rng.next_double() * 60.0, 1)
                if s == 0 or u < 0.72:
                    props["height"] = height
                elif u < 0.84:
                    props["height"] = f"{height} m"
                elif u < 0.93:
                    props["building:levels"] = str(1 + rng.randint(18))
                # else: left unknown, filled by in-block imputation
                building_features.append({
                    "type": "Feature",
                    "id": f"w{bid}",
                    "properties": props,
                    "geometry": {"type": "Polygon", "coordinates": [ring]},
                })
                bid += 1

    buildings = {"type": "FeatureCollection", "features": building_features}
    roads = {"type": "FeatureCollection", "features": road_features}
    return buildings, roads


def write_demo_geojson(outdir, lines: int = 12, seed: int = 2718) -> tuple[Path, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    buildings, roads = synthetic_geojson(lines=lines, seed=seed)
    bpath = outdir / "buildings.geojson"
    rpath = outdir / "roads.geojson"
    bpath.write_text(json.dumps(buildings), encoding="utf-8")
    rpath.write_text(json.dumps(roads), encoding="utf-8")
    return bpath, rpath
