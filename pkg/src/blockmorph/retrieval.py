"""Ranked case retrieval over encoding vectors.

The canonical algorithm is a full linear scan: Euclidean distance between
the query's encoding vector and every corpus encoding, sorted ascending
with block-id tie-breaking. Distances use exactly-rounded summation, so an
independent scan reproduces them bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, MissingIndicator, UnknownBlock, UnknownSet
from .som import EncodingStore, EncodingVector, SomModel, check_store, encode

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Query:
    set_name: str
    block_id: str | None = None
    values: dict[str, float] | None = None
    k: int = 5
    exclude_self: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInput("k must be >= 1")
        if (self.block_id is None) == (self.values is None):
            raise InvalidInput("query needs exactly one of block_id or values")


@dataclass(frozen=True)
class RankedResult:
    block_id: str
    distance: float
    rank: int


def normalize_query_values(values: dict[str, float],
                           norm_params) -> tuple[np.ndarray, list[str]]:
    """Min-max scale raw indicator values with stored corpus parameters.

    Out-of-range values are clamped to [0, 1]; the names of clamped
    indicators are returned so callers can warn or reject.
    """
    names = [n for n, _, _ in norm_params]
    missing = [n for n in names if n not in values]
    if missing:
        raise MissingIndicator(f"missing indicator values: {', '.join(missing)}")
    extra = [k for k in values if k not in names]
    if extra:
        raise MissingIndicator(f"unexpected indicators: {', '.join(sorted(extra))}")
    vec = np.empty(len(names), dtype=float)
    clamped: list[str] = []
    for i, (name, lo, hi) in enumerate(norm_params):
        v = (float(values[name]) - lo) / (hi - lo)
        if v < 0.0 or v > 1.0:
            clamped.append(name)
            v = min(max(v, 0.0), 1.0)
        vec[i] = v
    return vec, clamped


def encode_query(q: Query, model: SomModel) -> EncodingVector:
    """Normalize raw indicator values with the model's stored parameters
    and encode them; values outside the corpus range clamp with a warning."""
    if q.set_name != model.set_name:
        raise UnknownSet(f"query set {q.set_name!r} does not match model "
                         f"set {model.set_name!r}")
    if q.values is None:
        raise InvalidInput("encode_query needs a values query")
    vec, clamped = normalize_query_values(q.values, model.norm_params)
    if clamped:
        log.warning("query values clamped to corpus range: %s", ", ".join(clamped))
    return encode(model, vec)


def _query_encoding(q: Query, model: SomModel, store: EncodingStore) -> np.ndarray:
    if q.block_id is not None:
        vec = store.by_id(q.block_id)
        if vec is None:
            raise UnknownBlock(f"block {q.block_id!r} not in encodings")
        return vec
    return encode_query(q, model).values


def retrieve(q: Query, model: SomModel, store: EncodingStore) -> list[RankedResult]:
    """Top-k nearest corpus blocks in encoding space.

    A block_id query returns itself at rank 1 with distance 0 unless
    ``exclude_self`` is set. k is clamped to the corpus size.
    """
    check_store(model, store)
    target = _query_encoding(q, model, store)
    diffs = store.matrix - target[None, :]
    sq = diffs * diffs
    scored = [
        (math.sqrt(math.fsum(row)), bid)
        for row, bid in zip(sq, store.block_ids)
        if not (q.exclude_self and q.block_id is not None and bid == q.block_id)
    ]
    scored.sort()
    top = scored[: min(q.k, len(scored))]
    return [RankedResult(block_id=bid, distance=d, rank=i + 1)
            for i, (d, bid) in enumerate(top)]


def results_to_json(results: list[RankedResult]) -> list[dict]:
    """Display form: distances rounded to 6 decimals."""
    return [{"block_id": r.block_id, "distance": round(r.distance, 6),
             "rank": r.rank} for r in results]
