"""Self-organising map training, BMU queries, cluster assignment, the
distance-vector encoding transform, and the model/encodings file formats.

Determinism contract: given the same (features, config) the trained model
is bit-identical across runs. All scalar distances in this module use
exactly-rounded summation (math.fsum) so results do not depend on how a
platform's vector library associates additions.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernel
from .errors import (
    DimensionMismatch,
    EmptyFeatures,
    EncodingsMismatch,
    InvalidInput,
    ParseError,
)
from .metrics import FeatureMatrix
from .rng import SplitMix64

MODEL_VERSION = 1
ENCODINGS_VERSION = 1


@dataclass(frozen=True)
class SomConfig:
    grid_rows: int = 10
    grid_cols: int = 10
    iterations: int = 1000
    alpha0: float = 0.5
    sigma0: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.grid_rows < 2 or self.grid_cols < 2:
            raise InvalidInput("grid must be at least 2x2")
        if self.iterations < 1:
            raise InvalidInput("iterations must be >= 1")
        if not (0.0 < self.alpha0 <= 1.0):
            raise InvalidInput("alpha0 must be in (0, 1]")
        if self.sigma0 is None:
            object.__setattr__(self, "sigma0", max(self.grid_rows, self.grid_cols) / 2.0)
        if self.sigma0 <= 0:
            raise InvalidInput("sigma0 must be positive")

    @property
    def neuron_count(self) -> int:
        return self.grid_rows * self.grid_cols


@dataclass
class SomModel:
    """A trained map: K = rows*cols neurons in row-major order."""

    config: SomConfig
    set_name: str
    dim: int
    weights: np.ndarray  # (K, dim)
    norm_params: tuple[tuple[str, float, float], ...]

    def grid_position(self, neuron: int) -> tuple[int, int]:
        return neuron // self.config.grid_cols, neuron % self.config.grid_cols

    def digest(self) -> str:
        payload = json.dumps(_model_doc(self), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EncodingVector:
    """Distances from one sample to every neuron weight, in neuron order."""

    block_id: str | None
    values: np.ndarray  # (K,), non-negative

    def bmu(self) -> int:
        return int(np.argmin(self.values))


def initial_weights(cfg: SomConfig, dim: int) -> tuple[np.ndarray, int]:
    """Seeded uniform [0,1) init, neuron-major; returns post-init RNG state."""
    rng = SplitMix64(cfg.seed)
    w = np.empty((cfg.neuron_count, dim), dtype=float)
    for j in range(cfg.neuron_count):
        for m in range(dim):
            w[j, m] = rng.next_double()
    return w, rng.state


def train(features: FeatureMatrix, cfg: SomConfig) -> SomModel:
    """Train a SOM on normalized feature rows (all entries in [0, 1])."""
    rows = np.ascontiguousarray(features.rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(features.indicators):
        raise DimensionMismatch("feature matrix does not match its indicator list")
    if rows.shape[0] < 1:
        raise EmptyFeatures("no samples to train on")
    if rows.min() < 0.0 or rows.max() > 1.0:
        raise InvalidInput("feature entries must lie in [0, 1]")
    w, state = initial_weights(cfg, rows.shape[1])
    _kernel.train_som(w, rows, np.uint64(state), cfg.iterations,
                      float(cfg.alpha0), float(cfg.sigma0),
                      cfg.grid_rows, cfg.grid_cols)
    return SomModel(config=cfg, set_name=features.set_name, dim=rows.shape[1],
                    weights=w, norm_params=features.norm_params)


def _check_dim(model: SomModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise DimensionMismatch(
            f"expected a vector of length {model.dim}, got shape {x.shape}")
    return x


def encoding_distance(a, b) -> float:
    """Euclidean distance with exactly-rounded summation of squares."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return math.sqrt(math.fsum(diff * diff))


def encode(model: SomModel, x, block_id: str | None = None) -> EncodingVector:
    """Distance vector from x to every neuron weight (length K)."""
    x = _check_dim(model, x)
    diff = model.weights - x[None, :]
    sq = diff * diff
    values = np.asarray([math.sqrt(math.fsum(row)) for row in sq])
    return EncodingVector(block_id=block_id, values=values)


def bmu(model: SomModel, x) -> int:
    """Lowest-index nearest neuron to x."""
    return encode(model, x).bmu()


def encode_all(model: SomModel, features: FeatureMatrix) -> list[EncodingVector]:
    if features.rows.shape[1] != model.dim:
        raise DimensionMismatch("feature matrix dimension does not match model")
    return [encode(model, row, block_id=bid)
            for bid, row in zip(features.block_ids, features.rows)]


def assign(model: SomModel, features: FeatureMatrix) -> dict[int, list[str]]:
    """Partition block ids over neurons by BMU; empty neurons stay present."""
    out: dict[int, list[str]] = {j: [] for j in range(model.config.neuron_count)}
    for enc in encode_all(model, features):
        out[enc.bmu()].append(enc.block_id)
    return out


def quantization_error(model: SomModel, features: FeatureMatrix) -> float:
    """Mean distance from samples to their BMU weights."""
    encs = encode_all(model, features)
    if not encs:
        raise EmptyFeatures("no samples")
    return math.fsum(float(e.values[e.bmu()]) for e in encs) / len(encs)


# --- model / encodings files ------------------------------------------------


def _model_doc(model: SomModel) -> dict:
    cfg = model.config
    return {
        "version": MODEL_VERSION,
        "kind": "som-model",
        "set_name": model.set_name,
        "config": {
            "grid_rows": cfg.grid_rows,
            "grid_cols": cfg.grid_cols,
            "iterations": cfg.iterations,
            "alpha0": cfg.alpha0,
            "sigma0": cfg.sigma0,
            "seed": cfg.seed,
        },
        "dim": model.dim,
        "norm_params": [[n, lo, hi] for n, lo, hi in model.norm_params],
        "weights": [[float(v) for v in row] for row in model.weights],
    }


def save_model(model: SomModel, path) -> None:
    """JSON with shortest round-trip float repr; parses back bit-exactly."""
    Path(path).write_text(json.dumps(_model_doc(model), indent=1) + "\n",
                          encoding="utf-8")


def load_model(path) -> SomModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("kind") != "som-model":
            raise ParseError(f"{path}: not a SOM model file")
        cfg = SomConfig(**doc["config"])
        weights = np.asarray(doc["weights"], dtype=float)
        model = SomModel(config=cfg, set_name=doc["set_name"], dim=int(doc["dim"]),
                         weights=weights,
                         norm_params=tuple((n, float(lo), float(hi))
                                           for n, lo, hi in doc["norm_params"]))
    except ParseError:
        raise
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if weights.shape != (cfg.neuron_count, model.dim):
        raise ParseError(f"{path}: weight shape {weights.shape} does not match config")
    return model


@dataclass
class EncodingStore:
    """Corpus encodings under one model, kept in block-id order."""

    set_name: str
    model_digest: str
    block_ids: tuple[str, ...]
    matrix: np.ndarray  # (N, K)

    def by_id(self, block_id: str) -> np.ndarray | None:
        try:
            return self.matrix[self.block_ids.index(block_id)]
        except ValueError:
            return None


def build_store(model: SomModel, encodings: list[EncodingVector]) -> EncodingStore:
    order = sorted(range(len(encodings)), key=lambda i: encodings[i].block_id)
    return EncodingStore(
        set_name=model.set_name,
        model_digest=model.digest(),
        block_ids=tuple(encodings[i].block_id for i in order),
        matrix=np.asarray([encodings[i].values for i in order], dtype=float),
    )


def save_encodings(store: EncodingStore, path) -> None:
    doc = {
        "version": ENCODINGS_VERSION,
        "kind": "som-encodings",
        "set_name": store.set_name,
        "model_digest": store.model_digest,
        "block_ids": list(store.block_ids),
        "vectors": [[float(v) for v in row] for row in store.matrix],
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n",
                          encoding="utf-8")


def load_encodings(path) -> EncodingStore:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("kind") != "som-encodings":
            raise ParseError(f"{path}: not an encodings file")
        store = EncodingStore(
            set_name=doc["set_name"],
            model_digest=doc["model_digest"],
            block_ids=tuple(doc["block_ids"]),
            matrix=np.asarray(doc["vectors"], dtype=float),
        )
    except ParseError:
        raise
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return store


def check_store(model: SomModel, store: EncodingStore) -> None:
    if store.model_digest != model.digest():
        raise EncodingsMismatch(
            "encodings were produced by a different model (digest mismatch)")
