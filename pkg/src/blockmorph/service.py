"""Read-only HTTP API over a loaded corpus and trained models.

All state is loaded at startup and immutable afterwards, so request
handling is freely concurrent and identical requests return identical
bodies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import MissingIndicator, ParseError, UnknownBlock, UnknownSet
from .evaluation import export_som_grid
from .ingest import Corpus, load_corpus, _polygon_to_json
from .metrics import (
    INDICATORS,
    MetricRecord,
    SET_COMPOSITIONS,
    fit_norm_params,
    load_metrics,
    select_set,
)
from .geometry import polygon_centroid
from .retrieval import Query, normalize_query_values, results_to_json, retrieve
from .som import (
    EncodingStore,
    SomModel,
    encode,
    load_encodings,
    load_model,
)

log = logging.getLogger(__name__)


class SetInfo(BaseModel):
    name: str
    indicators: list[str]
    norm_params: dict[str, tuple[float, float]]


class BlockSummary(BaseModel):
    id: str
    ba: float
    nob: int
    centroid: tuple[float, float]


class RetrieveSource(BaseModel):
    block_id: str | None = None
    values: dict[str, float] | None = None


class RetrieveRequest(BaseModel):
    set: str
    k: int = Field(default=5, ge=1)
    exclude_self: bool = False
    source: RetrieveSource


class RankedItem(BaseModel):
    block_id: str
    distance: float
    rank: int


class RetrieveResponse(BaseModel):
    query_echo: RetrieveRequest
    results: list[RankedItem]
    encoding: list[float]


@dataclass
class ServiceState:
    corpus: Corpus
    records: list[MetricRecord]
    pearson: np.ndarray
    models: dict[str, SomModel]
    stores: dict[str, EncodingStore]
    set_infos: list[dict]
    som_payloads: dict[str, dict]
    summaries: list[dict]
    block_ids: set[str]


def scan_models_dir(models_dir) -> tuple[dict[str, SomModel], dict[str, EncodingStore]]:
    """Load every model file in a directory with its sibling encodings."""
    models: dict[str, SomModel] = {}
    stores: dict[str, EncodingStore] = {}
    for path in sorted(Path(models_dir).glob("*.json")):
        if path.name.endswith(".encodings.json"):
            continue
        try:
            model = load_model(path)
        except ParseError:
            continue
        enc_path = path.with_suffix(".encodings.json")
        if not enc_path.exists():
            raise ParseError(f"{path}: missing sibling encodings file {enc_path.name}")
        models[model.set_name] = model
        stores[model.set_name] = load_encodings(enc_path)
    return models, stores


def build_state(corpus_path, metrics_path, models_dir) -> ServiceState:
    corpus = load_corpus(corpus_path)
    records, pearson = load_metrics(metrics_path)
    models, stores = scan_models_dir(models_dir)
    if not models:
        raise ParseError(f"{models_dir}: no model files found")

    set_infos = []
    for name in SET_COMPOSITIONS:
        if name in models:
            params = models[name].norm_params
        else:
            params = fit_norm_params(records, select_set(name))
        set_infos.append({
            "name": name,
            "indicators": list(SET_COMPOSITIONS[name]),
            "norm_params": {n: (lo, hi) for n, lo, hi in params},
        })

    som_payloads = {}
    for name, model in models.items():
        store = stores[name]
        assignments: dict[int, list[str]] = {j: [] for j in range(model.config.neuron_count)}
        for bid, row in zip(store.block_ids, store.matrix):
            assignments[int(np.argmin(row))].append(bid)
        som_payloads[name] = export_som_grid(model, assignments)

    record_by_id = {r.block_id: r for r in records}
    summaries = []
    for block in sorted(corpus.blocks, key=lambda b: b.id):
        rec = record_by_id.get(block.id)
        if rec is None:
            continue
        c = polygon_centroid(block.boundary)
        summaries.append({"id": block.id, "ba": rec.ba, "nob": rec.nob,
                          "centroid": (round(c.x, 6), round(c.y, 6))})

    return ServiceState(
        corpus=corpus,
        records=records,
        pearson=pearson,
        models=models,
        stores=stores,
        set_infos=set_infos,
        som_payloads=som_payloads,
        summaries=summaries,
        block_ids={b.id for b in corpus.blocks},
    )


def create_app(state: ServiceState | None, static_dir=None) -> FastAPI:
    app = FastAPI(title="blockmorph service",
                  description="Read-only morphology metrics, SOM grids, and "
                              "encoding-space retrieval over a block corpus.",
                  version="1.0.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    app.state.svc = state

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def svc() -> ServiceState:
        if app.state.svc is None:
            raise HTTPException(status_code=503, detail="no state loaded")
        return app.state.svc

    @app.get("/api/sets", response_model=list[SetInfo])
    def get_sets():
        return svc().set_infos

    @app.get("/api/blocks", response_model=list[BlockSummary])
    def get_blocks(limit: int = 50, offset: int = 0):
        limit = max(0, min(limit, 1000))
        offset = max(0, offset)
        return svc().summaries[offset:offset + limit]

    @app.get("/api/blocks/{block_id}")
    def get_block(block_id: str):
        st = svc()
        block = next((b for b in st.corpus.blocks if b.id == block_id), None)
        rec = next((r for r in st.records if r.block_id == block_id), None)
        if block is None or rec is None:
            raise HTTPException(status_code=404, detail=f"unknown block {block_id!r}")
        return {
            "id": block.id,
            "boundary": _polygon_to_json(block.boundary),
            "buildings": [
                {"id": b.id, "footprint": _polygon_to_json(b.footprint),
                 "height": b.height, "storeys": b.storeys}
                for b in block.buildings
            ],
            "metrics": rec.as_dict(),
        }

    @app.get("/api/som/{set_name}")
    def get_som(set_name: str):
        st = svc()
        payload = st.som_payloads.get(set_name)
        if payload is None:
            raise HTTPException(status_code=404,
                                detail=f"no model loaded for set {set_name!r}")
        return payload

    @app.get("/api/pearson")
    def get_pearson():
        st = svc()
        return {"order": list(INDICATORS),
                "matrix": [[float(v) for v in row] for row in st.pearson]}

    @app.post("/api/retrieve", response_model=RetrieveResponse)
    def post_retrieve(req: RetrieveRequest, strict: int = 0):
        st = svc()
        model = st.models.get(req.set)
        if model is None:
            raise HTTPException(status_code=404,
                                detail=f"no model loaded for set {req.set!r}")
        store = st.stores[req.set]
        src = req.source
        if (src.block_id is None) == (src.values is None):
            raise HTTPException(status_code=400,
                                detail="source needs exactly one of block_id or values")
        try:
            if src.values is not None:
                vec, clamped = normalize_query_values(src.values, model.norm_params)
                if clamped and strict:
                    raise HTTPException(
                        status_code=422,
                        detail=f"values out of corpus range: {', '.join(clamped)}")
                encoding = encode(model, vec).values
                q = Query(set_name=req.set, values=src.values, k=req.k,
                          exclude_self=req.exclude_self)
            else:
                if src.block_id not in st.block_ids:
                    raise HTTPException(status_code=404,
                                        detail=f"unknown block {src.block_id!r}")
                q = Query(set_name=req.set, block_id=src.block_id, k=req.k,
                          exclude_self=req.exclude_self)
                vec = store.by_id(src.block_id)
                if vec is None:
                    raise HTTPException(status_code=404,
                                        detail=f"block {src.block_id!r} has no encoding")
                encoding = vec
            results = retrieve(q, model, store)
        except MissingIndicator as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except UnknownBlock as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except UnknownSet as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {
            "query_echo": req,
            "results": results_to_json(results),
            "encoding": [float(v) for v in encoding],
        }

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="static")
    return app
