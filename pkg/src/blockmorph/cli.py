"""Single executable orchestrating the pipeline.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 computation
error. Diagnostics go to stderr as structured ``level=... code=... msg=...``
lines. A ``--config`` TOML/JSON file may pre-fill any flag (flags win).
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .errors import BlockmorphError, InvalidInput, ParseError
from . import evaluation, ingest, metrics as metrics_mod, retrieval, som
from .sampledata import write_demo_geojson

log = logging.getLogger("blockmorph")


def diag(level: str, code: str, msg: str) -> None:
    sys.stderr.write(f'level={level} code={code} msg="{msg}"\n')


class _DiagFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        msg = record.getMessage().replace('"', "'")
        return f'level={record.levelname.lower()} code={record.name} msg="{msg}"'


def _setup_logging() -> None:
    root = logging.getLogger()
    if not any(isinstance(h, logging.StreamHandler) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(_DiagFormatter())
        root.addHandler(handler)
        root.setLevel(logging.INFO)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    text = Path(path).read_bytes()
    if path.endswith(".toml"):
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode("utf-8"))
    return json.loads(text)


def _parse_grid(value: str) -> tuple[int, int]:
    try:
        r, c = value.lower().split("x")
        return int(r), int(c)
    except ValueError as exc:
        raise click.BadParameter("grid must look like 10x10") from exc


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TOML/JSON file pre-filling any flag per subcommand.")
@click.pass_context
def cli(ctx, config_path):
    """Urban-block morphology pipeline: ingest, metrics, SOM training,
    encoding-space retrieval, comparison reports, and the HTTP service."""
    _setup_logging()
    if config_path:
        ctx.default_map = _load_config(config_path)


@cli.command("ingest")
@click.option("--buildings", "buildings_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--roads", "roads_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--min-block-area", type=float, default=ingest.DEFAULT_MIN_BLOCK_AREA,
              show_default=True)
@click.option("--impute-radius", type=float, default=ingest.DEFAULT_IMPUTE_RADIUS,
              show_default=True)
def cmd_ingest(buildings_path, roads_path, out_path, min_block_area, impute_radius):
    """Build the block corpus from building/road GeoJSON."""
    buildings, roads = ingest.load_geodata(buildings_path, roads_path)
    buildings, roads, proj = ingest.project_local(buildings, roads)
    provenance = {
        "buildings_sha256": ingest.file_digest(buildings_path),
        "roads_sha256": ingest.file_digest(roads_path),
    }
    corpus = ingest.build_corpus(buildings, roads, proj,
                                 min_block_area=min_block_area,
                                 impute_radius=impute_radius,
                                 provenance=provenance)
    ingest.save_corpus(corpus, out_path)
    diag("info", "ingest.done",
         f"{len(corpus.blocks)} blocks, "
         f"{sum(len(b.buildings) for b in corpus.blocks)} buildings -> {out_path}")


@cli.command("metrics")
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Also export records as CSV.")
def cmd_metrics(corpus_path, out_path, csv_path):
    """Compute the 15 indicators and the Pearson matrix for a corpus."""
    corpus = ingest.load_corpus(corpus_path)
    records = metrics_mod.corpus_metrics(corpus)
    pearson = metrics_mod.pearson_matrix(records)
    metrics_mod.save_metrics(records, pearson, out_path)
    if csv_path:
        metrics_mod.write_csv(records, csv_path)
    diag("info", "metrics.done", f"{len(records)} records -> {out_path}")


@cli.command("train")
@click.option("--metrics", "metrics_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--set", "set_name", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--encodings-out", "enc_path", type=click.Path(dir_okay=False),
              default=None, help="Default: <out>.encodings.json")
@click.option("--grid", default="10x10", show_default=True)
@click.option("--iters", type=int, default=1000, show_default=True)
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--sigma", type=float, default=None,
              help="Default: max(rows, cols)/2.")
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_train(metrics_path, set_name, out_path, enc_path, grid, iters, alpha,
              sigma, seed):
    """Train a SOM for one metric set and encode the whole corpus."""
    records, _ = metrics_mod.load_metrics(metrics_path)
    mset = metrics_mod.select_set(set_name)
    features = metrics_mod.normalize(records, mset)
    rows, cols = _parse_grid(grid)
    cfg = som.SomConfig(grid_rows=rows, grid_cols=cols, iterations=iters,
                        alpha0=alpha, sigma0=sigma, seed=seed)
    model = som.train(features, cfg)
    som.save_model(model, out_path)
    store = som.build_store(model, som.encode_all(model, features))
    enc_path = enc_path or str(Path(out_path).with_suffix(".encodings.json"))
    som.save_encodings(store, enc_path)
    diag("info", "train.done",
         f"set={set_name} qe={som.quantization_error(model, features):.6f} "
         f"-> {out_path}")


@cli.command("retrieve")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--encodings", "enc_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--block", "block_id", default=None)
@click.option("--values", "values_json", default=None,
              help='Raw indicator values as JSON, e.g. \'{"WAH": 12.5, ...}\'.')
@click.option("-k", "k", type=int, default=5, show_default=True)
@click.option("--exclude-self", is_flag=True, default=False)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def cmd_retrieve(model_path, enc_path, block_id, values_json, k, exclude_self,
                 out_path):
    """Rank corpus blocks by encoding-space distance to a query."""
    if (block_id is None) == (values_json is None):
        raise click.UsageError("provide exactly one of --block or --values")
    model = som.load_model(model_path)
    store = som.load_encodings(enc_path)
    values = None
    if values_json is not None:
        try:
            values = json.loads(values_json)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--values: {exc}") from exc
        if not isinstance(values, dict):
            raise ParseError("--values must be a JSON object")
    q = retrieval.Query(set_name=model.set_name, block_id=block_id,
                        values=values, k=k, exclude_self=exclude_self)
    results = retrieval.retrieve(q, model, store)
    Path(out_path).write_text(
        json.dumps(retrieval.results_to_json(results), indent=1) + "\n",
        encoding="utf-8")
    diag("info", "retrieve.done", f"{len(results)} results -> {out_path}")


@cli.command("compare")
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", "metrics_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--models", "models_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--targets", required=True, help="Comma-separated block ids.")
@click.option("-k", "k", type=int, default=5, show_default=True)
@click.option("--include-self", is_flag=True, default=False,
              help="Keep each target in its own result list.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def cmd_compare(corpus_path, metrics_path, models_dir, targets, k, include_self,
                out_dir):
    """Side-by-side retrievals for target blocks under all four metric sets."""
    from .service import scan_models_dir

    corpus = ingest.load_corpus(corpus_path)
    records, pearson = metrics_mod.load_metrics(metrics_path)
    models, stores = scan_models_dir(models_dir)
    missing = sorted(set(metrics_mod.SET_COMPOSITIONS) - set(models))
    if missing:
        raise InvalidInput(f"models directory lacks sets: {', '.join(missing)}")
    target_ids = [t.strip() for t in targets.split(",") if t.strip()]
    if not target_ids:
        raise click.UsageError("--targets must name at least one block id")
    evaluation.write_comparison(out_dir, target_ids, k, models, stores, corpus,
                                records, pearson, exclude_self=not include_self)
    diag("info", "compare.done", f"{len(target_ids)} targets -> {out_dir}")


@cli.command("serve")
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", "metrics_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--models", "models_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", type=click.Path(file_okay=False),
              default=None, help="Serve a built UI from this directory.")
def cmd_serve(corpus_path, metrics_path, models_dir, port, host, static_dir):
    """Run the read-only HTTP API (and optionally the explorer UI)."""
    import uvicorn

    from .service import build_state, create_app

    state = build_state(corpus_path, metrics_path, models_dir)
    app = create_app(state, static_dir=static_dir)
    diag("info", "serve.start", f"listening on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command("demo-data")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--lines", type=int, default=12, show_default=True,
              help="Road lines per axis; blocks ~ (lines-1)^2.")
@click.option("--seed", type=int, default=2718, show_default=True)
def cmd_demo_data(out_dir, lines, seed):
    """Write a synthetic buildings/roads GeoJSON pair for experiments."""
    bpath, rpath = write_demo_geojson(out_dir, lines=lines, seed=seed)
    diag("info", "demo-data.done", f"{bpath} {rpath}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.Abort:
        diag("error", "aborted", "interrupted")
        return 1
    except BlockmorphError as exc:
        diag("error", exc.code, str(exc).replace('"', "'"))
        return exc.exit_code
    except FileNotFoundError as exc:
        diag("error", "missing_file", str(exc).replace('"', "'"))
        return 2
    except Exception as exc:  # computation failures surface as exit 3
        diag("error", "internal_error", f"{type(exc).__name__}: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
