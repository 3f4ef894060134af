import math

import numpy as np
import pytest

from blockmorph.geometry import PolygonM, Ring
from blockmorph.ingest import Block, Building, Corpus, save_corpus
from blockmorph.metrics import (
    FeatureMatrix,
    SET_COMPOSITIONS,
    corpus_metrics,
    normalize,
    pearson_matrix,
    save_metrics,
    select_set,
)
from blockmorph.sampledata import synthetic_corpus
from blockmorph.som import SomConfig, build_store, encode_all, save_encodings, save_model, train


def square(cx, cy, half):
    return [(cx - half, cy - half), (cx + half, cy - half),
            (cx + half, cy + half), (cx - half, cy + half)]


@pytest.fixture
def two_box_block():
    """10x10 block, two 1x1 buildings: h=10 (3 storeys) and h=20 (7 storeys)."""
    boundary = PolygonM(Ring([(0, 0), (10, 0), (10, 10), (0, 10)]))
    b1 = Building(id="b1", footprint=PolygonM(Ring(square(2.5, 2.5, 0.5))),
                  height=10.0, storeys=3)
    b2 = Building(id="b2", footprint=PolygonM(Ring(square(7.5, 7.5, 0.5))),
                  height=20.0, storeys=7)
    return Block(id="T1", boundary=boundary, buildings=[b1, b2])


def make_two_cluster(dim=4, per_cluster=100, seed=77, set_name="OneBMC",
                     indicators=None) -> FeatureMatrix:
    """Two tight clusters near the corners of [0,1]^dim."""
    if indicators is None:
        indicators = SET_COMPOSITIONS[set_name][:dim] if dim <= 4 \
            else SET_COMPOSITIONS["AllBlockMetric"][:dim]
    rng = np.random.default_rng(seed)
    a = np.clip(rng.normal(0.15, 0.04, size=(per_cluster, dim)), 0.0, 1.0)
    b = np.clip(rng.normal(0.85, 0.04, size=(per_cluster, dim)), 0.0, 1.0)
    ids = tuple(f"A{i:03d}" for i in range(per_cluster)) + \
        tuple(f"B{i:03d}" for i in range(per_cluster))
    return FeatureMatrix(
        set_name=set_name,
        indicators=tuple(indicators),
        norm_params=tuple((n, 0.0, 1.0) for n in indicators),
        block_ids=ids,
        rows=np.vstack([a, b]),
    )


@pytest.fixture
def two_cluster_features():
    return make_two_cluster()


@pytest.fixture(scope="session")
def small_corpus():
    return synthetic_corpus(n_blocks=64, seed=1234)


@pytest.fixture(scope="session")
def small_records(small_corpus):
    return corpus_metrics(small_corpus)


@pytest.fixture(scope="session")
def corpus500():
    return synthetic_corpus(n_blocks=500, seed=941)


@pytest.fixture(scope="session")
def records500(corpus500):
    return corpus_metrics(corpus500)


def train_all_sets(records, iterations, seed):
    """(models, stores, features) for all four sets over one record list."""
    models, stores, feats = {}, {}, {}
    for name in SET_COMPOSITIONS:
        mset = select_set(name)
        fm = normalize(records, mset)
        cfg = SomConfig(iterations=iterations, seed=seed)
        model = train(fm, cfg)
        models[name] = model
        stores[name] = build_store(model, encode_all(model, fm))
        feats[name] = fm
    return models, stores, feats


@pytest.fixture(scope="session")
def small_trained(small_records):
    return train_all_sets(small_records, iterations=80, seed=11)


@pytest.fixture(scope="session")
def artifacts_dir(tmp_path_factory, small_corpus, small_records, small_trained):
    """Corpus/metrics/model files for CLI and service tests."""
    root = tmp_path_factory.mktemp("artifacts")
    save_corpus(small_corpus, root / "corpus.json")
    pearson = pearson_matrix(small_records)
    save_metrics(small_records, pearson, root / "metrics.json")
    models_dir = root / "models"
    models_dir.mkdir()
    models, stores, _ = small_trained
    for name, model in models.items():
        save_model(model, models_dir / f"model_{name}.json")
        save_encodings(stores[name], models_dir / f"model_{name}.encodings.json")
    return root
