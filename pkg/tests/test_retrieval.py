import logging
import math

import numpy as np
import pytest

from blockmorph.errors import (
    InvalidInput,
    MissingIndicator,
    UnknownBlock,
    UnknownSet,
)
from blockmorph.metrics import normalize, select_set
from blockmorph.retrieval import (
    Query,
    encode_query,
    normalize_query_values,
    results_to_json,
    retrieve,
)
from blockmorph.som import SomConfig, build_store, encode_all, train

from .conftest import make_two_cluster, train_all_sets
from .oracles import scan_retrieve


@pytest.fixture(scope="module")
def cluster_setup():
    fm = make_two_cluster()
    model = train(fm, SomConfig(iterations=300, seed=27))
    store = build_store(model, encode_all(model, fm))
    return fm, model, store


def test_self_retrieval_rank1_zero(cluster_setup):
    fm, model, store = cluster_setup
    res = retrieve(Query(set_name="OneBMC", block_id="A005", k=3), model, store)
    assert res[0].block_id == "A005"
    assert res[0].distance == 0.0
    assert res[0].rank == 1


def test_cluster_center_query_pure(cluster_setup):
    fm, model, store = cluster_setup
    # raw values at the cluster-A center (identity norm params)
    values = {n: 0.15 for n in fm.indicators}
    res = retrieve(Query(set_name="OneBMC", values=values, k=5), model, store)
    assert len(res) == 5
    assert all(r.block_id.startswith("A") for r in res)


def test_k_clamped_to_corpus(cluster_setup):
    fm, model, store = cluster_setup
    res = retrieve(Query(set_name="OneBMC", block_id="B001", k=10_000), model, store)
    assert len(res) == len(fm.block_ids)
    dists = [r.distance for r in res]
    assert dists == sorted(dists)


def test_exclude_self(cluster_setup):
    _, model, store = cluster_setup
    res = retrieve(Query(set_name="OneBMC", block_id="A000", k=5,
                         exclude_self=True), model, store)
    assert all(r.block_id != "A000" for r in res)
    assert len(res) == 5


def test_unknown_block(cluster_setup):
    _, model, store = cluster_setup
    with pytest.raises(UnknownBlock):
        retrieve(Query(set_name="OneBMC", block_id="nope", k=2), model, store)


def test_query_validation():
    with pytest.raises(InvalidInput):
        Query(set_name="OneBMC", k=0, block_id="x")
    with pytest.raises(InvalidInput):
        Query(set_name="OneBMC")  # neither source
    with pytest.raises(InvalidInput):
        Query(set_name="OneBMC", block_id="x", values={"WAH": 1.0})


def test_matches_bruteforce_scan_exactly(cluster_setup):
    fm, model, store = cluster_setup
    rng = np.random.default_rng(8)
    for _ in range(50):
        target_id = fm.block_ids[int(rng.integers(len(fm.block_ids)))]
        res = retrieve(Query(set_name="OneBMC", block_id=target_id, k=7),
                       model, store)
        target_vec = store.by_id(target_id)
        ref = scan_retrieve(target_vec, store.block_ids, store.matrix, 7)
        assert [(r.distance, r.block_id) for r in res] == ref


def test_stability_identical_queries(cluster_setup):
    _, model, store = cluster_setup
    q = Query(set_name="OneBMC", block_id="B050", k=9)
    assert retrieve(q, model, store) == retrieve(q, model, store)


def test_tie_break_by_block_id():
    fm = make_two_cluster(per_cluster=4, seed=1)
    # duplicate rows -> equal distances, ordering must follow ids
    rows = np.vstack([fm.rows[:2], fm.rows[:2]])
    from blockmorph.metrics import FeatureMatrix

    fm2 = FeatureMatrix(set_name="OneBMC", indicators=fm.indicators,
                        norm_params=fm.norm_params,
                        block_ids=("X2", "Y1", "A1", "B9"),
                        rows=rows)
    model = train(fm2, SomConfig(iterations=5, seed=2))
    store = build_store(model, encode_all(model, fm2))
    res = retrieve(Query(set_name="OneBMC", block_id="A1", k=4), model, store)
    # A1 == X2 bitwise; tie at distance 0 resolves lexicographically
    assert [r.block_id for r in res][:2] == ["A1", "X2"]


# --- encode_query -----------------------------------------------------------


def test_encode_query_at_corpus_minimums(records500):
    mset = select_set("OneBMC")
    fm = normalize(records500, mset)
    model = train(fm, SomConfig(iterations=20, seed=3))
    values = {n: lo for n, lo, hi in model.norm_params}
    q = Query(set_name="OneBMC", values=values, k=1)
    enc = encode_query(q, model)
    from blockmorph.som import encode

    assert np.array_equal(enc.values, encode(model, np.zeros(4)).values)


def test_encode_query_reproduces_stored_encoding(records500):
    mset = select_set("OneBMC")
    fm = normalize(records500, mset)
    model = train(fm, SomConfig(iterations=20, seed=3))
    store = build_store(model, encode_all(model, fm))
    rec = records500[17]
    values = {n: rec.value(n) for n in mset.indicators}
    enc = encode_query(Query(set_name="OneBMC", values=values, k=1), model)
    stored = store.by_id(rec.block_id)
    assert np.abs(enc.values - stored).max() <= 1e-12


def test_encode_query_clamps_above_max(records500, caplog):
    mset = select_set("OneBMC")
    fm = normalize(records500, mset)
    model = train(fm, SomConfig(iterations=10, seed=4))
    values = {n: hi for n, lo, hi in model.norm_params}
    wah_hi = dict(values)
    wah_hi["WAH"] = values["WAH"] * 10 + 1
    vec, clamped = normalize_query_values(wah_hi, model.norm_params)
    assert clamped == ["WAH"]
    assert vec[0] == 1.0
    with caplog.at_level(logging.WARNING):
        encode_query(Query(set_name="OneBMC", values=wah_hi, k=1), model)
    assert any("clamped" in r.message for r in caplog.records)


def test_encode_query_missing_indicator(cluster_setup):
    _, model, _ = cluster_setup
    with pytest.raises(MissingIndicator):
        encode_query(Query(set_name="OneBMC", values={"WAH": 1.0}, k=1), model)
    bad = {n: 0.5 for n in ("WAH", "BCR", "NOB", "BA", "EXTRA")}
    with pytest.raises(MissingIndicator):
        encode_query(Query(set_name="OneBMC", values=bad, k=1), model)


def test_encode_query_set_mismatch(cluster_setup):
    _, model, _ = cluster_setup
    q = Query(set_name="Spacemate", values={"AS": 1, "BCR": 1, "FAR": 1, "OSR": 1}, k=1)
    with pytest.raises(UnknownSet):
        encode_query(q, model)


def test_results_json_six_decimals(cluster_setup):
    _, model, store = cluster_setup
    res = retrieve(Query(set_name="OneBMC", block_id="A001", k=3), model, store)
    out = results_to_json(res)
    for item in out:
        assert item["distance"] == round(item["distance"], 6)
    assert out[0] == {"block_id": "A001", "distance": 0.0, "rank": 1}


def test_self_retrieval_all_sets_small(records500):
    models, stores, feats = train_all_sets(records500[:60], iterations=40, seed=5)
    for name, model in models.items():
        store = stores[name]
        for bid in store.block_ids[::13]:
            res = retrieve(Query(set_name=name, block_id=bid, k=1), model, store)
            assert res[0].block_id == bid
            assert res[0].distance < 1e-9
