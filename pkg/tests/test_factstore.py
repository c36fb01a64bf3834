import json
from pathlib import Path

import pytest

import adamsdeduce
from adamsdeduce.chart import Bidegree
from adamsdeduce.factstore import (
    DIFFERENTIAL,
    EXTENSION,
    FactStore,
    Provenance,
    StoreError,
    fact_id,
)
from adamsdeduce.gf2 import F2Vector
from adamsdeduce.rules import DiffClaim

FIXTURES = Path(adamsdeduce.__file__).parent / "data" / "fixtures"
GOLDEN = Path(__file__).parent / "golden"
DERIVED = Provenance("rule", rule="test")


def load(name):
    return json.loads((FIXTURES / name).read_text())


def session(name, shuffle_seed=None):
    store = FactStore()
    store.load_session(load(name), FIXTURES, shuffle_seed=shuffle_seed)
    return store


def gens(*items):
    return [{"name": n, "s": s, "t": t} for n, s, t in items]


@pytest.fixture(scope="module")
def saturated_nu():
    store = session("nu_cofiber.json")
    report = store.saturate()
    assert report.fixpoint and report.contradiction is None
    return store


def test_fact_ids_hash_kind_scope_and_payload():
    fid = fact_id("differential", "S0", "{}")
    assert len(fid) == 16 and fid != fact_id("extension", "S0", "{}")


def test_ingesting_twice_merges():
    store = FactStore()
    store.add_chart_document(load("stem14.json"))
    first = dict(store.facts)
    store.add_chart_document(load("stem14.json"))
    assert store.facts.keys() == first.keys()
    assert len(store.query(chart="S0", kind=DIFFERENTIAL)) == 3


def test_conflicting_derived_value_is_a_contradiction():
    store = FactStore()
    store.add_chart_document(load("stem14.json"))
    chart = store.chart("S0")
    b, h4 = chart.vector("h_4")
    zero = F2Vector.zero(chart.dim(Bidegree(3, 17)))
    before = set(store.facts)
    result = store.assert_fact(DiffClaim("S0", b, h4, 2, zero), DERIVED)
    assert result.status == "contradiction"
    assert "h_0h_3^2" in result.message or "contradiction" in result.message
    assert set(store.facts) == before


def test_known_value_merges():
    store = FactStore()
    store.add_chart_document(load("stem14.json"))
    chart = store.chart("S0")
    b, h4 = chart.vector("h_4")
    _, y = chart.vector("h_0h_3^2")
    assert store.assert_fact(DiffClaim("S0", b, h4, 2, y), DERIVED).status == "merged"


def test_settling_an_unknown_upgrades_it():
    store = FactStore()
    store.add_chart_document({
        "name": "U",
        "generators": gens(("a", 1, 3), ("y", 4, 5)),
        "differentials": [{"source": "a", "r": "unknown-at 3"}],
    })
    (unknown,) = store.query(chart="U")
    chart = store.chart("U")
    b, a = chart.vector("a")
    _, y = chart.vector("y")
    result = store.assert_fact(DiffClaim("U", b, a, 3, y), DERIVED)
    assert result.status == "upgraded"
    assert unknown.id in store.superseded
    assert [store.render_fact(f) for f in store.query(chart="U")] == ["d_3(a) = y in U"]


def test_empty_seed_reaches_a_fixpoint_in_one_round():
    store = FactStore()
    store.add_chart_document({"name": "E", "generators": gens(("a", 0, 0))})
    report = store.saturate()
    assert report.fixpoint and len(report.rounds) == 1 and report.new_facts == []


def test_inconsistent_seed_aborts_and_cites_both_facts():
    store = FactStore()
    store.add_chart_document({
        "name": "bad",
        "generators": gens(("a", 1, 3), ("y", 3, 4), ("z", 3, 4)),
        "differentials": [
            {"source": "a", "r": 2, "target": "y", "origin": "first"},
            {"source": "a", "r": 2, "target": "z", "origin": "second"},
        ],
    })
    report = store.saturate()
    assert report.contradiction is not None and report.rounds == []
    assert report.contradiction.rule == "seed"
    joined = " ".join(report.contradiction.premises)
    assert "first" in joined and "second" in joined


def test_nu_session_derives_the_d3(saturated_nu):
    (fact,) = saturated_nu.query(chart="S0", kind=DIFFERENTIAL, page=3, rule="generalized_leibniz")
    assert saturated_nu.render_fact(fact) == "d_3(h_2h_5) = h_0p in S0"
    exts = [saturated_nu.render_fact(f) for f in saturated_nu.query(kind=EXTENSION, provenance="rule")]
    assert "d_2^{nu,E_3}(h_0h_4^2) = h_0p" in exts
    assert "d_2^{nu,E_inf}(h_0h_4^2) = h_0p" in exts


def test_proof_trace_matches_golden(saturated_nu):
    (fact,) = saturated_nu.query(chart="S0", kind=DIFFERENTIAL, page=3, rule="generalized_leibniz")
    assert saturated_nu.emit_proof(fact.id) == (GOLDEN / "nu_d3_h2h5_proof.txt").read_text()
    assert saturated_nu.emit_proof(fact.id[:8]) == saturated_nu.emit_proof(fact.id)
    with pytest.raises(StoreError):
        saturated_nu.emit_proof("zz")


def test_query_filters(saturated_nu):
    s0 = saturated_nu.query(chart="S0", kind=DIFFERENTIAL)
    assert {saturated_nu.render_fact(f) for f in saturated_nu.query(chart="S0", stem=31)} == {
        "d_2(h_5) = h_0h_4^2 in S0"
    }
    assert all(28 <= f.data["t"] - f.data["s"] <= 34 for f in saturated_nu.query(stem=(28, 34)))
    seeds = saturated_nu.query(chart="S0", provenance="seed")
    derived = saturated_nu.query(chart="S0", provenance="rule")
    assert len(seeds) + len(derived) == len(saturated_nu.query(chart="S0"))
    assert {f.id for f in s0} <= {f.id for f in saturated_nu.query(chart="S0")}
    assert saturated_nu.query(s=(9, 12)) == []


def test_snapshot_round_trip_and_replay(saturated_nu):
    text = saturated_nu.export_snapshot()
    again = FactStore.from_snapshot(text)
    assert again.export_snapshot() == text
    report = again.saturate()
    assert report.fixpoint and report.new_facts == []
    assert again.export_snapshot() == text


def test_tampered_snapshot_is_rejected(saturated_nu):
    doc = json.loads(saturated_nu.export_snapshot())
    doc["facts"][0]["scope"] = "elsewhere"
    with pytest.raises(StoreError, match="does not match"):
        FactStore.from_snapshot(json.dumps(doc))
    with pytest.raises(StoreError, match="supported version"):
        FactStore.from_snapshot(json.dumps({**doc, "version": 99}))


def test_save_and_load(tmp_path, saturated_nu):
    store = session("nu_cofiber.json")
    store.saturate()
    store.save(tmp_path)
    log = (tmp_path / "facts.log").read_text().splitlines()
    assert len(log) == len(store.order)
    loaded = FactStore.load(tmp_path)
    assert loaded.export_snapshot() == store.export_snapshot() == saturated_nu.export_snapshot()
    assert FactStore.load(tmp_path / "missing").facts == {}


def test_leibniz_guard_keeps_the_seeded_d3():
    store = session("leibniz_guard.json")
    report = store.saturate(max_rounds=4)
    assert report.contradiction is None
    rendered = {store.render_fact(f) for f in store.query(chart="S0", kind=DIFFERENTIAL)}
    assert "d_3(h_0h_4) = h_0d_0 in S0" in rendered
    assert "d_3(h_0h_4) = 0 in S0" not in rendered


@pytest.mark.parametrize("workers", [1, 4])
@pytest.mark.parametrize("shuffle", [None, 3])
def test_saturation_is_deterministic(saturated_nu, workers, shuffle):
    store = session("nu_cofiber.json", shuffle_seed=shuffle)
    store.saturate(workers=workers)
    assert store.export_snapshot() == saturated_nu.export_snapshot()
