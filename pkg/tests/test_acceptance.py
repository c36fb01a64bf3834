"""One test per acceptance criterion, each checked exactly and against its time budget."""

import json
import random
import time
from pathlib import Path

import pytest

import adamsdeduce
from adamsdeduce.chart import INF, Bidegree, Tri, load_chart
from adamsdeduce.extdb import ExtDB, map_from_document
from adamsdeduce.factstore import DIFFERENTIAL, EXTENSION, FactStore
from adamsdeduce.rules import DiffClaim, RuleRefused, generalized_leibniz, lift_rule, mahowald_trick
from adamsdeduce.synthetic import has_crossing_for_fact, has_crossing_on_page, syn_group
from adamsdeduce.tables import bundled_tables, verify_tables

from complexes import chart_from_complex
from oracles import oracle_pages, random_filtered_complex
from test_chart import _lattice_invariants

FIXTURES = Path(adamsdeduce.__file__).parent / "data" / "fixtures"


def session(name, shuffle_seed=None):
    store = FactStore()
    store.load_session(json.loads((FIXTURES / name).read_text()), FIXTURES, shuffle_seed=shuffle_seed)
    return store


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s, budget {self.seconds} s"


def _survivors(chart, r):
    out = set()
    for name in ("h_4", "h_0h_4", "h_0^2h_4"):
        b, x = chart.vector(name)
        for a in range(r):
            g = syn_group(chart, b.s, b.t, b.t - a, r)
            if not g.trivial and g.reduce(x):
                out.add(("λ" if a == 1 else f"λ^{a}" if a else "") + name)
    return out


@pytest.mark.criterion(1, "synthetic E_inf groups of the stem-14 fragment")
def test_criterion_1_synthetic_pages():
    with Budget(1.0):
        chart = load_chart(FIXTURES / "stem14.json")
        g = syn_group(chart, 3, 17, 17)
        assert [chart.render(Bidegree(3, 17), v) for v in g.basis] == ["h_0h_3^2"]
        for w in (12, 13, 14, 15, 16, 18, 19, 20):
            assert syn_group(chart, 3, 17, w).trivial
        mod2 = _survivors(chart, 2)
        assert {"λh_4", "h_0h_4", "h_0^2h_4"} <= mod2
        mod3 = _survivors(chart, 3)
        assert {"λ^2h_4", "λh_0h_4", "λ^2h_0h_4", "λh_0^2h_4", "λ^2h_0^2h_4"} <= mod3
        # h_4 itself never survives: it supports d_2
        assert "h_4" not in mod2 | mod3


@pytest.mark.criterion(2, "page crossings of d_4(h_0h_3h_5) = h_0^2x")
def test_criterion_2_page_crossing():
    with Budget(1.0):
        chart = load_chart(FIXTURES / "stem38.json")
        d4 = next(f for f in chart.facts if f.r == 4)
        assert has_crossing_on_page(chart, d4.bidegree, 4, 1).state is Tri.NO
        assert has_crossing_on_page(chart, d4.bidegree, 4, 2).state is Tri.YES
        assert has_crossing_on_page(chart, d4.bidegree, 4, 3).state is Tri.YES
        for n in range(4, 9):
            assert has_crossing_for_fact(chart, d4, n).state is Tri.NO


@pytest.mark.criterion(3, "Mahowald trick gives d_2^{nu,E_3}(h_0h_4^2) = h_0p, lift to E_inf")
def test_criterion_3_mahowald():
    with Budget(1.0):
        db = session("nu_cofiber.json").db()
        C, S0 = db.chart("Cnu"), db.chart("S0")
        b, xbar = C.vector("h_0h_4^2[4]")
        tb, ybar = C.vector("h_0p[0]")
        ext_h = db.action_fext("q", 2, b, xbar)
        ext_g = db.action_fext("i", 2, tb, S0.vector("h_0p")[1])
        (e3,) = mahowald_trick(db, "nu-cofiber", ext_h, DiffClaim("Cnu", b, xbar, 2, ybar), ext_g).conclusions
        assert db.render_fext(e3) == "d_2^{nu,E_3}(h_0h_4^2) = h_0p"
        (einf,) = lift_rule(db, e3, INF).conclusions
        assert db.render_fext(einf) == "d_2^{nu,E_inf}(h_0h_4^2) = h_0p"


@pytest.mark.criterion(4, "saturation derives d_3(h_2h_5) = h_0p with a full proof trace")
def test_criterion_4_leibniz_positive():
    with Budget(1.0):
        store = session("nu_cofiber.json")
        report = store.saturate()
        assert report.contradiction is None and report.fixpoint
        (fact,) = store.query(chart="S0", kind=DIFFERENTIAL, page=3, rule="generalized_leibniz")
        assert store.render_fact(fact) == "d_3(h_2h_5) = h_0p in S0"
        assert any(fact.id in [fid for fid, _ in rnd.new] for rnd in report.rounds[:2])
        proof = store.emit_proof(fact.id)
    # every premise chain ends in a seed
    assert "generalized Mahowald trick" in proof and "lifting an extension" in proof
    assert proof.count("seed (") == 5
    assert "certificate (5)" in proof


@pytest.mark.criterion(5, "Leibniz refused on hypothesis (5); d_3(h_0h_4) = 0 never stored")
def test_criterion_5_leibniz_guard():
    with Budget(1.0):
        db = ExtDB({"S0": load_chart(FIXTURES / "stem14.json")})
        db.register_map(map_from_document({"id": "2", "source": "S0", "target": "S0", "af": 1, "detect": "h_0",
                                           "regions": [{"s": [0, 8], "stem": [13, 16]}]}))
        S0 = db.chart("S0")
        b, h4 = S0.vector("h_4")
        _, y = S0.vector("h_0h_3^2")
        d1 = next(f for f in db.auto_facts("2") if f.source_bidegree == b)
        zero = db.register_fext("2", INF, 2, "h_0h_3^2", "0")
        with pytest.raises(RuleRefused) as info:
            generalized_leibniz(db, "2", DiffClaim("S0", b, h4, 2, y), d1, zero)
        assert info.value.hypothesis == "(5)"
        store = session("leibniz_guard.json")
        report = store.saturate(max_rounds=4)
        assert report.contradiction is None
        rendered = {store.render_fact(f) for f in store.query(chart="S0", kind=DIFFERENTIAL)}
        assert "d_3(h_0h_4) = 0 in S0" not in rendered
        assert "d_3(h_0h_4) = h_0d_0 in S0" in rendered


@pytest.mark.criterion(6, "appendix tables verify; d_3^{nu,E_4}(h_1x_{121,7}) = h_0^2x_{125,9,2}")
def test_criterion_6_appendix():
    with Budget(10.0):
        report = verify_tables(bundled_tables())
        assert report.violations == [] and report.contradictions == []
        store = session("stem126_nu.json")
        result = store.saturate()
        assert result.contradiction is None
        exts = store.query(kind=EXTENSION, rule="mahowald_trick")
        rendered = {store.render_fact(f) for f in exts}
        # the conclusion holds modulo B_{r'} of the target, so it is stored with its indeterminacy
        assert "d_3^{nu,E_4}(h_1x_{121,7}) = h_0^2x_{125,9,2} (mod indeterminacy)" in rendered
        (fact,) = [f for f in exts if f.data["x"] == ["h_1x_{121,7}"]]
        assert fact.data["y"] == ["h_0^2x_{125,9,2}"] and ["h_0^2x_{125,9,2}"] not in fact.data["indeterminacy"]


@pytest.mark.criterion(7, "500 random filtered complexes match the filtration oracle")
def test_criterion_7_oracle_suite():
    pages = [2, 3, 4, 5, 6, 7, None]
    failures = []
    with_long_differentials = 0
    with Budget(60.0):
        for seed in range(500):
            rng = random.Random(seed)
            C = random_filtered_complex(rng, max_dim=20, length=6)
            chart, _ = chart_from_complex(C, rng)
            with_long_differentials += any(f.r >= 3 for f in chart.facts)
            for (p, k, r), dim in oracle_pages(C, pages).items():
                got = chart.page_group(p, p + k, INF if r is None else r).dim
                if got != dim:
                    failures.append((seed, p, k, r, got, dim))
            _lattice_invariants(chart)
    assert failures == []
    assert with_long_differentials > 100  # the suite exercises more than d_2


@pytest.mark.criterion(8, "snapshots byte-identical across worker counts and seed order")
def test_criterion_8_determinism():
    with Budget(30.0):
        snapshots = set()
        for workers, shuffle in ((1, None), (4, 11), (8, 29)):
            store = session("stem126_nu.json", shuffle_seed=shuffle)
            assert store.saturate(workers=workers).contradiction is None
            snapshots.add(store.export_snapshot())
    assert len(snapshots) == 1
