import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import adamsdeduce
from adamsdeduce.chart import (
    INF,
    Bidegree,
    Chart,
    ChartError,
    ChartSpec,
    candidate_sums,
    load_chart,
    normalize_name,
    page_group,
    sum_terms,
    validate_consistency,
    zb_lattice,
)

from complexes import chart_from_complex
from oracles import oracle_pages, random_filtered_complex

FIXTURES = Path(adamsdeduce.__file__).parent / "data" / "fixtures"


def fixture(name):
    return json.loads((FIXTURES / name).read_text())


def gens(*items):
    return [{"name": n, "s": s, "t": t} for n, s, t in items]


@pytest.fixture(scope="module")
def stem14():
    return load_chart(FIXTURES / "stem14.json")


def test_h4_is_not_a_d2_cycle(stem14):
    b, h4 = stem14.vector("h_4")
    assert b == Bidegree(1, 16)
    assert stem14.Z(b, 2).dim == 0


def test_zb_lattice_at_3_17(stem14):
    lat = zb_lattice(stem14, 3, 17)
    _, y = stem14.vector("h_0h_3^2")
    assert lat.B(1).dim == 0
    assert lat.B(2).dim == 1 and lat.B(2).contains(y)
    assert lat.B(2) == lat.Z(INF) == lat.Z(1)


def test_empty_chart_has_trivial_lattice():
    chart = load_chart({"name": "E", "generators": gens(("a", 0, 0), ("b", 1, 2))})
    for r in (1, 2, 5, INF):
        assert chart.Z(Bidegree(1, 2), r).dim == 1
        assert chart.B(Bidegree(1, 2), r).dim == 0


def test_degree_law_is_enforced():
    doc = {
        "name": "bad",
        "generators": gens(("a", 0, 0), ("b", 2, 2)),
        "differentials": [{"source": "a", "r": 2, "target": "b"}],
    }
    with pytest.raises(ChartError):
        load_chart(doc)


def test_stem38_boundaries():
    chart = load_chart(FIXTURES / "stem38.json")
    b = Bidegree(7, 44)
    _, h1t = chart.vector("h_1t")
    _, x = chart.vector("h_0^2x")
    assert chart.B(b, 3).dim == 1 and chart.B(b, 3).contains(h1t)
    assert chart.B(b, 4).dim == 2 and chart.B(b, 4).contains(x)


def test_page_groups(stem14):
    assert page_group(stem14, 2, 17, 2).dim == 1
    e3 = page_group(stem14, 2, 17, 3)
    _, h0h4 = stem14.vector("h_0h_4")
    assert e3.contains(h0h4) and e3.dim == 1
    assert page_group(stem14, 1, 16, INF).dim == 0
    assert page_group(stem14, 2, 16, INF).dim == 1  # h_3^2


def test_source_supporting_two_differentials_is_a_violation():
    doc = {
        "name": "two",
        "generators": gens(("x", 1, 10), ("y", 3, 11), ("z", 4, 12)),
        "differentials": [{"source": "x", "r": 2, "target": "y"}, {"source": "x", "r": 3, "target": "z"}],
    }
    assert validate_consistency(doc)
    with pytest.raises(ChartError):
        load_chart(doc)


def test_targets_compared_as_cosets():
    # d3(a) is stated twice; the two targets differ by w, which d2(c) = w kills.
    # By hand: B_2 at (4,5) = span{w}, so y and y + w are one coset.
    doc = {
        "name": "cosets",
        "generators": gens(("a", 1, 3), ("c", 2, 4), ("y", 4, 5), ("w", 4, 5)),
        "differentials": [
            {"source": "c", "r": 2, "target": "w"},
            {"source": "a", "r": 3, "target": "y"},
            {"source": "a", "r": 3, "target": "y+w"},
        ],
    }
    chart = load_chart(doc)
    assert not chart.violations
    kind, value = chart.differential(Bidegree(1, 3), chart.vector("a")[1], 3)
    assert kind == "value" and chart.render(Bidegree(4, 5), value) == "y"


def test_conflicting_values_are_a_contradiction():
    doc = {
        "name": "clash",
        "generators": gens(("a", 1, 3), ("y", 3, 4), ("z", 3, 4)),
        "differentials": [{"source": "a", "r": 2, "target": "y"}, {"source": "a", "r": 2, "target": "z"}],
    }
    kinds = {v.kind for v in validate_consistency(doc)}
    assert "contradiction" in kinds


def test_unknown_fact_is_a_survival_not_a_boundary():
    doc = {
        "name": "u",
        "generators": gens(("a", 1, 3), ("y", 4, 5)),
        "differentials": [{"source": "a", "r": "unknown-at 3"}],
    }
    chart = load_chart(doc)
    a = chart.vector("a")[1]
    assert chart.Z(Bidegree(1, 3), 2).contains(a)
    assert chart.differential(Bidegree(1, 3), a, 3) == ("unknown", None)
    assert chart.B(Bidegree(4, 5), INF).dim == 0
    assert not chart.exact_through(Bidegree(1, 3), 3)
    assert not chart.is_determined(Bidegree(1, 3), a, 3)


def test_target_set_intersects_boundaries():
    doc = {
        "name": "ts",
        "generators": gens(("a", 1, 3), ("y", 4, 5), ("w", 4, 5)),
        "differentials": [{"source": "a", "r": 3, "target": "y + possibly w"}],
    }
    chart = load_chart(doc)
    b = Bidegree(4, 5)
    assert chart.B(b, 3).dim == 0  # y and y+w share no nonzero vector
    assert chart.differential(Bidegree(1, 3), chart.vector("a")[1], 3)[0] == "unknown"


def test_survives_fact_is_determined_up_to_its_page():
    doc = {
        "name": "sv",
        "generators": gens(("a", 1, 3), ("y", 3, 4), ("z", 5, 6)),
        "differentials": [{"source": "a", "r": "survives-to 4"}],
    }
    chart = load_chart(doc)
    a = chart.vector("a")[1]
    assert chart.is_determined(Bidegree(1, 3), a, 2)
    assert chart.is_determined(Bidegree(1, 3), a, 3)
    assert not chart.is_determined(Bidegree(1, 3), a, 4)


def test_name_normalization():
    assert normalize_name(r"d_0^2e_0g[B_4]") == normalize_name("d_0^2e_0gB_4")
    assert normalize_name("(h_0h_4^2[4])") == "h_0h_4^2[4]"
    assert sum_terms("a + b + a") == ["b"]
    assert candidate_sums("y + possibly w") == [["y"], ["w", "y"]]


def test_spec_rejects_duplicate_generators():
    with pytest.raises(ChartError):
        load_chart({"name": "d", "generators": gens(("a", 0, 0), ("a", 0, 0))})


def test_suspension_shifts_degrees():
    spec = ChartSpec("S0")
    spec.add_generator("h_5", Bidegree(1, 32))
    assert spec.suspended("S3", 3).generators["h_5"] == Bidegree(1, 35)


def _lattice_invariants(chart: Chart) -> None:
    for b in chart.spec.bidegrees():
        lat = chart.lattice(b)
        top = chart.spec.r_max
        prev_z, prev_b = lat.Z(1), lat.B(1)
        assert prev_b.dim == 0 and prev_z.dim == chart.dim(b)
        dims = []
        for r in range(2, min(top, 12)):
            z, bb = lat.Z(r), lat.B(r)
            assert z <= prev_z and prev_b <= bb and bb <= z
            dims.append(len(chart.page_group(b.s, b.t, r + 1).basis))
            assert dims[-1] == z.dim - bb.dim
            prev_z, prev_b = z, bb
        assert lat.B(INF) <= lat.Z(INF) and lat.Z(INF) <= prev_z and prev_b <= lat.B(INF)
        assert dims == sorted(dims, reverse=True)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_recorded_differentials_match_the_filtration_oracle(seed):
    rng = random.Random(seed)
    C = random_filtered_complex(rng, max_dim=12, length=5)
    chart, _ = chart_from_complex(C, rng)
    pages = [2, 3, 4, 5, 6, None]
    expected = oracle_pages(C, pages)
    for (p, k, r), dim in expected.items():
        got = chart.page_group(p, p + k, INF if r is None else r).dim
        assert got == dim, (p, k, r)
    _lattice_invariants(chart)
