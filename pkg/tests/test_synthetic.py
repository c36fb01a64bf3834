from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import adamsdeduce
from adamsdeduce.chart import INF, Bidegree, Tri, load_chart
from adamsdeduce.synthetic import (
    TRIVIAL_BY_DEGREE,
    SynElement,
    delta_extension,
    has_crossing_for_fact,
    has_crossing_on_page,
    structure_map,
    syn_group,
)

FIXTURES = Path(adamsdeduce.__file__).parent / "data" / "fixtures"


@pytest.fixture(scope="module")
def stem14():
    return load_chart(FIXTURES / "stem14.json")


@pytest.fixture(scope="module")
def stem38():
    return load_chart(FIXTURES / "stem38.json")


def names(chart, group):
    return sorted(chart.render(group.degree and Bidegree(group.degree.s, group.degree.t), v) for v in group.basis)


def test_einf_at_3_17(stem14):
    g = syn_group(stem14, 3, 17, 17)
    assert names(stem14, g) == ["h_0h_3^2"]
    for w in (13, 14, 15, 16, 18, 19):
        assert syn_group(stem14, 3, 17, w).trivial


def survivors(chart, r):
    """``λ^a x`` classes of the stem-14 fragment that are nonzero in E_inf of νS/λ^r."""
    out = []
    for name in ("h_4", "h_0h_4", "h_0^2h_4"):
        b, x = chart.vector(name)
        for a in range(0, r):
            g = syn_group(chart, b.s, b.t, b.t - a, r)
            if not g.trivial and g.reduce(x):
                out.append(("λ^%d " % a if a else "") + name)
    return out


def test_mod_lambda2_survivors(stem14):
    assert survivors(stem14, 2) == ["λ^1 h_4", "h_0h_4", "λ^1 h_0h_4", "h_0^2h_4", "λ^1 h_0^2h_4"]


def test_mod_lambda3_keeps_the_listed_classes(stem14):
    got = set(survivors(stem14, 3))
    want = {"λ^2 h_4", "λ^1 h_0h_4", "λ^2 h_0h_4", "λ^1 h_0^2h_4", "λ^2 h_0^2h_4"}
    assert want <= got
    assert "λ^1 h_4" not in got  # d_2(h_4) = λ h_0h_3^2 is nonzero mod λ^3


def test_structure_maps(stem14):
    b, y = stem14.vector("h_0h_3^2")
    elem = SynElement(b, y, 0)
    same = structure_map(stem14, "rho", elem, INF, 3)
    assert same is not None and same.x == y
    # λ h_0h_3^2 at weight 16 is zero: B_2 absorbs it
    assert structure_map(stem14, "lambda", elem, INF, INF) is None
    zero = SynElement(b, y.__class__.zero(y.dim), 0)
    assert structure_map(stem14, "lambda", zero, 2, 3) is None
    with pytest.raises(ValueError):
        structure_map(stem14, "rho", elem, 2, 3)


def test_delta_extension_examples(stem14):
    d2, d3 = stem14.facts[0], stem14.facts[1]
    one = delta_extension(stem14, d2, 1, INF, 0)
    assert (one.source.a, one.target.a) == (0, 0)
    assert stem14.render(one.target.bidegree, one.target.x) == "h_0h_3^2"
    assert delta_extension(stem14, d3, 1, INF, 0).target.a == 1  # λ h_0d_0
    two = delta_extension(stem14, d2, 2, INF, 1)
    assert (two.source.a, two.target.a) == (1, 0)
    assert delta_extension(stem14, d3, 2, INF, 0).target.a == 0
    assert delta_extension(stem14, d2, 1, INF, 1) == TRIVIAL_BY_DEGREE
    assert delta_extension(stem14, d2, 2, 3, 0) == TRIVIAL_BY_DEGREE


def test_page_crossing_example(stem38):
    d4 = next(f for f in stem38.facts if f.r == 4)
    b = d4.bidegree
    assert has_crossing_on_page(stem38, b, 4, 1).state is Tri.NO
    for n in (2, 3):
        res = has_crossing_on_page(stem38, b, 4, n)
        assert res.state is Tri.YES
        assert res.witness.r == 3 and stem38.render(res.witness.source_bidegree, res.witness.source) == "e_1"
    for n in (4, 5, 6):
        assert has_crossing_for_fact(stem38, d4, n).state is Tri.NO


def test_crossing_in_an_uncovered_chart_is_unknown():
    chart = load_chart({
        "name": "open",
        "generators": [{"name": "a", "s": 1, "t": 5}, {"name": "b", "s": 2, "t": 6}, {"name": "y", "s": 5, "t": 8}],
        "differentials": [{"source": "a", "r": 4, "target": "y"}],
    })
    assert has_crossing_on_page(chart, Bidegree(1, 5), 4, 2).state is Tri.UNKNOWN


def test_empty_chart_has_no_crossing():
    chart = load_chart({"name": "e", "generators": [{"name": "a", "s": 1, "t": 5}], "regions": [{"s": [0, 9], "stem": [0, 9]}]})
    assert has_crossing_on_page(chart, Bidegree(1, 5), 4, 3).state is Tri.NO


@given(st.integers(1, 3), st.integers(14, 17), st.integers(0, 8), st.integers(2, 6))
def test_syn_group_vanishes_outside_the_lambda_window(stem14_s, t, budget, r):
    chart = _STEM14
    g = syn_group(chart, stem14_s, t, t - budget, r)
    if budget >= r:
        assert g.trivial
    assert syn_group(chart, stem14_s, t, t + 1, r).trivial


@given(st.integers(0, 6), st.integers(0, 6))
def test_syn_einf_dimension_is_monotone_in_the_budget(s, stem):
    chart = _STEM14
    t = s + stem
    dims = [syn_group(chart, s, t, t - k).dim for k in range(0, 8)]
    assert dims == sorted(dims, reverse=True)
    lat = chart.lattice(Bidegree(s, t))
    assert dims[-1] == lat.Z(INF).dim - lat.B(INF).dim


@settings(deadline=None)
@given(st.sampled_from(["h_4", "h_0h_4", "h_0^2h_4", "h_3^2", "h_0h_3^2", "d_0", "h_0d_0"]),
       st.integers(0, 3), st.integers(1, 4))
def test_rho_after_lambda_power_is_zero(name, a, n):
    chart = _STEM14
    b, x = chart.vector(name)
    elem = SynElement(b, x, a)
    try:
        lifted = structure_map(chart, "lambda", elem, n, n + n, k=n)
    except ValueError:
        return  # not a class of νS/λ^n
    if lifted is None:
        return
    assert structure_map(chart, "rho", lifted, 2 * n, n) is None


@given(st.integers(2, 9))
def test_nothing_crosses_on_the_e2_page(r):
    for chart in (_STEM14, _STEM38):
        for f in chart.facts:
            assert has_crossing_on_page(chart, f.bidegree, r, 1).state is Tri.NO


_STEM14 = load_chart(FIXTURES / "stem14.json")
_STEM38 = load_chart(FIXTURES / "stem38.json")
