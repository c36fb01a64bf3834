from importlib import resources

import pytest

from adamsdeduce.chart import Bidegree, ChartError
from adamsdeduce.tables import bundled_tables, parse_table, verify_tables


def bundled_text(name):
    return (resources.files("adamsdeduce") / "data" / "tables" / name).read_text()


def test_bundled_tables_verify():
    report = verify_tables(bundled_tables())
    assert report.ok, [v.message for v in report.violations + report.contradictions]
    assert report.paired > 100
    assert set(report.charts) == {"S0", "Cnu"}


def test_bundled_s0_places_h1x121_7():
    report = verify_tables(bundled_tables())
    s0 = report.charts["S0"]
    assert s0.spec.generators["h_1x_{121,7}"] == Bidegree(8, 130)
    assert s0.spec.generators["x_{123,8}"] == Bidegree(8, 131)


def test_parse_rows_and_kinds():
    table = parse_table(bundled_text("S123.tsv"), "S123.tsv")
    assert (table.chart, table.stem) == ("S0", 123)
    kinds = {row.kind for row in table.rows}
    assert kinds == {"forward", "inverse", "permanent"}
    last = table.rows[-1]
    assert (last.s, last.element, last.r, last.value) == (8, "x_{123,8}", 3, "x_{122,11}+h_6Md_0")


def test_unreadable_differential_column():
    with pytest.raises(ChartError, match="cannot read"):
        parse_table("# chart: S0\n# stem: 1\n# region: 0 3\n1\ta\tdx\tb\n", "bad.tsv")


def test_missing_header():
    with pytest.raises(ChartError, match="missing header"):
        parse_table("1\ta\td2\tb\n", "nohead.tsv")


def test_degree_law_tamper_names_the_row():
    text = bundled_text("S123.tsv")
    # move x_{123,8} one filtration up: its d3 target now collides with the S122 placement
    tampered = text.replace("8\tx_{123,8}\td3", "9\tx_{123,8}\td3")
    others = [t for t in bundled_tables() if t.origin != "S123.tsv"]
    with pytest.raises(ChartError) as info:
        verify_tables(others + [parse_table(tampered, "S123.tsv")])
    # the inverse row in S122 that also places x_{123,8} is the one that collides
    assert str(info.value).startswith("S122.tsv:37: degree law violated, x_{123,8}")


def test_pairing_tamper_is_reported():
    text = bundled_text("S123.tsv")
    # the inverse row for x_{123,13,2} in S122 no longer agrees with this forward row
    tampered = text.replace("x_{123,13,2}\td3\tx_{122,16}+h_0x_{122,15,2}", "x_{123,13,2}\td3\tx_{122,16}")
    others = [t for t in bundled_tables() if t.origin != "S123.tsv"]
    report = verify_tables(others + [parse_table(tampered, "S123.tsv")])
    assert not report.ok
    messages = [v.message for v in report.violations + report.contradictions]
    assert any("x_{123,13,2}" in m for m in messages), messages
