"""Ingest of appendix-style differential tables.

A table file is tab separated with a small comment header::

    # chart: S0
    # stem: 126
    # region: 0 10
    s	element	d	value
    9	x_{126,9}	d3	h_0^3x_{125,9,2}+h_0^4x_{125,8}
    12	h_0^4x_{125,8}	d3^-1	x_{126,9}+h_0x_{126,8,3}
    8	h_6^2	Permanent

Every name in the ``element`` column lives at ``(s, stem + s)``.  Names that first
appear in the ``value`` column are placed by the degree law and become implicit
generators.  A ``d_r^-1`` row records its element as the target of ``d_r`` from the
value expression.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .chart import (
    Bidegree,
    Chart,
    ChartError,
    ChartSpec,
    RawFact,
    Region,
    Variant,
    Violation,
    candidate_sums,
    resolve_fact,
    sum_terms,
)

_D_CELL = re.compile(r"d_?\{?(\d+)\}?(\^-1|\^\{-1\})?$")


@dataclass(frozen=True)
class TableRow:
    origin: str
    s: int
    element: str
    kind: str  # "forward", "inverse" or "permanent"
    r: int | None
    value: str


@dataclass
class Table:
    chart: str
    stem: int
    region: Region
    rows: list[TableRow] = field(default_factory=list)
    origin: str = ""


def parse_table(text: str, origin: str = "<table>") -> Table:
    header: dict[str, str] = {}
    rows: list[TableRow] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            header[key.strip()] = val.strip()
            continue
        cells = line.split("\t")
        if cells[0] == "s":
            continue
        while len(cells) < 4:
            cells.append("")
        s_cell, element, d_cell, value = (c.strip() for c in cells[:4])
        where = f"{origin}:{lineno}"
        if d_cell.lower() == "permanent":
            rows.append(TableRow(where, int(s_cell), element, "permanent", None, ""))
            continue
        m = _D_CELL.match(d_cell.replace(" ", ""))
        if m is None:
            raise ChartError(f"{where}: cannot read differential column {d_cell!r}")
        kind = "inverse" if m.group(2) else "forward"
        rows.append(TableRow(where, int(s_cell), element, kind, int(m.group(1)), value))
    try:
        chart = header["chart"]
        stem = int(header["stem"])
        lo, hi = (int(x) for x in header["region"].split())
    except KeyError as exc:
        raise ChartError(f"{origin}: missing header field {exc}") from None
    return Table(chart, stem, Region(lo, hi, stem, stem), rows, origin)


def read_table(path: str | Path) -> Table:
    path = Path(path)
    return parse_table(path.read_text(), path.name)


def bundled_tables() -> list[Table]:
    """The appendix tables shipped with the package (S0 stems 122-127 and Cnu 126)."""
    root = resources.files("adamsdeduce") / "data" / "tables"
    out = []
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".tsv"):
            out.append(parse_table(entry.read_text(), entry.name))
    return out


def _place(spec: ChartSpec, names: Iterable[str], b: Bidegree, row: TableRow) -> None:
    for name in names:
        old = spec.generators.get(name)
        if old is None:
            spec.add_generator(name, b)
        elif old != b:
            raise ChartError(f"{row.origin}: degree law violated, {name} is at {old} but the row places it at {b}")


def _value_bidegree(table: Table, row: TableRow) -> Bidegree:
    t = table.stem + row.s
    assert row.r is not None
    if row.kind == "forward":
        return Bidegree(row.s + row.r, t + row.r - 1)
    return Bidegree(row.s - row.r, t - row.r + 1)


def ingest_tables(tables: Iterable[Table], specs: dict[str, ChartSpec] | None = None) -> dict[str, list[RawFact]]:
    """Add the tables' generators and regions to ``specs``; return raw facts per chart.

    Row elements are placed first across all tables so that names introduced by a
    later table's rows take precedence over implicit placement from value columns.
    """
    tables = list(tables)
    specs = specs if specs is not None else {}
    for table in tables:
        spec = specs.setdefault(table.chart, ChartSpec(table.chart))
        spec.regions = tuple(spec.regions) + (table.region,)
        for row in table.rows:
            b = Bidegree(row.s, table.stem + row.s)
            _place(spec, sum_terms(row.element), b, row)
    facts: dict[str, list[RawFact]] = {}
    for table in tables:
        spec = specs[table.chart]
        out = facts.setdefault(table.chart, [])
        for row in table.rows:
            if row.kind == "permanent":
                out.append(RawFact(row.element, float("inf"), Variant.PERMANENT, origin=row.origin))
                continue
            assert row.r is not None
            if row.value.strip() == "?":
                if row.kind == "inverse":
                    raise ChartError(f"{row.origin}: an inverse row needs a source expression")
                out.append(RawFact(row.element, row.r, Variant.UNKNOWN, origin=row.origin))
                continue
            vb = _value_bidegree(table, row)
            cands = candidate_sums(row.value)
            for c in cands:
                _place(spec, c, vb, row)
            cand_text = tuple("+".join(c) or "0" for c in cands)
            if row.kind == "forward":
                if len(cands) > 1:
                    out.append(RawFact(row.element, row.r, Variant.TARGET_SET, candidates=cand_text, origin=row.origin))
                else:
                    out.append(RawFact(row.element, row.r, Variant.VALUE, target=cand_text[0], origin=row.origin))
            elif len(cands) > 1:
                out.append(RawFact(cand_text[0], row.r, Variant.HIT, target=row.element, candidates=cand_text, origin=row.origin))
            else:
                out.append(RawFact(cand_text[0], row.r, Variant.VALUE, target=row.element, origin=row.origin + " (inverse)"))
    return facts


@dataclass
class TableReport:
    """Outcome of ingesting and cross-checking a set of tables."""

    charts: dict[str, Chart]
    violations: list[Violation]
    contradictions: list[Violation]
    paired: int = 0
    external: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations and not self.contradictions


def verify_tables(tables: Iterable[Table], specs: dict[str, ChartSpec] | None = None) -> TableReport:
    """Ingest tables leniently and check them.

    Besides the chart violations, every inverse row whose source bidegree lies in an
    ingested region is compared with the value the forward rows alone give to d_r
    on that source; inverse rows pointing outside all regions are counted as
    external and cannot be cross-checked.
    """
    specs = specs if specs is not None else {}
    raw = ingest_tables(tables, specs)
    charts: dict[str, Chart] = {}
    violations: list[Violation] = []
    contradictions: list[Violation] = []
    paired = external = 0
    for name in sorted(raw):
        spec = specs[name]
        facts = [resolve_fact(spec, f) for f in raw[name]]
        chart = Chart(spec, facts, strict=False)
        charts[name] = chart
        for v in chart.violations:
            (contradictions if v.kind == "contradiction" else violations).append(v)
        forward = Chart(spec, [f for f in facts if not f.label.endswith("(inverse)")], strict=False)
        for f in facts:
            if not f.label.endswith("(inverse)"):
                continue
            if not spec.covered(f.bidegree):
                external += 1
                continue
            paired += 1
            r = int(f.r)
            tb = f.target_bidegree
            assert tb is not None and f.target is not None
            kind, value = forward.differential(f.bidegree, f.source, r)
            expected = chart.B(tb, r - 1).reduce(f.target)
            if kind != "value" or value is None or chart.B(tb, r - 1).reduce(value) != expected:
                got = "undetermined" if kind == "unknown" else (
                    "no cycle" if kind == "not-cycle" else spec.render(tb, chart.B(tb, r - 1).reduce(value))
                )
                violations.append(
                    Violation(
                        "pairing",
                        f"{name}: {f.label}: forward rows give d_{r}({spec.render(f.bidegree, f.source)}) = {got}, "
                        f"the inverse row says {spec.render(tb, f.target)}",
                        (f.label,),
                    )
                )
    return TableReport(charts, violations, contradictions, paired, external)
