"""Command line entry point.

The store lives in a directory (``--store``, else ``$ADAMSDEDUCE_STORE``, else
``./.adamsdeduce``).  Verbs::

    adamsdeduce ingest FILE...          chart, map or session documents
    adamsdeduce ingest-table FILE...    appendix-style tables
    adamsdeduce saturate [--max-rounds N] [--workers K]
    adamsdeduce query [--chart C] [--kind K] [--stem A[:B]] [--s A[:B]] [--page R] [--rule R]
    adamsdeduce prove SELECTOR          fact id prefix or "d3 h_2h_5"
    adamsdeduce verify-tables [FILE...] bundled tables when no file is given
    adamsdeduce export-svg --chart C --stems A:B [--s A:B] [--page R] [-o OUT]

Exit status is 1 when a report contains violations or contradictions, 2 on bad
arguments or unreadable input.
"""

from __future__ import annotations

import argparse
import difflib
import json
import os
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

from .chart import INF, ChartError, parse_page, sum_terms
from .extdb import ExtensionError
from .factstore import DIFFERENTIAL, FactStore, SaturationReport, StoreError
from .svg import render_page
from .tables import bundled_tables, read_table, verify_tables

STORE_ENV = "ADAMSDEDUCE_STORE"


class UsageError(Exception):
    pass


def _range(text: str | None) -> int | tuple[int, int] | None:
    if text is None:
        return None
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi)) if sep else int(lo)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected N or A:B") from None


def _store_dir(args: argparse.Namespace) -> Path:
    return Path(args.store or os.environ.get(STORE_ENV) or ".adamsdeduce")


# ---------------------------------------------------------------------------
# sessions and assertions


def is_session(doc: Mapping[str, Any]) -> bool:
    return any(k in doc for k in ("charts", "tables", "maps", "triangles", "extensions"))


def check_assertion(store: FactStore, spec: Mapping[str, Any]) -> tuple[bool, str]:
    """Evaluate one assertion of a session document.

    ``{"chart", "source", "r", "target"}`` holds when the chart's d_r on the source
    equals the target; ``{"map", "r", "n", "x", "y"}`` when a stored extension says
    so; ``"absent": true`` inverts the test and asks that no stored fact says it.
    """
    absent = bool(spec.get("absent"))
    label = spec.get("label") or json.dumps({k: v for k, v in spec.items() if k != "absent"}, sort_keys=True)
    if "chart" in spec:
        chart = store.chart(spec["chart"])
        b, x = chart.vector(str(spec["source"]))
        r = parse_page(spec["r"])
        if absent:
            want = normalize_target(spec.get("target", "0"))
            for fact in store.query(chart=spec["chart"], kind=DIFFERENTIAL, page=r):
                d = fact.data
                if (d["s"], d["t"]) == (b.s, b.t) and sorted(d.get("source", [])) == sorted(sum_terms(spec["source"])) \
                        and sorted(d.get("target", [])) == want:
                    return False, f"{label}: stored as {fact.id}"
            return True, f"{label}: not stored"
        if r == INF:
            ok = chart.Z(b, INF).contains(x)
            return ok, f"{label}: {'permanent' if ok else 'not permanent'}"
        tb = b.shifted(int(r), int(r) - 1)
        kind, value = chart.differential(b, x, int(r))
        target = chart.vector(str(spec.get("target", "0")), tb)[1]
        ok = kind == "value" and value == chart.B(tb, int(r) - 1).reduce(target) and chart.is_determined(b, x, int(r))
        got = chart.render(tb, value) if kind == "value" and value is not None else kind
        return ok, f"{label}: chart gives {got}"
    db = store.db()
    fmap = db.maps[spec["map"]]
    X, Y = db.chart(fmap.source), db.chart(fmap.target)
    b, x = X.vector(str(spec["x"]))
    n = int(spec["n"])
    tb = fmap.target_bidegree(b, n)
    y = Y.vector(str(spec.get("y", "0")), tb)[1]
    r = parse_page(spec["r"])
    hit = [fx for fx in db.fexts if (fx.map_id, fx.r, fx.n, fx.source_bidegree, fx.x) == (fmap.id, r, n, b, x)
           and fx.indeterminacy.contains(fx.y + y)]
    if absent:
        return not hit, f"{label}: {'stored' if hit else 'not stored'}"
    return bool(hit), f"{label}: {'stored' if hit else 'not stored'}"


def normalize_target(expr: str) -> list[str]:
    return sorted(sum_terms(expr)) if expr.strip() not in ("", "0") else []


def run_session(store: FactStore, doc: Mapping[str, Any], base_dir: Path | None = None, workers: int = 1,
                shuffle_seed: int | None = None, out=None) -> int:
    out = out or sys.stdout
    store.load_session(doc, base_dir, shuffle_seed)
    status = 0
    settings = doc.get("saturate")
    if settings:
        rounds = int(settings.get("max_rounds", 32)) if isinstance(settings, Mapping) else 32
        report = store.saturate(rounds, workers)
        print_saturation(store, report, out)
        if report.contradiction is not None:
            status = 1
    for spec in doc.get("assertions", []):
        ok, message = check_assertion(store, spec)
        print(f"{'PASS' if ok else 'FAIL'} {message}", file=out)
        if not ok:
            status = 1
    return status


def print_saturation(store: FactStore, report: SaturationReport, out=None) -> None:
    out = out or sys.stdout
    for rnd in report.rounds:
        print(f"round {rnd.round}: {len(rnd.new)} new, {rnd.refused} refused", file=out)
        for fid, rule in rnd.new:
            print(f"  [{fid}] {rule}: {store.render_fact(store.facts[fid])}", file=out)
    if report.contradiction is not None:
        print(store.render_contradiction(report.contradiction), end="", file=out)
    else:
        print("fixpoint reached" if report.fixpoint else "round cap reached", file=out)


# ---------------------------------------------------------------------------
# verbs


def cmd_ingest(args: argparse.Namespace) -> int:
    store = FactStore.load(_store_dir(args))
    status = 0
    for name in args.files:
        path = Path(name)
        doc = json.loads(path.read_text())
        if is_session(doc):
            status |= run_session(store, doc, path.parent, args.workers)
        elif "source" in doc and "target" in doc and "af" in doc:
            store.register_map_document(doc)
        elif "map" in doc:
            store.add_extension_document(doc, origin=path.name)
        else:
            store.add_chart_document(doc, origin=path.name)
    store.save(_store_dir(args))
    return status | _report_violations(store)


def cmd_ingest_table(args: argparse.Namespace) -> int:
    store = FactStore.load(_store_dir(args))
    store.add_tables([read_table(p) for p in args.files])
    store.save(_store_dir(args))
    return _report_violations(store)


def _report_violations(store: FactStore) -> int:
    bad = store.violations()
    for v in bad:
        print(f"violation {v}")
    return 1 if bad else 0


def cmd_saturate(args: argparse.Namespace) -> int:
    store = FactStore.load(_store_dir(args))
    report = store.saturate(args.max_rounds, args.workers)
    print_saturation(store, report)
    store.save(_store_dir(args))
    return 1 if report.contradiction is not None else 0


def cmd_query(args: argparse.Namespace) -> int:
    store = FactStore.load(_store_dir(args))
    facts = store.query(
        chart=args.chart,
        kind=args.kind,
        stem=_range(args.stem),
        s=_range(args.s),
        page=parse_page(args.page) if args.page else None,
        rule=args.rule,
        provenance=args.provenance,
    )
    for fact in facts:
        if args.json:
            print(json.dumps(fact.to_json(), sort_keys=True))
        else:
            print(f"{fact.id}  {store.render_fact(fact)}")
    return 0


def resolve_selector(store: FactStore, selector: str) -> str:
    """A fact id (or unique prefix), or ``"d<r> <class>"`` / ``"<class>"``."""
    live = [i for i in sorted(store.facts) if i not in store.superseded]
    by_id = [i for i in live if i.startswith(selector)]
    if len(by_id) == 1:
        return by_id[0]
    words = selector.split()
    page: str | None = None
    if len(words) > 1 and words[0][0] == "d" and words[0][1:].isdigit():
        page, words = words[0][1:], words[1:]
    want = sorted(sum_terms(" ".join(words)))
    found = []
    names: set[str] = set()
    for fid in live:
        fact = store.facts[fid]
        d = fact.data
        src = d.get("source") or d.get("x") or d.get("y") or []
        names.update(src)
        if sorted(src) != want:
            continue
        if page is not None and d.get("r") != page:
            continue
        found.append(fid)
    if len(found) == 1:
        return found[0]
    if found:
        lines = "\n".join(f"  {fid}  {store.render_fact(store.facts[fid])}" for fid in found)
        raise UsageError(f"selector {selector!r} is ambiguous:\n{lines}")
    near = difflib.get_close_matches(" ".join(words), sorted(names), n=5)
    hint = f"; nearest names: {', '.join(near)}" if near else ""
    raise UsageError(f"no fact matches {selector!r}{hint}")


def cmd_prove(args: argparse.Namespace) -> int:
    store = FactStore.load(_store_dir(args))
    fid = resolve_selector(store, args.selector)
    sys.stdout.write(store.emit_proof(fid))
    return 0


def cmd_verify_tables(args: argparse.Namespace) -> int:
    tables = [read_table(p) for p in args.files] if args.files else bundled_tables()
    report = verify_tables(tables)
    for table in tables:
        print(f"{table.origin}: chart {table.chart}, stem {table.stem}, {len(table.rows)} rows")
    for v in report.violations:
        print(f"violation {v}")
    for v in report.contradictions:
        print(f"contradiction {v}")
    print(f"inverse rows paired: {report.paired}, external: {report.external}")
    print(f"violations: {len(report.violations)}, contradictions: {len(report.contradictions)}")
    print("PASS" if report.ok else "FAIL")
    return 0 if report.ok else 1


def cmd_export_svg(args: argparse.Namespace) -> int:
    store = FactStore.load(_store_dir(args))
    if args.chart not in store.specs:
        raise UsageError(f"unknown chart {args.chart}; known: {', '.join(sorted(store.specs)) or 'none'}")
    stems = _range(args.stems)
    srange = _range(args.s)
    if not isinstance(stems, tuple):
        raise UsageError("--stems takes A:B")
    if srange is None:
        srange = (0, 25)
    elif isinstance(srange, int):
        srange = (0, srange)
    text = render_page(store.chart(args.chart), stems, srange, parse_page(args.page))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adamsdeduce", description="Deduce Adams differentials from extensions.")
    parser.add_argument("--store", help=f"store directory (default ${STORE_ENV} or ./.adamsdeduce)")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ingest", help="ingest chart, map or session documents")
    p.add_argument("files", nargs="+")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("ingest-table", help="ingest appendix-style tables")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_ingest_table)

    p = sub.add_parser("saturate", help="apply the rules to a fixpoint")
    p.add_argument("--max-rounds", type=int, default=32)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_saturate)

    p = sub.add_parser("query", help="list stored facts")
    p.add_argument("--chart")
    p.add_argument("--kind", choices=["differential", "extension", "permanent-cycle", "existential-boundary"])
    p.add_argument("--stem")
    p.add_argument("--s")
    p.add_argument("--page")
    p.add_argument("--rule")
    p.add_argument("--provenance", help="seed, rule, or a seed tag such as table")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("prove", help="print the proof trace of a fact")
    p.add_argument("selector")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify-tables", help="check appendix tables")
    p.add_argument("files", nargs="*")
    p.set_defaults(func=cmd_verify_tables)

    p = sub.add_parser("export-svg", help="render one page of a chart")
    p.add_argument("--chart", required=True)
    p.add_argument("--stems", required=True)
    p.add_argument("--s")
    p.add_argument("--page", default="2")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_svg)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, StoreError, ChartError, ExtensionError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
