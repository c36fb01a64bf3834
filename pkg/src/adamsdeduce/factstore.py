"""The provenance-carrying fact store and the saturation driver.

Facts are canonical JSON payloads; a fact's id is a hash of its kind, scope and
payload, so re-entering a statement with the same spelling never duplicates it.
Seed facts are kept verbatim.  Rule conclusions are kept only when the current
charts and extensions do not already imply them, and are rejected with a
contradiction report when adding them would break a chart.

Snapshot format (``version`` 1) is a single JSON document::

    {"format": "adamsdeduce-store", "version": 1,
     "session": {"charts": [...], "maps": [...], "triangles": [...], ...},
     "facts": [{"id", "kind", "scope", "payload", "provenance"}, ...]}

with facts sorted by id.  The append log holds one fact per line in insertion order.
"""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from . import rules
from .chart import (
    INF,
    Bidegree,
    Chart,
    ChartError,
    ChartSpec,
    DifferentialFact,
    Page,
    RawFact,
    Variant,
    Violation,
    format_page,
    parse_page,
    raw_facts_from_document,
    resolve_fact,
    spec_from_document,
)
from .extdb import CofiberTriangle, ExtDB, ExtensionError, FextFact, map_from_document
from .gf2 import F2Subspace, F2Vector, kernel_combinations, reduce_bits
from .rules import BoundaryClaim, CycleClaim, DiffClaim, RuleApplication, RuleContradiction, RuleRefused
from .tables import Table, bundled_tables, ingest_tables, parse_table

FORMAT = "adamsdeduce-store"
VERSION = 1
DEFAULT_MAX_ROUNDS = 32

DIFFERENTIAL = "differential"
EXTENSION = "extension"
PERMANENT_CYCLE = "permanent-cycle"
BOUNDARY = "existential-boundary"


def _canon(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _page_json(r: Page) -> str:
    return format_page(r)


@dataclass(frozen=True)
class Provenance:
    kind: str  # "seed" or "rule"
    source: str = ""
    tag: str = ""
    rule: str = ""
    premises: tuple[str, ...] = ()
    certificates: tuple[str, ...] = ()
    parameters: tuple[tuple[str, str], ...] = ()

    def to_json(self) -> dict:
        if self.kind == "seed":
            return {"kind": "seed", "source": self.source, "tag": self.tag}
        return {
            "kind": "rule",
            "rule": self.rule,
            "premises": list(self.premises),
            "certificates": list(self.certificates),
            "parameters": [list(p) for p in self.parameters],
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> Provenance:
        if doc["kind"] == "seed":
            return cls("seed", source=doc.get("source", ""), tag=doc.get("tag", ""))
        return cls(
            "rule",
            rule=doc["rule"],
            premises=tuple(doc.get("premises", ())),
            certificates=tuple(doc.get("certificates", ())),
            parameters=tuple(tuple(p) for p in doc.get("parameters", ())),  # type: ignore[misc]
        )


@dataclass(frozen=True)
class Fact:
    id: str
    kind: str
    scope: str
    payload: str
    provenance: Provenance

    @property
    def data(self) -> dict:
        return json.loads(self.payload)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "scope": self.scope,
            "payload": self.data,
            "provenance": self.provenance.to_json(),
        }


def fact_id(kind: str, scope: str, payload: str) -> str:
    return hashlib.sha256(f"{kind}\n{scope}\n{payload}".encode()).hexdigest()[:16]


@dataclass(frozen=True)
class AssertResult:
    status: str  # "new", "merged", "upgraded" or "contradiction"
    fact_id: str | None
    message: str = ""
    violations: tuple[Violation, ...] = ()


@dataclass
class Contradiction:
    message: str
    rule: str
    premises: tuple[str, ...]
    violations: tuple[Violation, ...] = ()


@dataclass
class RoundReport:
    round: int
    new: list[tuple[str, str]] = field(default_factory=list)  # (fact id, rule)
    refused: int = 0


@dataclass
class SaturationReport:
    rounds: list[RoundReport]
    fixpoint: bool
    contradiction: Contradiction | None = None

    @property
    def new_facts(self) -> list[str]:
        return [fid for rnd in self.rounds for fid, _ in rnd.new]


class StoreError(ValueError):
    pass


# ---------------------------------------------------------------------------
# payload helpers


def _names(spec: ChartSpec, b: Bidegree, v: F2Vector) -> list[str]:
    basis = spec.basis(b)
    return [basis[i] for i in v.support()]


def _vec(spec: ChartSpec, b: Bidegree, names: Sequence[str]) -> F2Vector:
    return spec.vector_from_names(list(names), b)[1]


def _render_names(names: Sequence[str]) -> str:
    return " + ".join(names) if names else "0"


class FactStore:
    """Single-writer store of charts, maps and facts."""

    def __init__(self) -> None:
        self.specs: dict[str, ChartSpec] = {}
        self.map_docs: dict[str, dict] = {}
        self.triangle_docs: dict[str, dict] = {}
        self.null_composites: set[tuple[str, str]] = set()
        self.exact_pairs: set[tuple[str, str]] = set()
        self.square_docs: dict[str, dict] = {}
        self.facts: dict[str, Fact] = {}
        self.order: list[str] = []
        self.superseded: set[str] = set()
        self.log: list[str] = []
        self._charts: dict[str, Chart] = {}
        self._db: ExtDB | None = None
        self._db_ids: dict[int, str] = {}
        self._claim_ids: dict[Any, str] = {}
        self._ext_violations: list[Violation] = []

    # -- session setup ------------------------------------------------------------

    def add_chart_document(self, doc: Mapping[str, Any], origin: str = "") -> None:
        name = str(doc["name"])
        susp = doc.get("suspension")
        if name in self.specs and susp is None:
            base = self.specs[name]
            extra = spec_from_document({**doc, "differentials": []})
            for g, b in extra.generators.items():
                base.add_generator(g, b)
            base.products.update(extra.products)
            base.regions = tuple(base.regions) + tuple(r for r in extra.regions if r not in base.regions)
        else:
            self.specs[name] = spec_from_document({**doc, "differentials": []}, self.specs)
        self._invalidate(name)
        if susp is not None and susp.get("with_facts", True):
            self.mirror_facts(str(susp["of"]), name, int(susp["shift"]))
        for raw in raw_facts_from_document(doc):
            src = raw.origin if not origin else f"{origin}:{raw.origin}"
            self.assert_seed(self._raw_payload(name, raw), name, Provenance("seed", source=src, tag="document"))

    def add_tables(self, tables: Iterable[Table]) -> None:
        tables = list(tables)
        raw = ingest_tables(tables, self.specs)
        for name in sorted(raw):
            self._invalidate(name)
            for fact in raw[name]:
                self.assert_seed(self._raw_payload(name, fact), name,
                                 Provenance("seed", source=fact.origin, tag="table"))

    def mirror_facts(self, base: str, target: str, shift: int) -> None:
        """Copy the differential facts of ``base`` into its suspension ``target``."""
        for fid in list(self.order):
            fact = self.facts[fid]
            if fact.kind != DIFFERENTIAL or fact.scope != base or fid in self.superseded:
                continue
            data = fact.data
            data["chart"] = target
            data["t"] = data["t"] + shift
            src = fact.provenance.source or fid
            self.assert_seed(_canon(data), target, Provenance("seed", source=f"{src} (suspension of {base})",
                                                            tag="suspension"))

    def register_map_document(self, doc: Mapping[str, Any]) -> str:
        data = map_from_document(doc)
        if data.id in self.map_docs:
            raise StoreError(f"map {data.id} registered twice")
        for chart in (data.source, data.target):
            if chart not in self.specs:
                raise StoreError(f"map {data.id}: unknown chart {chart}")
        self.map_docs[data.id] = dict(doc)
        self._db = None
        db = self.db()
        for fx in db.auto_facts(data.id):
            self.assert_seed(self._fext_payload(db, fx), data.id,
                             Provenance("seed", source=f"product action of {data.id}", tag="product"))
        return data.id

    def register_triangle_document(self, doc: Mapping[str, Any]) -> str:
        tid = str(doc["id"])
        self.triangle_docs[tid] = {"id": tid, "f": doc["f"], "g": doc["g"], "h": doc["h"]}
        self._db = None
        self.db()  # validates the e-sum
        return tid

    def add_relation(self, kind: str, first: str, second: str) -> None:
        target = self.null_composites if kind == "null" else self.exact_pairs
        target.add((first, second))
        self._db = None

    def register_square(self, doc: Mapping[str, Any]) -> None:
        self.square_docs[str(doc["id"])] = {k: str(doc[k]) for k in ("id", "f", "p", "q", "g")}

    def add_extension_document(self, doc: Mapping[str, Any], origin: str = "") -> str:
        db = self.db()
        mid = str(doc["map"])
        fmap = db.maps[mid]
        X, Y = db.chart(fmap.source), db.chart(fmap.target)
        r = parse_page(doc["r"])
        n = int(doc["n"])
        b, x = X.vector(str(doc["x"]))
        tb = fmap.target_bidegree(b, n)
        _, y = Y.vector(str(doc.get("y", "0")), tb)
        fx = db.make_fext(mid, r, n, b, x, y, doc.get("essential"), origin=origin)
        return self.assert_seed(self._fext_payload(db, fx), mid,
                                Provenance("seed", source=origin or "extension document", tag="document"))

    def load_session(self, doc: Mapping[str, Any], base_dir: Path | None = None, shuffle_seed: int | None = None
                     ) -> None:
        """Load a session document: charts, tables, maps, triangles and extensions."""
        rng = random.Random(shuffle_seed) if shuffle_seed is not None else None

        def order(items: list) -> list:
            items = list(items)
            if rng is not None:
                rng.shuffle(items)
            return items

        charts = [self._resolve_doc(c, base_dir) for c in doc.get("charts", [])]
        plain = [c for c in charts if "suspension" not in c]
        for c in plain:
            if rng is not None:
                c = {**c, "differentials": order(c.get("differentials", []))}
            self.add_chart_document(c, origin=str(c.get("name")))
        tables: list[Table] = []
        for entry in doc.get("tables", []):
            if entry == "bundled":
                tables.extend(bundled_tables())
            else:
                path = Path(entry) if base_dir is None else base_dir / entry
                tables.append(parse_table(path.read_text(), path.name))
        if tables:
            self.add_tables(order(tables))
        for c in charts:
            if "suspension" in c:
                self.add_chart_document(c, origin=str(c.get("name")))
        for c in doc.get("supplements", []):
            self.add_chart_document(self._resolve_doc(c, base_dir), origin="supplement")
        for m in doc.get("maps", []):
            self.register_map_document(m)
        for t in doc.get("triangles", []):
            self.register_triangle_document(t)
        for pair in doc.get("null_composites", []):
            self.add_relation("null", pair[0], pair[1])
        for pair in doc.get("exact_pairs", []):
            self.add_relation("exact", pair[0], pair[1])
        for sq in doc.get("squares", []):
            self.register_square(sq)
        for i, ext in enumerate(order(doc.get("extensions", []))):
            self.add_extension_document(ext, origin=ext.get("origin", f"extension#{i}"))

    @staticmethod
    def _resolve_doc(entry: Any, base_dir: Path | None) -> dict:
        if isinstance(entry, Mapping):
            return dict(entry)
        path = Path(entry) if base_dir is None else base_dir / entry
        return json.loads(path.read_text())

    # -- payloads -------------------------------------------------------------------

    def _raw_payload(self, chart: str, raw: RawFact) -> str:
        spec = self.specs[chart]
        df = resolve_fact(spec, raw)
        return self._diff_payload(chart, df)

    def _diff_payload(self, chart: str, df: DifferentialFact) -> str:
        spec = self.specs[chart]
        b = df.bidegree
        data: dict[str, Any] = {
            "chart": chart,
            "s": b.s,
            "t": b.t,
            "variant": df.variant.value,
            "r": _page_json(df.r),
        }
        if df.variant is Variant.HIT:
            data["candidates"] = [_names(spec, b, c) for c in df.candidates]
            tb = df.target_bidegree
            assert tb is not None and df.target is not None
            data["target"] = _names(spec, tb, df.target)
        else:
            data["source"] = _names(spec, b, df.source)
            tb = df.target_bidegree
            if df.variant is Variant.VALUE and tb is not None and df.target is not None:
                data["target"] = _names(spec, tb, df.target)
            if df.variant is Variant.TARGET_SET and tb is not None:
                data["candidates"] = [_names(spec, tb, c) for c in df.candidates]
        return _canon(data)

    def _diff_from_payload(self, data: Mapping[str, Any], label: str) -> DifferentialFact:
        spec = self.specs[data["chart"]]
        b = Bidegree(int(data["s"]), int(data["t"]))
        r = parse_page(data["r"])
        variant = Variant(data["variant"])
        tb = b.shifted(int(r), int(r) - 1) if r != INF else None
        if variant is Variant.HIT:
            assert tb is not None
            cands = tuple(_vec(spec, b, c) for c in data["candidates"])
            return DifferentialFact(b, cands[0], r, variant, _vec(spec, tb, data["target"]), cands, label)
        src = _vec(spec, b, data["source"])
        if variant is Variant.VALUE:
            assert tb is not None
            return DifferentialFact(b, src, r, variant, _vec(spec, tb, data["target"]), label=label)
        if variant is Variant.TARGET_SET:
            assert tb is not None
            cands = tuple(_vec(spec, tb, c) for c in data["candidates"])
            return DifferentialFact(b, src, r, variant, candidates=cands, label=label)
        return DifferentialFact(b, src, r, variant, label=label)

    def _fext_payload(self, db: ExtDB, fx: FextFact) -> str:
        fmap = db.maps[fx.map_id]
        X, Y = db.chart(fmap.source), db.chart(fmap.target)
        return _canon({
            "map": fx.map_id,
            "r": _page_json(fx.r),
            "n": fx.n,
            "s": fx.source_bidegree.s,
            "t": fx.source_bidegree.t,
            "x": _names(X.spec, fx.source_bidegree, fx.x),
            "y": _names(Y.spec, fx.target_bidegree, fx.y),
            "indeterminacy": [_names(Y.spec, fx.target_bidegree, v) for v in fx.indeterminacy.basis],
        })

    def _claim_payload(self, db: ExtDB, claim: Any) -> tuple[str, str, str]:
        """(kind, scope, payload) of a rule conclusion."""
        if isinstance(claim, FextFact):
            return EXTENSION, claim.map_id, self._fext_payload(db, claim)
        if isinstance(claim, DiffClaim):
            if claim.kind == "value":
                df = DifferentialFact(claim.bidegree, claim.source, claim.r, Variant.VALUE, claim.target)
            elif claim.kind == "permanent":
                df = DifferentialFact(claim.bidegree, claim.source, INF, Variant.PERMANENT)
            else:
                df = DifferentialFact(claim.bidegree, claim.source, claim.r, Variant.SURVIVES)
            return DIFFERENTIAL, claim.chart, self._diff_payload(claim.chart, df)
        if isinstance(claim, CycleClaim):
            Y = db.chart(db.maps[claim.map_id].source)
            return PERMANENT_CYCLE, claim.map_id, _canon({
                "map": claim.map_id, "s": claim.bidegree.s, "t": claim.bidegree.t,
                "y": _names(Y.spec, claim.bidegree, claim.y),
            })
        if isinstance(claim, BoundaryClaim):
            Y = db.chart(db.maps[claim.map_id].target)
            return BOUNDARY, claim.map_id, _canon({
                "map": claim.map_id, "s": claim.bidegree.s, "t": claim.bidegree.t,
                "y": _names(Y.spec, claim.bidegree, claim.y), "lengths": list(claim.lengths),
            })
        raise StoreError(f"cannot store {type(claim).__name__}")

    # -- building charts and the extension database ---------------------------------

    def _invalidate(self, chart: str | None = None) -> None:
        if chart is None:
            self._charts.clear()
        else:
            self._charts.pop(chart, None)
        self._db = None

    def _active(self, kind: str, scope: str | None = None) -> list[Fact]:
        out = [self.facts[i] for i in sorted(self.facts) if i not in self.superseded]
        return [f for f in out if f.kind == kind and (scope is None or f.scope == scope)]

    def _chart_facts(self, name: str, extra: Sequence[tuple[str, str]] = ()) -> list[DifferentialFact]:
        items = [(f.id, f.payload) for f in self._active(DIFFERENTIAL, name)] + list(extra)
        items.sort()
        return [self._diff_from_payload(json.loads(p), self._label(fid)) for fid, p in items]

    def _label(self, fid: str) -> str:
        fact = self.facts.get(fid)
        if fact is None:
            return fid
        if fact.provenance.kind == "seed":
            return fact.provenance.source or fid
        return f"{fact.provenance.rule} [{fid}]"

    def chart(self, name: str) -> Chart:
        if name not in self._charts:
            self._charts[name] = Chart(self.specs[name], self._chart_facts(name), strict=False)
        return self._charts[name]

    def violations(self) -> list[Violation]:
        out: list[Violation] = []
        for name in sorted(self.specs):
            out.extend(self.chart(name).violations)
        self.db()
        out.extend(self._ext_violations)
        return out

    def db(self) -> ExtDB:
        if self._db is not None:
            return self._db
        db = ExtDB({name: self.chart(name) for name in sorted(self.specs)})
        for mid in sorted(self.map_docs):
            db.register_map(map_from_document(self.map_docs[mid]))
        for tid in sorted(self.triangle_docs):
            t = self.triangle_docs[tid]
            db.register_triangle(CofiberTriangle(tid, t["f"], t["g"], t["h"]))
        db.null_composites |= self.null_composites
        db.exact_pairs |= self.exact_pairs
        for sid, sq in sorted(self.square_docs.items()):
            db.squares[sid] = (sq["f"], sq["p"], sq["q"], sq["g"])
        ids: dict[int, str] = {}
        claims: dict[Any, str] = {}
        self._ext_violations: list[Violation] = []
        for fact in self._active(EXTENSION):
            data = fact.data
            try:
                fx = self._fext_from_payload(db, data, self._label(fact.id))
            except (ExtensionError, ChartError) as exc:
                self._ext_violations.append(Violation("extension", f"{fact.id}: {exc}", (self._label(fact.id),)))
                continue
            db.add_fext(fx)
            ids[id(fx)] = fact.id
        for fact in self._active(DIFFERENTIAL):
            claim = self._diff_claim(fact)
            if claim is not None:
                claims.setdefault(claim, fact.id)
        for fact in self._active(PERMANENT_CYCLE):
            data = fact.data
            mid = data["map"]
            spec = self.specs[db.maps[mid].source]
            b = Bidegree(data["s"], data["t"])
            claims.setdefault(CycleClaim(mid, b, _vec(spec, b, data["y"])), fact.id)
        self._db, self._db_ids, self._claim_ids = db, ids, claims
        return db

    def _fext_from_payload(self, db: ExtDB, data: Mapping[str, Any], label: str) -> FextFact:
        mid = data["map"]
        fmap = db.maps[mid]
        X, Y = db.chart(fmap.source), db.chart(fmap.target)
        b = Bidegree(int(data["s"]), int(data["t"]))
        n = int(data["n"])
        tb = fmap.target_bidegree(b, n)
        extra = F2Subspace.span((_vec(Y.spec, tb, v).bits for v in data.get("indeterminacy", [])), Y.dim(tb))
        return db.make_fext(mid, parse_page(data["r"]), n, b, _vec(X.spec, b, data["x"]),
                            _vec(Y.spec, tb, data["y"]), origin=label, extra_indeterminacy=extra)

    def _diff_claim(self, fact: Fact) -> DiffClaim | None:
        data = fact.data
        variant = data["variant"]
        if variant not in ("value", "permanent", "survives"):
            return None
        spec = self.specs[data["chart"]]
        b = Bidegree(int(data["s"]), int(data["t"]))
        r = parse_page(data["r"])
        src = _vec(spec, b, data["source"])
        if variant == "value":
            tb = b.shifted(int(r), int(r) - 1)
            return DiffClaim(data["chart"], b, src, r, _vec(spec, tb, data["target"]), "value")
        return DiffClaim(data["chart"], b, src, r, None, variant)

    # -- inserting facts ------------------------------------------------------------

    def _insert(self, kind: str, scope: str, payload: str, prov: Provenance) -> str:
        fid = fact_id(kind, scope, payload)
        fact = Fact(fid, kind, scope, payload, prov)
        self.facts[fid] = fact
        self.order.append(fid)
        self.log.append(_canon(fact.to_json()))
        if kind == DIFFERENTIAL:
            self._invalidate(scope)
        else:
            self._db = None
        return fid

    def assert_seed(self, payload: str, scope: str, prov: Provenance, kind: str | None = None) -> str:
        """Insert a seed fact verbatim; an identical payload merges with the stored one."""
        if kind is None:
            data = json.loads(payload)
            kind = DIFFERENTIAL if "variant" in data else EXTENSION
        fid = fact_id(kind, scope, payload)
        if fid in self.facts:
            old = self.facts[fid]
            if old.provenance.kind == "seed" and _canon(prov.to_json()) < _canon(old.provenance.to_json()):
                self.facts[fid] = Fact(fid, kind, scope, payload, prov)
            return fid
        return self._insert(kind, scope, payload, prov)

    def assert_fact(self, claim: Any, prov: Provenance) -> AssertResult:
        """Validate and insert a derived statement.

        Returns ``merged`` when the store already implies it, ``upgraded`` when it
        settles an UNKNOWN fact, and ``contradiction`` when a chart would break.
        """
        db = self.db()
        kind, scope, payload = self._claim_payload(db, claim)
        fid = fact_id(kind, scope, payload)
        if fid in self.facts:
            return AssertResult("merged", fid, "identical fact already stored")
        implied = self._implied_by(db, claim)
        if implied:
            return AssertResult("merged", None, implied)
        if kind == DIFFERENTIAL:
            before = {str(v) for v in self.chart(scope).violations}
            trial = Chart(self.specs[scope], self._chart_facts(scope, [(fid, payload)]), strict=False)
            fresh = tuple(v for v in trial.violations if str(v) not in before)
            if fresh:
                return AssertResult("contradiction", fid, "; ".join(str(v) for v in fresh), fresh)
            fid = self._insert(kind, scope, payload, prov)
            self._charts[scope] = trial
            status = "upgraded" if self._supersede_unknowns(claim) else "new"
            return AssertResult(status, fid)
        if kind == EXTENSION:
            try:
                self._fext_from_payload(db, json.loads(payload), "check")
            except (ExtensionError, ChartError) as exc:
                return AssertResult("contradiction", fid, str(exc))
        fid = self._insert(kind, scope, payload, prov)
        return AssertResult("new", fid)

    def _supersede_unknowns(self, claim: Any) -> bool:
        if not isinstance(claim, DiffClaim):
            return False
        out = False
        for fact in self._active(DIFFERENTIAL, claim.chart):
            data = fact.data
            if data["variant"] != "unknown" or (data["s"], data["t"]) != (claim.bidegree.s, claim.bidegree.t):
                continue
            spec = self.specs[claim.chart]
            if _vec(spec, claim.bidegree, data["source"]) == claim.source:
                self.superseded.add(fact.id)
                out = True
        if out:
            self._invalidate(claim.chart)
        return out

    def _implied_by(self, db: ExtDB, claim: Any) -> str:
        if isinstance(claim, DiffClaim):
            chart = self.chart(claim.chart)
            b, x = claim.bidegree, claim.source
            if claim.kind == "value":
                r = int(claim.r)
                if not chart.Z(b, r - 1).contains(x) or not chart.is_determined(b, x, r):
                    return ""
                kind, value = chart.differential(b, x, r)
                assert claim.target is not None
                if kind == "value" and value == chart.B(claim.target_bidegree, r - 1).reduce(claim.target):
                    return "the chart already determines this differential"
                return ""
            last = chart.top_page if claim.kind == "permanent" else int(claim.r) - 1
            if chart.known_permanent(b).contains(x):
                return "already a recorded permanent cycle"
            if claim.kind == "survives" and last <= 1:
                return "every class lies in Z_1"
            for r in range(2, last + 1):
                if not chart.is_determined(b, x, r):
                    return ""
            if chart.Z(b, last).contains(x):
                if claim.kind == "permanent" and last < chart.spec.r_max and chart.Z(b, INF).contains(x):
                    return ""
                return "the chart already determines this survival"
            return ""
        if isinstance(claim, FextFact):
            for fx in db.fexts:
                if (fx.map_id, fx.r, fx.n, fx.source_bidegree) != (claim.map_id, claim.r, claim.n,
                                                                   claim.source_bidegree):
                    continue
                if fx.x != claim.x:
                    continue
                diff = fx.y + claim.y
                if fx.indeterminacy.contains(diff) or claim.indeterminacy.contains(diff):
                    return f"coset-equal to stored extension {self._db_ids.get(id(fx), '?')}"
            return ""
        if isinstance(claim, (CycleClaim, BoundaryClaim)):
            kind, scope, payload = self._claim_payload(db, claim)
            data = json.loads(payload)
            for fact in self._active(kind, scope):
                other = fact.data
                if (other["s"], other["t"], other["y"]) == (data["s"], data["t"], data["y"]):
                    return "already stored"
            return ""
        return ""

    def _premise_id(self, db: ExtDB, claim: Any) -> str:
        if isinstance(claim, FextFact):
            fid = self._db_ids.get(id(claim))
            if fid is not None:
                return fid
            payload = self._fext_payload(db, claim)
            return self.assert_seed(payload, claim.map_id,
                                    Provenance("seed", source=claim.origin or f"action of {claim.map_id}",
                                               tag="action"), kind=EXTENSION)
        fid = self._claim_ids.get(claim)
        if fid is None:
            raise StoreError(f"premise {claim} is not in the store")
        return fid

    # -- saturation -------------------------------------------------------------------

    def saturate(self, max_rounds: int = DEFAULT_MAX_ROUNDS, workers: int = 1) -> SaturationReport:
        rounds: list[RoundReport] = []
        initial = self.violations()
        if initial:
            c = Contradiction("the seed facts are inconsistent: " + "; ".join(map(str, initial)), "seed",
                              tuple(sorted({lab for v in initial for lab in v.labels})), tuple(initial))
            return SaturationReport(rounds, False, c)
        for rnd in range(1, max_rounds + 1):
            report = RoundReport(rnd)
            rounds.append(report)
            db = self.db()
            ids, claims = dict(self._db_ids), dict(self._claim_ids)
            candidates = _enumerate(db, self, ids, claims)
            results = _run(candidates, workers)
            apps = sorted(((key, app) for key, app in results if isinstance(app, RuleApplication)),
                          key=lambda item: item[0])
            report.refused = sum(1 for _, app in results if isinstance(app, RuleRefused))
            contra = next((app for _, app in sorted(results, key=lambda i: i[0])
                           if isinstance(app, RuleContradiction)), None)
            if contra is not None:
                return SaturationReport(rounds, False, self._contradiction_from(contra, db))
            for _, app in apps:
                outcome = self._commit(app, report)
                if outcome is not None:
                    return SaturationReport(rounds, False, outcome)
            closure = self._lift_closure(report)
            if closure is not None:
                return SaturationReport(rounds, False, closure)
            if not report.new:
                return SaturationReport(rounds, True)
        return SaturationReport(rounds, False)

    def _commit(self, app: RuleApplication, report: RoundReport) -> Contradiction | None:
        db = self.db()
        premise_ids = tuple(self._premise_id(db, p) for p in app.premises)
        prov = Provenance("rule", rule=app.rule, premises=premise_ids, certificates=app.certificates,
                          parameters=app.parameters)
        for claim in app.conclusions:
            result = self.assert_fact(claim, prov)
            if result.status == "contradiction":
                return Contradiction(f"{app.rule} concluded a statement that breaks the store: {result.message}",
                                     app.rule, premise_ids, result.violations)
            if result.status in ("new", "upgraded") and result.fact_id is not None:
                report.new.append((result.fact_id, app.rule))
        return None

    def _lift_closure(self, report: RoundReport) -> Contradiction | None:
        pending = [fid for fid, _ in report.new if self.facts[fid].kind == EXTENSION]
        while pending:
            nxt: list[str] = []
            for fid in pending:
                db = self.db()
                fx = next((f for f in db.fexts if self._db_ids.get(id(f)) == fid), None)
                if fx is None or fx.r == INF:
                    continue
                try:
                    app = rules.lift_rule(db, fx, INF)
                except (RuleRefused, ExtensionError):
                    continue
                before = len(report.new)
                bad = self._commit(app, report)
                if bad is not None:
                    return bad
                nxt.extend(fid2 for fid2, _ in report.new[before:] if self.facts[fid2].kind == EXTENSION)
            pending = nxt
        return None

    def _contradiction_from(self, exc: RuleContradiction, db: ExtDB) -> Contradiction:
        ids = []
        for p in exc.premises:
            try:
                ids.append(self._premise_id(db, p))
            except StoreError:
                continue
        return Contradiction(str(exc), exc.rule, tuple(ids))

    # -- queries and proofs -------------------------------------------------------------

    def query(
        self,
        chart: str | None = None,
        kind: str | None = None,
        stem: int | tuple[int, int] | None = None,
        s: int | tuple[int, int] | None = None,
        page: Page | None = None,
        provenance: str | None = None,
        rule: str | None = None,
    ) -> list[Fact]:
        def in_range(value: int, want: int | tuple[int, int] | None) -> bool:
            if want is None:
                return True
            if isinstance(want, tuple):
                return want[0] <= value <= want[1]
            return value == want

        out = []
        for fid in sorted(self.facts):
            if fid in self.superseded:
                continue
            fact = self.facts[fid]
            data = fact.data
            if kind is not None and fact.kind != kind:
                continue
            if chart is not None and data.get("chart", fact.scope) != chart and fact.scope != chart:
                continue
            if not in_range(data["t"] - data["s"], stem) or not in_range(data["s"], s):
                continue
            if page is not None and ("r" not in data or parse_page(data["r"]) != page):
                continue
            if provenance is not None and fact.provenance.kind != provenance and fact.provenance.tag != provenance:
                continue
            if rule is not None and fact.provenance.rule != rule:
                continue
            out.append(fact)
        return out

    def render_fact(self, fact: Fact) -> str:
        d = fact.data
        if fact.kind == DIFFERENTIAL:
            r = d["r"]
            where = f" in {d['chart']}"
            v = d["variant"]
            if v == "value":
                return f"d_{r}({_render_names(d['source'])}) = {_render_names(d['target'])}{where}"
            if v == "permanent":
                return f"{_render_names(d['source'])} is a permanent cycle{where}"
            if v == "survives":
                return f"{_render_names(d['source'])} survives to E_{r}{where}"
            if v == "unknown":
                return f"d_{r}({_render_names(d['source'])}) = ?{where}"
            if v == "target-set":
                opts = ", ".join(_render_names(c) for c in d["candidates"])
                return f"d_{r}({_render_names(d['source'])}) is one of {{{opts}}}{where}"
            opts = ", ".join(_render_names(c) for c in d["candidates"])
            return f"{_render_names(d['target'])} is hit by d_{r} from one of {{{opts}}}{where}"
        if fact.kind == EXTENSION:
            ind = " (mod indeterminacy)" if d.get("indeterminacy") else ""
            return (f"d_{d['n']}^{{{d['map']},E_{d['r']}}}({_render_names(d['x'])}) = "
                    f"{_render_names(d['y'])}{ind}")
        if fact.kind == PERMANENT_CYCLE:
            return f"{_render_names(d['y'])} is a permanent cycle for {d['map']}"
        lengths = ", ".join(str(n) for n in d["lengths"])
        return f"{_render_names(d['y'])} is hit by a {d['map']}-extension of length in {{{lengths}}}"

    def emit_proof(self, fid: str) -> str:
        if fid not in self.facts:
            matches = [i for i in self.facts if i.startswith(fid)]
            if len(matches) != 1:
                raise StoreError(f"unknown fact id {fid}")
            fid = matches[0]
        lines: list[str] = []
        numbers: dict[str, int] = {}

        def visit(i: str, depth: int) -> None:
            pad = "  " * depth
            fact = self.facts[i]
            if i in numbers:
                lines.append(f"{pad}[{numbers[i]}] {self.render_fact(fact)} (see above)")
                return
            numbers[i] = len(numbers) + 1
            lines.append(f"{pad}[{numbers[i]}] {self.render_fact(fact)}   <{i}>")
            prov = fact.provenance
            if prov.kind == "seed":
                tag = f" ({prov.tag})" if prov.tag else ""
                lines.append(f"{pad}    seed{tag}: {prov.source}")
                return
            params = ", ".join(f"{k}={v}" for k, v in prov.parameters)
            cite = rules.CITATIONS.get(prov.rule, prov.rule)
            lines.append(f"{pad}    by {cite} [{prov.rule}]" + (f" with {params}" if params else ""))
            for cert in prov.certificates:
                lines.append(f"{pad}    certificate {cert}")
            for p in prov.premises:
                visit(p, depth + 1)

        visit(fid, 0)
        return "\n".join(lines) + "\n"

    def render_contradiction(self, c: Contradiction) -> str:
        out = [f"contradiction: {c.message}"]
        for pid in c.premises:
            if pid in self.facts:
                out.append(self.emit_proof(pid).rstrip("\n"))
            else:
                out.append(f"premise: {pid}")
        return "\n".join(out) + "\n"

    # -- persistence ----------------------------------------------------------------------

    def session_document(self) -> dict:
        charts = []
        for name in sorted(self.specs):
            spec = self.specs[name]
            charts.append({
                "name": name,
                "r_max": spec.r_max,
                "generators": [{"name": g, "s": b.s, "t": b.t} for g, b in sorted(spec.generators.items())],
                "products": [{"left": k[0], "right": k[1], "result": v} for k, v in sorted(spec.products.items())],
                "regions": sorted((r.to_json() for r in set(spec.regions)), key=_canon),
            })
        return {
            "charts": charts,
            "maps": [self.map_docs[m] for m in sorted(self.map_docs)],
            "triangles": [self.triangle_docs[t] for t in sorted(self.triangle_docs)],
            "null_composites": sorted(list(p) for p in self.null_composites),
            "exact_pairs": sorted(list(p) for p in self.exact_pairs),
            "squares": [self.square_docs[s] for s in sorted(self.square_docs)],
        }

    def export_snapshot(self) -> str:
        doc = {
            "format": FORMAT,
            "version": VERSION,
            "session": self.session_document(),
            "facts": [self.facts[i].to_json() for i in sorted(self.facts)],
            "superseded": sorted(self.superseded),
        }
        return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_snapshot(cls, text: str) -> FactStore:
        doc = json.loads(text)
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise StoreError("not an adamsdeduce store snapshot of a supported version")
        store = cls()
        session = doc["session"]
        for c in session["charts"]:
            store.specs[c["name"]] = spec_from_document(c)
        for m in session["maps"]:
            store.map_docs[m["id"]] = m
        for t in session["triangles"]:
            store.triangle_docs[t["id"]] = t
        store.null_composites = {tuple(p) for p in session["null_composites"]}  # type: ignore[misc]
        store.exact_pairs = {tuple(p) for p in session["exact_pairs"]}  # type: ignore[misc]
        for sq in session["squares"]:
            store.square_docs[sq["id"]] = sq
        for f in doc["facts"]:
            payload = _canon(f["payload"])
            fact = Fact(f["id"], f["kind"], f["scope"], payload, Provenance.from_json(f["provenance"]))
            if fact_id(fact.kind, fact.scope, payload) != fact.id:
                raise StoreError(f"fact {fact.id} does not match its payload")
            store.facts[fact.id] = fact
            store.order.append(fact.id)
        store.superseded = set(doc.get("superseded", []))
        return store

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "snapshot.json").write_text(self.export_snapshot())
        if self.log:
            with open(directory / "facts.log", "a") as fh:
                for line in self.log:
                    fh.write(line + "\n")
            self.log.clear()

    @classmethod
    def load(cls, directory: str | Path) -> FactStore:
        path = Path(directory) / "snapshot.json"
        if not path.exists():
            return cls()
        return cls.from_snapshot(path.read_text())


# ---------------------------------------------------------------------------
# rule enumeration


Candidate = tuple[str, Callable[[], Any]]


def _run(candidates: list[Candidate], workers: int) -> list[tuple[str, Any]]:
    def call(item: Candidate) -> tuple[str, Any]:
        key, thunk = item
        try:
            return key, thunk()
        except (RuleRefused, RuleContradiction) as exc:
            return key, exc
        except (ExtensionError, ChartError) as exc:
            return key, RuleRefused(key.split("|")[0], "(validation)", str(exc))

    if workers <= 1:
        return [call(c) for c in candidates]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(call, candidates))


def _key(rule: str, *parts: Any) -> str:
    return rule + "|" + "|".join(str(p) for p in parts)


def _enumerate(db: ExtDB, store: FactStore, ids: dict[int, str], claims: dict[Any, str]) -> list[Candidate]:
    out: list[Candidate] = []
    diff_claims = sorted(((fid, c) for c, fid in claims.items() if isinstance(c, DiffClaim)), key=lambda i: i[0])
    values = [(fid, c) for fid, c in diff_claims if c.kind == "value" and c.target is not None]
    fexts = sorted(((ids[id(f)], f) for f in db.fexts if id(f) in ids), key=lambda i: i[0])

    def fx_key(fx: FextFact) -> str:
        return ids.get(id(fx)) or store._fext_payload(db, fx)

    # generalized Leibniz rule
    for mid in sorted(db.maps):
        fmap = db.maps[mid]
        if fmap.af == 0:
            continue
        X = db.chart(fmap.source)
        for fid, diff in values:
            if diff.chart != X.name or not diff.target:
                continue
            r = int(diff.r)
            ext_ns: list[FextFact] = []
            for _, fx in fexts:
                if fx.map_id == mid and fx.r != INF and fx.r <= r and fx.source_bidegree == diff.bidegree \
                        and fx.x == diff.source:
                    ext_ns.append(fx)
            for n in range(r, max(2, fmap.af + 2 - fmap.e) - 1, -1):
                fx = db.action_fext(mid, n, diff.bidegree, diff.source)
                if fx is not None:
                    ext_ns.append(fx)
                    break
            if not ext_ns:
                continue
            xb = diff.target_bidegree
            bprev = X.B(xb, r - 1)
            ext_infs = [fx for _, fx in fexts if fx.map_id == mid and fx.r == INF and fx.source_bidegree == xb
                        and bprev.contains(fx.x + diff.target)]
            act = db.action_fext(mid, INF, xb, diff.target)
            if act is not None:
                ext_infs.append(act)
            for en in ext_ns:
                for ei in ext_infs:
                    key = _key("generalized_leibniz", mid, fid, fx_key(en), fx_key(ei))
                    out.append((key, lambda en=en, ei=ei, diff=diff, mid=mid:
                                _leibniz_pages(db, mid, diff, en, ei)))

    # generalized Mahowald trick
    for tid in sorted(db.triangles):
        tri = db.triangles[tid]
        gm = db.maps[tri.g]
        Z = db.chart(gm.target)
        for fid, diff in values:
            if diff.chart != Z.name or not diff.target:
                continue
            out.append((_key("mahowald_trick", tid, fid), lambda diff=diff, tid=tid: _mahowald(db, tid, diff)))

    # naturality along filtration-zero maps with an action
    for mid in sorted(db.maps):
        fmap = db.maps[mid]
        if fmap.af != 0 or not fmap.has_action or fmap.source == fmap.target:
            continue
        for fid, diff in diff_claims:
            if diff.chart != fmap.source or diff.kind == "survives":
                continue
            if diff.kind == "value" and not diff.target:
                continue
            out.append((_key("naturality_transport", mid, fid),
                        lambda diff=diff, mid=mid: rules.naturality_transport(db, mid, diff)))

    # lifting finite-page extensions to E_inf
    for fid, fx in fexts:
        if fx.r != INF:
            out.append((_key("lift_fext", fid), lambda fx=fx: rules.lift_rule(db, fx, INF)))

    # null composites and exactness
    for f, g in sorted(db.null_composites):
        for fid, fx in fexts:
            if fx.map_id == f and fx.r == INF and fx.y:
                out.append((_key("composition_rule", f, g, fid), lambda fx=fx, f=f, g=g:
                            rules.composition_rule(db, f, g, fx)))
    cycles = sorted(((fid, c) for c, fid in claims.items() if isinstance(c, CycleClaim)), key=lambda i: i[0])
    for f, g in sorted(db.exact_pairs):
        for fid, c in cycles:
            if c.map_id == g:
                out.append((_key("exactness_rule", f, g, fid), lambda c=c, f=f, g=g:
                            rules.exactness_rule(db, f, g, c)))

    # registered commuting squares
    for sid in sorted(db.squares):
        f, p, q, g = db.squares[sid]
        for fid, ep in fexts:
            if ep.map_id != p or ep.r != INF:
                continue
            efs = [fx for _, fx in fexts if fx.map_id == f and fx.r == INF and fx.source_bidegree == ep.source_bidegree
                   and fx.x == ep.x]
            act = db.action_fext(f, INF, ep.source_bidegree, ep.x)
            if act is not None:
                efs.append(act)
            egs = [fx for _, fx in fexts if fx.map_id == g and fx.r == INF and fx.source_bidegree == ep.target_bidegree
                   and ep.indeterminacy.contains(fx.x + ep.y)]
            if ep.y:
                act = db.action_fext(g, INF, ep.target_bidegree, ep.y)
                if act is not None:
                    egs.append(act)
            for ef in efs:
                for eg in egs:
                    key = _key("square_rule", sid, fx_key(ef), fid, fx_key(eg))
                    out.append((key, lambda ef=ef, ep=ep, eg=eg, sq=(f, p, q, g):
                                rules.square_rule(db, *sq, ef, ep, eg, None)))
    return out


def _leibniz_pages(db: ExtDB, mid: str, diff: DiffClaim, ext_n: FextFact, ext_inf: FextFact) -> RuleApplication:
    """Try the extension on its own page, then on earlier pages that still fit its length."""
    fmap = db.maps[mid]
    first: RuleRefused | None = None
    low = max(2, ext_n.n + 2 - fmap.e)
    for n in range(int(ext_n.r), low - 1, -1):
        en = ext_n
        if n != ext_n.r:
            if "action of" not in ext_n.origin:
                break
            maybe = db.action_fext(mid, n, ext_n.source_bidegree, ext_n.x)
            if maybe is None:
                continue
            en = maybe
        try:
            return rules.generalized_leibniz(db, mid, diff, en, ext_inf)
        except RuleRefused as exc:
            first = first or exc
            if exc.hypothesis != "(4)":
                raise
    assert first is not None
    raise first


def _mahowald(db: ExtDB, tid: str, diff: DiffClaim) -> RuleApplication:
    tri = db.triangles[tid]
    fm, gm, hm = db.maps[tri.f], db.maps[tri.g], db.maps[tri.h]
    Y, Z = db.chart(gm.source), db.chart(gm.target)
    r = int(diff.r)
    l, m = hm.af, gm.af
    n = r - m - l
    n1, m1, l1 = n - fm.e, m - gm.e, l - hm.e
    if n1 < 1 or m1 < 0 or l1 < 0:
        raise RuleRefused("mahowald_trick", "(parameters)", "page too small for this triangle")
    r_prime = n1 + l1 + 1
    ext_h = db.action_fext(tri.h, r_prime, diff.bidegree, diff.source)
    if ext_h is None:
        raise RuleRefused("mahowald_trick", "(1)", f"the action of {tri.h} on the source is not known")
    yb_bar = diff.target_bidegree
    yb = gm.source_bidegree(yb_bar, m)
    y = _preimage(db, tri.g, yb, Y.Z(yb, m1 + 1), diff.target, Z.B(yb_bar, r - 1))
    if y is None:
        raise RuleRefused("mahowald_trick", "(4)", f"no class of {Y.name} maps onto the target")
    ext_g = db.action_fext(tri.g, m1 + 2, yb, y)
    if ext_g is None:
        raise RuleRefused("mahowald_trick", "(4)", f"the {tri.g}-extension is not a valid statement")
    return rules.mahowald_trick(db, tid, ext_h, diff, ext_g)


def _preimage(db: ExtDB, map_id: str, b: Bidegree, domain: F2Subspace, target: F2Vector,
              modulo: F2Subspace) -> F2Vector | None:
    """A vector of ``domain`` whose image is ``target`` modulo ``modulo``."""
    if db.chart(db.maps[map_id].source).dim(b) == 0:
        return None
    images, _ = db.action_images(map_id, b)
    cols: list[int] = []
    vecs: list[int] = []
    for row in domain.rows:
        img = 0
        i, v = 0, row
        while v:
            if v & 1:
                if images[i] is None:
                    img = -1
                    break
                img ^= images[i]  # type: ignore[operator]
            v >>= 1
            i += 1
        if img < 0:
            continue
        cols.append(reduce_bits(img, modulo.rows))
        vecs.append(row)
    goal = reduce_bits(target.bits, modulo.rows)
    for combo in kernel_combinations(cols + [goal]):
        if combo >> len(cols) & 1:
            bits = 0
            for i in range(len(cols)):
                if combo >> i & 1:
                    bits ^= vecs[i]
            return F2Vector(bits, domain.ambient_dim)
    return None
