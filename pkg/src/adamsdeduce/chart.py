"""Classical Adams charts: generators, differential facts and the Z_r/B_r lattice.

A chart is built once from a :class:`ChartSpec` (generators, products, completeness
regions) and a list of :class:`DifferentialFact`.  Pages are processed in increasing
order.  On page ``r`` the known facts at each source bidegree are assembled into a
partial linear map on ``Z_{r-1}``; generators not pinned down by any fact default to
zero.  Undetermined values (``UNKNOWN`` and target-set facts) get formal flag
coordinates, so their sources drop out of ``Z_r`` without adding anything to ``B_r``.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .gf2 import F2Subspace, F2Vector, kernel_combinations, quotient_basis, reduce_bits, rref_rows

INF = math.inf
DEFAULT_R_MAX = 64

Page = float  # an int-valued page or INF


class ChartError(ValueError):
    """A chart document or fact violates the degree law or Z/B membership."""


def parse_page(value: Any) -> Page:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return value if value == INF else int(value)
    text = str(value).strip().lower()
    if text in ("inf", "infinity", "∞"):
        return INF
    return int(text)


def format_page(r: Page) -> str:
    return "inf" if r == INF else str(int(r))


@dataclass(frozen=True, order=True)
class Bidegree:
    s: int
    t: int

    def __post_init__(self) -> None:
        if self.s < 0:
            raise ChartError(f"negative Adams filtration in {self}")

    @property
    def stem(self) -> int:
        return self.t - self.s

    def shifted(self, ds: int, dt: int) -> Bidegree:
        return Bidegree(self.s + ds, self.t + dt)

    def __str__(self) -> str:
        return f"({self.s},{self.t})"


@dataclass(frozen=True)
class Generator:
    name: str
    bidegree: Bidegree
    basis_index: int


@dataclass(frozen=True)
class Region:
    """A rectangle ``s_min <= s <= s_max``, ``stem_min <= stem <= stem_max``."""

    s_min: int
    s_max: int
    stem_min: int
    stem_max: int

    def covers(self, b: Bidegree) -> bool:
        return self.s_min <= b.s <= self.s_max and self.stem_min <= b.stem <= self.stem_max

    def shifted(self, dstem: int) -> Region:
        return Region(self.s_min, self.s_max, self.stem_min + dstem, self.stem_max + dstem)

    def to_json(self) -> dict:
        return {"s": [self.s_min, self.s_max], "stem": [self.stem_min, self.stem_max]}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> Region:
        s_lo, s_hi = doc["s"]
        st_lo, st_hi = doc["stem"]
        return cls(int(s_lo), int(s_hi), int(st_lo), int(st_hi))


class Variant(str, enum.Enum):
    VALUE = "value"
    PERMANENT = "permanent"
    UNKNOWN = "unknown"
    # d_r(source) is one of ``candidates`` (a "possibly" entry).
    TARGET_SET = "target-set"
    # ``target`` is hit by d_r from one of the ``candidates`` sources.
    HIT = "hit"
    # ``source`` lies in Z_{r-1}; nothing is said about d_r.
    SURVIVES = "survives"


@dataclass(frozen=True)
class DifferentialFact:
    """One differential statement at source bidegree ``bidegree``.

    For ``HIT`` facts ``source`` is the first candidate source.
    """

    bidegree: Bidegree
    source: F2Vector
    r: Page
    variant: Variant
    target: F2Vector | None = None
    candidates: tuple[F2Vector, ...] = ()
    label: str = ""

    @property
    def target_bidegree(self) -> Bidegree | None:
        if self.r == INF:
            return None
        return self.bidegree.shifted(int(self.r), int(self.r) - 1)

    def sources(self) -> tuple[F2Vector, ...]:
        if self.variant is Variant.HIT:
            return self.candidates
        return (self.source,)


# ---------------------------------------------------------------------------
# names and sums


_STRIP = re.compile(r"\s+|\\!")
_BRACKET = re.compile(r"\[([^\[\]]*)\]")
_OPEN = "([{"
_CLOSE = ")]}"


def _balanced_outer(text: str) -> bool:
    if not (text.startswith("(") and text.endswith(")")):
        return False
    depth = 0
    for i, c in enumerate(text):
        if c in _OPEN:
            depth += 1
        elif c in _CLOSE:
            depth -= 1
            if depth == 0 and i != len(text) - 1:
                return False
    return True


def normalize_name(token: str) -> str:
    """Canonical spelling of a generator name.

    Whitespace and ``\\!`` are dropped, redundant outer parentheses are removed and
    square brackets are kept only around cell indices such as ``[0]`` or ``[4]``, so
    ``d_0^2e_0g[B_4]`` and ``d_0^2e_0gB_4`` name the same class.
    """
    text = _STRIP.sub("", token)
    text = _BRACKET.sub(lambda m: m.group(0) if m.group(1).isdigit() else m.group(1), text)
    while _balanced_outer(text):
        text = text[1:-1]
    return text


def split_sum(expr: str) -> list[str]:
    """Split on top-level ``+`` signs."""
    terms, depth, start = [], 0, 0
    for i, c in enumerate(expr):
        if c in _OPEN:
            depth += 1
        elif c in _CLOSE:
            depth -= 1
        elif c == "+" and depth == 0:
            terms.append(expr[start:i])
            start = i + 1
    terms.append(expr[start:])
    return [t.strip() for t in terms if t.strip()]


def sum_terms(expr: str) -> list[str]:
    """Normalized names of an F2 sum; repeated names cancel, ``0`` is dropped."""
    seen: dict[str, int] = {}
    for term in split_sum(expr):
        name = normalize_name(term)
        if name in ("", "0"):
            continue
        seen[name] = seen.get(name, 0) ^ 1
    return sorted(n for n, odd in seen.items() if odd)


def candidate_sums(expr: str) -> list[list[str]]:
    """Expand ``A + possibly B`` into the candidate sums ``[A, A+B]``."""
    base, optional = [], []
    for term in split_sum(expr):
        stripped = term.strip()
        if stripped.startswith("possibly"):
            optional.append(stripped[len("possibly"):])
        else:
            base.append(stripped)
    out = []
    for mask in range(1 << len(optional)):
        chosen = base + [optional[i] for i in range(len(optional)) if mask >> i & 1]
        out.append(sum_terms("+".join(chosen)))
    return out


# ---------------------------------------------------------------------------
# chart layout: generators, products and completeness regions


@dataclass
class ChartSpec:
    """Static data of a chart: generators, product table, completeness regions."""

    name: str
    generators: dict[str, Bidegree] = field(default_factory=dict)
    products: dict[tuple[str, str], str] = field(default_factory=dict)
    regions: tuple[Region, ...] = ()
    r_max: int = DEFAULT_R_MAX

    def __post_init__(self) -> None:
        self._index: dict[Bidegree, tuple[str, ...]] | None = None

    def add_generator(self, name: str, b: Bidegree) -> None:
        name = normalize_name(name)
        old = self.generators.get(name)
        if old is not None and old != b:
            raise ChartError(f"{self.name}: generator {name} declared at {old} and {b}")
        self.generators[name] = b
        self._index = None

    def _build_index(self) -> dict[Bidegree, tuple[str, ...]]:
        if self._index is None:
            groups: dict[Bidegree, list[str]] = {}
            for name, b in self.generators.items():
                groups.setdefault(b, []).append(name)
            self._index = {b: tuple(sorted(names)) for b, names in groups.items()}
        return self._index

    def basis(self, b: Bidegree) -> tuple[str, ...]:
        return self._build_index().get(b, ())

    def bidegrees(self) -> list[Bidegree]:
        return sorted(self._build_index())

    def dim(self, b: Bidegree) -> int:
        return len(self.basis(b))

    def generator(self, name: str) -> Generator:
        name = normalize_name(name)
        if name not in self.generators:
            raise ChartError(f"{self.name}: unknown generator {name}")
        b = self.generators[name]
        return Generator(name, b, self.basis(b).index(name))

    def vector_from_names(self, names: Sequence[str], b: Bidegree | None = None) -> tuple[Bidegree, F2Vector]:
        if not names:
            if b is None:
                raise ChartError(f"{self.name}: cannot place the zero sum without a bidegree")
            return b, F2Vector.zero(self.dim(b))
        bits = 0
        for name in names:
            gen = self.generator(name)
            if b is None:
                b = gen.bidegree
            elif gen.bidegree != b:
                raise ChartError(f"{self.name}: {gen.name} lies at {gen.bidegree}, expected {b}")
            bits ^= 1 << gen.basis_index
        assert b is not None
        return b, F2Vector(bits, self.dim(b))

    def vector(self, expr: str, b: Bidegree | None = None) -> tuple[Bidegree, F2Vector]:
        """Parse an F2 sum of generator names, checking that it is homogeneous."""
        return self.vector_from_names(sum_terms(expr), b)

    def render(self, b: Bidegree, v: F2Vector) -> str:
        names = self.basis(b)
        if v.dim != len(names):
            raise ChartError(f"{self.name}: vector of dim {v.dim} at {b} (dim {len(names)})")
        terms = [names[i] for i in v.support()]
        return " + ".join(terms) if terms else "0"

    def product(self, left: str, right: str) -> str | None:
        key = (normalize_name(left), normalize_name(right))
        if key in self.products:
            return self.products[key]
        return self.products.get((key[1], key[0]))

    def covered(self, b: Bidegree) -> bool:
        return any(reg.covers(b) for reg in self.regions)

    def suspended(self, name: str, shift: int) -> ChartSpec:
        out = ChartSpec(
            name,
            {n: Bidegree(b.s, b.t + shift) for n, b in self.generators.items()},
            dict(self.products),
            tuple(reg.shifted(shift) for reg in self.regions),
            self.r_max,
        )
        return out

    def copy(self) -> ChartSpec:
        return ChartSpec(self.name, dict(self.generators), dict(self.products), self.regions, self.r_max)


# ---------------------------------------------------------------------------
# raw (string) facts as they appear in documents


@dataclass(frozen=True)
class RawFact:
    """A differential statement in document form, before name resolution."""

    source: str
    r: Page
    variant: Variant
    target: str = "0"
    candidates: tuple[str, ...] = ()
    origin: str = ""


def parse_differential_entry(entry: Mapping[str, Any], origin: str) -> RawFact:
    source = str(entry["source"])
    r_field = entry.get("r", "inf")
    target = str(entry.get("target", "0"))
    if isinstance(r_field, str) and r_field.strip().startswith("unknown-at"):
        r = parse_page(r_field.split()[-1])
        return RawFact(source, r, Variant.UNKNOWN, origin=origin)
    if isinstance(r_field, str) and r_field.strip().startswith("survives-to"):
        r = parse_page(r_field.split()[-1])
        return RawFact(source, r, Variant.SURVIVES, origin=origin)
    r = parse_page(r_field)
    if r == INF:
        return RawFact(source, INF, Variant.PERMANENT, origin=origin)
    if "possibly" in target:
        cands = tuple("+".join(c) or "0" for c in candidate_sums(target))
        return RawFact(source, r, Variant.TARGET_SET, candidates=cands, origin=origin)
    return RawFact(source, r, Variant.VALUE, target=target, origin=origin)


def resolve_fact(spec: ChartSpec, raw: RawFact) -> DifferentialFact:
    """Turn a :class:`RawFact` into vectors, enforcing the degree law."""
    try:
        if raw.variant is Variant.HIT:
            b_t, target = spec.vector(raw.target)
            b_s = b_t.shifted(-int(raw.r), -int(raw.r) + 1)
            cands = tuple(spec.vector(c, b_s)[1] for c in raw.candidates)
            return DifferentialFact(b_s, cands[0], raw.r, raw.variant, target, cands, raw.origin)
        b, src = spec.vector(raw.source)
        if raw.variant in (Variant.PERMANENT, Variant.UNKNOWN, Variant.SURVIVES):
            return DifferentialFact(b, src, raw.r, raw.variant, label=raw.origin)
        if raw.r < 2:
            raise ChartError(f"page {raw.r} below 2")
        tb = b.shifted(int(raw.r), int(raw.r) - 1)
        if raw.variant is Variant.TARGET_SET:
            cands = tuple(spec.vector(c, tb)[1] for c in raw.candidates)
            return DifferentialFact(b, src, raw.r, raw.variant, candidates=cands, label=raw.origin)
        _, tgt = spec.vector(raw.target, tb)
        return DifferentialFact(b, src, raw.r, raw.variant, tgt, label=raw.origin)
    except ChartError as exc:
        raise ChartError(f"{raw.origin or raw.source}: degree law violated: {exc}") from None


# ---------------------------------------------------------------------------
# lattice


class Tri(str, enum.Enum):
    """Three-valued answer for questions that depend on data completeness."""

    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    labels: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class ZBLattice:
    """Z_r and B_r at one bidegree; indices beyond the last recorded page are stable."""

    bidegree: Bidegree
    dim: int
    zs: tuple[F2Subspace, ...]
    bs: tuple[F2Subspace, ...]

    def _at(self, seq: tuple[F2Subspace, ...], r: Page) -> F2Subspace:
        if r < 1:
            raise ValueError(f"lattice index {r} below 1")
        if r == INF or r > len(seq):
            return seq[-1]
        return seq[int(r) - 1]

    def Z(self, r: Page) -> F2Subspace:
        return self._at(self.zs, r)

    def B(self, r: Page) -> F2Subspace:
        return self._at(self.bs, r)


@dataclass(frozen=True)
class PageGroup:
    """E_r at one bidegree, presented as ``Z_{r-1} / B_{r-1}``."""

    bidegree: Bidegree
    r: Page
    Z: F2Subspace
    B: F2Subspace
    basis: tuple[F2Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: F2Vector) -> F2Vector:
        if not self.Z.contains(v):
            raise ValueError(f"{v} is not in Z_{{{format_page(self.r - 1)}}} at {self.bidegree}")
        return self.B.reduce(v)

    def contains(self, v: F2Vector) -> bool:
        return self.Z.contains(v)


@dataclass(frozen=True)
class _PageMap:
    """The partial d_r at one source bidegree: RREF rows ``src | tgt | flags``."""

    n: int
    m: int
    rows: tuple[int, ...]

    def evaluate(self, x: int) -> tuple[int, int]:
        acc = 0
        src_mask = (1 << self.n) - 1
        for row in self.rows:
            src = row & src_mask
            if not src:
                continue
            p = src & -src
            if x & p:
                x ^= src
                acc ^= row
        tgt = (acc >> self.n) & ((1 << self.m) - 1)
        flags = acc >> (self.n + self.m)
        return tgt, flags


class Chart:
    """An immutable chart with its cycle/boundary lattice.

    With ``strict=True`` any violation raises :class:`ChartError`; otherwise invalid
    facts are skipped and listed in :attr:`violations`.
    """

    def __init__(self, spec: ChartSpec, facts: Iterable[DifferentialFact], strict: bool = True):
        self.spec = spec
        self.name = spec.name
        self.facts: tuple[DifferentialFact, ...] = tuple(facts)
        self.violations: list[Violation] = []
        self._strict = strict
        self._page_maps: dict[tuple[Bidegree, int], _PageMap] = {}
        self._flagged: dict[tuple[Bidegree, int], bool] = {}
        self._lattices: dict[Bidegree, ZBLattice] = {}
        self._alive: dict[Bidegree, list[tuple[Page, int, str]]] = {}
        for f in self.facts:
            self._check_degrees(f)
        self._build()
        if strict and self.violations:
            raise ChartError("; ".join(str(v) for v in self.violations))

    # -- construction ------------------------------------------------------

    def _check_degrees(self, f: DifferentialFact) -> None:
        dims = [(f.bidegree, v) for v in f.sources()]
        tb = f.target_bidegree
        if f.target is not None and tb is not None:
            dims.append((tb, f.target))
        if f.variant is Variant.TARGET_SET and tb is not None:
            dims.extend((tb, c) for c in f.candidates)
        for b, v in dims:
            if v.dim != self.spec.dim(b):
                raise ChartError(f"{self.name}: {f.label or 'fact'} has a vector of dim {v.dim} at {b}")
        if f.r != INF and f.r < 2:
            raise ChartError(f"{self.name}: {f.label or 'fact'} has page {f.r} below 2")

    def _violate(self, kind: str, message: str, labels: Iterable[str] = ()) -> None:
        self.violations.append(Violation(kind, f"{self.name}: {message}", tuple(sorted(set(labels)))))

    def _effective_page(self, f: DifferentialFact) -> Page:
        if f.r != INF and f.r > self.spec.r_max:
            return INF
        return f.r

    def _build(self) -> None:
        spec = self.spec
        alive: dict[Bidegree, list[tuple[Page, int, str]]] = {}
        by_page: dict[int, dict[Bidegree, list[DifferentialFact]]] = {}
        permanent: list[DifferentialFact] = []
        top = 1
        for f in self.facts:
            r = self._effective_page(f)
            if r == INF:
                if f.variant in (Variant.PERMANENT, Variant.VALUE, Variant.SURVIVES):
                    alive.setdefault(f.bidegree, []).append((INF, f.source.bits, f.label))
                    permanent.append(f)
                continue
            r = int(r)
            if f.variant is Variant.SURVIVES:
                alive.setdefault(f.bidegree, []).append((r, f.source.bits, f.label))
                continue
            top = max(top, r)
            for v in f.sources():
                alive.setdefault(f.bidegree, []).append((r, v.bits, f.label))
            by_page.setdefault(r, {}).setdefault(f.bidegree, []).append(f)
            tb = f.target_bidegree
            assert tb is not None
            if f.variant is Variant.VALUE and f.target:
                alive.setdefault(tb, []).append((INF, f.target.bits, f.label))
            elif f.variant is Variant.HIT and f.target:
                alive.setdefault(tb, []).append((INF, f.target.bits, f.label))

        bidegrees = set(spec.bidegrees())
        zs: dict[Bidegree, list[F2Subspace]] = {b: [F2Subspace.full(spec.dim(b))] for b in bidegrees}
        bs: dict[Bidegree, list[F2Subspace]] = {b: [F2Subspace.zero(spec.dim(b))] for b in bidegrees}

        def z_at(b: Bidegree, r: int) -> F2Subspace:
            if b not in zs:
                return F2Subspace.zero(0)
            seq = zs[b]
            return seq[min(r, len(seq)) - 1]

        def b_at(b: Bidegree, r: int) -> F2Subspace:
            if b not in bs:
                return F2Subspace.zero(0)
            seq = bs[b]
            return seq[min(r, len(seq)) - 1]

        for r in range(2, top + 1):
            new_z: dict[Bidegree, F2Subspace] = {}
            new_b: dict[Bidegree, F2Subspace] = {}
            for b, facts in sorted(by_page.get(r, {}).items()):
                zr, images, extra_b, hits = self._page_step(b, r, facts, alive.get(b, []), z_at, b_at)
                new_z[b] = zr
                tb = b.shifted(r, r - 1)
                if tb not in bidegrees:
                    continue
                cur = new_b.get(tb, b_at(tb, r - 1)).with_vectors(images + hits)
                for cands in extra_b:
                    inter = None
                    for c in cands:
                        sp = cur.with_vectors([c])
                        inter = sp if inter is None else inter.intersect(sp)
                    cur = inter if inter is not None else cur
                new_b[tb] = cur
            for b in bidegrees:
                zs[b].append(new_z.get(b, zs[b][-1]))
                bs[b].append(new_b.get(b, bs[b][-1]))

        for b in bidegrees:
            self._lattices[b] = ZBLattice(b, spec.dim(b), tuple(zs[b]), tuple(bs[b]))
        self._alive = alive

        for f in permanent:
            lat = self._lattices.get(f.bidegree)
            if lat is not None and not lat.Z(INF).contains(f.source):
                self._violate(
                    "permanent-cycle-dies",
                    f"{spec.render(f.bidegree, f.source)} at {f.bidegree} is recorded as a permanent cycle "
                    "but does not lie in Z_inf",
                    [f.label],
                )
        for b in sorted(bidegrees):
            lat = self._lattices[b]
            zinf, binf = lat.Z(INF), lat.B(INF)
            bad = [v for v in binf.basis if not zinf.contains(v)]
            if bad:
                names = ", ".join(spec.render(b, v) for v in bad)
                self._violate(
                    "chain",
                    f"at {b} the boundary classes {names} do not survive (B_inf is not inside Z_inf); "
                    "an element both supports and receives a differential",
                    self._labels_touching(b),
                )

    def _labels_touching(self, b: Bidegree) -> list[str]:
        out = []
        for f in self.facts:
            if f.bidegree == b or f.target_bidegree == b:
                out.append(f.label)
        return out

    def _page_step(self, b, r, facts, alive, z_at, b_at):
        spec = self.spec
        n = spec.dim(b)
        tb = b.shifted(r, r - 1)
        m = spec.dim(tb)
        zprev = z_at(b, r - 1)
        bprev = b_at(tb, r - 1)
        ztarget_prev = z_at(tb, r - 1)

        definite: list[tuple[int, int, str]] = []  # (src, tgt, label)
        undetermined: list[DifferentialFact] = []
        extra_b: list[list[int]] = []
        hits: list[int] = []
        for f in facts:
            bad_src = [v for v in f.sources() if not zprev.contains(v)]
            if bad_src:
                self._violate(
                    "source-not-cycle",
                    f"{f.label or 'fact'}: source {spec.render(b, bad_src[0])} at {b} is not in Z_{r - 1}",
                    [f.label],
                )
                continue
            if f.variant is Variant.VALUE:
                assert f.target is not None
                if not ztarget_prev.contains(f.target):
                    self._violate(
                        "target-not-cycle",
                        f"{f.label or 'fact'}: target {spec.render(tb, f.target)} at {tb} is not in Z_{r - 1}",
                        [f.label],
                    )
                    continue
                definite.append((f.source.bits, reduce_bits(f.target.bits, bprev.rows), f.label))
            elif f.variant is Variant.HIT:
                assert f.target is not None
                if not ztarget_prev.contains(f.target):
                    self._violate(
                        "target-not-cycle",
                        f"{f.label or 'fact'}: hit class {spec.render(tb, f.target)} at {tb} is not in Z_{r - 1}",
                        [f.label],
                    )
                    continue
                hits.append(f.target.bits)
            else:
                if f.variant is Variant.TARGET_SET:
                    bad = [c for c in f.candidates if not ztarget_prev.contains(c)]
                    if bad:
                        self._violate(
                            "target-not-cycle",
                            f"{f.label or 'fact'}: candidate target {spec.render(tb, bad[0])} at {tb} "
                            f"is not in Z_{r - 1}",
                            [f.label],
                        )
                        continue
                undetermined.append(f)
        for page, bits, label in alive:
            if page > r:
                definite.append((bits, 0, label))

        width = n + m
        labels = [lab for _, _, lab in definite]
        base = [src | (tgt << n) | (1 << (width + i)) for i, (src, tgt, _) in enumerate(definite)]
        base = list(rref_rows(base))
        src_mask = (1 << n) - 1
        tgt_mask = (1 << m) - 1
        for row in base:
            if not row & src_mask and (row >> n) & tgt_mask:
                involved = [labels[i] for i in range((row >> width).bit_length()) if row >> (width + i) & 1]
                self._violate(
                    "contradiction",
                    f"on page {r} at {b} the facts {sorted(set(involved))} force d_{r}(0) = "
                    f"{spec.render(tb, F2Vector((row >> n) & tgt_mask, m))}",
                    involved,
                )
        src_rows = rref_rows(row & src_mask for row in base)
        kept: list[DifferentialFact] = []
        for f in undetermined:
            if reduce_bits(f.source.bits, src_rows):
                kept.append(f)
                src_rows = rref_rows(src_rows + (f.source.bits,))
                if f.variant is Variant.TARGET_SET:
                    extra_b.append([reduce_bits(c.bits, bprev.rows) for c in f.candidates])
        u = len(kept)
        rows = [row & ((1 << width) - 1) for row in base]
        rows += [f.source.bits | (1 << (width + j)) for j, f in enumerate(kept)]
        pm = _PageMap(n, m, rref_rows(rows))
        self._page_maps[(b, r)] = pm
        self._flagged[(b, r)] = u > 0

        zbasis = zprev.rows
        evals = [pm.evaluate(z) for z in zbasis]
        combined = [reduce_bits(tgt, bprev.rows) | (flags << m) for tgt, flags in evals]
        zr = F2Subspace.span((_combine(zbasis, c) for c in kernel_combinations(combined)), n)
        flag_free = kernel_combinations([flags for _, flags in evals])
        images = [_combine([tgt for tgt, _ in evals], c) for c in flag_free]
        return zr, images, extra_b, hits

    # -- queries -------------------------------------------------------------

    def dim(self, b: Bidegree) -> int:
        return self.spec.dim(b)

    def lattice(self, b: Bidegree) -> ZBLattice:
        lat = self._lattices.get(b)
        if lat is None:
            empty = F2Subspace.zero(0)
            return ZBLattice(b, 0, (empty,), (empty,))
        return lat

    def zb_lattice(self, s: int, t: int) -> ZBLattice:
        return self.lattice(Bidegree(s, t))

    def Z(self, b: Bidegree, r: Page) -> F2Subspace:
        return self.lattice(b).Z(r)

    def B(self, b: Bidegree, r: Page) -> F2Subspace:
        return self.lattice(b).B(r)

    def page_group(self, s: int, t: int, r: Page) -> PageGroup:
        if r < 2:
            raise ValueError("pages start at r = 2")
        b = Bidegree(s, t)
        lat = self.lattice(b)
        z, bb = lat.Z(r - 1), lat.B(r - 1)
        return PageGroup(b, r, z, bb, tuple(quotient_basis(z, bb)))

    def vector(self, expr: str, b: Bidegree | None = None) -> tuple[Bidegree, F2Vector]:
        return self.spec.vector(expr, b)

    def render(self, b: Bidegree, v: F2Vector) -> str:
        return self.spec.render(b, v)

    def covered(self, b: Bidegree) -> bool:
        return self.spec.covered(b)

    @property
    def top_page(self) -> int:
        pages = [r for (_, r) in self._page_maps]
        return max(pages, default=1)

    def differential(self, b: Bidegree, x: F2Vector, r: int) -> tuple[str, F2Vector | None]:
        """Value of d_r on ``x``.

        Returns ``("value", y)`` with ``y`` reduced mod ``B_{r-1}``, ``("unknown", None)``
        when the recorded facts leave it open, or ``("not-cycle", None)`` when
        ``x`` is not in ``Z_{r-1}``.
        """
        if not self.Z(b, r - 1).contains(x):
            return "not-cycle", None
        tb = b.shifted(r, r - 1)
        pm = self._page_maps.get((b, r))
        if pm is None:
            return "value", F2Vector.zero(self.dim(tb))
        tgt, flags = pm.evaluate(x.bits)
        if flags:
            return "unknown", None
        return "value", self.B(tb, r - 1).reduce(F2Vector(tgt, self.dim(tb)))

    def is_determined(self, b: Bidegree, x: F2Vector, r: int) -> bool:
        """True when the facts themselves (not the zero default) fix d_r on ``x``."""
        if not self.Z(b, r - 1).contains(x):
            return True
        srcs: list[int] = []
        pm = self._page_maps.get((b, r))
        if pm is not None:
            src_mask = (1 << pm.n) - 1
            flags = [row >> (pm.n + pm.m) for row in pm.rows]
            srcs = [_combine([row & src_mask for row in pm.rows], c) for c in kernel_combinations(flags)]
        srcs += [v for page, v, _ in self._alive.get(b, []) if page > r]
        return not reduce_bits(x.bits, rref_rows(srcs))

    def known_permanent(self, b: Bidegree) -> F2Subspace:
        """Span of classes recorded as permanent cycles or as targets of differentials."""
        return F2Subspace.span((v for page, v, _ in self._alive.get(b, []) if page == INF), self.dim(b))

    def death(self, b: Bidegree, x: F2Vector) -> tuple[Page, F2Vector | None]:
        """First page ``r`` with ``x`` outside ``Z_r`` and the value of d_r there.

        Returns ``(INF, None)`` for a permanent cycle.  The value is ``None`` when d_r
        on ``x`` is not determined by the facts.
        """
        lat = self.lattice(b)
        for r in range(2, len(lat.zs) + 1):
            if not lat.Z(r).contains(x):
                kind, y = self.differential(b, x, r)
                return r, y if kind == "value" else None
        return INF, None

    def exact_through(self, b: Bidegree, k: Page) -> bool:
        """True when no undetermined fact at ``b`` has page ``<= k``.

        Then ``Z_j`` at ``b`` is exact (not just a lower bound) for ``j <= k``.
        """
        for (bb, r), flagged in self._flagged.items():
            if bb == b and flagged and r <= k:
                return False
        return True

    def has_essential(self, b: Bidegree, r: int) -> tuple[Tri, tuple[F2Vector, F2Vector] | None]:
        """Does some class at ``b`` support a nonzero d_r?"""
        pm = self._page_maps.get((b, r))
        if pm is not None:
            tb = b.shifted(r, r - 1)
            bprev = self.B(tb, r - 1)
            for z in self.Z(b, r - 1).rows:
                tgt, flags = pm.evaluate(z)
                tgt = reduce_bits(tgt, bprev.rows)
                if tgt and not flags:
                    return Tri.YES, (F2Vector(z, self.dim(b)), F2Vector(tgt, self.dim(tb)))
        if self.dim(b) == 0 or not self.Z(b, r - 1).dim:
            return Tri.NO, None
        if not self.covered(b) or not self.exact_through(b, r):
            return Tri.UNKNOWN, None
        return Tri.NO, None

    def killed_by(self, b: Bidegree, y: F2Vector, max_r: int) -> Tri:
        """Is ``y`` a boundary of some d_k with ``k <= max_r``?

        ``NO`` requires every possible source bidegree to be covered by a completeness
        region and free of undetermined facts at the relevant pages.
        """
        if self.B(b, max_r).contains(y):
            return Tri.YES
        upper = self.B(b, max_r)
        for k in range(2, max_r + 1):
            src = Bidegree(b.s - k, b.t - k + 1) if b.s - k >= 0 else None
            if src is None or self.dim(src) == 0:
                continue
            if not self.covered(src) or not self.exact_through(src, k - 1):
                return Tri.UNKNOWN
            for f in self.facts:
                if f.bidegree == src and f.r == k and f.variant is Variant.UNKNOWN:
                    return Tri.UNKNOWN
                if f.bidegree == src and f.r == k and f.variant is Variant.TARGET_SET:
                    upper = upper.with_vectors(c.bits for c in f.candidates)
        return Tri.NO if not upper.contains(y) else Tri.UNKNOWN

    def validate_consistency(self) -> list[Violation]:
        return list(self.violations)


def _combine(vectors: Sequence[int], mask: int) -> int:
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out ^= vectors[i]
        mask >>= 1
        i += 1
    return out


# ---------------------------------------------------------------------------
# documents


def spec_from_document(doc: Mapping[str, Any], base: Mapping[str, ChartSpec] | None = None) -> ChartSpec:
    name = str(doc["name"])
    susp = doc.get("suspension")
    if susp is not None:
        if base is None or susp["of"] not in base:
            raise ChartError(f"{name}: suspension of unknown chart {susp['of']}")
        spec = base[susp["of"]].suspended(name, int(susp["shift"]))
    else:
        spec = ChartSpec(name, r_max=int(doc.get("r_max", DEFAULT_R_MAX)))
    for g in doc.get("generators", []):
        gname = normalize_name(str(g["name"]))
        if gname in spec.generators and susp is None:
            raise ChartError(f"{name}: duplicate generator name {gname}")
        spec.add_generator(gname, Bidegree(int(g["s"]), int(g["t"])))
    for p in doc.get("products", []):
        spec.products[(normalize_name(p["left"]), normalize_name(p["right"]))] = str(p["result"])
    regions = [Region.from_json(reg) for reg in doc.get("regions", [])]
    spec.regions = tuple(spec.regions) + tuple(regions)
    return spec


def raw_facts_from_document(doc: Mapping[str, Any]) -> list[RawFact]:
    name = str(doc["name"])
    return [
        parse_differential_entry(entry, entry.get("origin", f"{name}#{i}"))
        for i, entry in enumerate(doc.get("differentials", []))
    ]


def _read_document(document: Mapping[str, Any] | str | Path) -> Mapping[str, Any]:
    if isinstance(document, Mapping):
        return document
    path = Path(document)
    if path.exists():
        return json.loads(path.read_text())
    return json.loads(str(document))


def load_chart(document: Mapping[str, Any] | str | Path, strict: bool = True) -> Chart:
    """Build a chart from a JSON chart document (mapping, path or JSON text)."""
    doc = _read_document(document)
    spec = spec_from_document(doc)
    facts = [resolve_fact(spec, raw) for raw in raw_facts_from_document(doc)]
    return Chart(spec, facts, strict=strict)


def zb_lattice(chart: Chart, s: int, t: int) -> ZBLattice:
    return chart.zb_lattice(s, t)


def page_group(chart: Chart, s: int, t: int, r: Page) -> PageGroup:
    return chart.page_group(s, t, r)


def validate_consistency(chart: Chart | Mapping[str, Any] | str | Path) -> list[Violation]:
    """Violations of a chart; documents are rebuilt leniently so this never raises
    for membership or chain problems."""
    if isinstance(chart, Chart):
        return chart.validate_consistency()
    doc = _read_document(chart)
    spec = spec_from_document(doc)
    facts = [resolve_fact(spec, raw) for raw in raw_facts_from_document(doc)]
    return Chart(spec, facts, strict=False).validate_consistency()
