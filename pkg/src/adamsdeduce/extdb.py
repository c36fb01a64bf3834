"""Maps between charts and (f, E_r)-extension facts.

An extension ``d_n^{f,E_r}(x) = y`` relates ``x`` in the source chart of ``f`` to ``y``
in its target chart.  ``r`` is a page (``INF`` for the classical f-extension
spectral sequence).  Besides stored facts, a map may carry an induced action on E_2:
a product by a detecting element for maps of positive Adams filtration, or a matrix
for maps of filtration zero.  Action-derived extensions have length ``AF(f)`` and
are produced on demand at any page.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .chart import (
    INF,
    Bidegree,
    Chart,
    ChartError,
    Page,
    Region,
    Tri,
    format_page,
    normalize_name,
    parse_page,
    split_sum,
    sum_terms,
)
from .gf2 import F2Subspace, F2Vector, apply_bits, kernel_combinations, reduce_bits


class ExtensionError(ValueError):
    """An extension statement violates its window or membership conditions."""


@dataclass(frozen=True)
class MapData:
    """A map ``f: X -> Y`` between two charts.

    ``t_shift`` is added to the internal degree on top of the length of an
    extension, so a length-``n`` extension from ``(s, t)`` lands at
    ``(s + n, t + n + t_shift)``.  ``action`` maps source generator names to sums in
    the target chart; with ``action_complete`` unlisted generators map to zero,
    otherwise their image is unknown.
    """

    id: str
    source: str
    target: str
    af: int
    e: int
    t_shift: int = 0
    detect: str | None = None
    action: tuple[tuple[str, str], ...] | None = None
    action_complete: bool = True
    regions: tuple[Region, ...] = ()
    les: str | None = None  # "bottom" (inclusion of the bottom cell) or "top" (pinch to the top cell)

    def target_bidegree(self, b: Bidegree, n: int) -> Bidegree:
        return Bidegree(b.s + n, b.t + n + self.t_shift)

    def source_bidegree(self, tb: Bidegree, n: int) -> Bidegree:
        return Bidegree(tb.s - n, tb.t - n - self.t_shift)

    def covered(self, b: Bidegree) -> bool:
        return any(reg.covers(b) for reg in self.regions)

    @property
    def has_action(self) -> bool:
        return self.detect is not None or self.action is not None or self.les is not None


def map_from_document(doc: Mapping[str, Any]) -> MapData:
    af = int(doc.get("af", 0))
    e = int(doc.get("e", 0 if af == 0 else 1))
    action = doc.get("action")
    return MapData(
        id=str(doc["id"]),
        source=str(doc["source"]),
        target=str(doc["target"]),
        af=af,
        e=e,
        t_shift=int(doc.get("t_shift", 0)),
        detect=doc.get("detect"),
        action=None if action is None else tuple(sorted((normalize_name(k), str(v)) for k, v in action.items())),
        action_complete=bool(doc.get("complete", doc.get("les") is None)),
        regions=tuple(Region.from_json(r) for r in doc.get("regions", [])),
        les=doc.get("les"),
    )


@dataclass(frozen=True)
class CofiberTriangle:
    """``X --f--> Y --g--> Cf --h--> ΣX``; the Adams filtrations' e-values sum to 1."""

    id: str
    f: str
    g: str
    h: str


@dataclass(frozen=True)
class FextFact:
    """``d_n^{f,E_r}(x) = y`` with ``y`` reduced modulo ``indeterminacy``."""

    map_id: str
    r: Page
    n: int
    source_bidegree: Bidegree
    x: F2Vector
    target_bidegree: Bidegree
    y: F2Vector
    indeterminacy: F2Subspace
    essential: bool
    origin: str = ""

    @property
    def key(self) -> tuple:
        return (self.map_id, self.r, self.n, self.source_bidegree, self.x.bits)


@dataclass(frozen=True)
class CrossingWitness:
    a: int
    b: int
    length: int
    page: Page
    source_bidegree: Bidegree
    x: F2Vector
    target_bidegree: Bidegree
    y: F2Vector
    via: str


@dataclass(frozen=True)
class CrossingReport:
    state: Tri
    witness: CrossingWitness | None = None
    checked: tuple[str, ...] = ()
    open: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.state is Tri.YES


def _exists_pair(
    pairs: Sequence[tuple[int, int]],
    A: F2Subspace,
    T: F2Subspace,
    D: F2Subspace,
    C: F2Subspace | None = None,
) -> tuple[int, int] | None:
    """Find ``(x, y)`` in the span of ``pairs`` with ``x in A \\ C`` and ``y in T \\ D``.

    The admissible pairs form a subspace S.  The pairs with ``x in C`` and those with
    ``y in D`` are two subspaces of S, and a vector space is never the union of two
    proper subspaces, so a witness exists iff neither of them is all of S.
    """
    if not pairs:
        return None
    nx = A.ambient_dim
    images = [reduce_bits(x, A.rows) | (reduce_bits(y, T.rows) << nx) for x, y in pairs]
    S = []
    for combo in kernel_combinations(images):
        S.append((apply_bits([p[0] for p in pairs], combo), apply_bits([p[1] for p in pairs], combo)))
    good_x = [p for p in S if C is None or reduce_bits(p[0], C.rows)]
    good_y = [p for p in S if reduce_bits(p[1], D.rows)]
    if not good_x or not good_y:
        return None
    for p in good_x:
        if reduce_bits(p[1], D.rows):
            return p
    px, py = good_x[0], good_y[0]
    if C is not None and not reduce_bits(py[0], C.rows):
        return (px[0] ^ py[0], px[1] ^ py[1])
    return py


def _idx(r: Page, k: int) -> Page:
    """``r - k`` with INF saturating."""
    return INF if r == INF else r - k


class ExtDB:
    """Charts, maps and extension facts, with the extension-level operations.

    Instances are treated as immutable snapshots once rules start reading them.
    """

    def __init__(self, charts: Mapping[str, Chart] | None = None):
        self.charts: dict[str, Chart] = dict(charts or {})
        self.maps: dict[str, MapData] = {}
        self.triangles: dict[str, CofiberTriangle] = {}
        self.null_composites: set[tuple[str, str]] = set()
        self.exact_pairs: set[tuple[str, str]] = set()
        self.squares: dict[str, tuple[str, str, str, str]] = {}
        self.fexts: list[FextFact] = []
        self._fext_ids: dict[int, str] = {}
        self._actions: dict[str, dict[str, list[str] | None]] = {}
        self._action_cache: dict[tuple[str, Bidegree], tuple[list[int | None], Bidegree]] = {}

    # -- maps -----------------------------------------------------------------

    def chart(self, name: str) -> Chart:
        if name not in self.charts:
            raise ChartError(f"unknown chart {name}")
        return self.charts[name]

    def register_map(self, data: MapData) -> str:
        if data.id in self.maps:
            raise ExtensionError(f"map {data.id} registered twice")
        if (data.af == 0) != (data.e == 0) or data.e not in (0, 1):
            raise ExtensionError(f"map {data.id}: e(f) must be 0 exactly when AF(f) = 0")
        src, tgt = self.chart(data.source), self.chart(data.target)
        self.maps[data.id] = data
        self._actions[data.id] = self._resolve_action(data, src, tgt)
        return data.id

    def _resolve_action(self, data: MapData, src: Chart, tgt: Chart) -> dict[str, list[str] | None]:
        out: dict[str, list[str] | None] = {}
        if data.detect is not None:
            for name in src.spec.generators:
                prod = tgt.spec.product(data.detect, name)
                if prod is not None:
                    out[name] = sum_terms(prod)
        if data.les == "bottom":
            for name in src.spec.generators:
                cand = name + "[0]"
                if cand in tgt.spec.generators:
                    out[name] = [cand]
        elif data.les == "top":
            for name in src.spec.generators:
                image = _top_cell_image(name, tgt)
                if image is not None or name.endswith("[0]"):
                    out[name] = image if image is not None else []
        for name, expr in data.action or ():
            out[name] = sum_terms(expr)
        for name, image in out.items():
            if image is None:
                continue
            if name not in src.spec.generators:
                raise ExtensionError(f"map {data.id}: {name} is not a generator of {src.name}")
            b = src.spec.generators[name]
            tb = data.target_bidegree(b, data.af)
            try:
                tgt.spec.vector_from_names(image, tb)
            except ChartError as exc:
                raise ExtensionError(f"map {data.id}: image of {name} has the wrong degree: {exc}") from None
        return out

    def action_images(self, map_id: str, b: Bidegree) -> tuple[list[int | None], Bidegree]:
        """Images of the basis at ``b`` (``None`` where unknown) and the target bidegree."""
        key = (map_id, b)
        if key in self._action_cache:
            return self._action_cache[key]
        data = self.maps[map_id]
        src, tgt = self.chart(data.source), self.chart(data.target)
        tb = data.target_bidegree(b, data.af)
        images: list[int | None] = []
        table = self._actions[map_id]
        for name in src.spec.basis(b):
            if name in table and table[name] is not None:
                images.append(tgt.spec.vector_from_names(table[name], tb)[1].bits)
            elif data.has_action and data.action_complete:
                images.append(0)
            else:
                images.append(None)
        self._action_cache[key] = (images, tb)
        return images, tb

    def apply(self, map_id: str, b: Bidegree, x: F2Vector) -> F2Vector | None:
        """Image of ``x`` under the induced E_2 action, or ``None`` if unknown."""
        data = self.maps[map_id]
        if not data.has_action:
            return None
        images, tb = self.action_images(map_id, b)
        bits = 0
        for i in x.support():
            if images[i] is None:
                return None
            bits ^= images[i]  # type: ignore[operator]
        return F2Vector(bits, self.chart(data.target).dim(tb))

    def action_pairs(self, map_id: str, b: Bidegree) -> tuple[list[tuple[int, int]], int]:
        """Pairs ``(e_i, f(e_i))`` over known generators and the mask of unknown ones."""
        data = self.maps[map_id]
        if not data.has_action:
            return [], (1 << self.chart(data.source).dim(b)) - 1
        images, _ = self.action_images(map_id, b)
        pairs, unknown = [], 0
        for i, img in enumerate(images):
            if img is None:
                unknown |= 1 << i
            else:
                pairs.append((1 << i, img))
        return pairs, unknown

    def identity(self, chart_name: str) -> str:
        mid = f"id:{chart_name}"
        if mid not in self.maps:
            spec = self.chart(chart_name).spec
            action = tuple(sorted((n, n) for n in spec.generators))
            self.register_map(MapData(mid, chart_name, chart_name, 0, 0, action=action))
        return mid

    def register_triangle(self, tri: CofiberTriangle) -> str:
        maps = [self.maps[m] for m in (tri.f, tri.g, tri.h)]
        if sum(m.e for m in maps) != 1:
            raise ExtensionError(f"triangle {tri.id}: the e-values of its maps must sum to 1")
        if maps[0].target != maps[1].source or maps[1].target != maps[2].source:
            raise ExtensionError(f"triangle {tri.id}: maps do not compose")
        self.triangles[tri.id] = tri
        self.null_composites.update({(tri.f, tri.g), (tri.g, tri.h)})
        self.exact_pairs.update({(tri.f, tri.g), (tri.g, tri.h)})
        return tri.id

    # -- extension facts --------------------------------------------------------

    def indeterminacy(self, f: MapData, r: Page, n: int, b: Bidegree, extra: F2Subspace | None = None) -> F2Subspace:
        """``B_{1+n-e}`` at the target plus images of shorter extensions from higher sources.

        The shorter images are taken from the action and from stored facts; this is a
        lower bound for the true indeterminacy.
        """
        X, Y = self.chart(f.source), self.chart(f.target)
        tb = f.target_bidegree(b, n)
        out = Y.B(tb, 1 + n - f.e)
        if extra is not None:
            out = out + extra
        zy_index = _idx(r, 1 + n - f.e)
        if zy_index != INF and zy_index < 1:
            return out
        T = Y.Z(tb, zy_index)
        extra_vecs = []
        for a in range(1, n - f.e + 1):
            src = b.shifted(a, a)
            z_index = _idx(r, 1 + a)
            if X.dim(src) == 0 or (z_index != INF and z_index < 1):
                continue
            A = X.Z(src, z_index)
            length = n - a
            pairs = []
            if length == f.af:
                pairs, _ = self.action_pairs(f.id, src)
            pairs += self._stored_pairs(f.id, _idx(r, a), length, src)
            if not pairs:
                continue
            imgs = [reduce_bits(x, A.rows) | (reduce_bits(y, T.rows) << X.dim(src)) for x, y in pairs]
            for combo in kernel_combinations(imgs):
                extra_vecs.append(apply_bits([p[1] for p in pairs], combo))
        return out.with_vectors(extra_vecs)

    def _stored_pairs(self, map_id: str, page: Page, length: int, b: Bidegree) -> list[tuple[int, int]]:
        """Stored extensions usable as ``(f, E_page)`` facts of ``length`` from ``b``."""
        data = self.maps[map_id]
        out = []
        for fx in self.fexts:
            if fx.map_id != map_id or fx.n != length or fx.source_bidegree != b:
                continue
            if fx.r < page:
                continue
            if page != INF and length > page - 2 + data.e:
                continue
            out.append((fx.x.bits, fx.y.bits))
        return out

    def make_fext(
        self,
        map_id: str,
        r: Page,
        n: int,
        b: Bidegree,
        x: F2Vector,
        y: F2Vector,
        essential: bool | None = None,
        origin: str = "",
        extra_indeterminacy: F2Subspace | None = None,
    ) -> FextFact:
        """Validate an extension statement and put it in canonical form."""
        if map_id not in self.maps:
            raise ExtensionError(f"unknown map {map_id}")
        f = self.maps[map_id]
        X, Y = self.chart(f.source), self.chart(f.target)
        if r != INF and r < 2:
            raise ExtensionError("pages start at 2")
        if n < f.e or (r != INF and n > r - 2 + f.e):
            raise ExtensionError(
                f"length {n} outside the window {f.e} <= n <= r - 2 + e(f) for r = {format_page(r)}"
            )
        tb = f.target_bidegree(b, n)
        if x.dim != X.dim(b) or y.dim != Y.dim(tb):
            raise ExtensionError(f"vectors do not match the bidegrees {b} -> {tb}")
        if not X.Z(b, _idx(r, 1)).contains(x):
            raise ExtensionError(f"source {X.render(b, x)} is not in Z_{format_page(_idx(r, 1))} at {b}")
        if not Y.Z(tb, _idx(r, 1 + n - f.e)).contains(y):
            raise ExtensionError(
                f"target {Y.render(tb, y)} is not in Z_{format_page(_idx(r, 1 + n - f.e))} at {tb}"
            )
        ind = self.indeterminacy(f, r, n, b, extra_indeterminacy)
        y_red = ind.reduce(y)
        if n < f.af and y_red:
            raise ExtensionError(f"{map_id} raises filtration by at least {f.af}; a length-{n} target must vanish")
        if n == f.af:
            image = self.apply(map_id, b, x)
            if image is not None and ind.reduce(image) != y_red:
                raise ExtensionError(
                    f"the action of {map_id} sends {X.render(b, x)} to {Y.render(tb, image)}, "
                    f"not {Y.render(tb, y)}"
                )
        is_essential = bool(y_red)
        if essential and not is_essential:
            raise ExtensionError("claimed essential, but the target lies in the indeterminacy")
        return FextFact(map_id, r, n, b, x, tb, y_red, ind, is_essential, origin)

    def register_fext(self, map_id: str, r: Page, n: int, x: str | tuple[Bidegree, F2Vector], y: str | F2Vector,
                      essential: bool | None = None, origin: str = "") -> FextFact:
        f = self.maps.get(map_id)
        if f is None:
            raise ExtensionError(f"unknown map {map_id}")
        X, Y = self.chart(f.source), self.chart(f.target)
        b, xv = X.vector(x) if isinstance(x, str) else x
        tb = f.target_bidegree(b, n)
        yv = Y.vector(y, tb)[1] if isinstance(y, str) else y
        fact = self.make_fext(map_id, r, n, b, xv, yv, essential, origin)
        self.add_fext(fact)
        return fact

    def add_fext(self, fact: FextFact) -> None:
        self.fexts.append(fact)

    def action_fext(self, map_id: str, r: Page, b: Bidegree, x: F2Vector) -> FextFact | None:
        """The length-AF extension read off from the action, when it is a valid statement."""
        f = self.maps[map_id]
        image = self.apply(map_id, b, x)
        if image is None or not x:
            return None
        try:
            return self.make_fext(map_id, r, f.af, b, x, image, origin=f"action of {map_id}")
        except ExtensionError:
            return None

    def auto_facts(self, map_id: str) -> list[FextFact]:
        """E_2-page (or first valid page) extensions given by the product action."""
        f = self.maps[map_id]
        if f.detect is None:
            return []
        X = self.chart(f.source)
        r = max(2, f.af + 2 - f.e)
        out = []
        for name in sorted(X.spec.generators):
            g = X.spec.generator(name)
            x = F2Vector.unit(g.basis_index, X.dim(g.bidegree))
            image = self.apply(map_id, g.bidegree, x)
            if image:
                fact = self.action_fext(map_id, r, g.bidegree, x)
                if fact is not None:
                    out.append(fact)
        return out

    # -- crossings -----------------------------------------------------------------

    def fext_has_crossing(self, fact: FextFact) -> CrossingReport:
        """Crossings of an (f, E_r)-extension: essential (f, E_{r-a})-extensions of length
        ``n - a - b`` from ``(s + a, t + a)`` landing in ``Z_{r-1-n+b+e} \\ B_{1+n-b-e}``."""
        f = self.maps[fact.map_id]
        r, n = fact.r, fact.n
        a_max = n - f.e if r == INF else min(int(r) - 2, n - f.e)
        windows = [(a, b) for a in range(1, a_max + 1) for b in range(0, n - a - f.e + 1)]
        return self._crossing_scan(f, r, n, fact.source_bidegree, windows)

    def _crossing_scan(
        self,
        f: MapData,
        r: Page,
        n: int,
        b0: Bidegree,
        windows: Iterable[tuple[int, int]],
        avoid: dict[int, F2Subspace] | None = None,
    ) -> CrossingReport:
        X, Y = self.chart(f.source), self.chart(f.target)
        checked: list[str] = []
        undecided: list[str] = []
        for a, b in windows:
            length = n - a - b
            if length < f.af:
                continue
            src = b0.shifted(a, a)
            tb = f.target_bidegree(b0, n - b)
            page = _idx(r, a)
            z_index = _idx(r, 1 + a)
            if X.dim(src) == 0 or Y.dim(tb) == 0 or (z_index != INF and z_index < 1):
                continue
            A = X.Z(src, z_index)
            T = Y.Z(tb, _idx(r, 1 + n - b - f.e))
            D = Y.B(tb, 1 + n - b - f.e)
            C = avoid.get(a) if avoid else None
            pairs: list[tuple[int, int]] = []
            certain = X.exact_through(src, z_index) and Y.exact_through(tb, _idx(r, 1 + n - b - f.e))
            via = "stored extensions"
            if length == f.af and f.has_action:
                act, unknown = self.action_pairs(f.id, src)
                pairs += act
                via = "action"
                if any(reduce_bits(v, ()) & unknown for v in A.rows):
                    certain = False
            elif not f.covered(src):
                certain = False
            pairs += self._stored_pairs(f.id, page, length, src)
            hit = _exists_pair(pairs, A, T, D, C)
            label = f"a={a} b={b} length {length} from {src}"
            if hit is not None:
                w = CrossingWitness(a, b, length, page, src, F2Vector(hit[0], X.dim(src)), tb,
                                    F2Vector(hit[1], Y.dim(tb)), via)
                return CrossingReport(Tri.YES, w, tuple(checked))
            if certain:
                checked.append(f"{label}: none ({via})")
            else:
                undecided.append(label)
        if undecided:
            return CrossingReport(Tri.UNKNOWN, None, tuple(checked), tuple(undecided))
        return CrossingReport(Tri.NO, None, tuple(checked))

    def classical_crossing(self, map_id: str, b: Bidegree, n: int, p: int) -> CrossingReport:
        """Crossings of a classical f-extension ``d_n^f`` from ``b`` hitting AF in ``[p, s + n]``.

        A crossing is any f-extension from a class at ``(s + a, t + a)``, ``a > 0``, to a
        class nonzero in E_∞ whose filtration lies in the range.
        """
        f = self.maps[map_id]
        X, Y = self.chart(f.source), self.chart(f.target)
        checked: list[str] = []
        undecided: list[str] = []
        for a in range(1, n + 1):
            src = b.shifted(a, a)
            if X.dim(src) == 0:
                continue
            for m in range(max(f.af, p - b.s - a), n - a + 1):
                tb = f.target_bidegree(src, m)
                if Y.dim(tb) == 0:
                    continue
                A, T, D = X.Z(src, INF), Y.Z(tb, INF), Y.B(tb, INF)
                certain = X.exact_through(src, INF) and Y.exact_through(tb, INF)
                pairs: list[tuple[int, int]] = []
                via = "stored extensions"
                if m == f.af and f.has_action:
                    act, unknown = self.action_pairs(f.id, src)
                    pairs += act
                    via = "action"
                    if any(v & unknown for v in A.rows):
                        certain = False
                elif not f.covered(src):
                    certain = False
                pairs += self._stored_pairs(f.id, INF, m, src)
                hit = _exists_pair(pairs, A, T, D)
                label = f"length {m} from {src}"
                if hit is not None:
                    w = CrossingWitness(a, n - a - m, m, INF, src, F2Vector(hit[0], X.dim(src)), tb,
                                        F2Vector(hit[1], Y.dim(tb)), via)
                    return CrossingReport(Tri.YES, w, tuple(checked))
                if certain:
                    checked.append(f"{label}: none ({via})")
                else:
                    undecided.append(label)
        if undecided:
            return CrossingReport(Tri.UNKNOWN, None, tuple(checked), tuple(undecided))
        return CrossingReport(Tri.NO, None, tuple(checked))

    # -- moving between pages -----------------------------------------------------

    def restrict_fext(self, fact: FextFact, r_new: Page) -> FextFact:
        """The same extension read on an earlier page ``r_new <= r``."""
        f = self.maps[fact.map_id]
        if r_new > fact.r:
            raise ExtensionError("restriction goes to an earlier page; use lift_fext to go later")
        if r_new != INF and fact.n > r_new - 2 + f.e:
            raise ExtensionError(f"length {fact.n} does not fit on page {format_page(r_new)}")
        return self.make_fext(fact.map_id, r_new, fact.n, fact.source_bidegree, fact.x, fact.y,
                              origin=f"restriction of {fact.origin}", extra_indeterminacy=fact.indeterminacy)

    def lift_obstruction(self, fact: FextFact, r_new: Page) -> CrossingReport | str | None:
        """Why ``fact`` cannot be moved to page ``r_new``; ``None`` when it can."""
        f = self.maps[fact.map_id]
        X = self.chart(f.source)
        if r_new <= fact.r:
            return "lifting needs a later page"
        if not X.Z(fact.source_bidegree, _idx(r_new, 1)).contains(fact.x):
            return f"source is not in Z_{format_page(_idx(r_new, 1))}"
        avoid: dict[int, F2Subspace] = {}
        windows = []
        for a in range(1, fact.n - f.e + 1):
            src = fact.source_bidegree.shifted(a, a)
            if X.dim(src) == 0:
                continue
            idx = _idx(r_new, 1 + a)
            avoid[a] = X.Z(src, idx) if idx == INF or idx >= 1 else F2Subspace.full(X.dim(src))
            windows += [(a, b) for b in range(1, fact.n - a - f.e + 1)]
        report = self._crossing_scan(f, fact.r, fact.n, fact.source_bidegree, windows, avoid)
        if report.state is Tri.NO:
            return None
        return report

    def lift_fext(self, fact: FextFact, r_new: Page) -> FextFact:
        """Move an extension to a later page when no crossing from a class dying in between exists."""
        why = self.lift_obstruction(fact, r_new)
        if why is not None:
            detail = why if isinstance(why, str) else f"crossing check {why.state.value}: {why.witness or why.open}"
            raise ExtensionError(f"cannot lift to page {format_page(r_new)}: {detail}")
        return self.make_fext(fact.map_id, r_new, fact.n, fact.source_bidegree, fact.x, fact.y,
                              origin=f"lift of {fact.origin}", extra_indeterminacy=fact.indeterminacy)

    def render_fext(self, fact: FextFact) -> str:
        f = self.maps[fact.map_id]
        X, Y = self.chart(f.source), self.chart(f.target)
        return (
            f"d_{fact.n}^{{{fact.map_id},E_{format_page(fact.r)}}}({X.render(fact.source_bidegree, fact.x)}) = "
            f"{Y.render(fact.target_bidegree, fact.y)}"
        )


_CELL = re.compile(r"^(.*)\[(\d+)\]$")


def _top_cell_image(name: str, top: Chart) -> list[str] | None:
    """Image of ``a[k]`` (``k > 0``) under restriction to the top cell: ``a`` itself."""
    m = _CELL.match(name)
    if m is None or m.group(2) == "0":
        return None
    inner = normalize_name(m.group(1))
    terms = sum_terms(inner) if len(split_sum(inner)) > 1 else [inner]
    if all(t in top.spec.generators for t in terms):
        return terms
    return None


def page_arg(value: Any) -> Page:
    return parse_page(value)
