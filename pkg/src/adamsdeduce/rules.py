"""Inference rules over charts and extension facts.

Each rule checks its hypotheses against an :class:`~adamsdeduce.extdb.ExtDB` snapshot
and either returns a :class:`RuleApplication` or raises :class:`RuleRefused` naming
the first hypothesis that failed.  Any crossing check answering ``unknown`` counts as
a failure.  Rules never write; the fact store decides what to keep.

Hypothesis numbers in refusals follow the usual statement of each rule:

* square rule: (1) f-extension, (2) p-extension, (3) one of them crossing-free,
  (4) the g-extension crossing-free above the threshold, (5) the short q-extension
  of ``y`` vanishes without crossing.
* generalized Leibniz rule: (1) ``d_r(x) = x_inf``, (2) ``d_m^{f,E_n}(x) = y``,
  (3) ``d_l^{f,E_inf}(x_inf) = y_inf``, (4) (1) crossing-free on the E_n-page or (2)
  crossing-free, (5) (3) crossing-free.
* generalized Mahowald trick: (1) ``d_l^{h,E_r'}(xbar) = x``, (2) ``d_r(xbar) = ybar``,
  (3) (1) crossing-free or (2) crossing-free on the E_r'-page,
  (4) ``d_m^{g,E_{m1+2}}(y) = ybar``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .chart import INF, Bidegree, Chart, Page, Tri, format_page
from .extdb import CrossingReport, ExtDB, ExtensionError, FextFact
from .gf2 import F2Vector
from .synthetic import has_crossing_on_page

CITATIONS = {
    "square_rule": "extension square rule",
    "composition_rule": "null composite gives permanent cycles",
    "exactness_rule": "exactness gives boundaries",
    "generalized_leibniz": "generalized Leibniz rule",
    "mahowald_trick": "generalized Mahowald trick",
    "naturality_transport": "naturality of the Adams spectral sequence",
    "lift_fext": "lifting an extension to a later page",
    "restrict_fext": "restricting an extension to an earlier page",
}


@dataclass(frozen=True)
class DiffClaim:
    """A classical statement about ``x`` at ``bidegree`` in ``chart``.

    ``kind`` is ``"value"`` (``d_r(x) = target``), ``"permanent"`` (``r`` is INF) or
    ``"survives"`` (``x`` lies in ``Z_{r-1}``).
    """

    chart: str
    bidegree: Bidegree
    source: F2Vector
    r: Page
    target: F2Vector | None = None
    kind: str = "value"

    @property
    def target_bidegree(self) -> Bidegree:
        return self.bidegree.shifted(int(self.r), int(self.r) - 1)


@dataclass(frozen=True)
class CycleClaim:
    """``y`` is a permanent cycle in the extension spectral sequence of ``map_id``."""

    map_id: str
    bidegree: Bidegree
    y: F2Vector


@dataclass(frozen=True)
class BoundaryClaim:
    """``y`` is hit by some extension of ``map_id`` of one of the listed lengths."""

    map_id: str
    bidegree: Bidegree
    y: F2Vector
    lengths: tuple[int, ...]


Claim = Any  # DiffClaim | FextFact | CycleClaim | BoundaryClaim


@dataclass(frozen=True)
class RuleApplication:
    rule: str
    premises: tuple[Claim, ...]
    certificates: tuple[str, ...]
    conclusions: tuple[Claim, ...]
    parameters: tuple[tuple[str, str], ...] = ()

    @property
    def citation(self) -> str:
        return CITATIONS.get(self.rule, self.rule)


class RuleRefused(Exception):
    def __init__(self, rule: str, hypothesis: str, reason: str):
        super().__init__(f"{rule} refused: hypothesis {hypothesis}: {reason}")
        self.rule = rule
        self.hypothesis = hypothesis
        self.reason = reason


class RuleContradiction(Exception):
    """The hypotheses of a rule hold but its conclusion contradicts the charts."""

    def __init__(self, rule: str, message: str, premises: tuple[Claim, ...]):
        super().__init__(f"{rule}: {message}")
        self.rule = rule
        self.premises = premises


def _cert(label: str, report: CrossingReport) -> str:
    detail = "; ".join(report.checked) if report.checked else "empty scan window"
    return f"{label}: no crossing ({detail})"


def _describe(report: CrossingReport) -> str:
    if report.state is Tri.YES and report.witness is not None:
        w = report.witness
        return (
            f"crossing found: length {w.length} extension on page {format_page(w.page)} "
            f"from {w.source_bidegree} (via {w.via})"
        )
    return "crossing check undecided for " + ", ".join(report.open)


def _chart_diff_holds(chart: Chart, claim: DiffClaim) -> bool:
    if claim.kind != "value":
        return False
    kind, value = chart.differential(claim.bidegree, claim.source, int(claim.r))
    if kind != "value" or value is None or claim.target is None:
        return False
    return chart.B(claim.target_bidegree, claim.r - 1).reduce(claim.target) == value


# ---------------------------------------------------------------------------
# square rule and its presets


def square_rule(
    db: ExtDB,
    f: str,
    p: str,
    q: str,
    g: str,
    ext_f: FextFact,
    ext_p: FextFact,
    ext_g: FextFact,
    k: int | None = None,
) -> RuleApplication:
    """From ``d^f_n(x)=y``, ``d^p_m(x)=z``, ``d^g_l(z)=w`` conclude ``d^q_{m+l-n}(y)=w``.

    The square is ``g∘p = q∘f``.  ``k=None`` selects the preset where the g-extension
    must be crossing-free outright and hypothesis (5) is dropped.
    """
    rule = "square_rule"
    for fact, mid, hyp in ((ext_f, f, "(1)"), (ext_p, p, "(2)"), (ext_g, g, "(4)")):
        if fact.map_id != mid or fact.r != INF:
            raise RuleRefused(rule, hyp, f"expected an E_inf extension of {mid}")
    X = db.chart(db.maps[f].source)
    if ext_f.source_bidegree != ext_p.source_bidegree or not X.B(ext_f.source_bidegree, INF).contains(
        ext_f.x + ext_p.x
    ):
        raise RuleRefused(rule, "(2)", "the f- and p-extensions start from different classes")
    if ext_g.source_bidegree != ext_p.target_bidegree or not ext_p.indeterminacy.contains(ext_g.x + ext_p.y):
        raise RuleRefused(rule, "(4)", "the g-extension does not start from the target of the p-extension")
    n, m, l = ext_f.n, ext_p.n, ext_g.n
    s = ext_f.source_bidegree.s
    certs: list[str] = []
    cf = db.classical_crossing(f, ext_f.source_bidegree, n, s + 1)
    if cf.state is Tri.NO:
        certs.append(_cert("(3) f-extension", cf))
    else:
        cp = db.classical_crossing(p, ext_p.source_bidegree, m, s + 1)
        if cp.state is not Tri.NO:
            raise RuleRefused(rule, "(3)", f"f-extension: {_describe(cf)}; p-extension: {_describe(cp)}")
        certs.append(_cert("(3) p-extension", cp))
    z_s = ext_g.source_bidegree.s
    if k is None:
        cg = db.classical_crossing(g, ext_g.source_bidegree, l, z_s + 1)
        if cg.state is not Tri.NO:
            raise RuleRefused(rule, "(4)", _describe(cg))
        certs.append(_cert("(4) g-extension", cg))
    else:
        if not 0 < k <= m + l - n:
            raise RuleRefused(rule, "(k)", f"need 0 < k <= m + l - n = {m + l - n}")
        cg = db.classical_crossing(g, ext_g.source_bidegree, l, s + n + k)
        if cg.state is not Tri.NO:
            raise RuleRefused(rule, "(4)", _describe(cg))
        certs.append(_cert(f"(4) g-extension above filtration {s + n + k}", cg))
        qmap = db.maps[q]
        yb = ext_f.target_bidegree
        if k - 1 >= qmap.af:
            image = db.apply(q, yb, ext_f.y) if k - 1 == qmap.af else None
            zero = False
            if image is not None:
                W = db.chart(qmap.target)
                zero = W.B(qmap.target_bidegree(yb, k - 1), INF).contains(image)
            if not zero:
                for fx in db.fexts:
                    if (fx.map_id == q and fx.r == INF and fx.n == k - 1 and fx.source_bidegree == yb
                            and fx.x == ext_f.y and not fx.y):
                        zero = True
                        break
            if not zero:
                raise RuleRefused(rule, "(5)", f"d^{q}_{k - 1}(y) = 0 is not established")
        cq = db.classical_crossing(q, yb, k - 1, yb.s + 1)
        if cq.state is not Tri.NO:
            raise RuleRefused(rule, "(5)", _describe(cq))
        certs.append(_cert(f"(5) d^{q}_{k - 1}(y) = 0", cq))
    try:
        conclusion = db.make_fext(q, INF, m + l - n, ext_f.target_bidegree, ext_f.y, ext_g.y, origin=rule)
    except ExtensionError as exc:
        raise RuleContradiction(rule, str(exc), (ext_f, ext_p, ext_g)) from None
    params = (("n", str(n)), ("m", str(m)), ("l", str(l)), ("k", "none" if k is None else str(k)))
    return RuleApplication(rule, (ext_f, ext_p, ext_g), tuple(certs), (conclusion,), params)


def identity_square_preset(db: ExtDB, p: str, ext_p: FextFact, k: int | None = None) -> RuleApplication:
    """The square with ``f`` and ``g`` identities and ``q = p``: re-derives ``d^p_m(x)=z``.

    Mostly a sanity check of the crossing bookkeeping.
    """
    X = db.maps[p].source
    Z = db.maps[p].target
    fid, gid = db.identity(X), db.identity(Z)
    ext_f = db.action_fext(fid, INF, ext_p.source_bidegree, ext_p.x)
    ext_g = db.action_fext(gid, INF, ext_p.target_bidegree, ext_p.y)
    if ext_f is None or ext_g is None:
        raise RuleRefused("square_rule", "(1)", "identity extensions unavailable")
    return square_rule(db, fid, p, p, gid, ext_f, ext_p, ext_g, k)


# ---------------------------------------------------------------------------
# composite and exactness


def composition_rule(db: ExtDB, f: str, g: str, ext: FextFact) -> RuleApplication:
    """If ``g∘f`` is null, every f-extension target is a permanent d^g-cycle."""
    rule = "composition_rule"
    if (f, g) not in db.null_composites:
        raise RuleRefused(rule, "(null composite)", f"{g}∘{f} is not registered as null")
    if ext.map_id != f or ext.r != INF:
        raise RuleRefused(rule, "(1)", "needs an E_inf extension of the first map")
    if not ext.y:
        raise RuleRefused(rule, "(1)", "the extension target is zero; the conclusion is vacuous")
    claim = CycleClaim(g, ext.target_bidegree, ext.y)
    return RuleApplication(rule, (ext,), (), (claim,))


def exactness_rule(db: ExtDB, f: str, g: str, cycle: CycleClaim) -> RuleApplication:
    """A permanent d^g-cycle nonzero in E_inf is hit by some f-extension.

    Lengths whose source bidegree certainly has a zero E_inf are pruned; if none is
    left the rule raises :class:`RuleContradiction`.
    """
    rule = "exactness_rule"
    if (f, g) not in db.exact_pairs:
        raise RuleRefused(rule, "(exactness)", f"the sequence {f}, {g} is not registered exact")
    if cycle.map_id != g:
        raise RuleRefused(rule, "(1)", f"the cycle belongs to {cycle.map_id}, not {g}")
    fmap = db.maps[f]
    X, Y = db.chart(fmap.source), db.chart(fmap.target)
    yb = cycle.bidegree
    if Y.B(yb, INF).contains(cycle.y):
        raise RuleRefused(rule, "(1)", "the class is zero in E_inf")
    lengths = []
    for j in range(fmap.af, yb.s + 1):
        src = fmap.source_bidegree(yb, j)
        if src.t < src.s:
            continue
        if X.dim(src) == 0:
            if X.covered(src):
                continue
            lengths.append(j)
            continue
        lat = X.lattice(src)
        if len(lat.Z(INF).rows) == len(lat.B(INF).rows) and X.covered(src) and X.exact_through(src, INF):
            continue
        lengths.append(j)
    if not lengths:
        raise RuleContradiction(
            rule,
            f"{Y.render(yb, cycle.y)} at {yb} is a permanent d^{g}-cycle but no class of {X.name} "
            f"can hit it under {f}",
            (cycle,),
        )
    return RuleApplication(rule, (cycle,), (), (BoundaryClaim(f, yb, cycle.y, tuple(lengths)),))


def not_killable(chart: Chart, b: Bidegree, y: F2Vector, max_r: int) -> Tri:
    """``YES`` when ``y`` certainly survives every ``d_k`` with ``k <= max_r``."""
    state = chart.killed_by(b, y, max_r)
    if state is Tri.NO:
        return Tri.YES
    if state is Tri.YES:
        return Tri.NO
    return Tri.UNKNOWN


# ---------------------------------------------------------------------------
# generalized Leibniz rule


def generalized_leibniz(
    db: ExtDB, f: str, diff: DiffClaim, ext_n: FextFact, ext_inf: FextFact
) -> RuleApplication:
    """From ``d_r(x)=x_inf``, ``d_m^{f,E_n}(x)=y`` and ``d_l^{f,E_inf}(x_inf)=y_inf``
    conclude ``d_{r+l-m}(y) = y_inf`` in the target chart."""
    rule = "generalized_leibniz"
    fmap = db.maps.get(f)
    if fmap is None:
        raise RuleRefused(rule, "(map)", f"unknown map {f}")
    X, Y = db.chart(fmap.source), db.chart(fmap.target)
    e = fmap.e
    if diff.chart != X.name or diff.kind != "value" or diff.r == INF or diff.target is None:
        raise RuleRefused(rule, "(1)", "needs a finite classical differential in the source chart")
    r = int(diff.r)
    if not _chart_diff_holds(X, diff):
        raise RuleRefused(rule, "(1)", "the differential does not hold in the source chart")
    if ext_n.map_id != f or ext_n.r == INF:
        raise RuleRefused(rule, "(2)", "needs a finite-page extension of the same map")
    n, m = int(ext_n.r), ext_n.n
    if not 2 <= n <= r:
        raise RuleRefused(rule, "(2)", f"page {n} outside 2 <= n <= r = {r}")
    if not e <= m <= n - 2 + e:
        raise RuleRefused(rule, "(2)", f"length {m} outside e(f) <= m <= n - 2 + e(f)")
    if ext_n.source_bidegree != diff.bidegree or ext_n.x != diff.source:
        raise RuleRefused(rule, "(2)", "the extension does not start from the source of the differential")
    if ext_inf.map_id != f or ext_inf.r != INF:
        raise RuleRefused(rule, "(3)", "needs an E_inf extension of the same map")
    xb = diff.target_bidegree
    if ext_inf.source_bidegree != xb or not X.B(xb, r - 1).contains(ext_inf.x + diff.target):
        raise RuleRefused(rule, "(3)", "the E_inf extension does not start from the target of the differential")
    l = ext_inf.n
    if l < e:
        raise RuleRefused(rule, "(3)", f"length {l} below e(f)")
    y, y_inf = ext_n.y, ext_inf.y
    yb, yib = ext_n.target_bidegree, ext_inf.target_bidegree
    if not Y.Z(yb, r - 1 - m + e).contains(y):
        raise RuleRefused(rule, "(2)", f"y is not in Z_{r - 1 - m + e}")
    if not X.Z(xb, INF).contains(ext_inf.x) or not Y.Z(yib, INF).contains(y_inf):
        raise RuleRefused(rule, "(3)", "x_inf and y_inf must be permanent cycles")
    certs: list[str] = []
    c1 = has_crossing_on_page(X, diff.bidegree, r, n - 1)
    if c1.state is Tri.NO:
        certs.append(f"(4) d_{r} has no crossing on the E_{n}-page (scan complete)")
    else:
        c2 = db.fext_has_crossing(ext_n)
        if c2.state is not Tri.NO:
            why1 = "crossing found" if c1.state is Tri.YES else c1.reason
            raise RuleRefused(rule, "(4)", f"differential: {why1}; extension: {_describe(c2)}")
        certs.append(_cert(f"(4) the ({f},E_{n})-extension", c2))
    c3 = db.fext_has_crossing(ext_inf)
    if c3.state is not Tri.NO:
        raise RuleRefused(rule, "(5)", _describe(c3))
    certs.append(_cert(f"(5) the ({f},E_inf)-extension", c3))
    page = r + l - m
    if yib != yb.shifted(page, page - 1):
        raise RuleRefused(rule, "(degrees)", "the two extensions do not land in matching bidegrees")
    conclusion = DiffClaim(Y.name, yb, y, page, y_inf)
    params = (("r", str(r)), ("n", str(n)), ("m", str(m)), ("l", str(l)))
    return RuleApplication(rule, (diff, ext_n, ext_inf), tuple(certs), (conclusion,), params)


# ---------------------------------------------------------------------------
# generalized Mahowald trick


def mahowald_trick(
    db: ExtDB, triangle: str, ext_h: FextFact, diff: DiffClaim, ext_g: FextFact
) -> RuleApplication:
    """For ``X -f-> Y -g-> Z -h-> ΣX``: from ``d_l^{h,E_r'}(xbar)=x``, ``d_r(xbar)=ybar``
    and ``d_m^{g,E_{m1+2}}(y)=ybar`` conclude ``d_n^{f,E_{n+m+1+e(h)}}(x) ≡ y mod B_{r'}``.
    When the chart does not yet know that ``x`` survives long enough, the
    application concludes only that survival; the extension follows once the
    store has absorbed it.
    """
    rule = "mahowald_trick"
    tri = db.triangles.get(triangle)
    if tri is None:
        raise RuleRefused(rule, "(triangle)", f"unknown triangle {triangle}")
    fm, gm, hm = db.maps[tri.f], db.maps[tri.g], db.maps[tri.h]
    if fm.e + gm.e + hm.e != 1:
        raise RuleRefused(rule, "(triangle)", "the e-values of the triangle do not sum to 1")
    X, Y, Z = db.chart(fm.source), db.chart(fm.target), db.chart(gm.target)
    if diff.chart != Z.name or diff.kind != "value" or diff.r == INF or diff.target is None:
        raise RuleRefused(rule, "(2)", "needs a finite classical differential in the cofiber chart")
    if not _chart_diff_holds(Z, diff):
        raise RuleRefused(rule, "(2)", "the differential does not hold in the cofiber chart")
    r = int(diff.r)
    if ext_h.map_id != tri.h:
        raise RuleRefused(rule, "(1)", f"needs an extension of {tri.h}")
    if ext_g.map_id != tri.g:
        raise RuleRefused(rule, "(4)", f"needs an extension of {tri.g}")
    l, m = ext_h.n, ext_g.n
    n = r - m - l
    n1, m1, l1 = n - fm.e, m - gm.e, l - hm.e
    if n1 < 1 or m1 < 0 or l1 < 0:
        raise RuleRefused(rule, "(parameters)", f"need n1 >= 1, m1 >= 0, l1 >= 0; got {n1}, {m1}, {l1}")
    r_prime = n1 + l1 + 1
    if ext_h.r != r_prime:
        raise RuleRefused(rule, "(1)", f"the h-extension must live on page {r_prime}")
    if ext_g.r != m1 + 2:
        raise RuleRefused(rule, "(4)", f"the g-extension must live on page {m1 + 2}")
    if ext_h.source_bidegree != diff.bidegree or ext_h.x != diff.source:
        raise RuleRefused(rule, "(1)", "the h-extension does not start from the source of the differential")
    yb_bar = diff.target_bidegree
    if ext_g.target_bidegree != yb_bar or not Z.B(yb_bar, r - 1).contains(ext_g.y + diff.target):
        raise RuleRefused(rule, "(4)", "the g-extension does not hit the target of the differential")
    x, xb = ext_h.y, ext_h.target_bidegree
    y, yb = ext_g.x, ext_g.source_bidegree
    if not x:
        raise RuleRefused(rule, "(1)", "the h-extension has zero target")
    if fm.target_bidegree(xb, n) != yb:
        raise RuleRefused(rule, "(degrees)", f"{xb} and {yb} are not joined by a length-{n} extension")
    if not X.Z(xb, n1).contains(x):
        raise RuleRefused(rule, "(1)", f"x is not in Z_{n1}")
    if not Y.Z(yb, m1 + 1).contains(y):
        raise RuleRefused(rule, "(4)", f"y is not in Z_{m1 + 1}")
    if not Z.Z(yb_bar, INF).contains(ext_g.y):
        raise RuleRefused(rule, "(2)", "ybar is not a permanent cycle")
    certs: list[str] = []
    c1 = db.fext_has_crossing(ext_h)
    if c1.state is Tri.NO:
        certs.append(_cert(f"(3) the ({tri.h},E_{r_prime})-extension", c1))
    else:
        c2 = has_crossing_on_page(Z, diff.bidegree, r, r_prime - 1)
        if c2.state is not Tri.NO:
            why2 = "crossing found" if c2.state is Tri.YES else c2.reason
            raise RuleRefused(rule, "(3)", f"extension: {_describe(c1)}; differential: {why2}")
        certs.append(f"(3) d_{r} has no crossing on the E_{r_prime}-page (scan complete)")
    page = n + m + 1 + hm.e
    survive = n + m + hm.e
    premises = (ext_h, diff, ext_g)
    params = (("n", str(n)), ("m", str(m)), ("l", str(l)), ("r'", str(r_prime)))
    if not X.Z(xb, survive).contains(x):
        for j in range(2, survive + 1):
            if X.is_determined(xb, x, j) and not X.Z(xb, j).contains(x):
                raise RuleContradiction(rule, f"x must survive to E_{survive + 1} but the chart kills it", premises)
        claim = DiffClaim(X.name, xb, x, survive + 1, None, "survives")
        return RuleApplication(rule, premises, tuple(certs), (claim,), params)
    extra = Y.B(yb, r_prime)
    try:
        conclusion = db.make_fext(tri.f, page, n, xb, x, y, origin=rule, extra_indeterminacy=extra)
    except ExtensionError as exc:
        raise RuleContradiction(rule, str(exc), premises) from None
    return RuleApplication(rule, premises, tuple(certs), (conclusion,), params)


# ---------------------------------------------------------------------------
# naturality and page moves


def naturality_transport(db: ExtDB, map_id: str, diff: DiffClaim) -> RuleApplication:
    """Push ``d_r(x) = y`` forward along a filtration-zero map with a known action."""
    rule = "naturality_transport"
    fmap = db.maps[map_id]
    if fmap.af != 0 or not fmap.has_action:
        raise RuleRefused(rule, "(matrices)", f"{map_id} has no filtration-zero action")
    if diff.chart != fmap.source:
        raise RuleRefused(rule, "(1)", f"the differential lives in {diff.chart}, not {fmap.source}")
    Y = db.chart(fmap.target)
    fx = db.apply(map_id, diff.bidegree, diff.source)
    if fx is None:
        raise RuleRefused(rule, "(matrices)", "the action on the source is not known")
    if not fx:
        raise RuleRefused(rule, "(image)", "the source maps to zero")
    fb = fmap.target_bidegree(diff.bidegree, 0)
    if diff.kind == "permanent":
        conclusion = DiffClaim(Y.name, fb, fx, INF, None, "permanent")
    elif diff.kind == "value":
        assert diff.target is not None
        fy = db.apply(map_id, diff.target_bidegree, diff.target)
        if fy is None:
            raise RuleRefused(rule, "(matrices)", "the action on the target is not known")
        r = int(diff.r)
        tb = fmap.target_bidegree(diff.target_bidegree, 0)
        if not Y.Z(fb, r - 1).contains(fx) or not Y.Z(tb, r - 1).contains(fy):
            raise RuleRefused(rule, "(image)", f"the images do not survive to E_{r} of {Y.name}")
        conclusion = DiffClaim(Y.name, fb, fx, r, fy)
    else:
        raise RuleRefused(rule, "(1)", f"cannot transport a {diff.kind} statement")
    return RuleApplication(rule, (diff,), (), (conclusion,))


def lift_rule(db: ExtDB, fact: FextFact, r_new: Page = INF) -> RuleApplication:
    rule = "lift_fext"
    why = db.lift_obstruction(fact, r_new)
    if why is not None:
        detail = why if isinstance(why, str) else _describe(why)
        raise RuleRefused(rule, "(no crossing)", detail)
    lifted = db.make_fext(fact.map_id, r_new, fact.n, fact.source_bidegree, fact.x, fact.y,
                          origin=rule, extra_indeterminacy=fact.indeterminacy)
    cert = f"no crossing from classes dying between E_{format_page(fact.r)} and E_{format_page(r_new)}"
    return RuleApplication(rule, (fact,), (cert,), (lifted,), (("to", format_page(r_new)),))


def restrict_rule(db: ExtDB, fact: FextFact, r_new: int) -> RuleApplication:
    rule = "restrict_fext"
    try:
        out = db.make_fext(fact.map_id, r_new, fact.n, fact.source_bidegree, fact.x, fact.y,
                           origin=rule, extra_indeterminacy=fact.indeterminacy)
    except ExtensionError as exc:
        raise RuleRefused(rule, "(window)", str(exc)) from None
    if r_new > fact.r:
        raise RuleRefused(rule, "(window)", "restriction only goes to earlier pages")
    return RuleApplication(rule, (fact,), (), (out,), (("to", str(r_new)),))
