"""Synthetic E_∞-pages of νX/λ^r, the λ^k and ρ maps, δ-differentials and page crossings.

Everything here is a closed-form reading of a classical chart: the tridegree
``(s, t, w)`` group of νX/λ^r is ``Z_{r-t+w} / B_{1+t-w}`` at ``(s, t)``, and the class
``λ^a x`` sits at weight ``t - a``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chart import INF, Bidegree, Chart, DifferentialFact, Page, Tri, Variant, format_page
from .gf2 import F2Subspace, F2Vector, quotient_basis


@dataclass(frozen=True)
class SynDegree:
    s: int
    t: int
    w: int

    @property
    def budget(self) -> int:
        """The λ-exponent ``t - w``."""
        return self.t - self.w


@dataclass(frozen=True)
class SynGroup:
    degree: SynDegree
    r: Page
    Z: F2Subspace
    B: F2Subspace
    basis: tuple[F2Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def trivial(self) -> bool:
        return not self.basis

    def contains(self, v: F2Vector) -> bool:
        return self.Z.contains(v)

    def reduce(self, v: F2Vector) -> F2Vector:
        return self.B.reduce(v)


def _trivial(deg: SynDegree, r: Page, dim: int) -> SynGroup:
    zero = F2Subspace.zero(dim)
    return SynGroup(deg, r, zero, zero, ())


def syn_group(chart: Chart, s: int, t: int, w: int, r: Page = INF) -> SynGroup:
    """``E_∞^{s,t,w}`` of νX/λ^r (``r = INF`` for νX itself)."""
    deg = SynDegree(s, t, w)
    b = Bidegree(s, t)
    dim = chart.dim(b)
    k = deg.budget
    if k < 0 or (r != INF and k >= r):
        return _trivial(deg, r, dim)
    z_index = INF if r == INF else r - k
    lat = chart.lattice(b)
    Z = lat.Z(z_index)
    B = lat.B(1 + k)
    return SynGroup(deg, r, Z, B, tuple(quotient_basis(Z, B)))


@dataclass(frozen=True)
class SynElement:
    """``λ^a · x`` with ``x`` a representative at chart bidegree ``bidegree``."""

    bidegree: Bidegree
    x: F2Vector
    a: int

    @property
    def weight(self) -> int:
        return self.bidegree.t - self.a


def element_group(chart: Chart, elem: SynElement, r: Page) -> SynGroup:
    return syn_group(chart, elem.bidegree.s, elem.bidegree.t, elem.weight, r)


def structure_map(
    chart: Chart, kind: str, elem: SynElement, source_r: Page, target_r: Page, k: int = 1
) -> SynElement | None:
    """Apply ``λ^k`` (``kind="lambda"``) or ``ρ`` (``kind="rho"``).

    ``λ^k`` goes from νX/λ^{source_r} to νX/λ^{source_r + k}; ``ρ`` goes to a smaller
    ``target_r``.  Returns ``None`` for the zero class.
    """
    if elem.a < 0:
        raise ValueError("negative λ-exponent")
    src = element_group(chart, elem, source_r)
    if src.trivial:
        return None
    if not src.contains(elem.x):
        raise ValueError(f"{elem} is not in the source group of νX/λ^{format_page(source_r)}")
    if kind == "lambda":
        expected = INF if source_r == INF else source_r + k
        if target_r != expected:
            raise ValueError(f"λ^{k} maps νX/λ^{format_page(source_r)} to νX/λ^{format_page(expected)}")
        out = SynElement(elem.bidegree, elem.x, elem.a + k)
    elif kind == "rho":
        if target_r == INF or (source_r != INF and target_r > source_r):
            raise ValueError("ρ lowers the λ-power of the quotient")
        out = elem
    else:
        raise ValueError(f"unknown structure map {kind!r}")
    tgt = element_group(chart, out, target_r)
    if tgt.trivial:
        return None
    rep = tgt.reduce(out.x)
    if not rep:
        return None
    return SynElement(out.bidegree, rep, out.a)


TRIVIAL_BY_DEGREE = "trivial-by-degree"


@dataclass(frozen=True)
class DeltaDifferential:
    """``d_r^{δ}(λ^a x) = λ^b y`` for the connecting map of νX/λ^m → νX/λ^n.

    ``indeterminacy`` is ``B_{r-1}`` at the target bidegree; the statement is
    essential when ``y`` is nonzero modulo it.
    """

    n: int
    m: Page
    r: int
    source: SynElement
    target: SynElement
    indeterminacy: F2Subspace

    @property
    def essential(self) -> bool:
        return bool(self.indeterminacy.reduce(self.target.x))


def delta_extension(
    chart: Chart, diff: DifferentialFact, n: int, m: Page, a: int
) -> DeltaDifferential | str:
    """δ-differential induced by the classical ``d_r(x) = y``.

    Returns :data:`TRIVIAL_BY_DEGREE` when ``a`` is outside ``[0, n)`` or the target
    exponent ``a + r - n - 1`` falls outside ``[0, m - n)``.
    """
    if diff.variant is not Variant.VALUE or diff.target is None or diff.r == INF:
        raise ValueError("delta_extension needs a recorded d_r(x) = y with finite r")
    r = int(diff.r)
    b_exp = a + r - n - 1
    if not 0 <= a < n or b_exp < 0 or (m != INF and b_exp >= m - n):
        return TRIVIAL_BY_DEGREE
    if not chart.Z(diff.bidegree, r - 1).contains(diff.source):
        raise ValueError("source does not survive to the recorded page")
    tb = diff.target_bidegree
    assert tb is not None
    source = SynElement(diff.bidegree, diff.source, a)
    target = SynElement(tb, chart.B(tb, r - 1).reduce(diff.target), b_exp)
    return DeltaDifferential(n, m, r, source, target, chart.B(tb, r - 1))


@dataclass(frozen=True)
class CrossingWitness:
    r: int
    source_bidegree: Bidegree
    source: F2Vector
    target: F2Vector


@dataclass(frozen=True)
class CrossingResult:
    state: Tri
    witness: CrossingWitness | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.state is Tri.YES


def has_crossing_on_page(chart: Chart, b: Bidegree, r: int, n: int) -> CrossingResult:
    """Crossings of a ``d_r`` from ``b`` on the E_{n+1}-page.

    Scans for an essential ``d_{r-a-b'}`` from ``(s+a, t+a)`` with ``0 < a <= n-1`` and
    ``0 <= b' <= r-n-1``.  The answer is ``UNKNOWN`` when a scanned bidegree lies outside
    every completeness region or carries undetermined facts on a relevant page.
    """
    open_spots = []
    for a in range(1, n):
        src = b.shifted(a, a)
        for bb in range(0, r - n):
            rr = r - a - bb
            state, wit = chart.has_essential(src, rr)
            if state is Tri.YES:
                assert wit is not None
                return CrossingResult(Tri.YES, CrossingWitness(rr, src, wit[0], wit[1]))
            if state is Tri.UNKNOWN:
                open_spots.append(f"d_{rr} from {src}")
    if open_spots:
        return CrossingResult(Tri.UNKNOWN, reason="undecided: " + ", ".join(open_spots))
    return CrossingResult(Tri.NO)


def has_crossing_for_fact(chart: Chart, diff: DifferentialFact, n: int) -> CrossingResult:
    if diff.r == INF:
        return CrossingResult(Tri.NO)
    return has_crossing_on_page(chart, diff.bidegree, int(diff.r), n)
