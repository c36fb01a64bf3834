"""Independent reference computations used by the tests.

Nothing here imports the package's linear algebra: vectors are Python ints and
every routine is written the slow, obvious way so that it can serve as an oracle.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass


def span_set(rows: list[int]) -> set[int]:
    """Every element of the span, by enumerating all subsets (small inputs only)."""
    out = {0}
    for r in rows:
        out |= {v ^ r for v in out}
    return out


def rank(rows: list[int]) -> int:
    """Rank by plain Gaussian elimination on the highest set bit."""
    rows = [r for r in rows if r]
    n = 0
    while rows:
        pivot = max(rows)
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if r >> top & 1 else r for r in rows if r != pivot]
        rows = [r for r in rows if r]
        n += 1
    return n


def nullspace(columns: list[int]) -> list[int]:
    """Basis (as masks over the column indices) of ``{c : sum c_j columns[j] = 0}``."""
    pairs = [(col, 1 << j) for j, col in enumerate(columns)]
    basis: list[tuple[int, int]] = []
    kernel = []
    for col, tag in pairs:
        for bcol, btag in basis:
            if col ^ bcol < col:
                col, tag = col ^ bcol, tag ^ btag
        if col:
            basis.append((col, tag))
            basis.sort(reverse=True)
        else:
            kernel.append(tag)
    return kernel


# ---------------------------------------------------------------------------
# filtered chain complexes


@dataclass
class FilteredComplex:
    """Basis elements ``0..n-1`` with filtration ``filt`` and homological degree ``deg``.

    ``d[j]`` is the boundary of element ``j`` as a bitmask over elements.  The
    differential lowers the degree by one and never lowers filtration.
    """

    filt: list[int]
    deg: list[int]
    d: list[int]

    @property
    def size(self) -> int:
        return len(self.filt)

    def check(self) -> None:
        for j in range(self.size):
            for i in bits(self.d[j]):
                assert self.deg[i] == self.deg[j] - 1
                assert self.filt[i] >= self.filt[j]
            dd = 0
            for i in bits(self.d[j]):
                dd ^= self.d[i]
            assert dd == 0


def bits(v: int) -> list[int]:
    return [i for i in range(v.bit_length()) if v >> i & 1]


def random_filtered_complex(rng: random.Random, max_dim: int = 20, length: int = 6, degrees: int = 3) -> FilteredComplex:
    """A random filtered complex: a sum of points and arrows, then a random
    filtration-preserving change of basis."""
    filt: list[int] = []
    deg: list[int] = []
    d: list[int] = []
    total = rng.randint(1, max_dim)
    while len(filt) < total:
        p = rng.randrange(length)
        k = rng.randrange(1, degrees + 1)
        if len(filt) + 2 <= total and rng.random() < 0.6:
            q = rng.randint(p, length - 1)
            tgt = len(filt) + 1
            filt += [p, q]
            deg += [k, k - 1]
            d += [1 << tgt, 0]
        else:
            filt.append(p)
            deg.append(k)
            d.append(0)
    n = len(filt)
    # T e_j = e_j + random combination of same-degree elements of filtration >= filt[j]
    T = []
    for j in range(n):
        col = 1 << j
        for i in range(n):
            if i != j and deg[i] == deg[j] and filt[i] >= filt[j] and (filt[i], i) > (filt[j], j) and rng.random() < 0.3:
                col |= 1 << i
        T.append(col)
    Tinv = _invert(T, n)
    # d' = T d T^{-1}
    new_d = []
    for j in range(n):
        v = _apply(Tinv, 1 << j)
        v = _apply(d, v)
        new_d.append(_apply(T, v))
    out = FilteredComplex(filt, deg, new_d)
    out.check()
    return out


def _apply(cols: list[int], v: int) -> int:
    out = 0
    for j in bits(v):
        out ^= cols[j]
    return out


def _invert(cols: list[int], n: int) -> list[int]:
    """Inverse of an invertible matrix given by columns, by solving T x = e_j column by column."""
    out = []
    for j in range(n):
        target = 1 << j
        # triangular in the (filt, index) order, but solve generally via brute elimination
        aug = [(cols[i], 1 << i) for i in range(n)]
        basis: list[tuple[int, int]] = []
        for col, tag in aug:
            for bcol, btag in basis:
                if col ^ bcol < col:
                    col, tag = col ^ bcol, tag ^ btag
            if col:
                basis.append((col, tag))
                basis.sort(reverse=True)
        v, sol = target, 0
        for bcol, btag in basis:
            if v ^ bcol < v:
                v, sol = v ^ bcol, sol ^ btag
        assert v == 0
        out.append(sol)
    return out


def oracle_pages(C: FilteredComplex, pages: list[int | None]) -> dict[tuple[int, int, int | None], int]:
    """``dim E_r^{p,k}`` from subquotients of the filtration (``None`` is E_inf).

    E_r^p = Z_r^p / (Z_{r-1}^{p+1} + B_{r-1}^p) with Z_r^p = F^p ∩ d^{-1}(F^{p+r})
    and B_{r-1}^p = F^p ∩ d(F^{p-r+1}).
    """
    out = {}
    ps = sorted(set(C.filt))
    ks = sorted(set(C.deg))
    top = max(ps) + 1 if ps else 0

    def elems(p: int, k: int) -> list[int]:
        return [j for j in range(C.size) if C.deg[j] == k and C.filt[j] >= p]

    def Z(p: int, k: int, r: int | None) -> list[int]:
        src = elems(p, k)
        cutoff = None if r is None else p + r
        cols = []
        for j in src:
            dj = C.d[j]
            if cutoff is not None:
                dj = sum(1 << i for i in bits(dj) if C.filt[i] < cutoff)
            cols.append(dj)
        return [_apply([1 << j for j in src], m) for m in nullspace(cols)]

    def Bnd(p: int, k: int, r: int | None) -> list[int]:
        # B_r^p = F^p ∩ d(F^{p-r})
        lo = -10**9 if r is None else p - r
        imgs = [C.d[j] for j in range(C.size) if C.deg[j] == k + 1 and C.filt[j] >= lo]
        low = [sum(1 << i for i in bits(v) if C.filt[i] < p) for v in imgs]
        return [_apply(imgs, m) for m in nullspace(low)]

    for k in ks:
        for p in range(0, top + 1):
            for r in pages:
                z = Z(p, k, r)
                zz = Z(p + 1, k, None if r is None else r - 1)
                b = Bnd(p, k, None if r is None else r - 1)
                out[(p, k, r)] = rank(z) - rank(zz + b)
    return out


def persistence_pairs(C: FilteredComplex) -> tuple[list[tuple[int, int, int]], list[int]]:
    """Pairs ``(source, target, jump)`` and unpaired elements, by column reduction.

    Elements are ordered with higher filtration first; the pivot of a reduced column
    is its entry of lowest filtration, which is the term detecting the differential.
    """
    order = sorted(range(C.size), key=lambda j: (-C.filt[j], j))
    pos = {j: i for i, j in enumerate(order)}
    cols = {j: C.d[j] for j in order}
    pivot_of: dict[int, int] = {}
    pairs = []
    for j in order:
        col = cols[j]
        while col:
            low = max(bits(col), key=lambda i: pos[i])
            if low in pivot_of:
                col ^= cols[pivot_of[low]]
            else:
                pivot_of[low] = j
                cols[j] = col
                pairs.append((j, low, C.filt[low] - C.filt[j]))
                break
        else:
            cols[j] = 0
    paired = {a for a, _, _ in pairs} | {b for _, b, _ in pairs}
    return pairs, [j for j in range(C.size) if j not in paired]


def all_subsets(n: int):
    return itertools.product((0, 1), repeat=n)
