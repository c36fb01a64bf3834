"""Exact linear algebra over F2 with vectors packed into Python ints.

Bit ``i`` of a vector is the coefficient of basis element ``i``.  Subspaces are
stored in reduced row echelon form where the pivot of a row is its lowest set
bit and rows are ordered by pivot, so two subspaces are equal exactly when
their stored rows are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class DimensionError(ValueError):
    """Raised when vectors or subspaces of different ambient dimension meet."""


def _low(bits: int) -> int:
    return bits & -bits


def rref_rows(rows: Iterable[int]) -> tuple[int, ...]:
    """Reduced row echelon form of packed rows, sorted by pivot."""
    table: dict[int, int] = {}
    for v in rows:
        for p, row in table.items():
            if v & p:
                v ^= row
        if not v:
            continue
        p = _low(v)
        for q in list(table):
            if table[q] & p:
                table[q] ^= v
        table[p] = v
    return tuple(table[p] for p in sorted(table))


def reduce_bits(v: int, rows: Sequence[int]) -> int:
    """Canonical representative of ``v`` modulo the span of RREF ``rows``."""
    for row in rows:
        if v & _low(row):
            v ^= row
    return v


def kernel_combinations(images: Sequence[int]) -> list[int]:
    """Bitmasks over ``range(len(images))`` spanning the kernel of ``i -> images[i]``."""
    width = 0
    for img in images:
        width = max(width, img.bit_length())
    aug = [img | (1 << (width + i)) for i, img in enumerate(images)]
    low_mask = (1 << width) - 1
    return [row >> width for row in rref_rows(aug) if not row & low_mask]


@dataclass(frozen=True)
class F2Vector:
    """A vector in F2^dim."""

    bits: int
    dim: int

    def __post_init__(self) -> None:
        if self.dim < 0 or self.bits < 0 or self.bits >> self.dim:
            raise DimensionError(f"bits {self.bits:b} do not fit in dimension {self.dim}")

    @classmethod
    def zero(cls, dim: int) -> F2Vector:
        return cls(0, dim)

    @classmethod
    def unit(cls, index: int, dim: int) -> F2Vector:
        return cls(1 << index, dim)

    @classmethod
    def from_indices(cls, indices: Iterable[int], dim: int) -> F2Vector:
        bits = 0
        for i in indices:
            bits ^= 1 << i
        return cls(bits, dim)

    @classmethod
    def from_string(cls, text: str) -> F2Vector:
        """Parse ``"1010"``; character ``i`` is the coefficient of basis element ``i``."""
        return cls(sum(1 << i for i, c in enumerate(text) if c == "1"), len(text))

    def _check(self, other: F2Vector) -> None:
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: F2Vector) -> F2Vector:
        self._check(other)
        return F2Vector(self.bits ^ other.bits, self.dim)

    __sub__ = __add__

    def __bool__(self) -> bool:
        return self.bits != 0

    def support(self) -> list[int]:
        return [i for i in range(self.dim) if self.bits >> i & 1]

    def __str__(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.dim))


@dataclass(frozen=True)
class F2Subspace:
    """A subspace of F2^ambient_dim held in canonical reduced echelon form."""

    rows: tuple[int, ...]
    ambient_dim: int

    @classmethod
    def zero(cls, dim: int) -> F2Subspace:
        return cls((), dim)

    @classmethod
    def full(cls, dim: int) -> F2Subspace:
        return cls(tuple(1 << i for i in range(dim)), dim)

    @classmethod
    def span(cls, bits: Iterable[int], dim: int) -> F2Subspace:
        return cls(rref_rows(bits), dim)

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> tuple[F2Vector, ...]:
        return tuple(F2Vector(r, self.ambient_dim) for r in self.rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(_low(r).bit_length() - 1 for r in self.rows)

    def _check(self, v: F2Vector) -> None:
        if v.dim != self.ambient_dim:
            raise DimensionError(f"vector of dimension {v.dim} against subspace of F2^{self.ambient_dim}")

    def reduce(self, v: F2Vector) -> F2Vector:
        self._check(v)
        return F2Vector(reduce_bits(v.bits, self.rows), self.ambient_dim)

    def contains(self, v: F2Vector) -> bool:
        return not self.reduce(v)

    def contains_bits(self, bits: int) -> bool:
        return not reduce_bits(bits, self.rows)

    def issubspace(self, other: F2Subspace) -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError("ambient dimension mismatch")
        return all(other.contains_bits(r) for r in self.rows)

    def __le__(self, other: F2Subspace) -> bool:
        return self.issubspace(other)

    def __add__(self, other: F2Subspace) -> F2Subspace:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError("ambient dimension mismatch")
        return F2Subspace(rref_rows(self.rows + other.rows), self.ambient_dim)

    def with_vectors(self, bits: Iterable[int]) -> F2Subspace:
        return F2Subspace(rref_rows(self.rows + tuple(bits)), self.ambient_dim)

    def intersect(self, other: F2Subspace) -> F2Subspace:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError("ambient dimension mismatch")
        n = self.ambient_dim
        # Zassenhaus: rows (u | u) and (w | 0); rows vanishing on the low half span U ∩ W.
        aug = [u | (u << n) for u in self.rows] + list(other.rows)
        low = (1 << n) - 1
        return F2Subspace(rref_rows(r >> n for r in rref_rows(aug) if not r & low), n)


def echelonize(vectors: Sequence[F2Vector], dim: int | None = None) -> F2Subspace:
    """Canonical subspace spanned by ``vectors``.

    ``dim`` is required only when ``vectors`` is empty; otherwise it defaults to the
    common dimension of the inputs.
    """
    dims = {v.dim for v in vectors}
    if dim is not None:
        dims.add(dim)
    if len(dims) > 1:
        raise DimensionError(f"mixed dimensions {sorted(dims)}")
    ambient = dims.pop() if dims else 0
    return F2Subspace(rref_rows(v.bits for v in vectors), ambient)


def reduce(v: F2Vector, sub: F2Subspace) -> F2Vector:
    """Unique representative of ``v + sub`` vanishing on the pivots of ``sub``."""
    return sub.reduce(v)


def quotient_basis(Z: F2Subspace, B: F2Subspace) -> list[F2Vector]:
    """Vectors of ``Z`` whose classes form a basis of ``Z / B``."""
    if Z.ambient_dim != B.ambient_dim:
        raise DimensionError("ambient dimension mismatch")
    if not B <= Z:
        raise ValueError("B is not contained in Z")
    acc = list(B.rows)
    out = []
    for z in Z.rows:
        if reduce_bits(z, rref_rows(acc)):
            out.append(F2Vector(z, Z.ambient_dim))
            acc.append(z)
    return out


def image(images: Sequence[int], domain: F2Subspace | None, dim: int) -> F2Subspace:
    """Span of the images of ``domain``'s basis (or of all of ``images``)."""
    if domain is None:
        return F2Subspace.span(images, dim)
    return F2Subspace.span((apply_bits(images, r) for r in domain.rows), dim)


def apply_bits(images: Sequence[int], v: int) -> int:
    """Apply the linear map ``e_i -> images[i]`` to the packed vector ``v``."""
    out = 0
    i = 0
    while v:
        if v & 1:
            out ^= images[i]
        v >>= 1
        i += 1
    return out


def preimage(images: Sequence[int], target: F2Subspace, domain: F2Subspace) -> F2Subspace:
    """``{v in domain : map(v) in target}`` for the map ``e_i -> images[i]``."""
    basis = domain.rows
    reduced = [reduce_bits(apply_bits(images, b), target.rows) for b in basis]
    out = []
    for combo in kernel_combinations(reduced):
        out.append(apply_bits(basis, combo))
    return F2Subspace.span(out, domain.ambient_dim)


__all__ = [
    "DimensionError",
    "F2Subspace",
    "F2Vector",
    "apply_bits",
    "echelonize",
    "image",
    "kernel_combinations",
    "preimage",
    "quotient_basis",
    "reduce",
    "reduce_bits",
    "rref_rows",
]
