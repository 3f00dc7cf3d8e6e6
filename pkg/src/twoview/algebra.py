"""Finite algebraic diagnostics: associativity, the Moufang identity on
possibly-partial composition tables, and the twisted-bracket Jacobiator.

Partial tables model category-like partial composition: an entry may be
undefined, and an identity is only checked on triples whose every needed
product is defined.  Witnesses are the lexicographically smallest
violating triples, so verdicts are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .diffgeo import Tensor2FieldGrid, VectorFieldGrid, lie_bracket
from .errors import DimMismatch, GridTooSmall

UNDEFINED = -1


@dataclass(frozen=True)
class FiniteMagma:
    """n x n composition table; UNDEFINED (-1) marks missing products."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=int)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DimMismatch(f"table must be square, got shape {t.shape}")
        n = t.shape[0]
        bad = (t != UNDEFINED) & ((t < 0) | (t >= n))
        if np.any(bad):
            raise DimMismatch("table entries must be in 0..n-1 or undefined")
        object.__setattr__(self, "table", t)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def is_total(self) -> bool:
        return bool(np.all(self.table != UNDEFINED))

    def op(self, a: int, b: int) -> int:
        """Product a * b, or UNDEFINED."""
        return int(self.table[a, b])

    @classmethod
    def cyclic_group(cls, n: int) -> "FiniteMagma":
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n)


@dataclass(frozen=True)
class Verdict:
    """Outcome of an exhaustive identity scan."""

    holds: bool
    witness: tuple | None = None


def check_associative(m: FiniteMagma) -> Verdict:
    """Exhaustive (a*b)*c = a*(b*c) scan over fully-defined triples.

    Returns the lexicographically first violating triple as witness.
    """
    t = m.table
    n = m.order
    for a, b, c in product(range(n), repeat=3):
        ab = t[a, b]
        bc = t[b, c]
        if ab == UNDEFINED or bc == UNDEFINED:
            continue
        left = t[ab, c]
        right = t[a, bc]
        if left == UNDEFINED or right == UNDEFINED:
            continue
        if left != right:
            return Verdict(False, (a, b, c))
    return Verdict(True)


def check_moufang(m: FiniteMagma, strict: bool = False) -> Verdict:
    """Exhaustive (a*b)*(c*a) = (a*(b*c))*a scan.

    The right-hand side is left-associated; with strict=True the other
    parenthesization a*((b*c)*a) must agree as well.  Triples with any
    undefined intermediate product are skipped.
    """
    t = m.table
    n = m.order
    for a, b, c in product(range(n), repeat=3):
        ab = t[a, b]
        ca = t[c, a]
        bc = t[b, c]
        if ab == UNDEFINED or ca == UNDEFINED or bc == UNDEFINED:
            continue
        lhs = t[ab, ca]
        a_bc = t[a, bc]
        if lhs == UNDEFINED or a_bc == UNDEFINED:
            continue
        rhs = t[a_bc, a]
        if rhs == UNDEFINED:
            continue
        if lhs != rhs:
            return Verdict(False, (a, b, c))
        if strict:
            bc_a = t[bc, a]
            if bc_a != UNDEFINED:
                rhs2 = t[a, bc_a]
                if rhs2 != UNDEFINED and lhs != rhs2:
                    return Verdict(False, (a, b, c))
    return Verdict(True)


# ---------------------------------------------------------------------------
# twisted bracket


@dataclass(frozen=True)
class TwistMap:
    """Bilinear antisymmetric map H^k(a, b) = c^k_ij a^i b^j on R^3."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(3, 3, 3)
        if np.max(np.abs(c + np.swapaxes(c, 1, 2))) > 0.0:
            raise DimMismatch("twist coefficients must be antisymmetric in (i, j)")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, a, b) -> np.ndarray:
        return np.einsum("kij,...i,...j->...k", self.coeffs,
                         np.asarray(a, dtype=float), np.asarray(b, dtype=float))

    @classmethod
    def zero(cls) -> "TwistMap":
        return cls(np.zeros((3, 3, 3)))

    @classmethod
    def from_cross_product(cls, matrix=None) -> "TwistMap":
        """H(a, b) = A (a x b); identity A gives the plain cross product."""
        A = np.eye(3) if matrix is None else np.asarray(matrix, dtype=float)
        eps = np.zeros((3, 3, 3))
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            eps[i, j, k] = 1.0
            eps[i, k, j] = -1.0
        return cls(np.einsum("kl,lij->kij", A, eps))


def twisted_bracket(X: VectorFieldGrid, Y: VectorFieldGrid,
                    H: TwistMap) -> VectorFieldGrid:
    """[X, Y]_H = [X, Y] + H(X, Y), node-wise."""
    b = lie_bracket(X, Y)
    return VectorFieldGrid(b.header, b.samples + H(X.samples, Y.samples))


def jacobiator(X: VectorFieldGrid, Y: VectorFieldGrid, Z: VectorFieldGrid,
               H: TwistMap):
    """Cyclic sum of nested twisted brackets plus its max interior norm.

    Zero (up to discretization) iff the twisted bracket satisfies the
    Jacobi identity; the plain bracket (H = 0) does.
    """
    if any(d < 5 for d in X.header.dims):
        raise GridTooSmall(
            f"jacobiator needs >= 5 nodes per axis, got {X.header.dims}")
    total = np.zeros(X.header.dims + (3,))
    for A, B, C in ((X, Y, Z), (Y, Z, X), (Z, X, Y)):
        inner = twisted_bracket(B, C, H)
        total += twisted_bracket(A, inner, H).samples
    field = Tensor2FieldGrid(X.header, total)
    return field, field.max_interior_norm(depth=2)
