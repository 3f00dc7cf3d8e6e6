import numpy as np
import pytest

from twoview.errors import DimMismatch, GridTooSmall
from twoview.algebra import (
    UNDEFINED,
    FiniteMagma,
    TwistMap,
    check_associative,
    check_moufang,
    jacobiator,
    twisted_bracket,
)
from twoview.diffgeo import ConnectionField, GridHeader, VectorFieldGrid, \
    lie_bracket


def exhaustive_assoc_oracle(table):
    """Pure-python triple loop, independent of the library scan."""
    n = len(table)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                ab, bc = table[a][b], table[b][c]
                if UNDEFINED in (ab, bc):
                    continue
                left, right = table[ab][c], table[a][bc]
                if UNDEFINED in (left, right):
                    continue
                if left != right:
                    return (a, b, c)
    return None


def exhaustive_moufang_oracle(table):
    n = len(table)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                ab, ca, bc = table[a][b], table[c][a], table[b][c]
                if UNDEFINED in (ab, ca, bc):
                    continue
                lhs, a_bc = table[ab][ca], table[a][bc]
                if UNDEFINED in (lhs, a_bc):
                    continue
                rhs = table[a_bc][a]
                if rhs == UNDEFINED:
                    continue
                if lhs != rhs:
                    return (a, b, c)
    return None


def s3_table():
    """Composition table of the six permutations of {0,1,2}, built from
    actual function composition rather than any group-theory shortcut."""
    from itertools import permutations
    perms = sorted(permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    table = np.empty((n, n), dtype=int)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            table[i, j] = index[tuple(p[q[k]] for k in range(3))]
    return table


def nonassoc_latin_square():
    """a * b = (2a + b) mod 5: a quasigroup, not associative."""
    idx = np.arange(5)
    return (2 * idx[:, None] + idx[None, :]) % 5


class TestFiniteMagma:
    def test_cyclic_group_table(self):
        m = FiniteMagma.cyclic_group(4)
        assert m.order == 4
        assert m.is_total
        assert m.op(3, 2) == 1

    def test_partial_entries(self):
        m = FiniteMagma([[0, UNDEFINED], [UNDEFINED, 1]])
        assert not m.is_total
        assert m.op(0, 1) == UNDEFINED

    def test_rejects_nonsquare(self):
        with pytest.raises(DimMismatch):
            FiniteMagma([[0, 1, 0], [1, 0, 1]])

    def test_rejects_out_of_range(self):
        with pytest.raises(DimMismatch):
            FiniteMagma([[0, 5], [1, 0]])


class TestAssociativity:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
    def test_cyclic_groups_pass(self, n):
        assert check_associative(FiniteMagma.cyclic_group(n)).holds

    def test_s3_passes(self):
        assert check_associative(FiniteMagma(s3_table())).holds

    def test_latin_square_fails_with_oracle_witness(self):
        table = nonassoc_latin_square()
        verdict = check_associative(FiniteMagma(table))
        assert not verdict.holds
        assert verdict.witness == exhaustive_assoc_oracle(table.tolist())

    def test_relabeling_preserves_associativity(self, rng):
        base = s3_table()
        for _ in range(5):
            sigma = rng.permutation(6)
            inv = np.argsort(sigma)
            relabeled = sigma[base[np.ix_(inv, inv)]]
            assert check_associative(FiniteMagma(relabeled)).holds

    def test_partial_table_skips_missing(self):
        # blank the entry that the violating triple needs: verdict flips
        table = nonassoc_latin_square().tolist()
        a, b, c = exhaustive_assoc_oracle(table)
        full = FiniteMagma(np.array(table))
        assert not check_associative(full).holds
        table[a][b] = UNDEFINED
        partial = FiniteMagma(np.array(table))
        got = check_associative(partial)
        assert got.witness == exhaustive_assoc_oracle(table)


class TestMoufang:
    @pytest.mark.parametrize("n", [2, 4, 5])
    def test_groups_pass(self, n):
        assert check_moufang(FiniteMagma.cyclic_group(n)).holds
        assert check_moufang(FiniteMagma.cyclic_group(n), strict=True).holds

    def test_s3_passes_strict(self):
        assert check_moufang(FiniteMagma(s3_table()), strict=True).holds

    def test_latin_square_fails_with_oracle_witness(self):
        table = nonassoc_latin_square()
        verdict = check_moufang(FiniteMagma(table))
        assert not verdict.holds
        assert verdict.witness == exhaustive_moufang_oracle(table.tolist())

    def test_associative_implies_moufang(self, rng):
        # relabelings of groups stay associative, hence Moufang
        for n in (3, 4, 6):
            base = FiniteMagma.cyclic_group(n).table
            sigma = rng.permutation(n)
            inv = np.argsort(sigma)
            m = FiniteMagma(sigma[base[np.ix_(inv, inv)]])
            assert check_associative(m).holds
            assert check_moufang(m, strict=True).holds

    def test_fully_undefined_vacuous(self):
        m = FiniteMagma(np.full((3, 3), UNDEFINED))
        assert check_associative(m).holds
        assert check_moufang(m).holds


def grid(h=0.1, n=7):
    o = -h * (n - 1) / 2
    return GridHeader((n, n, n), h, (o, o, o))


class TestTwistMap:
    def test_rejects_symmetric_coeffs(self):
        c = np.zeros((3, 3, 3))
        c[0, 1, 1] = 1.0
        with pytest.raises(DimMismatch):
            TwistMap(c)

    def test_zero_twist(self):
        a = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(TwistMap.zero()(a, a), [0, 0, 0])

    def test_cross_product(self, rng):
        H = TwistMap.from_cross_product()
        for _ in range(10):
            a, b = rng.standard_normal(3), rng.standard_normal(3)
            np.testing.assert_allclose(H(a, b), np.cross(a, b), atol=1e-14)

    def test_matrix_twist_oracle(self, rng):
        A = rng.standard_normal((3, 3))
        H = TwistMap.from_cross_product(A)
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        np.testing.assert_allclose(H(a, b), A @ np.cross(a, b), atol=1e-13)

    def test_antisymmetry(self, rng):
        H = TwistMap.from_cross_product(rng.standard_normal((3, 3)))
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        np.testing.assert_allclose(H(a, b), -H(b, a), atol=1e-14)


class TestTwistedBracket:
    def test_zero_twist_is_lie_bracket(self, rng):
        header = grid()
        X = VectorFieldGrid(header, rng.standard_normal(header.dims + (3,)))
        Y = VectorFieldGrid(header, rng.standard_normal(header.dims + (3,)))
        np.testing.assert_array_equal(
            twisted_bracket(X, Y, TwistMap.zero()).samples,
            lie_bracket(X, Y).samples)

    def test_constant_fields_pure_twist(self):
        header = grid()
        X = VectorFieldGrid.constant(header, (1, 0, 0))
        Y = VectorFieldGrid.constant(header, (0, 1, 0))
        out = twisted_bracket(X, Y, TwistMap.from_cross_product())
        np.testing.assert_allclose(
            out.samples, np.broadcast_to([0, 0, 1.0], header.dims + (3,)),
            atol=1e-12)


class TestJacobiator:
    def probes(self, header):
        X = VectorFieldGrid.from_function(
            header, lambda x, y, z: (np.sin(y), np.cos(z), x))
        Y = VectorFieldGrid.from_function(
            header, lambda x, y, z: (z, x * y, np.cos(x)))
        Z = VectorFieldGrid.from_function(
            header, lambda x, y, z: (np.ones_like(x), np.sin(x), y * z))
        return X, Y, Z

    def test_plain_bracket_jacobi(self):
        header = grid(h=0.05, n=9)
        _, jmax = jacobiator(*self.probes(header), TwistMap.zero())
        assert jmax <= 10 * header.spacing ** 2

    def test_cross_product_constants_jacobi(self):
        # a x (b x c) cycled sums to zero; brackets of constants vanish too
        header = grid()
        X = VectorFieldGrid.constant(header, (0.3, -1.0, 0.2))
        Y = VectorFieldGrid.constant(header, (1.1, 0.4, -0.5))
        Z = VectorFieldGrid.constant(header, (-0.7, 0.9, 0.6))
        _, jmax = jacobiator(X, Y, Z, TwistMap.from_cross_product())
        assert jmax <= 1e-12

    def test_matrix_twist_breaks_jacobi(self):
        A = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]])
        header = grid()
        a = np.array([1.0, 0.0, 0.0])
        b = np.array([0.0, 1.0, 0.0])
        c = np.array([0.0, 0.0, 1.0])
        X = VectorFieldGrid.constant(header, a)
        Y = VectorFieldGrid.constant(header, b)
        Z = VectorFieldGrid.constant(header, c)
        field, jmax = jacobiator(X, Y, Z, TwistMap.from_cross_product(A))
        # direct evaluation of the cyclic sum with plain numpy
        expected = np.zeros(3)
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            expected += A @ np.cross(u, A @ np.cross(v, w))
        assert np.linalg.norm(expected) > 0.1
        assert jmax == pytest.approx(np.linalg.norm(expected), abs=1e-12)
        np.testing.assert_allclose(field.values[3, 3, 3], expected,
                                   atol=1e-12)

    def test_grid_too_small(self):
        header = GridHeader((3, 3, 3), 0.1, (0, 0, 0))
        X = VectorFieldGrid.constant(header, (1, 0, 0))
        with pytest.raises(GridTooSmall):
            jacobiator(X, X, X, TwistMap.zero())
