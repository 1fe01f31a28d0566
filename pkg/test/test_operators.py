import unittest
from functools import reduce

import numpy as np

from critmetro.operators import SparseOperator, SpinAxis, commutator, pauli_string, pauli_sum
from critmetro.utils import translation_permutation

PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]]),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_string(n, ops):
    # spin i is bit i, i.e. the i-th factor from the right
    factors = [PAULI[ops[site]] if site in ops else np.eye(2) for site in reversed(range(n))]
    return reduce(np.kron, factors)


class TestPauliStrings(unittest.TestCase):

    def test_single_site_matches_kronecker(self):
        n = 3
        for site in range(n):
            for axis in 'xyz':
                with self.subTest(site=site, axis=axis):
                    actual = pauli_string(n, {site: axis}).toarray()
                    np.testing.assert_array_almost_equal(dense_string(n, {site: axis}), actual)

    def test_products_match_kronecker(self):
        n = 4
        for ops in ({0: 'x', 1: 'x'}, {1: 'y', 3: 'y'}, {0: 'z', 2: 'y', 3: 'x'}, {3: 'y', 0: 'z'}):
            with self.subTest(ops=ops):
                np.testing.assert_array_almost_equal(dense_string(n, ops),
                                                     pauli_string(n, ops).toarray())

    def test_axis_enum_accepted(self):
        a = pauli_string(2, {0: SpinAxis.Y}).toarray()
        np.testing.assert_array_equal(dense_string(2, {0: 'y'}), a)

    def test_su2_commutators(self):
        n = 2
        x, y, z = (pauli_string(n, {1: a}) for a in 'xyz')
        np.testing.assert_array_almost_equal(2j * z.toarray(), commutator(x, y).toarray())
        np.testing.assert_array_almost_equal(2j * x.toarray(), commutator(y, z).toarray())
        np.testing.assert_array_almost_equal(2j * y.toarray(), commutator(z, x).toarray())

    def test_different_sites_commute(self):
        a = pauli_string(3, {0: 'x'})
        b = pauli_string(3, {2: 'y'})
        self.assertEqual(0, commutator(a, b).nnz)

    def test_pauli_sum_is_hermitian(self):
        n = 4
        terms = [(-1., {i: 'z', (i + 1) % n: 'z'}) for i in range(n)]
        terms += [(-0.3, {i: 'y'}) for i in range(n)]
        h = pauli_sum(n, terms)
        self.assertTrue(h.is_hermitian())
        dense = sum(c * dense_string(n, ops) for c, ops in terms)
        np.testing.assert_array_almost_equal(dense, h.toarray())

    def test_pauli_sum_merges_duplicates(self):
        h = pauli_sum(2, [(1., {0: 'z'}), (-1., {0: 'z'}), (0.5, {1: 'x'})])
        self.assertEqual(4, h.nnz)

    def test_site_out_of_range(self):
        with self.assertRaises(ValueError):
            pauli_string(3, {3: 'x'})

    def test_translation_invariance_of_periodic_sum(self):
        n = 5
        h = pauli_sum(n, [(1., {i: 'x', (i + 1) % n: 'y'}) for i in range(n)]).toarray()
        perm = translation_permutation(n)
        p = np.zeros((2 ** n, 2 ** n))
        p[perm, np.arange(2 ** n)] = 1
        np.testing.assert_array_almost_equal(h, p @ h @ p.T)


class TestSparseOperator(unittest.TestCase):

    def test_algebra(self):
        a = pauli_string(2, {0: 'x'})
        b = pauli_string(2, {1: 'z'})
        np.testing.assert_array_almost_equal(a.toarray() + b.toarray(), (a + b).toarray())
        np.testing.assert_array_almost_equal(a.toarray() - b.toarray(), (a - b).toarray())
        np.testing.assert_array_almost_equal(-a.toarray(), (-a).toarray())
        np.testing.assert_array_almost_equal(2.5 * a.toarray(), (2.5 * a).toarray())
        np.testing.assert_array_almost_equal(a.toarray() @ b.toarray(), (a @ b).toarray())
        self.assertIs(a, sum([a]))

    def test_apply_and_expectation(self):
        z = pauli_string(1, {0: 'z'})
        v = np.array([1, 1j]) / np.sqrt(2)
        np.testing.assert_array_almost_equal([1 / np.sqrt(2), -1j / np.sqrt(2)], z(v))
        self.assertAlmostEqual(0., z.expectation(v).real)

    def test_dimension_mismatch(self):
        a = pauli_string(2, {0: 'x'})
        with self.assertRaises(ValueError):
            a.apply(np.ones(8))
        with self.assertRaises(ValueError):
            a + pauli_string(3, {0: 'x'})

    def test_dimension_must_be_power_of_two(self):
        with self.assertRaises(ValueError):
            SparseOperator(np.eye(3))

    def test_non_hermitian_detected(self):
        op = SparseOperator.from_triplets([0], [1], [1.], 2)
        self.assertFalse(op.is_hermitian())
        self.assertTrue((op + SparseOperator.from_triplets([1], [0], [1.], 2)).is_hermitian())

    def test_entries(self):
        op = pauli_string(1, {0: 'y'})
        self.assertEqual([(0, 1, -1j), (1, 0, 1j)], op.entries)

    def test_n_sites(self):
        self.assertEqual(3, SparseOperator.identity(8).n_sites)

    def test_parse_axes(self):
        self.assertEqual((SpinAxis.X, SpinAxis.Z), SpinAxis.parse('zx'))
        self.assertEqual((SpinAxis.Y,), SpinAxis.parse(['hy', 'y']))


if __name__ == '__main__':
    unittest.main()
