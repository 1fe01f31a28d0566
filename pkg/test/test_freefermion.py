import unittest
from functools import reduce

import numpy as np

from critmetro.freefermion import (allowed_momenta, dispersion, majorana_hamiltonian, pfaffian_parity,
                                   solve_xy, spin_moments, string_correlator, xy_rotation_metrology)
from critmetro.metrology import metro_point, spin_covariance_qfim
from critmetro.models import ModelSpec, build_hamiltonian
from critmetro.utils import basis_indices, popcount

PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]]),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}


def site_pauli(n, axis, site):
    return reduce(np.kron, [PAULI[axis] if i == site else np.eye(2) for i in reversed(range(n))])


def sector_ground(n, gamma, lam, sector):
    """Exact ground state of the XY chain restricted to one parity sector."""
    h = build_hamiltonian(ModelSpec('xy', n, gamma=gamma, lam=lam)).toarray()
    parity = popcount(basis_indices(n)) % 2
    keep = np.flatnonzero(parity == (0 if sector == 'even' else 1))
    e, w = np.linalg.eigh(h[np.ix_(keep, keep)])
    ground = np.zeros(2 ** n, dtype=complex)
    ground[keep] = w[:, 0]
    return e[0], ground


class TestSolveXY(unittest.TestCase):

    def test_energies_match_exact_diagonalization(self):
        for n, gamma, lam in [(8, 0.2, 0.5), (7, 0.6, 1.3), (6, 1., 0.)]:
            for sector in ('even', 'odd'):
                with self.subTest(n=n, gamma=gamma, lam=lam, sector=sector):
                    exact, _ = sector_ground(n, gamma, lam, sector)
                    sol = solve_xy(n, gamma, lam, sector)
                    self.assertAlmostEqual(exact, sol.energy, places=9)
                    self.assertEqual(1 if sector == 'even' else -1, sol.parity)

    def test_classical_limit(self):
        sol = solve_xy(10, 1., 0.)
        self.assertAlmostEqual(-10., sol.energy)
        np.testing.assert_array_almost_equal(2 * np.ones(10), sol.modes)

    def test_polarized(self):
        sol = solve_xy(12, 0.5, 100.)
        self.assertTrue(np.all(sol.magnetization() > 0.999))
        self.assertAlmostEqual(-1200., sol.energy, delta=0.1)

    def test_pure_state(self):
        sol = solve_xy(16, 0.3, 0.9)
        self.assertLess(sol.purity_defect(), 1e-9)
        np.testing.assert_array_almost_equal(sol.majorana_corr, -sol.majorana_corr.T)
        self.assertEqual(1, pfaffian_parity(sol.majorana_corr))

    def test_dispersion_even_chain(self):
        n, gamma, lam = 10, 0.4, 0.7
        sol = solve_xy(n, gamma, lam)
        expected = np.sort(dispersion(allowed_momenta(n), gamma, lam))
        np.testing.assert_array_almost_equal(expected, sol.modes)

    def test_majorana_hamiltonian_antisymmetric(self):
        a = majorana_hamiltonian(6, 0.5, 0.3, 'odd')
        np.testing.assert_array_equal(a, -a.T)
        self.assertEqual((12, 12), a.shape)

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            solve_xy(8, 0., 0.5)
        with self.assertRaises(ValueError):
            solve_xy(8, 0.5, -1.)
        with self.assertRaises(ValueError):
            solve_xy(1, 0.5, 0.5)
        with self.assertRaises(ValueError):
            solve_xy(8, 0.5, 0.5, 'both')


class TestCorrelators(unittest.TestCase):

    def setUp(self):
        self.n, self.gamma, self.lam = 8, 0.2, 0.5
        _, self.ground = sector_ground(self.n, self.gamma, self.lam, 'even')
        self.sol = solve_xy(self.n, self.gamma, self.lam)

    def exact(self, axis, i, j):
        op = site_pauli(self.n, axis, i) @ site_pauli(self.n, axis, j)
        return np.vdot(self.ground, op @ self.ground).real

    def test_magnetization(self):
        sz = [np.vdot(self.ground, site_pauli(self.n, 'z', i) @ self.ground).real
              for i in range(self.n)]
        np.testing.assert_allclose(sz, self.sol.magnetization(), atol=1e-9)

    def test_two_point_functions(self):
        for axis in 'xyz':
            for r in range(1, self.n):
                with self.subTest(axis=axis, r=r):
                    self.assertAlmostEqual(self.exact(axis, 0, r),
                                           string_correlator(self.sol, axis, 0, r), places=8)

    def test_symmetric_in_sites(self):
        self.assertAlmostEqual(string_correlator(self.sol, 'x', 2, 5),
                               string_correlator(self.sol, 'x', 5, 2))
        self.assertEqual(1., string_correlator(self.sol, 'y', 3, 3))

    def test_sites_outside_chain(self):
        with self.assertRaises(ValueError):
            string_correlator(self.sol, 'x', 0, self.n)


class TestRotationTensors(unittest.TestCase):

    def test_moments_match_exact_diagonalization(self):
        n, gamma, lam = 8, 0.2, 0.5
        _, ground = sector_ground(n, gamma, lam, 'even')
        F, U = spin_covariance_qfim(ground, n)
        moments = spin_moments(solve_xy(n, gamma, lam))
        np.testing.assert_allclose(F / 4, moments.cov, atol=1e-8)
        self.assertAlmostEqual(U[0, 1], moments.mean[2], places=8)

    def test_metrology_matches_exact_rotation(self):
        n, gamma, lam = 8, 0.6, 1.3
        exact = metro_point(ModelSpec('xy', n, gamma=gamma, lam=lam), 'xyz', 'exact_rotation')
        free = xy_rotation_metrology(n, gamma, lam)
        np.testing.assert_allclose(exact.F, free.F, atol=1e-8)
        np.testing.assert_allclose(exact.U, free.U, atol=1e-8)
        self.assertAlmostEqual(exact.R('x', 'y'), free.R('x', 'y'), places=6)
        self.assertEqual(('phix', 'phiy', 'phiz'), free.labels)

    def test_large_chain(self):
        t = xy_rotation_metrology(64, 0.5, 1.2, axes='xy')
        self.assertGreater(t.F_entry('x', 'x'), 0.)
        self.assertGreater(t.F_entry('y', 'y'), 0.)
        self.assertLessEqual(t.R('x', 'y'), 1.)
        self.assertEqual(1, t.diagnostics['parity'])


if __name__ == '__main__':
    unittest.main()
