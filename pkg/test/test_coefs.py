import sys
sys.path.insert(1, '..')

import unittest
from critmetro import coefficients
from critmetro.coefs import calc_weights, scheme_offsets

import numpy as np
from sympy import Rational


class TestCoefs(unittest.TestCase):

    def test_order2_acc2(self):
        c = coefficients(deriv=2, acc=2)

        np.testing.assert_array_almost_equal([1., -2., 1.], c["center"].weights)
        np.testing.assert_array_equal([-1, 0, 1], c["center"].offsets)

        np.testing.assert_array_almost_equal([2, -5, 4, -1], c["forward"].weights)
        np.testing.assert_array_equal([0, 1, 2, 3], c["forward"].offsets)

        np.testing.assert_array_almost_equal([-1, 4, -5, 2], c["backward"].weights)
        np.testing.assert_array_equal([-3, -2, -1, 0], c["backward"].offsets)

    def test_order1_acc2(self):
        c = coefficients(deriv=1, acc=2)

        np.testing.assert_array_almost_equal([-0.5, 0, 0.5], c["center"].weights)
        np.testing.assert_array_almost_equal([-1.5, 2, -0.5], c["forward"].weights)
        np.testing.assert_array_equal([0, 1, 2], c["forward"].offsets)
        np.testing.assert_array_almost_equal([0.5, -2, 1.5], c["backward"].weights)
        np.testing.assert_array_equal([-2, -1, 0], c["backward"].offsets)

    def test_order1_acc4(self):
        c = coefficients(deriv=1, acc=4)

        np.testing.assert_array_almost_equal([1/12, -2/3, 0, 2/3, -1/12], c["center"].weights)
        np.testing.assert_array_almost_equal([-25/12, 4, -3, 4/3, -1/4], c["forward"].weights)
        np.testing.assert_array_equal([0, 1, 2, 3, 4], c["forward"].offsets)

    def test_order2_acc4(self):
        c = coefficients(deriv=2, acc=4)

        np.testing.assert_array_almost_equal([-1/12, 4/3, -2.5, 4/3, -1/12], c["center"].weights)
        np.testing.assert_array_almost_equal([15/4, -77/6, 107/6, -13, 61/12, -5/6], c["forward"].weights)
        np.testing.assert_array_almost_equal([15/4, -77/6, 107/6, -13, 61/12, -5/6][::-1],
                                             c["backward"].weights)

    def test_accuracy_of_schemes(self):
        for deriv in (1, 2):
            for acc in (2, 4, 6):
                for scheme, w in coefficients(deriv, acc=acc).items():
                    with self.subTest(deriv=deriv, acc=acc, scheme=scheme):
                        self.assertGreaterEqual(w.accuracy, acc)

    def test_calc_accuracy_central_deriv2_acc2(self):
        self.assertEqual(2, calc_weights(2, [-1, 0, 1]).accuracy)

    def test_calc_accuracy_left1_right0_deriv1_acc1(self):
        self.assertEqual(1, calc_weights(1, [-1, 0]).accuracy)

    def test_calc_accuracy_from_offsets_symbolic(self):
        self.assertEqual(4, calc_weights(2, [-4, -2, 0, 2, 4], symbolic=True).accuracy)

    def test_calc_weights_from_offsets(self):
        w = coefficients(1, offsets=[-2, 0, 1])
        np.testing.assert_array_almost_equal(w.weights, [-1. / 6, -0.5, 2. / 3])

    def test_symbolic_weights_are_exact(self):
        c = coefficients(deriv=1, acc=4, symbolic=True)
        self.assertEqual([Rational(1, 12), Rational(-2, 3), 0, Rational(2, 3), Rational(-1, 12)],
                         c["center"].weights)

    def test_scheme_offsets(self):
        self.assertEqual([-2, -1, 0, 1, 2], scheme_offsets(2, 4, "center"))
        self.assertEqual([0, 1, 2, 3, 4, 5], scheme_offsets(2, 4, "forward"))
        self.assertEqual([-4, -3, -2, -1, 0], scheme_offsets(1, 4, "backward"))

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            coefficients(1, acc=3)
        with self.assertRaises(ValueError):
            coefficients(-1, acc=2)
        with self.assertRaises(ValueError):
            coefficients(1)
        with self.assertRaises(ValueError):
            coefficients(1, acc=2, offsets=[0, 1, 2])
        with self.assertRaises(ValueError):
            coefficients(3, offsets=[0, 1, 2])
        with self.assertRaises(ValueError):
            scheme_offsets(1, 2, "sideways")


if __name__ == '__main__':
    unittest.main()
