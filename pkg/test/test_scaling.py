import sys
sys.path.insert(1, '..')

import unittest
import numpy as np

from critmetro.metrology import metro_point
from critmetro.models import ModelSpec
from critmetro.scaling import (FitModel, drop_rate, first_order_prediction, fit_exponential,
                               fit_linear, fit_parabola, fit_power_law, gap_scaling,
                               golden_section_max, level_slopes, locate_critical_point,
                               locate_maximum, qfim_first_order_scaling, scaling_report)
from critmetro.stencils import ParameterStencil


class TestConvergenceOrder(unittest.TestCase):

    def order(self, acc, scheme='center'):
        steps = 10 ** np.linspace(-1.3, -0.5, 8)
        errors = []
        for h in steps:
            stencil = ParameterStencil(1, h, acc, scheme)
            errors.append(abs(stencil(lambda t: np.sin(1. + t)) - np.cos(1.)))
        return fit_power_law(steps, errors)['m']

    def test_center_acc2(self):
        self.assertAlmostEqual(2., self.order(2), delta=0.3)

    def test_center_acc4(self):
        self.assertAlmostEqual(4., self.order(4), delta=0.3)

    def test_center_acc6(self):
        self.assertAlmostEqual(6., self.order(6), delta=0.3)

    def test_forward_acc2(self):
        self.assertAlmostEqual(2., self.order(2, 'forward'), delta=0.3)


class TestFits(unittest.TestCase):

    def setUp(self):
        self.x = np.array([4., 6., 8., 10., 12.])

    def test_power_law(self):
        fit = fit_power_law(self.x, 3 * self.x ** 1.5)
        self.assertAlmostEqual(1.5, fit['m'])
        self.assertAlmostEqual(np.log10(3), fit['a'])
        self.assertAlmostEqual(1., fit.r2)
        self.assertAlmostEqual(0., fit.rss)
        np.testing.assert_allclose(3 * self.x ** 1.5, fit.predict(self.x))

    def test_exponential(self):
        fit = fit_exponential(self.x, 5 * np.exp(0.5 * self.x))
        self.assertAlmostEqual(0.5, fit['rate'])
        self.assertAlmostEqual(5., fit['A'])
        self.assertIs(FitModel.EXPONENTIAL, fit.model)

    def test_linear_and_parabola(self):
        fit = fit_linear(self.x, 2 * self.x - 1)
        self.assertAlmostEqual(2., fit['slope'])
        self.assertAlmostEqual(-1., fit['intercept'])
        fit = fit_parabola(self.x, self.x ** 2)
        self.assertAlmostEqual(1., fit['c2'])
        self.assertAlmostEqual(0., fit['c1'])
        self.assertAlmostEqual(0., fit['c0'])

    def test_invalid_data(self):
        with self.assertRaises(ValueError):
            fit_power_law(self.x, -self.x)
        with self.assertRaises(ValueError):
            fit_exponential([1., 2.], [1., 2.])
        with self.assertRaises(ValueError):
            fit_linear(self.x, np.ones(4))
        with self.assertRaises(ValueError):
            fit_linear(self.x, [1., 2., np.nan, 4., 5.])

    def test_report_prefers_exponential_for_exponential_gaps(self):
        sizes = [4, 6, 8, 10, 12]
        report = scaling_report('gap', sizes, [2. ** -n for n in sizes])
        self.assertEqual('exponential', report.preferred)
        self.assertAlmostEqual(-np.log(2), report.exponential['rate'])
        self.assertGreater(report.score, 1.)
        self.assertEqual('gap', report.as_dict()['quantity'])

    def test_report_prefers_power_law(self):
        sizes = [4, 6, 8, 10, 12]
        report = scaling_report('F_xx', sizes, [0.3 * n ** 2 for n in sizes])
        self.assertEqual('power', report.preferred)
        self.assertAlmostEqual(2., report.power['m'])

    def test_report_needs_increasing_sizes(self):
        with self.assertRaises(ValueError):
            scaling_report('gap', [4, 8, 6], [1., 2., 3.])


class TestMaxima(unittest.TestCase):

    def test_golden_section(self):
        x, fx = golden_section_max(lambda t: -(t - 0.7) ** 2, 0., 2., tol=1e-6)
        self.assertAlmostEqual(0.7, x, delta=1e-6)
        self.assertAlmostEqual(0., fx)

    def test_locate_maximum(self):
        result = locate_maximum(lambda t: -(t - 0.7) ** 2, np.linspace(0, 2, 11), tol=1e-6)
        self.assertAlmostEqual(0.7, result.x, delta=1e-6)
        self.assertFalse(result.on_boundary)
        self.assertEqual(11, len(result.profile))

    def test_maximum_on_boundary(self):
        result = locate_maximum(lambda t: t, np.linspace(0, 1, 6))
        self.assertTrue(result.on_boundary)
        self.assertEqual(1., result.x)

    def test_too_few_grid_points(self):
        with self.assertRaises(ValueError):
            locate_maximum(lambda t: t, [0., 1., 2.])

    def test_transverse_ising_critical_point(self):
        result = locate_critical_point(ModelSpec('ferro', 6), 'hx', np.linspace(0.4, 1.6, 7),
                                       axis='x', xtol=1e-2)
        self.assertFalse(result.on_boundary)
        self.assertGreater(result.x, 0.5)
        self.assertLess(result.x, 1.2)

    def test_search_tolerance_separate_from_solver_tolerance(self):
        result = locate_critical_point(ModelSpec('ferro', 5), 'hx', np.linspace(0.4, 1.6, 7),
                                       axis='x', xtol=5e-2, tol=1e-10, solver='dense')
        self.assertFalse(result.on_boundary)
        self.assertGreater(result.x, 0.5)
        self.assertLess(result.x, 1.3)


class TestDropRate(unittest.TestCase):

    def test_step_is_resolution_limited(self):
        grid = np.linspace(-1, 1, 21)
        values = (np.abs(grid) > 1e-9).astype(float)
        drop = drop_rate(grid, values, 0.)
        self.assertTrue(drop.resolution_limited)
        self.assertAlmostEqual(0.05, drop.width)
        self.assertAlmostEqual(20., drop.rate)

    def test_smooth_dip(self):
        grid = np.linspace(-1, 1, 201)
        values = 1 - np.exp(-grid ** 2 / (2 * 0.3 ** 2))
        drop = drop_rate(grid, values, 0.)
        self.assertFalse(drop.resolution_limited)
        expected = 0.3 * np.sqrt(-2 * np.log(1 - values.max() / 2))
        self.assertAlmostEqual(expected, drop.width, delta=1e-4)

    def test_center_outside_sweep(self):
        with self.assertRaises(ValueError):
            drop_rate(np.linspace(0, 1, 5), np.ones(5), 2.)

    def test_first_order_drop_sharpens_exponentially(self):
        grid = np.concatenate([[0.], np.geomspace(1e-7, 1e-1, 25)])
        sizes = [5, 6, 7]
        rates = []
        for n in sizes:
            values = [metro_point(ModelSpec('ferro', n, hx=0.3, hz=hz), 'xy', solver='dense').R('x', 'y')
                      for hz in grid]
            drop = drop_rate(grid, values, 0.)
            self.assertFalse(drop.resolution_limited)
            rates.append(drop.rate)
        report = scaling_report('drop_rate', sizes, rates)
        self.assertEqual('exponential', report.preferred)
        self.assertGreater(report.exponential.r2, 0.98)
        self.assertGreater(report.exponential['rate'], 0.)


class TestGaps(unittest.TestCase):

    def test_ordered_gap_closes_exponentially(self):
        report = gap_scaling(ModelSpec('ferro', 4, hx=0.5), [4, 6, 8, 10], solver='dense')
        self.assertEqual('exponential', report.preferred)
        self.assertLess(report.exponential['rate'], 0.)
        self.assertEqual([], report.extras['floored'])

    def test_critical_gap_closes_as_power_law(self):
        report = gap_scaling(ModelSpec('ferro', 6, hx=1.), [6, 8, 10], solver='dense')
        self.assertEqual('power', report.preferred)
        self.assertAlmostEqual(-1., report.power['m'], delta=0.1)
        self.assertGreater(report.power.r2, 0.98)

    def test_first_order_fisher_follows_gap(self):
        report = qfim_first_order_scaling(ModelSpec('ferro', 4, hx=0.5), [4, 5, 6], solver='dense')
        self.assertEqual('F_zz', report.quantity)
        ratio = np.array(report.extras['ratio'])
        self.assertTrue(np.all(ratio > 0.5) and np.all(ratio < 2.), ratio)
        self.assertTrue(np.all(np.diff(report.values) > 0), report.values)
        self.assertTrue(np.all(np.diff(report.extras['gap']) < 0))

    def test_floor(self):
        report = gap_scaling(ModelSpec('ferro', 3, hx=0.2), [3, 4, 8], gap_floor=1e-4, solver='dense')
        self.assertEqual([8], report.extras['floored'])
        self.assertEqual(1e-4, report.values[-1])

    def test_too_few_sizes(self):
        with self.assertRaises(ValueError):
            gap_scaling(ModelSpec('ferro', 4), [4, 6])

    def test_level_slopes_on_first_order_line(self):
        n = 6
        gap, slopes = level_slopes(ModelSpec('ferro', n, hx=0.3), 'xz', solver='dense')
        self.assertGreater(gap, 0.)
        self.assertGreater(slopes['z'], 10.)
        self.assertLessEqual(slopes['z'], 2 * n + 1e-9)
        self.assertLess(slopes['x'], 1.)

    def test_first_order_prediction(self):
        np.testing.assert_allclose([300., 80000.], first_order_prediction([0.1, 0.01], [1, 2], [3, 4]))


if __name__ == '__main__':
    unittest.main()
