import math
import unittest

import numpy as np

from quadrature_utils import (
    ball_integral,
    gauss_legendre_panels,
    graded_breaks,
    integrate_interval,
    integrate_until_stable,
    panel_width,
    sphere_directions,
)
from utils import NumericFailure, UnsupportedContextError


class TestPanels(unittest.TestCase):

    def test_polynomials_are_exact(self):
        nodes, weights = gauss_legendre_panels([0.0, 0.5, 2.0], order=4)
        self.assertAlmostEqual(float(weights @ nodes ** 7), 2.0 ** 8 / 8, places=10)

    def test_graded_breaks_reach_the_endpoint(self):
        breaks = graded_breaks(0.0, 1.0, 0.25, grading_levels=10)
        self.assertEqual(breaks[0], 0.0)
        self.assertEqual(breaks[-1], 1.0)
        self.assertTrue(np.all(np.diff(breaks) > 0))
        self.assertLess(breaks[-1] - breaks[-2], 0.25 * 2.0 ** -9)

    def test_endpoint_singularity(self):
        # integral of (1 - r)^0.3 over [0, 1]
        nodes, weights = gauss_legendre_panels(graded_breaks(0.0, 1.0, 0.25, 24))
        self.assertAlmostEqual(float(weights @ (1.0 - nodes) ** 0.3), 1.0 / 1.3, places=8)

    def test_oscillatory_interval(self):
        value = integrate_interval(lambda t: np.exp(2j * np.pi * 40.0 * t), -1.0, 1.0, panel_width(40.0))
        self.assertAlmostEqual(value, 0.0, places=10)
        self.assertEqual(panel_width(0.0), 1.0)
        self.assertEqual(panel_width(1.0, level=2), 0.0625)


class TestBallRules(unittest.TestCase):

    def test_sphere_weights_sum_to_area(self):
        self.assertAlmostEqual(float(sphere_directions(2, 64)[1].sum()), 2 * math.pi, places=12)
        self.assertAlmostEqual(float(sphere_directions(3, 64)[1].sum()), 4 * math.pi, places=12)
        with self.assertRaises(UnsupportedContextError):
            sphere_directions(4, 8)

    def test_ball_volumes(self):
        one = lambda pts: np.ones(len(pts))
        self.assertAlmostEqual(ball_integral(one, 2.0, 1, 0.0), 4.0, places=10)
        self.assertAlmostEqual(ball_integral(one, 2.0, 2, 0.0), 4 * math.pi, places=10)
        self.assertAlmostEqual(ball_integral(one, 2.0, 3, 0.0), 32 * math.pi / 3, places=9)

    def test_gaussian_moment(self):
        value = ball_integral(lambda p: np.exp(-np.sum(p * p, axis=1)), 8.0, 2, 0.0)
        self.assertAlmostEqual(value, math.pi, places=8)


class TestDoublingDriver(unittest.TestCase):

    def test_converges(self):
        self.assertAlmostEqual(integrate_until_stable(lambda level: 1.0 + 2.0 ** (-20 * (level + 1))), 1.0)

    def test_raises_when_unstable(self):
        with self.assertRaises(NumericFailure):
            integrate_until_stable(lambda level: float(level), max_level=3)


if __name__ == "__main__":
    unittest.main()
