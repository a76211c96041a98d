import math
import unittest

import numpy as np
from scipy import special

from special_functions import (
    MAX_ARGUMENT,
    bessel_j,
    bessel_j_over_power,
    gamma_fn,
    hankel_asymptotic_j,
    log_gamma,
    miller_j,
    power_series_j,
)
from utils import OutOfRangeError


class TestGamma(unittest.TestCase):

    def test_known_values(self):
        self.assertAlmostEqual(gamma_fn(1.0), 1.0, places=14)
        self.assertAlmostEqual(gamma_fn(0.5), math.sqrt(math.pi), places=14)
        self.assertAlmostEqual(gamma_fn(5.0), 24.0, places=11)

    def test_against_scipy(self):
        for x in (0.1, 0.75, 2.5, 7.3, 33.0, 120.5, 169.9):
            with self.subTest(x=x):
                self.assertLess(abs(gamma_fn(x) / special.gamma(x) - 1.0), 1e-12)
                self.assertAlmostEqual(log_gamma(x), special.gammaln(x), places=11)

    def test_range(self):
        for x in (0.0, -1.5, 171.0):
            with self.assertRaises(OutOfRangeError):
                gamma_fn(x)
        with self.assertRaises(ValueError):
            log_gamma(0.0)


class TestBessel(unittest.TestCase):

    def test_closed_forms(self):
        self.assertEqual(bessel_j(0, 0.0), 1.0)
        self.assertEqual(bessel_j(1, 0.0), 0.0)
        self.assertAlmostEqual(bessel_j(0.5, math.pi / 2), 2.0 / math.pi, places=9)
        x = np.linspace(0.1, 60.0, 200)
        np.testing.assert_allclose(bessel_j(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x), atol=1e-10)

    def test_against_scipy_on_every_branch(self):
        x = np.concatenate([np.linspace(0.0, 12.0, 97), np.linspace(12.5, 80.0, 101), [250.0, 1234.5, 9999.0]])
        for nu in (0.0, 0.5, 1.0, 1.5, 2.0, 3.5, 7.0, 12.25, 25.0, 40.0):
            with self.subTest(nu=nu):
                ours = bessel_j(nu, x)
                ref = special.jv(nu, x)
                scale = np.maximum(1.0, np.abs(ref))
                self.assertLess(float(np.max(np.abs(ours - ref) / scale)), 1e-9)

    def test_branches_agree_near_the_switch(self):
        for nu in (0.5, 2.0, 6.0):
            x = np.array([12.0])
            series = power_series_j(nu, x)[0]
            self.assertAlmostEqual(series, special.jv(nu, 12.0), places=11)
            self.assertAlmostEqual(miller_j(nu, 12.0), special.jv(nu, 12.0), places=11)
        values, err = hankel_asymptotic_j(1.0, np.array([500.0]))
        self.assertLess(err[0], 1e-10)
        self.assertAlmostEqual(values[0], special.jv(1.0, 500.0), places=12)

    def test_three_term_recurrence(self):
        x = np.linspace(0.5, 50.0, 400)
        for nu in range(1, 11):
            with self.subTest(nu=nu):
                residual = bessel_j(nu - 1, x) + bessel_j(nu + 1, x) - 2.0 * nu / x * bessel_j(nu, x)
                self.assertLess(float(np.max(np.abs(residual))), 1e-8)
                self.assertLessEqual(float(np.max(np.abs(bessel_j(nu, x)))), 1.0)

    def test_hankel_matches_series_on_the_overlap(self):
        x = np.linspace(10.0, 14.0, 33)
        for nu in (0.0, 0.5, 1.0, 2.0, 3.5):
            with self.subTest(nu=nu):
                values, err = hankel_asymptotic_j(nu, x)
                gap = np.abs(values - power_series_j(nu, x))
                self.assertTrue(np.all(gap <= 10.0 * err + 1e-9))
                self.assertLess(float(np.max(gap)), 1e-6)

    def test_over_power_is_finite_at_zero(self):
        for nu in (0.5, 1.0, 2.5):
            with self.subTest(nu=nu):
                self.assertAlmostEqual(bessel_j_over_power(nu, 0.0), 1.0 / special.gamma(nu + 1.0), places=14)
                x = np.array([0.3, 5.0, 20.0, 300.0])
                np.testing.assert_allclose(bessel_j_over_power(nu, x), special.jv(nu, x) / (x / 2) ** nu,
                                           rtol=1e-8, atol=1e-14)

    def test_scalar_and_array_shapes(self):
        self.assertIsInstance(bessel_j(1.0, 2.0), float)
        self.assertEqual(bessel_j(1.0, np.zeros((2, 3))).shape, (2, 3))

    def test_range(self):
        with self.assertRaises(OutOfRangeError):
            bessel_j(-0.5, 1.0)
        with self.assertRaises(OutOfRangeError):
            bessel_j(41.0, 1.0)
        with self.assertRaises(OutOfRangeError):
            bessel_j(1.0, -1.0)
        with self.assertRaises(OutOfRangeError):
            bessel_j(1.0, 2 * MAX_ARGUMENT)


if __name__ == "__main__":
    unittest.main()
