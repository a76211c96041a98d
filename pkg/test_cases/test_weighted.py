import math
import unittest

import numpy as np
from scipy import integrate, special

from group_modules import GroupContext
from measure_modules import BoxAc, CantorComponent, GaussianAc, make_measure, translate
from utils import InvalidComponentError, UnsupportedContextError
from weighted_mean_modules import (
    BochnerRieszKernel,
    BoxKernel,
    GaussianKernel,
    br_mean_rd,
    m_alpha,
    m_alpha_hat,
    scaled_weight_mean,
    scaling_lemma_check,
    tail_sup,
    verify_weight_mean,
    weighted_mean_frequency,
    weighted_mean_records,
)


class TestBochnerRieszProfile(unittest.TestCase):

    def test_profile_values(self):
        self.assertEqual(m_alpha([0.0, 0.0], 1.0), 1.0)
        self.assertEqual(m_alpha([1.2], 1.0), 0.0)
        self.assertAlmostEqual(float(m_alpha([0.6, 0.0], 2.0)), 0.4096)

    def test_transform_at_zero(self):
        self.assertAlmostEqual(m_alpha_hat([0.0, 0.0], 2, 1.0), math.pi / 2, places=14)
        self.assertAlmostEqual(m_alpha_hat([0.0], 1, 1.0), 4.0 / 3.0, places=14)
        for d in (1, 2, 3):
            for alpha in (0.5, 1.0, 2.0):
                with self.subTest(d=d, alpha=alpha):
                    expected = math.pi ** (d / 2) * special.gamma(alpha + 1) / special.gamma(d / 2 + alpha + 1)
                    self.assertAlmostEqual(m_alpha_hat(np.zeros(d), d, alpha), expected, places=10)
                    self.assertAlmostEqual(BochnerRieszKernel(d, alpha).transform_at_zero(), expected, places=10)

    def test_transform_against_polar_quadrature(self):
        # integral over the unit disc of (1 - r^2) exp(2 pi i t.xi) = 2 pi integral (1 - r^2) J0(2 pi |t| r) r dr
        t = 0.3
        value, _ = integrate.quad(lambda r: 2 * np.pi * (1 - r * r) * special.j0(2 * np.pi * t * r) * r, 0.0, 1.0,
                                  epsabs=1e-13)
        self.assertAlmostEqual(m_alpha_hat([t, 0.0], 2, 1.0), value, places=6)

    def test_alpha_must_be_positive(self):
        with self.assertRaises(InvalidComponentError):
            BochnerRieszKernel(2, 0.0)
        with self.assertRaises(InvalidComponentError):
            m_alpha_hat([0.0], 1, -1.0)


class TestScaledMeans(unittest.TestCase):

    def test_gaussian_closed_form(self):
        ctx = GroupContext.euclidean(2)
        x0 = np.array([0.2, -0.1])
        mu = make_measure(ctx, [(x0, 1.0)])
        kernel = GaussianKernel(2)
        for R in (0.5, 2.0, 9.0):
            self.assertAlmostEqual(scaled_weight_mean(mu, kernel, R, x0), 1.0)
            x = np.array([0.25, 0.0])
            expected = math.exp(-math.pi * R * R * float(np.sum((x - x0) ** 2)))
            self.assertAlmostEqual(scaled_weight_mean(mu, kernel, R, x), expected, places=12)

    def test_bochner_riesz_normalization(self):
        ctx = GroupContext.euclidean(2)
        x0 = [1.0, 2.0]
        mu = make_measure(ctx, [(x0, 1.0)])
        for R in (0.3, 5.0, 80.0):
            self.assertAlmostEqual(scaled_weight_mean(mu, BochnerRieszKernel(2, 1.0), R, x0), 1.0, places=12)
        origin = make_measure(ctx, [([0.0, 0.0], 1.0)])
        for alpha in (0.5, 1.0, 2.5):
            self.assertAlmostEqual(br_mean_rd(origin, 7.0, alpha, [0.0, 0.0]), 1.0, places=12)

    def test_br_mean_off_center(self):
        ctx = GroupContext.euclidean(1)
        mu = make_measure(ctx, [([0.4], 1.0)])
        R, alpha = 3.0, 1.0
        expected = m_alpha_hat([R * 0.4], 1, alpha) / m_alpha_hat([0.0], 1, alpha)
        self.assertAlmostEqual(br_mean_rd(mu, R, alpha, [0.0]), expected, places=12)
        self.assertAlmostEqual(br_mean_rd(mu, R, alpha, [0.0], side="frequency", rtol=1e-9), expected, places=7)
        with self.assertRaises(ValueError):
            br_mean_rd(mu, R, alpha, [0.0], side="both")

    def test_box_weight_kernel(self):
        kernel = BoxKernel(2)
        self.assertEqual(kernel.transform_at_zero(), 4.0)
        self.assertAlmostEqual(float(kernel.phi(3.0, [[0.0, 0.0]])[0]), 1.0)
        ctx = GroupContext.euclidean(2)
        mu = make_measure(ctx, [([0.1, 0.3], 2.0)], ac=[GaussianAc((0.0, 0.0), 0.3, 0.5)])
        check = verify_weight_mean(mu, kernel, 4.0, [0.1, 0.3])
        self.assertLess(check.relative, 1e-6)

    def test_linearity_and_translation_covariance(self):
        ctx = GroupContext.euclidean(2)
        a = make_measure(ctx, [([0.2, -0.4], 1.0), ([-1.1, 0.7], 0.3 - 0.6j)])
        b = make_measure(ctx, [([0.5, 0.5], -0.8), ([0.2, -0.4], 0.25j)])
        x = np.array([0.1, -0.2])
        x0 = np.array([1.7, -0.35])
        c = -0.5 + 2j
        for kernel in (GaussianKernel(2), BochnerRieszKernel(2, 1.0), BoxKernel(2)):
            for R in (0.8, 3.0):
                with self.subTest(kernel=kernel.kind, R=R):
                    combined = scaled_weight_mean(a + b.scaled(c), kernel, R, x)
                    expected = scaled_weight_mean(a, kernel, R, x) + c * scaled_weight_mean(b, kernel, R, x)
                    self.assertAlmostEqual(combined, expected, places=12)
                    self.assertAlmostEqual(scaled_weight_mean(translate(a, x0), kernel, R, x + x0),
                                           scaled_weight_mean(a, kernel, R, x), places=12)

    def test_translation_covariance_with_smooth_part(self):
        ctx = GroupContext.euclidean(1)
        mu = make_measure(ctx, [([0.3], 0.5)], ac=[GaussianAc((-0.2,), 0.4, 0.5)])
        x0 = np.array([0.9])
        kernel = GaussianKernel(1)
        for R in (1.0, 4.0):
            with self.subTest(R=R):
                self.assertAlmostEqual(scaled_weight_mean(translate(mu, x0), kernel, R, [0.6]),
                                       scaled_weight_mean(mu, kernel, R, [-0.3]), places=5)

    def test_measure_must_live_on_the_line(self):
        mu = make_measure(GroupContext.torus(1), [([0.0], 1.0)])
        with self.assertRaises(UnsupportedContextError):
            scaled_weight_mean(mu, GaussianKernel(1), 2.0, [0.0])
        plane = make_measure(GroupContext.euclidean(2), [([0.0, 0.0], 1.0)])
        with self.assertRaises(UnsupportedContextError):
            scaled_weight_mean(plane, GaussianKernel(1), 2.0, [0.0, 0.0])
        with self.assertRaises(InvalidComponentError):
            scaled_weight_mean(plane, GaussianKernel(2), 0.0, [0.0, 0.0])


class TestTwoSides(unittest.TestCase):

    def test_random_atomic_measures(self):
        rng = np.random.default_rng(23)
        for trial in range(6):
            d = 1 + trial % 2
            ctx = GroupContext.euclidean(d)
            atoms = [(rng.uniform(-1, 1, d), complex(*rng.standard_normal(2))) for _ in range(3)]
            mu = make_measure(ctx, atoms)
            x = rng.uniform(-1, 1, d)
            R = float(rng.uniform(1.0, 8.0))
            for kernel in (GaussianKernel(d), BochnerRieszKernel(d, 1.0 + trial % 3)):
                with self.subTest(trial=trial, kernel=kernel.kind):
                    self.assertLess(verify_weight_mean(mu, kernel, R, x).relative, 1e-5)

    def test_absolutely_continuous_parts(self):
        ctx = GroupContext.euclidean(1)
        mu = make_measure(ctx, [([0.0], 1.0)], ac=[BoxAc((0.2,), (0.3,), 0.5)])
        value = scaled_weight_mean(mu, GaussianKernel(1), 4.0, [0.0])
        # box density 1/0.6 on [-0.1, 0.5] integrated against exp(-16 pi t^2)
        tail, _ = integrate.quad(lambda t: math.exp(-16 * math.pi * t * t) / 0.6, -0.1, 0.5)
        self.assertAlmostEqual(value, 1.0 + 0.5 * tail, places=5)
        self.assertAlmostEqual(value, weighted_mean_frequency(mu, GaussianKernel(1), 4.0, [0.0]), places=5)

    def test_cantor_part_fades(self):
        ctx = GroupContext.euclidean(1)
        mu = make_measure(ctx, cantor=CantorComponent())
        values = [abs(scaled_weight_mean(mu, GaussianKernel(1), R, [0.0])) for R in (3.0, 30.0, 300.0)]
        self.assertTrue(values[0] > values[1] > values[2])


class TestScalingConditions(unittest.TestCase):

    def test_phi_is_bounded_by_one(self):
        rng = np.random.default_rng(2)
        freqs = rng.uniform(-3, 3, (2000, 2))
        for kernel in (GaussianKernel(2), BoxKernel(2), BochnerRieszKernel(2, 1.5)):
            for R in (1.0, 10.0):
                self.assertLessEqual(scaling_lemma_check(kernel, R, freqs), 1.0 + 1e-12)

    def test_gaussian_tail_decays(self):
        rng = np.random.default_rng(4)
        sups = [tail_sup(GaussianKernel(2), R, 0.5, rng) for R in (1.0, 10.0, 100.0)]
        self.assertLessEqual(sups[1], sups[0] / 10)
        self.assertLessEqual(sups[2], sups[1] / 10 + 1e-300)

    def test_bochner_riesz_tail_decays(self):
        rng = np.random.default_rng(8)
        sups = [tail_sup(BochnerRieszKernel(1, 1.0), R, 0.5, rng) for R in (1.0, 10.0, 100.0)]
        self.assertTrue(sups[0] > sups[1] > sups[2])


class TestRecords(unittest.TestCase):

    def test_records_carry_kernel_tags(self):
        ctx = GroupContext.euclidean(1)
        mu = make_measure(ctx, [([0.0], 0.5)])
        records = weighted_mean_records(mu, BochnerRieszKernel(1, 2.0), [1.0, 10.0], [0.0])
        self.assertEqual([r.method for r in records], ["bochner_riesz_rd"] * 2)
        self.assertEqual(records[0].param, 2.0)
        self.assertAlmostEqual(records[1].abs_error, 0.0, places=12)
        self.assertIsNone(weighted_mean_records(mu, GaussianKernel(1), [1.0], [0.0])[0].param)


if __name__ == "__main__":
    unittest.main()
