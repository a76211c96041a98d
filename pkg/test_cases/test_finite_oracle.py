import unittest

import numpy as np

from finite_oracle import exact_wiener, oracle_cross_check
from fourier_modules import finite_dft
from group_modules import GroupContext
from measure_modules import make_measure
from utils import UnsupportedContextError


class TestExactWiener(unittest.TestCase):

    def test_delta_at_identity(self):
        mu = make_measure(GroupContext.finite([4]), [([0], 1.0)])
        self.assertAlmostEqual(exact_wiener(mu, [0]), 1.0, places=15)
        self.assertAlmostEqual(exact_wiener(mu, [1]), 0.0, places=15)

    def test_random_measures_with_shared_table(self):
        rng = np.random.default_rng(42)
        ctx = GroupContext.finite([12, 5])
        for _ in range(10):
            positions = np.stack([rng.integers(0, 12, 8), rng.integers(0, 5, 8)], axis=1)
            mu = make_measure(ctx, [(p, complex(*rng.standard_normal(2))) for p in positions])
            table = finite_dft(mu)
            expected = {a.position: a.weight for a in mu.atoms}
            for x in ctx.all_points():
                self.assertLess(abs(exact_wiener(mu, x, table) - expected.get(tuple(x), 0.0)), 1e-12)

    def test_finite_groups_only(self):
        with self.assertRaises(UnsupportedContextError):
            exact_wiener(make_measure(GroupContext.torus(1), [([0.0], 1.0)]), [0.0])


class TestCrossCheck(unittest.TestCase):

    def test_full_dual_is_exact(self):
        mu = make_measure(GroupContext.finite([9]), [([0], 1.0)])
        report = oracle_cross_check(mu, [0])
        self.assertLess(report.final_error, 1e-14)
        self.assertEqual(report.sizes[-1], 9)
        self.assertTrue(np.all(np.diff(report.sizes) > 0))

    def test_partial_blocks_stay_within_total_variation(self):
        mu = make_measure(GroupContext.finite([16]), [([3], 0.75), ([11], -0.5j)])
        report = oracle_cross_check(mu, [3])
        self.assertEqual(report.sizes[7], 8)
        self.assertTrue(report.within_tv_bound)
        self.assertAlmostEqual(report.tv_bound, 1.25)
        self.assertAlmostEqual(report.exact, 0.75, places=12)
        self.assertLess(report.final_error, 1e-12)


if __name__ == "__main__":
    unittest.main()
