import unittest

import numpy as np

from group_modules import GroupContext, char_eval, characters, haar_normalizers
from utils import DimensionMismatchError, UnsupportedContextError


class TestGroupContext(unittest.TestCase):

    def test_torus_points_wrap_into_unit_cube(self):
        ctx = GroupContext.torus(2)
        np.testing.assert_allclose(ctx.point([1.25, -0.25]), [0.25, 0.75])
        self.assertEqual(ctx.point([-1e-18, 0.0])[0], 0.0)

    def test_finite_points_reduce_mod_moduli(self):
        ctx = GroupContext.finite([4, 3])
        np.testing.assert_array_equal(ctx.point([5, -1]), [1, 2])
        self.assertEqual(ctx.order, 12)
        self.assertEqual(ctx.dual_name, "Z_4xZ_3")

    def test_frequency_must_be_integral_on_lattice_duals(self):
        with self.assertRaises(DimensionMismatchError):
            GroupContext.torus(1).frequency([0.5])
        np.testing.assert_allclose(GroupContext.euclidean(1).frequency([0.5]), [0.5])

    def test_dimension_mismatch_is_rejected(self):
        with self.assertRaises(DimensionMismatchError):
            GroupContext.torus(2).point([0.1])
        with self.assertRaises(DimensionMismatchError):
            char_eval(GroupContext.torus(1), [1, 2], [0.0])

    def test_bad_contexts(self):
        with self.assertRaises(UnsupportedContextError):
            GroupContext.finite([1, 3])
        with self.assertRaises(UnsupportedContextError):
            GroupContext.torus(0)
        with self.assertRaises(UnsupportedContextError):
            GroupContext.torus(1).all_points()

    def test_distance_is_periodic(self):
        self.assertAlmostEqual(GroupContext.torus(1).distance([0.95], [0.05]), 0.1)
        self.assertEqual(GroupContext.finite([12]).distance([11], [0]), 1.0)
        self.assertAlmostEqual(GroupContext.euclidean(1).distance([0.95], [0.05]), 0.9)

    def test_spec_round_trip(self):
        for ctx in (GroupContext.torus(3), GroupContext.euclidean(1), GroupContext.finite([6, 4])):
            with self.subTest(ctx=ctx):
                self.assertEqual(GroupContext.from_spec(ctx.to_spec()), ctx)

    def test_all_points_lexicographic(self):
        pts = GroupContext.finite([2, 3]).all_points()
        self.assertEqual(pts.shape, (6, 2))
        np.testing.assert_array_equal(pts[:4], [[0, 0], [0, 1], [0, 2], [1, 0]])


class TestCharacters(unittest.TestCase):

    def test_known_values(self):
        self.assertAlmostEqual(char_eval(GroupContext.torus(1), [3], [1.0 / 6.0]), -1.0)
        self.assertAlmostEqual(char_eval(GroupContext.finite([4]), [1], [1]), 1j)

    def test_identity_gives_one(self):
        for ctx, gamma in ((GroupContext.torus(2), [3, -7]),
                           (GroupContext.euclidean(1), [0.37]),
                           (GroupContext.finite([5, 7]), [2, 6])):
            with self.subTest(ctx=ctx):
                self.assertEqual(char_eval(ctx, gamma, ctx.identity()), 1.0)

    def test_inverse_point_gives_conjugate(self):
        rng = np.random.default_rng(17)
        for ctx, gammas in ((GroupContext.torus(2), rng.integers(-50, 51, size=(25, 2))),
                            (GroupContext.euclidean(3), rng.normal(scale=4.0, size=(25, 3)))):
            for gamma in gammas:
                x = rng.random(ctx.dim) * 3.0 - 1.5
                with self.subTest(ctx=ctx, gamma=gamma):
                    value = char_eval(ctx, gamma, x)
                    self.assertAlmostEqual(abs(value), 1.0, places=13)
                    self.assertAlmostEqual(char_eval(ctx, gamma, -x), value.conjugate(), places=10)

    def test_finite_characters_are_exact_roots_of_unity(self):
        ctx = GroupContext.finite([12, 5])
        chars = characters(ctx, ctx.all_points(), ctx.point([7, 3]))
        np.testing.assert_allclose(np.abs(chars), 1.0, atol=1e-15)
        # phases are multiples of 1/60
        phases = np.angle(chars) / (2 * np.pi) * 60
        np.testing.assert_allclose(phases, np.rint(phases), atol=1e-9)

    def test_characters_are_homomorphisms(self):
        ctx = GroupContext.finite([6, 4])
        x, y = ctx.point([5, 3]), ctx.point([4, 2])
        gammas = ctx.all_points()
        lhs = characters(ctx, gammas, ctx.point(x + y))
        rhs = characters(ctx, gammas, x) * characters(ctx, gammas, y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_haar_normalizers(self):
        self.assertEqual(haar_normalizers(GroupContext.torus(2)), (1.0, 1.0))
        self.assertEqual(haar_normalizers(GroupContext.euclidean(1)), (1.0, 1.0))
        forward, inverse = haar_normalizers(GroupContext.finite([4, 3]))
        self.assertEqual(forward, 1.0)
        self.assertAlmostEqual(inverse, 1.0 / 12.0)


if __name__ == "__main__":
    unittest.main()
