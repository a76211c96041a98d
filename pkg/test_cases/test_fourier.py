import os
import tempfile
import unittest

import numpy as np

from fourier_modules import (
    MeasureSpectrum,
    SpectrumTable,
    TabulatedSpectrum,
    as_spectrum,
    cantor_hat,
    cantor_hat_recursive,
    finite_dft,
    finite_inverse,
    mu_hat,
    mu_hat_many,
    parseval_measure_check,
    separable_terms,
)
from group_modules import GroupContext
from measure_modules import BoxAc, CantorComponent, GaussianAc, LebesgueAc, make_measure
from utils import DimensionMismatchError, MissingCoefficientError, UnsupportedContextError


def random_finite_measure(rng, ctx, n_atoms):
    positions = np.stack([rng.integers(0, m, n_atoms) for m in ctx.moduli], axis=1)
    weights = rng.standard_normal(n_atoms) + 1j * rng.standard_normal(n_atoms)
    return make_measure(ctx, list(zip(positions, weights)))


class TestMuHat(unittest.TestCase):

    def test_atoms(self):
        torus = GroupContext.torus(1)
        delta0 = make_measure(torus, [([0.0], 1.0)])
        for k in (-5, 0, 3, 1000):
            self.assertAlmostEqual(mu_hat(delta0, [k]), 1.0)
        third = make_measure(torus, [([1.0 / 3.0], 1.0)])
        self.assertAlmostEqual(mu_hat(third, [1]), np.exp(-2j * np.pi / 3.0), places=12)

    def test_lebesgue_orthogonality(self):
        mu = make_measure(GroupContext.torus(2), ac=[LebesgueAc()])
        np.testing.assert_allclose(mu_hat_many(mu, [[0, 0], [1, 0], [0, -2], [3, 4]]), [1, 0, 0, 0])

    def test_gaussian_and_box_closed_forms_against_quadrature(self):
        ctx = GroupContext.euclidean(1)
        t = np.linspace(-6.0, 6.0, 240001)
        dt = t[1] - t[0]
        for comp in (GaussianAc((0.3,), 0.4, 0.7), BoxAc((-0.2,), (0.5,), 1.0)):
            mu = make_measure(ctx, ac=[comp])
            density = comp.coefficient * comp.density(ctx, t[:, None])
            for xi in (0.0, 0.4, 1.3):
                with self.subTest(kind=comp.kind, xi=xi):
                    numeric = np.sum(density * np.exp(-2j * np.pi * xi * t)) * dt
                    self.assertAlmostEqual(mu_hat(mu, [xi]), numeric, places=3)

    def test_torus_gaussian_matches_wrapped_density(self):
        ctx = GroupContext.torus(1)
        comp = GaussianAc((0.8,), 0.15)
        mu = make_measure(ctx, ac=[comp])
        t = (np.arange(8000) + 0.5) / 8000
        density = comp.density(ctx, t[:, None])
        for k in (0, 1, 2, 5):
            numeric = np.mean(density * np.exp(-2j * np.pi * k * t))
            self.assertAlmostEqual(mu_hat(mu, [k]), numeric, places=9)

    def test_atomic_bound(self):
        rng = np.random.default_rng(3)
        ctx = GroupContext.torus(2)
        mu = make_measure(ctx, [(rng.random(2), complex(*rng.standard_normal(2))) for _ in range(6)])
        gammas = rng.integers(-50, 50, (500, 2))
        self.assertTrue(np.all(np.abs(mu_hat_many(mu, gammas)) <= mu.total_variation_bound() + 1e-12))

    def test_dimension_mismatch(self):
        mu = make_measure(GroupContext.torus(2), [([0.0, 0.0], 1.0)])
        with self.assertRaises(DimensionMismatchError):
            mu_hat(mu, [1])


class TestCantorTransform(unittest.TestCase):

    def test_value_at_one_against_ifs_level_20(self):
        points, weights = CantorComponent().support_points(20)
        oracle = np.sum(weights * np.exp(-2j * np.pi * points))
        self.assertAlmostEqual(complex(cantor_hat(1.0)), oracle, places=6)
        self.assertAlmostEqual(complex(cantor_hat(1.0)).real, 0.3727, places=4)

    def test_non_decay_along_powers_of_three(self):
        base = abs(complex(cantor_hat(1.0)))
        for k in range(1, 9):
            self.assertAlmostEqual(abs(complex(cantor_hat(3.0 ** k))), base, places=8)

    def test_self_similarity(self):
        for xi in (0.37, 1.0, 2.5, 40.0, -7.3):
            with self.subTest(xi=xi):
                lhs = complex(cantor_hat(xi))
                rhs = np.exp(-2j * np.pi * xi / 3) * np.cos(2 * np.pi * xi / 3) * complex(cantor_hat(xi / 3))
                self.assertAlmostEqual(lhs, rhs, places=10)
                self.assertAlmostEqual(lhs, cantor_hat_recursive(xi), places=10)

    def test_offset_shifts_phase(self):
        ctx = GroupContext.euclidean(1)
        mu = make_measure(ctx, cantor=CantorComponent(2.0, 0.25))
        self.assertAlmostEqual(mu_hat(mu, [1.5]), 2.0 * complex(cantor_hat(1.5)) * np.exp(-2j * np.pi * 1.5 * 0.25),
                               places=12)


class TestSeparableTerms(unittest.TestCase):

    def test_product_of_factors_reproduces_mu_hat(self):
        ctx = GroupContext.euclidean(2)
        mu = make_measure(ctx, [([0.2, -0.4], 1 + 1j)],
                          ac=[GaussianAc((0.1, 0.3), 0.5, 0.4), BoxAc((0.0, 1.0), (0.5, 0.25), -0.2)])
        xi = np.array([0.7, -1.1])
        total = sum(t.coefficient * t.factor(0, xi[0]) * t.factor(1, xi[1]) for t in separable_terms(mu))
        self.assertAlmostEqual(complex(total), mu_hat(mu, xi), places=12)

    def test_lebesgue_has_no_separable_form(self):
        with self.assertRaises(UnsupportedContextError):
            separable_terms(make_measure(GroupContext.torus(1), ac=[LebesgueAc()]))


class TestSpectrumSources(unittest.TestCase):

    def test_as_spectrum(self):
        mu = make_measure(GroupContext.torus(1), [([0.5], 0.5)])
        spectrum = as_spectrum(mu)
        self.assertIsInstance(spectrum, MeasureSpectrum)
        self.assertIs(as_spectrum(spectrum), spectrum)
        self.assertEqual(spectrum.truth([0.5]), 0.5)
        with self.assertRaises(TypeError):
            as_spectrum([1, 2, 3])

    def test_tabulated_spectrum_from_csv(self):
        ctx = GroupContext.torus(1)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "coefficients.csv")
            with open(path, "w") as f:
                f.write("k_1,re,im\n-1,0.5,0\n0,1,0\n1,0.5,0\n")
            spectrum = TabulatedSpectrum.from_csv(path, ctx)
        np.testing.assert_allclose(spectrum.evaluate([[-1], [0], [1]]), [0.5, 1.0, 0.5])
        self.assertTrue(np.isnan(spectrum.truth([0.0]).real))
        with self.assertRaises(MissingCoefficientError):
            spectrum.evaluate([[2]])
        with self.assertRaises(UnsupportedContextError):
            TabulatedSpectrum(GroupContext.euclidean(1), {})


class TestFiniteTransforms(unittest.TestCase):

    def test_known_tables(self):
        ctx = GroupContext.finite([4])
        np.testing.assert_allclose(finite_dft(make_measure(ctx, [([0], 1.0)])).values, np.ones(4))
        uniform = make_measure(ctx, [([x], 0.25) for x in range(4)])
        np.testing.assert_allclose(finite_dft(uniform).values, [1, 0, 0, 0], atol=1e-15)

    def test_constant_table_inverts_to_delta(self):
        ctx = GroupContext.finite([6])
        weights = finite_inverse(SpectrumTable(ctx, np.ones(6)))
        self.assertAlmostEqual(weights[(0,)], 1.0)
        for x in range(1, 6):
            self.assertAlmostEqual(weights[(x,)], 0.0)

    def test_character_column_inverts_to_point_mass(self):
        ctx = GroupContext.finite([6])
        x0 = 4
        column = np.exp(-2j * np.pi * np.arange(6) * x0 / 6)
        weights = finite_inverse(SpectrumTable(ctx, column))
        for x in range(6):
            self.assertAlmostEqual(weights[(x,)], 1.0 if x == x0 else 0.0, places=12)

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        ctx = GroupContext.finite([12, 5])
        mu = random_finite_measure(rng, ctx, 20)
        weights = finite_inverse(finite_dft(mu))
        expected = {a.position: a.weight for a in mu.atoms}
        err = max(abs(weights[x] - expected.get(x, 0.0)) for x in weights)
        self.assertLess(err, 1e-12)

    def test_finite_dft_needs_a_finite_group(self):
        ctx = GroupContext.euclidean(1)
        with self.assertRaises(UnsupportedContextError):
            finite_dft(make_measure(ctx, [([0.0], 1.0)]))

    def test_table_csv_round_trip(self):
        rng = np.random.default_rng(5)
        ctx = GroupContext.finite([3, 4])
        table = finite_dft(random_finite_measure(rng, ctx, 5))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "table.csv")
            table.to_csv(path)
            back = SpectrumTable.from_csv(path, ctx)
        np.testing.assert_array_equal(back.values, table.values)


class TestParseval(unittest.TestCase):

    def test_trivial_cases(self):
        ctx = GroupContext.finite([4])
        lhs, rhs, diff = parseval_measure_check(np.ones(4), make_measure(ctx, [([0], 1.0)]))
        self.assertAlmostEqual(lhs, 1.0)
        self.assertAlmostEqual(rhs, 1.0)
        mu = make_measure(ctx, [([1], 0.5), ([3], 2.0 - 1j)])
        lhs, rhs, diff = parseval_measure_check([1, 0, 0, 0], mu)
        self.assertAlmostEqual(lhs, (2.5 - 1j) / 4)
        self.assertAlmostEqual(rhs, (2.5 - 1j) / 4)

    def test_random_pairs(self):
        rng = np.random.default_rng(17)
        ctx = GroupContext.finite([12, 5])
        for _ in range(20):
            g = rng.standard_normal(60) + 1j * rng.standard_normal(60)
            _, _, diff = parseval_measure_check(g, random_finite_measure(rng, ctx, 7))
            self.assertLess(diff, 1e-12)

    def test_size_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            parseval_measure_check(np.ones(3), make_measure(GroupContext.finite([4]), [([0], 1.0)]))


if __name__ == "__main__":
    unittest.main()
