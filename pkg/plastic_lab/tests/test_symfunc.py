import unittest
from fractions import Fraction

import numpy as np

from plastic_lab.app.core.errors import CoordinateIndexError, DimensionMismatchError, PoleError
from plastic_lab.app.geometry.numberfield import RHO, FieldElem
from plastic_lab.app.geometry.symfunc import Polynomial, RationalFn, poly_partial, rf_equal
from plastic_lab.app.services.generators import random_function, random_polynomial, trial_rng


def rf(text: str, arity: int = 2) -> RationalFn:
    return RationalFn.parse(text, arity=arity)


class TestPolynomial(unittest.TestCase):
    def test_terms_merge_and_cancel(self):
        p = Polynomial(2, {(1, 0): 1}) + Polynomial(2, {(1, 0): -1})
        self.assertTrue(p.is_zero())
        self.assertEqual(p.degree(), -1)

    def test_partial(self):
        p = Polynomial.parse("x1^2*x2 + 3*x2", arity=2)
        self.assertEqual(p.partial(0), Polynomial.parse("2*x1*x2", arity=2))
        self.assertEqual(p.partial(1), Polynomial.parse("x1^2 + 3", arity=2))
        self.assertEqual(p.degree(), 3)

    def test_coordinate_out_of_range(self):
        with self.assertRaises(CoordinateIndexError):
            Polynomial.coordinate(2, 2)

    def test_arity_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            Polynomial.coordinate(2, 0) + Polynomial.coordinate(3, 0)

    def test_to_string(self):
        p = Polynomial(2, {(2, 0): 1, (0, 1): RHO})
        self.assertEqual(p.to_string(), "x1^2 + (rho)*x2")
        self.assertEqual(Polynomial.parse(p.to_string(), arity=2), p)

    def test_evaluate(self):
        p = Polynomial.parse("x1*x2 - rho", arity=2)
        self.assertEqual(p.evaluate([2, Fraction(1, 2)]), FieldElem(1) - RHO)


class TestRationalFn(unittest.TestCase):
    def test_cancellation_against_denominator(self):
        f = rf("1/(x1+1)", 1)
        self.assertEqual(f * rf("x1 + 1", 1), rf("1", 1))

    def test_quotient_rule(self):
        f = rf("1/(x1+1)", 1)
        self.assertEqual(f.partial(0), rf("-1/(x1+1)^2", 1))
        g = rf("x1/(x1*x2)")
        self.assertEqual(g.partial(1), rf("-1/x2^2"))

    def test_equality_without_gcd(self):
        self.assertTrue(rf_equal(rf("x1/(x1*x2)"), rf("1/x2")))
        self.assertNotEqual(rf("x1/x2"), rf("x2/x1"))

    def test_pole(self):
        f = rf("1/(x1+1)", 1)
        with self.assertRaises(PoleError):
            f.evaluate([-1])
        with self.assertRaises(ZeroDivisionError):
            RationalFn.zero(1).reciprocal()

    def test_float_matches_exact(self):
        f = rf("(x1^2 + rho*x2)/(x2 + 3)")
        points = [[Fraction(1, 2), Fraction(-1, 4)], [Fraction(3, 2), Fraction(1)]]
        grid = np.array([[float(c) for c in p] for p in points])
        values = f.evaluate_float(grid)
        for p, v in zip(points, values):
            self.assertAlmostEqual(float(f.evaluate(p)), v, places=12)

    def test_text_parses_back(self):
        for text in ("1/(x1+1)", "(x1 - rho)/(x1*x2 + 2)", "rho^2*x2"):
            f = rf(text)
            self.assertEqual(rf(f.to_string()), f)

    def test_constant_queries(self):
        self.assertTrue(rf("rho + 1").is_constant())
        self.assertEqual(rf("rho + 1").constant_value(), RHO + 1)
        with self.assertRaises(ValueError):
            rf("x1").constant_value()


class TestPartialLeibniz(unittest.TestCase):
    """∂(pq) = p∂q + q∂p，随机多项式对"""

    def test_random_pairs(self):
        for seed in range(5):
            rng = trial_rng(seed)
            p = random_polynomial(rng, 3, 2, rational=False)
            q = random_polynomial(rng, 3, 2, rational=False)
            for i in (1, 2, 3):
                with self.subTest(seed=seed, i=i):
                    self.assertEqual(poly_partial(p * q, i), p * poly_partial(q, i) + q * poly_partial(p, i))

    def test_rational_quotient_rule(self):
        rng = trial_rng(11)
        f = random_function(rng, 2, 2)
        h = random_function(rng, 2, 2, nonconstant=True)
        for i in range(2):
            self.assertEqual((f / h).partial(i), (f.partial(i) * h - f * h.partial(i)) / (h * h))


if __name__ == "__main__":
    unittest.main()
