import unittest
from fractions import Fraction
from unittest import mock

from plastic_lab.app.core.config import settings
from plastic_lab.app.core.errors import ParseError
from plastic_lab.app.geometry.grammar import parse_constant, parse_matrix, parse_polynomial, parse_rational
from plastic_lab.app.geometry.numberfield import RHO, ZERO, FieldElem
from plastic_lab.app.geometry.symfunc import Polynomial, RationalFn

XY = ["x1", "x2"]


class TestGrammar(unittest.TestCase):
    def test_polynomial_expression(self):
        value = parse_rational("x1^2 + rho*x2", XY)
        expected = RationalFn.from_polynomial(Polynomial(2, {(2, 0): 1, (0, 1): RHO}))
        self.assertEqual(value, expected)

    def test_custom_coordinate_names(self):
        self.assertEqual(parse_rational("u*v", ["u", "v"]), parse_rational("x1*x2", XY))

    def test_rational_expression(self):
        f = parse_rational("1/(x1+2)", ["x1"])
        self.assertEqual(f.evaluate([0]), FieldElem(Fraction(1, 2)))
        self.assertFalse(f.is_polynomial())

    def test_double_star_power(self):
        self.assertEqual(parse_rational("x1**3", ["x1"]), parse_rational("x1*x1*x1", ["x1"]))

    def test_constants(self):
        self.assertEqual(parse_constant("alpha"), -RHO)
        self.assertEqual(parse_constant("1 - rho^2"), FieldElem(1, 0, -1))
        self.assertEqual(parse_constant("rho^3"), RHO + 1)

    def test_error_positions(self):
        with self.assertRaises(ParseError) as ctx:
            parse_rational("x1 + ", ["x1"])
        self.assertEqual(ctx.exception.position, 5)

        with self.assertRaises(ParseError) as ctx:
            parse_rational("y", ["x1"])
        self.assertEqual(ctx.exception.position, 0)
        self.assertIn("unknown name", str(ctx.exception))

    def test_rejects_bad_input(self):
        for text in ("1/0", "x1^-1", "(x1", "x1 $ 2", ""):
            with self.subTest(text=text):
                with self.assertRaises(ParseError):
                    parse_rational(text, ["x1"])

    def test_exponent_cap(self):
        with self.assertRaises(ParseError) as ctx:
            parse_rational("x1^99999999", ["x1"])
        self.assertEqual(ctx.exception.position, 3)
        self.assertIn("exceeds", str(ctx.exception))
        with mock.patch.object(settings, "MAX_EXPONENT", 3):
            self.assertEqual(parse_rational("x1**3", ["x1"]), parse_rational("x1*x1*x1", ["x1"]))
            with self.assertRaises(ParseError):
                parse_rational("x1**4", ["x1"])

    def test_polynomial_only(self):
        self.assertEqual(parse_polynomial("3*x1 - 1", ["x1"]), Polynomial(1, {(1,): 3, (0,): -1}))
        with self.assertRaises(ParseError):
            parse_polynomial("1/x1", ["x1"])

    def test_matrix(self):
        self.assertEqual(parse_matrix("rho,0;0,rho"), [[RHO, ZERO], [ZERO, RHO]])

    def test_matrix_error_points_at_entry(self):
        with self.assertRaises(ParseError) as ctx:
            parse_matrix("1,2;3,x")
        self.assertEqual(ctx.exception.position, 6)

    def test_location_copy(self):
        try:
            parse_rational("x1 +", ["x1"])
        except ParseError as e:
            located = e.at("tensors.J[0][1]")
        self.assertEqual(located.location, "tensors.J[0][1]")
        self.assertTrue(str(located).startswith("tensors.J[0][1]: "))


if __name__ == "__main__":
    unittest.main()
