import unittest

from plastic_lab.app.core.errors import (
    InvalidParameterError,
    NotPlasticError,
    ScalarCanonicalFormError,
    StructurePreconditionError,
)
from plastic_lab.app.geometry.chart import Metric, Tensor11
from plastic_lab.app.geometry.numberfield import ONE, RHO, ZERO, FieldElem
from plastic_lab.app.geometry.plastic import (
    DUAL,
    PLASTIC,
    Matrix2,
    block_diagonal,
    build_diag_structure,
    build_dual_structure,
    build_two_tensor_structure,
    canonical_form,
    canonical_plastic,
    classify_matrix,
    is_plastic,
    make_plastic_2x2,
    make_plastic_from_trace,
    metallic_compat,
    metallic_identity_holds,
    two_tensor_violations,
    unipotent_inverse,
)


class TestMatrix2(unittest.TestCase):
    def test_canonical_is_plastic(self):
        S = canonical_plastic()
        self.assertTrue(is_plastic(S))
        self.assertTrue(is_plastic(-S, DUAL))
        self.assertFalse(is_plastic(S, DUAL))

    def test_make_from_trace(self):
        A = make_plastic_from_trace(0, 1)
        self.assertEqual(A, Matrix2(ZERO, ONE - RHO * RHO, ONE, -RHO))
        self.assertTrue(is_plastic(A))

    def test_make_rejects(self):
        with self.assertRaises(InvalidParameterError):
            make_plastic_2x2(1, 0, 2)
        # 迹必须是 −ρ
        with self.assertRaises(InvalidParameterError):
            make_plastic_2x2(0, 1, 0)

    def test_random_traces(self):
        for a11, a21 in ((RHO, 2), (FieldElem(1, 2, -1), -RHO), (3, FieldElem(0, 0, 1))):
            with self.subTest(a11=a11, a21=a21):
                self.assertTrue(is_plastic(make_plastic_from_trace(a11, a21)))

    def test_parse(self):
        A = Matrix2.parse("0, 1-rho^2; 1, -rho")
        self.assertEqual(A, make_plastic_from_trace(0, 1))
        self.assertEqual(str(A), "0, 1 - rho^2; 1, -rho")


class TestCanonicalForm(unittest.TestCase):
    def test_conjugation(self):
        A = make_plastic_from_trace(0, 1)
        C, B = canonical_form(A)
        self.assertEqual(C, Matrix2(ONE, -RHO, ZERO, ONE))
        self.assertEqual(B, canonical_plastic())
        self.assertTrue(((C @ A) - (B @ C)).is_zero())

    def test_scalar_and_non_plastic(self):
        with self.assertRaises(ScalarCanonicalFormError):
            canonical_form(Matrix2.scalar(RHO))
        with self.assertRaises(NotPlasticError) as ctx:
            canonical_form(Matrix2.identity())
        self.assertEqual(ctx.exception.residual, Matrix2.scalar(-1))

    def test_classify(self):
        result = classify_matrix(make_plastic_from_trace(0, 1))
        self.assertTrue(result["plastic"])
        self.assertEqual(result["branch"], "conjugate")
        self.assertEqual(result["C"], [["1", "-rho"], ["0", "1"]])

        self.assertEqual(classify_matrix(Matrix2.scalar(RHO))["branch"], "scalar")

        result = classify_matrix(Matrix2.identity())
        self.assertFalse(result["plastic"])
        self.assertFalse(result["dual"])
        self.assertEqual(result["branch"], "none")
        self.assertTrue(classify_matrix(-canonical_plastic())["dual"])


class TestMetallic(unittest.TestCase):
    def test_golden_is_incompatible(self):
        result = metallic_compat(1, 1)
        for cubic in ("plastic", "dual"):
            self.assertFalse(result[cubic]["branch1"]["possible"])
            self.assertTrue(result[cubic]["branch2"]["applicable"])
            self.assertFalse(result[cubic]["branch2"]["satisfies"])
        self.assertEqual(result["plastic"]["branch2"]["scalar"], "0")

    def test_integer_reading_rejects(self):
        for p, q in ((0, 1), (1, -2), (1.5, 1), (True, 1)):
            with self.subTest(p=p, q=q):
                with self.assertRaises(InvalidParameterError):
                    metallic_compat(p, q)
        with self.assertRaises(InvalidParameterError):
            metallic_compat(1, 1, reading="complex")

    def test_symbolic_pairs(self):
        # x² + ρx + ρ² − 1 整除 x³ − x − 1
        plastic = metallic_compat(-RHO, ONE - RHO * RHO, reading="symbolic")
        self.assertTrue(plastic["plastic"]["branch1"]["possible"])
        self.assertFalse(plastic["dual"]["branch1"]["possible"])
        dual = metallic_compat(RHO, ONE - RHO * RHO, reading="symbolic")
        self.assertTrue(dual["dual"]["branch1"]["possible"])
        self.assertFalse(dual["plastic"]["branch1"]["possible"])

    def test_identity(self):
        for p, q in ((1, 1), (2, 1), (3, 5), (RHO, FieldElem(1, 0, -1))):
            self.assertTrue(metallic_identity_holds(p, q))


class TestStructures(unittest.TestCase):
    def setUp(self):
        self.S = canonical_plastic().to_tensor()
        # S 在这个度量下 g-对称
        self.g = Metric([[1, 0], [0, ONE - RHO * RHO]])

    def test_block_diagonal_and_unipotent(self):
        D = block_diagonal([canonical_plastic(), RHO])
        self.assertTrue(is_plastic(D))
        U = Tensor11([[1, 0, 0], ["x3", 1, 0], ["x2", 2, 1]])
        self.assertEqual(unipotent_inverse(U) @ U, Tensor11.identity(3))

    def test_diag_structure(self):
        J = build_diag_structure(self.S, Tensor11.scalar(2, RHO))
        self.assertTrue(J.cubic_residual(PLASTIC).is_zero())
        with self.assertRaises(NotPlasticError):
            build_diag_structure(self.S, Tensor11.identity(2))

    def test_two_tensor_standard(self):
        half = (-self.S).scale(ONE / 2)
        J = build_two_tensor_structure(self.g, half, half)
        self.assertTrue(J.cubic_residual(PLASTIC).is_zero())

    def test_two_tensor_dual(self):
        half = self.S.scale(ONE / 2)
        J = build_two_tensor_structure(self.g, half, half, dual=True)
        self.assertTrue(J.cubic_residual(DUAL).is_zero())

    def test_two_tensor_rejected(self):
        with self.assertRaises(StructurePreconditionError) as ctx:
            build_two_tensor_structure(self.g, self.S, Tensor11.zero(2))
        names = [name for name, _ in ctx.exception.violations]
        self.assertEqual(names, ["sum_cubic"])

    def test_two_tensor_needs_g_symmetry(self):
        euclid = Metric([[1, 0], [0, 1]])
        names = [name for name, _ in two_tensor_violations(euclid, -self.S, Tensor11.zero(2))]
        self.assertEqual(names, ["g_symmetric_J1"])

    def test_dual_structure(self):
        J = build_dual_structure(self.g, -self.S)
        self.assertTrue(J.cubic_residual(PLASTIC).is_zero())
        with self.assertRaises(NotPlasticError):
            build_dual_structure(self.g, self.S)


if __name__ == "__main__":
    unittest.main()
