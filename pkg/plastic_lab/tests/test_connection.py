import unittest

from plastic_lab.app.geometry.chart import Chart, Metric, Tensor11, VectorField
from plastic_lab.app.geometry.connection import Connection, is_integrable, lie_bracket, nijenhuis_tm
from plastic_lab.app.geometry.numberfield import RHO
from plastic_lab.app.geometry.plastic import block_diagonal, canonical_plastic, conjugate, unipotent_inverse
from plastic_lab.app.geometry.symfunc import RationalFn
from plastic_lab.app.schemas.scenario import InstanceSpec
from plastic_lab.app.services.generators import generate_instance, random_function, trial_rng


def witness_tensor() -> Tensor11:
    """dim 3：D = diag(S, ρ)，U = I + x₂E₃₁"""
    D = block_diagonal([canonical_plastic(), RHO])
    U = Tensor11([[1, 0, 0], [0, 1, 0], ["x2", 0, 1]])
    return conjugate(D, U, unipotent_inverse(U))


class TestBrackets(unittest.TestCase):
    def test_lie_bracket(self):
        chart = Chart(2)
        X = chart.vector(["0", "x1"])
        self.assertEqual(lie_bracket(X, VectorField.basis(2, 0)), chart.vector(["0", "-1"]))

    def test_constant_tensor_integrable(self):
        self.assertTrue(is_integrable(canonical_plastic().to_tensor()))
        self.assertTrue(is_integrable(block_diagonal([canonical_plastic(), RHO])))

    def test_non_integrable_witness(self):
        J = witness_tensor()
        self.assertFalse(is_integrable(J))
        # N(J)(∂₁,∂₂) = (3ρ² − 1)∂₃
        value = nijenhuis_tm(J, VectorField.basis(3, 0), VectorField.basis(3, 1))
        expected = VectorField([0, 0, RationalFn.constant(3, 3 * RHO * RHO - 1)])
        self.assertEqual(value, expected)


class TestConnection(unittest.TestCase):
    def setUp(self):
        self.g = Metric([["x1 + 2", 0], [0, 1]])
        self.flat = Connection.flat(2)

    def test_flat_is_directional_derivative(self):
        Y = Chart(2).vector(["x1*x2", "1"])
        self.assertEqual(self.flat.covariant(VectorField.basis(2, 1), Y), Chart(2).vector(["x1", "0"]))

    def test_levi_civita(self):
        lc = Connection.levi_civita(self.g)
        self.assertTrue(lc.metric_is_parallel(self.g))
        self.assertFalse(lc.has_torsion())
        self.assertFalse(self.flat.metric_is_parallel(self.g))

    def test_quasi_statistical_without_metric_parallel(self):
        # ∂ᵢgⱼₖ 对 i, j 对称
        self.assertTrue(self.flat.is_quasi_statistical(self.g))
        self.assertFalse(self.flat.metric_is_parallel(self.g))

    def test_generic_connection_not_quasi_statistical(self):
        # Γ²₁₁ = 1：无挠，但 (∇₁g)(∂₂,∂₁) = −1 而 (∇₂g)(∂₁,∂₁) = 0
        nabla = Connection([[[0, 0], [0, 0]], [[1, 0], [0, 0]]])
        self.assertFalse(nabla.is_quasi_statistical(Metric([[1, 0], [0, 1]])))

    def test_parallel_tensor(self):
        S = canonical_plastic().to_tensor()
        self.assertTrue(self.flat.is_parallel(S))
        J = Tensor11([[1, "x1"], [0, 1]])
        self.assertFalse(self.flat.is_parallel(J))

    def test_covariant_form_matches_leibniz(self):
        nabla = Connection([[["x2", 1], [0, 0]], [[0, 0], [2, "x1"]]])
        chart = Chart(2)
        X, Y = chart.vector(["1", "x1"]), chart.vector(["x2", "0"])
        beta = chart.form(["x1", "x2^2"])
        lhs = X.derive(beta(Y))
        rhs = nabla.covariant_form(X, beta)(Y) + beta(nabla.covariant(X, Y))
        self.assertEqual(lhs, rhs)

    def test_torsion(self):
        nabla = Connection([[[0, 1], [0, 0]], [[0, 0], [0, 0]]])
        self.assertTrue(nabla.has_torsion())
        e1, e2 = VectorField.basis(2, 0), VectorField.basis(2, 1)
        self.assertEqual(nabla.torsion(e1, e2), e1)

    def test_torsion_nijenhuis_scalar(self):
        nabla = Connection([[[0, 1], [0, 0]], [[0, "x1"], [0, 0]]])
        J = Tensor11.scalar(2, RHO)
        value = nabla.torsion_nijenhuis(J, VectorField.basis(2, 0), VectorField.basis(2, 1))
        self.assertTrue(value.is_zero())


def random_vector(rng, n: int, degree: int = 1) -> VectorField:
    return VectorField([random_function(rng, n, degree) for _ in range(n)])


class TestTensoriality(unittest.TestCase):
    """
    is_integrable / is_parallel / is_quasi_statistical 只在坐标基上检查，
    这里在随机多项式场上验证对应的函数线性。
    """

    def setUp(self):
        spec = InstanceSpec(dim=2, frame="polynomial", connection="generic")
        self.instances = [generate_instance(spec, seed) for seed in range(3)]

    def test_jacobi_identity(self):
        rng = trial_rng(1)
        for _ in range(3):
            X, Y, Z = (random_vector(rng, 3, 2) for _ in range(3))
            total = (
                lie_bracket(X, lie_bracket(Y, Z))
                + lie_bracket(Y, lie_bracket(Z, X))
                + lie_bracket(Z, lie_bracket(X, Y))
            )
            self.assertTrue(total.is_zero())

    def test_covariant_linear_and_leibniz(self):
        rng = trial_rng(2)
        for inst in self.instances:
            nabla = inst.nabla
            X, Y = random_vector(rng, 2), random_vector(rng, 2)
            f = random_function(rng, 2, 2, nonconstant=True)
            self.assertEqual(nabla.covariant(X.scale(f), Y), nabla.covariant(X, Y).scale(f))
            self.assertEqual(nabla.covariant(X, Y.scale(f)), Y.scale(X.derive(f)) + nabla.covariant(X, Y).scale(f))

    def test_tensor_derivative_definition(self):
        rng = trial_rng(3)
        for inst in self.instances:
            nabla, J = inst.nabla, inst.J1
            X, Y = random_vector(rng, 2), random_vector(rng, 2)
            left = nabla.covariant_tensor(X, J).apply(Y)
            right = nabla.covariant(X, J.apply(Y)) - J.apply(nabla.covariant(X, Y))
            self.assertEqual(left, right)

    def test_torsion_linear_in_both_slots(self):
        rng = trial_rng(4)
        for inst in self.instances:
            nabla = inst.nabla
            X, Y = random_vector(rng, 2), random_vector(rng, 2)
            f = random_function(rng, 2, 2, nonconstant=True)
            T = nabla.torsion(X, Y)
            self.assertEqual(nabla.torsion(X.scale(f), Y), T.scale(f))
            self.assertEqual(nabla.torsion(X, Y.scale(f)), T.scale(f))

    def test_nijenhuis_tensorial(self):
        rng = trial_rng(5)
        J = witness_tensor()
        for _ in range(2):
            X, Y = random_vector(rng, 3), random_vector(rng, 3)
            f = random_function(rng, 3, 2, nonconstant=True)
            N = nijenhuis_tm(J, X, Y)
            self.assertEqual(nijenhuis_tm(J, X.scale(f), Y), N.scale(f))
            self.assertEqual(nijenhuis_tm(J, Y, X), -N)
        for inst in self.instances:
            X, Y = random_vector(rng, 2), random_vector(rng, 2)
            f = random_function(rng, 2, 1, nonconstant=True)
            self.assertEqual(nijenhuis_tm(inst.J1, X, Y.scale(f)), nijenhuis_tm(inst.J1, X, Y).scale(f))


if __name__ == "__main__":
    unittest.main()
