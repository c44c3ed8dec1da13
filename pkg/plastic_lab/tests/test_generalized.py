import unittest
from fractions import Fraction

from plastic_lab.app.geometry.chart import Chart, Metric, OneForm, Tensor02, Tensor11, Tensor20, VectorField
from plastic_lab.app.geometry.connection import Connection
from plastic_lab.app.geometry.generalized import (
    CHECK,
    HAT,
    GenOperator,
    GenSection,
    basis_section_pairs,
    check_nabla,
    display_form_pair,
    expanded_diag_derivative,
    gen_bracket,
    gen_cov_deriv,
    gen_is_parallel,
    gen_nijenhuis,
    hat_nabla,
    lifted_nabla,
    nijenhuis_failure,
    pair_gcheck,
    pair_indefinite,
    pair_symplectic,
)
from plastic_lab.app.geometry.numberfield import RHO
from plastic_lab.app.geometry.plastic import (
    build_dual_structure,
    build_m100_structure,
    canonical_plastic,
)
from plastic_lab.app.schemas.scenario import InstanceSpec
from plastic_lab.app.services.generators import generate_instance, random_function, random_section_pairs, trial_rng

from plastic_lab.tests.test_connection import witness_tensor


def vec(n, i):
    return GenSection.of_vector(VectorField.basis(n, i))


def form(n, i):
    return GenSection.of_form(OneForm.basis(n, i))


class TestPairings(unittest.TestCase):
    def setUp(self):
        self.chart = Chart(2)
        self.sigma = vec(2, 0) + form(2, 1)

    def test_indefinite(self):
        self.assertEqual(pair_indefinite(self.sigma, vec(2, 1)), self.chart.constant(Fraction(-1, 2)))
        self.assertEqual(pair_indefinite(vec(2, 1), self.sigma), pair_indefinite(self.sigma, vec(2, 1)))

    def test_symplectic_is_antisymmetric(self):
        self.assertEqual(pair_symplectic(self.sigma, vec(2, 1)), self.chart.constant(Fraction(-1, 2)))
        self.assertEqual(pair_symplectic(vec(2, 1), self.sigma), self.chart.constant(Fraction(1, 2)))

    def test_gcheck(self):
        g = Metric([["x1 + 2", 0], [0, 1]])
        self.assertEqual(pair_gcheck(g, form(2, 0), form(2, 0)), self.chart.parse("1/(x1 + 2)"))
        self.assertEqual(pair_gcheck(g, vec(2, 0), vec(2, 0)), self.chart.parse("x1 + 2"))


class TestLiftedConnections(unittest.TestCase):
    def setUp(self):
        self.g = Metric([["x1 + 2", 0], [0, 1]])
        self.flat = Connection.flat(2)

    def test_hat_and_check_differ(self):
        hat = hat_nabla(self.flat, self.g, vec(2, 0), form(2, 0))
        check = check_nabla(self.flat, vec(2, 0), form(2, 0))
        self.assertEqual(hat, GenSection.of_form(Chart(2).form(["-1/(x1 + 2)", "0"])))
        self.assertTrue(check.is_zero())

    def test_coincide_for_levi_civita(self):
        lc = Connection.levi_civita(self.g)
        for _, sigma, tau in basis_section_pairs(2):
            self.assertEqual(
                lifted_nabla(HAT, lc, self.g, sigma, tau),
                lifted_nabla(CHECK, lc, self.g, sigma, tau),
            )

    def test_hat_needs_metric(self):
        with self.assertRaises(ValueError):
            lifted_nabla(HAT, self.flat, None, vec(2, 0), vec(2, 1))
        with self.assertRaises(ValueError):
            lifted_nabla("wedge", self.flat, self.g, vec(2, 0), vec(2, 1))

    def test_bracket(self):
        tau = GenSection.of_form(Chart(2).form(["0", "x1"]))
        self.assertEqual(gen_bracket(self.flat, vec(2, 0), tau), form(2, 1))


class TestGenOperator(unittest.TestCase):
    def test_apply_blocks(self):
        n = 2
        J = GenOperator(
            Tensor11([[1, 2], [3, 4]]),
            Tensor20([[0, 1], [1, 0]]),
            Tensor02([[5, 0], [0, 6]]),
            Tensor11([[0, 1], [0, 0]]),
        )
        out = J.apply(vec(n, 0))
        self.assertEqual(out.vec, VectorField([1, 3]))
        self.assertEqual(out.form, OneForm([5, 0]))
        out = J.apply(form(n, 0))
        self.assertEqual(out.vec, VectorField([0, 1]))
        self.assertEqual(out.form, OneForm([0, 1]))

    def test_composition_matches_application(self):
        J = build_m100_structure(canonical_plastic().to_tensor())
        sigma = GenSection(Chart(2).vector(["x1", "1"]), Chart(2).form(["x2", "rho"]))
        self.assertEqual((J @ J).apply(sigma), J.apply(J.apply(sigma)))
        self.assertEqual(J ** 3, (J @ J) @ J)

    def test_m100_is_plastic(self):
        J = build_m100_structure(canonical_plastic().to_tensor())
        self.assertTrue(J.cubic_residual(1).is_zero())
        self.assertFalse(J.cubic_residual(-1).is_zero())
        with self.assertRaises(ValueError):
            J.cubic_residual(0)


class TestParallelAndIntegrable(unittest.TestCase):
    def test_constant_structure_parallel_and_integrable(self):
        J = build_m100_structure(canonical_plastic().to_tensor())
        flat = Connection.flat(2)
        self.assertTrue(gen_is_parallel(CHECK, flat, None, J))
        self.assertTrue(gen_is_parallel(HAT, flat, Metric([[1, 0], [0, 1]]), J))
        self.assertIsNone(nijenhuis_failure(flat, J))

    def test_non_integrable_lift(self):
        J = build_m100_structure(witness_tensor())
        failure = nijenhuis_failure(Connection.flat(3), J)
        self.assertIsNotNone(failure)
        label, value = failure
        self.assertEqual(label, "(d1,d2)")
        self.assertFalse(value.vec.is_zero())

    def test_non_parallel_tensor(self):
        J1 = Tensor11([[1, "x1"], [0, 1]])
        J = GenOperator(J1, Tensor20.zero(2), Tensor02.zero(2), J1)
        self.assertFalse(gen_is_parallel(CHECK, Connection.flat(2), None, J))

    def test_expanded_check_derivative(self):
        nabla = Connection([[["x2", 0], [1, 0]], [[0, "x1"], [0, 2]]])
        J1 = Tensor11([[1, "x1"], [0, "x2"]])
        J2 = Tensor11([["x1*x2", 0], [1, "rho"]])
        J = GenOperator(J1, Tensor20.zero(2), Tensor02.zero(2), J2)
        X = Chart(2).vector(["1", "x2"])
        derivative = gen_cov_deriv(CHECK, nabla, None, J, X)
        sections = [vec(2, 0), vec(2, 1), form(2, 0), form(2, 1)]
        sections.append(GenSection(Chart(2).vector(["x2", "0"]), Chart(2).form(["1", "x1"])))
        for tau in sections:
            self.assertEqual(derivative.apply(tau), expanded_diag_derivative(CHECK, nabla, None, J1, J2, X, tau))


class TestDisplayedFormula(unittest.TestCase):
    """对偶结构在 (♭∂₂, ♭♯dx¹) 上：书面展开式与对称展开式不一致"""

    def setUp(self):
        self.g = Metric([["x1 + 2", 0], [0, 1]])
        self.flat = Connection.flat(2)
        self.J = Tensor11.scalar(2, -RHO)
        self.Z = VectorField.basis(2, 1)
        self.W = self.g.sharp(OneForm.basis(2, 0))

    def test_definitional_value_vanishes(self):
        Jhat = build_dual_structure(self.g, self.J)
        self.assertTrue(Jhat.cubic_residual(1).is_zero())
        value = gen_nijenhuis(self.flat, Jhat, form(2, 1), form(2, 0))
        self.assertTrue(value.is_zero())

    def test_symmetric_display_matches(self):
        value = display_form_pair(self.flat, self.g, self.J, self.Z, self.W, printed=False)
        self.assertTrue(value.is_zero())

    def test_printed_display_differs(self):
        value = display_form_pair(self.flat, self.g, self.J, self.Z, self.W, printed=True)
        self.assertEqual(value.vec, Chart(2).vector(["-(rho^2)/(x1 + 2)^3", "0"]))
        self.assertTrue(value.form.is_zero())


class TestGeneralizedTensoriality(unittest.TestCase):
    """N^∇(Ĵ) 对两个截面都是函数线性的，nijenhuis_failure 只查基截面才成立"""

    def test_function_linear(self):
        spec = InstanceSpec(dim=2, frame="polynomial", connection="generic")
        for seed in range(2):
            inst = generate_instance(spec, seed)
            J_hat = build_m100_structure(inst.J1)
            rng = trial_rng(seed, 1)
            (sigma, tau), = random_section_pairs(rng, 2, count=1)
            f = random_function(rng, 2, 2, nonconstant=True)
            N = gen_nijenhuis(inst.nabla, J_hat, sigma, tau)
            with self.subTest(seed=seed):
                self.assertEqual(gen_nijenhuis(inst.nabla, J_hat, sigma.scale(f), tau), N.scale(f))
                self.assertEqual(gen_nijenhuis(inst.nabla, J_hat, sigma, tau.scale(f)), N.scale(f))
                self.assertEqual(gen_nijenhuis(inst.nabla, J_hat, tau, sigma), -N)

    def test_bracket_anchor(self):
        # [fσ, τ]_∇ = f[σ, τ]_∇ − Y(f)σ，Y 为 τ 的向量部分
        inst = generate_instance(InstanceSpec(dim=2, connection="generic"), 4)
        rng = trial_rng(4, 1)
        (sigma, tau), = random_section_pairs(rng, 2, count=1)
        f = random_function(rng, 2, 2, nonconstant=True)
        expected = gen_bracket(inst.nabla, sigma, tau).scale(f) - sigma.scale(tau.vec.derive(f))
        self.assertEqual(gen_bracket(inst.nabla, sigma.scale(f), tau), expected)


if __name__ == "__main__":
    unittest.main()
