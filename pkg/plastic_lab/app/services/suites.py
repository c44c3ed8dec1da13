"""
性质验证套件。

每个 suite 对应一条命题，按 trial 轮换实例族 (满足 / 违反前提)，逐实例做精确判定：
    - 残差必须精确为零 (rf_equal)；
    - 充要类命题逐实例比较两边真值，并要求两个方向都出现见证；
    - 失败记录 trial、seed、实例序列化与非零残差。
报告与执行顺序无关，按 trial 顺序组装；同一 (suite, trials, seed, dim) 除 ms 外逐字节相同。
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from plastic_lab.app.core.config import settings
from plastic_lab.app.core.errors import (
    InvalidParameterError,
    NotPlasticError,
    ScalarCanonicalFormError,
    StructurePreconditionError,
    UnknownSuiteError,
)
from plastic_lab.app.core.logger import logger
from plastic_lab.app.geometry.chart import OneForm, Tensor11, VectorField
from plastic_lab.app.geometry.connection import is_integrable
from plastic_lab.app.geometry.generalized import (
    CHECK,
    HAT,
    GenOperator,
    GenSection,
    basis_sections,
    display_form_pair,
    display_mixed_pair,
    display_vector_pair,
    expanded_diag_derivative,
    expanded_two_tensor_derivative,
    gen_cov_deriv,
    gen_nijenhuis,
    hat_nabla,
    check_nabla,
    nijenhuis_failure,
    pair_gcheck,
    pair_indefinite,
)
from plastic_lab.app.geometry.numberfield import ONE, RHO, FieldElem
from plastic_lab.app.geometry.plastic import (
    DUAL,
    PLASTIC,
    Matrix2,
    build_diag_structure,
    build_dual_structure,
    build_m100_structure,
    build_two_tensor_structure,
    canonical_form,
    canonical_plastic,
    make_plastic_2x2,
    make_plastic_from_trace,
    matrix_cubic_residual,
    metallic_companion,
    metallic_compat,
    metallic_identity_holds,
)
from plastic_lab.app.geometry.symfunc import RationalFn
from plastic_lab.app.schemas.report import AggregateReport, Failure, SuiteReport
from plastic_lab.app.schemas.scenario import InstanceSpec
from plastic_lab.app.services.crosscheck import float_crosscheck, within_tolerance
from plastic_lab.app.services.generators import Instance, generate_instance, random_field_elem, random_section_pairs


# ---------------------------------------------------------------------------
# 数据结构
# ---------------------------------------------------------------------------


@dataclass
class TrialContext:
    suite: str
    seed: int
    trial: int
    dim: int
    family: str
    params: Dict[str, Any]
    rng: np.random.Generator

    def instance(self, **overrides) -> Instance:
        fields = dict(self.params)
        fields.update(overrides)
        dim = self.dim
        if "dim_offset" in fields:
            dim = min(dim + fields.pop("dim_offset"), settings.MAX_DIM)
        if "dim_min" in fields:
            dim = max(dim, fields.pop("dim_min"))
        fields.setdefault("dim", dim)
        return generate_instance(InstanceSpec(**fields), self.seed, self.trial)


@dataclass
class TrialOutcome:
    ok: bool
    reason: str = ""
    residual: Any = None
    instance: Optional[Dict[str, Any]] = None
    row: Optional[Dict[str, Any]] = None
    witnesses: Dict[str, int] = field(default_factory=dict)
    zero_residuals: List[Any] = field(default_factory=list)
    notes: Dict[str, int] = field(default_factory=dict)


TrialFn = Callable[[TrialContext], TrialOutcome]
Family = Tuple[str, Dict[str, Any]]


@dataclass(frozen=True)
class SuiteDefinition:
    id: str
    statement: str
    trial: TrialFn
    families: Tuple[Family, ...] = (("random", {}),)
    required_witnesses: Tuple[str, ...] = ()
    # 见证的最少次数，未列出的按 1
    witness_minimums: Tuple[Tuple[str, int], ...] = ()
    summarize: Optional[Callable[[List[TrialOutcome]], Optional[Dict[str, Any]]]] = None


def render(value: Any) -> Any:
    """残差 / 实例转为 JSON 友好的字符串结构"""
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, (FieldElem, RationalFn)):
        return str(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if hasattr(value, "to_strings"):
        return value.to_strings()
    if isinstance(value, dict):
        return {str(k): render(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [render(v) for v in value]
    return str(value)


def _basis_vectors(n: int) -> List[VectorField]:
    return [VectorField.basis(n, i) for i in range(n)]


def _random_plastic_2x2(rng: np.random.Generator) -> Matrix2:
    return make_plastic_from_trace(random_field_elem(rng), random_field_elem(rng, nonzero=True))


def _lifted_derivatives(variant: str, inst: Instance, J_hat: GenOperator) -> List[GenOperator]:
    return [gen_cov_deriv(variant, inst.nabla, inst.g, J_hat, X) for X in _basis_vectors(inst.dim)]


def _expanded_mismatch(
    derivatives: Sequence[GenOperator], expanded: Callable[[VectorField, GenSection], GenSection]
) -> Optional[Tuple[str, GenSection]]:
    """定义式 (∇Ĵ)_X τ 与展开式逐基截面比较"""
    n = derivatives[0].dim
    vectors, forms = basis_sections(n)
    for i, D in enumerate(derivatives):
        X = VectorField.basis(n, i)
        for k, tau in enumerate(vectors + forms):
            diff = D.apply(tau) - expanded(X, tau)
            if not diff.is_zero():
                return f"d{i + 1} on basis section {k + 1}", diff
    return None


# ---------------------------------------------------------------------------
# 2×2 塑性矩阵
# ---------------------------------------------------------------------------


def _trial_m20_form(ctx: TrialContext) -> TrialOutcome:
    A = _random_plastic_2x2(ctx.rng)
    residual = matrix_cubic_residual(A)
    # 迹被扰动后必须被拒绝：Q(ρ) 中 x³ − x + 1 的根只有 −ρ
    try:
        make_plastic_2x2(A.a11 + random_field_elem(ctx.rng, nonzero=True), A.a21, A.a22)
        rejected = False
    except InvalidParameterError:
        rejected = True
    flipped = matrix_cubic_residual(-A, DUAL)
    out = TrialOutcome(ok=True, instance={"A": A.to_strings()}, zero_residuals=[residual, flipped])
    if not residual.is_zero():
        out.ok, out.reason, out.residual = False, "A^3 - A - I is not zero", residual
    elif not flipped.is_zero():
        out.ok, out.reason, out.residual = False, "-A does not satisfy the dual cubic", flipped
    elif not rejected:
        out.ok, out.reason = False, "a matrix with trace != -rho was accepted"
    return out


def _trial_m30_canonical(ctx: TrialContext) -> TrialOutcome:
    A = _random_plastic_2x2(ctx.rng)
    C, B = canonical_form(A)
    conj = (C @ A) - (B @ C)
    out = TrialOutcome(ok=True, instance={"A": A.to_strings(), "C": C.to_strings()}, zero_residuals=[conj])
    if not conj.is_zero():
        out.ok, out.reason, out.residual = False, "C*A - B*C is not zero", conj
    elif not (C.inverse() @ B @ C) == A:
        out.ok, out.reason = False, "C^-1 * B * C differs from A"
    elif not B == canonical_plastic() or not C.det() == A.a21:
        out.ok, out.reason = False, "unexpected canonical pair"
    if ctx.trial == 0:
        try:
            canonical_form(Matrix2.scalar(RHO))
            out.ok, out.reason = False, "rho*I was given a conjugating matrix"
        except ScalarCanonicalFormError:
            pass
        try:
            canonical_form(Matrix2.identity())
            out.ok, out.reason = False, "the identity was treated as plastic"
        except NotPlasticError:
            pass
    return out


def _trial_inverse_remark(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    J = inst.J1
    n = inst.dim
    J_inv = (J @ J) - Tensor11.identity(n)
    product = (J @ J_inv) - Tensor11.identity(n)
    cubic = matrix_cubic_residual(J_inv) + J
    out = TrialOutcome(ok=True, zero_residuals=[product, cubic], row={"dim": n})
    if not product.is_zero():
        out.ok, out.reason, out.residual = False, "J*(J^2 - I) != I", product
    elif not cubic.is_zero():
        out.ok, out.reason, out.residual = False, "(J^-1)^3 - J^-1 - I != -J", cubic
    elif not J.inverse() == J_inv:
        out.ok, out.reason = False, "adjugate inverse differs from J^2 - I"
    if not out.ok:
        out.instance = inst.describe()
    return out


def _trial_metallic(ctx: TrialContext) -> TrialOutcome:
    p, q = int(ctx.rng.integers(1, 7)), int(ctx.rng.integers(1, 7))
    info = metallic_compat(p, q)
    out = TrialOutcome(ok=True, row={"p": p, "q": q})
    impossible = not any(
        info[kind]["branch1"]["possible"] or info[kind]["branch2"]["satisfies"] for kind in ("plastic", "dual")
    )
    if not metallic_identity_holds(p, q):
        out.ok, out.reason = False, "expanded cubic identity failed on the companion matrix"
    elif not impossible:
        out.ok, out.reason, out.residual = False, "integer metallic pair admitted a plastic structure", info
    if ctx.trial == 0:
        golden = metallic_compat(1, 1)
        if golden["plastic"]["branch2"]["scalar"] != "0" or golden["plastic"]["branch2"]["satisfies"]:
            out.ok, out.reason, out.residual = False, "golden pair (1,1) misclassified", golden
        plastic_pair = metallic_compat(-RHO, ONE - RHO * RHO, reading="symbolic")
        dual_pair = metallic_compat(RHO, ONE - RHO * RHO, reading="symbolic")
        if not plastic_pair["plastic"]["branch1"]["possible"] or not matrix_cubic_residual(
            metallic_companion(-RHO, ONE - RHO * RHO)
        ).is_zero():
            out.ok, out.reason, out.residual = False, "p = -rho, q = 1 - rho^2 should be plastic", plastic_pair
        if not dual_pair["dual"]["branch1"]["possible"] or not matrix_cubic_residual(
            metallic_companion(RHO, ONE - RHO * RHO), DUAL
        ).is_zero():
            out.ok, out.reason, out.residual = False, "p = rho, q = 1 - rho^2 should satisfy the dual cubic", dual_pair
    return out


# ---------------------------------------------------------------------------
# 广义塑性结构：三次方程、配对、提升联络
# ---------------------------------------------------------------------------


def _trial_m10_cubic(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    J_hat = build_diag_structure(inst.J1, inst.J2)
    residual = J_hat.cubic_residual(PLASTIC)
    m100 = build_m100_structure(inst.J1).cubic_residual(PLASTIC)
    out = TrialOutcome(ok=True, zero_residuals=[residual, m100], row={"dim": inst.dim})
    if not residual.is_zero():
        out.ok, out.reason, out.residual = False, "diag(J1, J2*) fails the plastic cubic", residual
    elif not m100.is_zero():
        out.ok, out.reason, out.residual = False, "diag(J, J*) fails the plastic cubic", m100
    if ctx.trial == 0:
        n = inst.dim
        try:
            build_diag_structure(inst.J1, Tensor11.identity(n))
            out.ok, out.reason = False, "non-plastic J2 = I was accepted"
        except NotPlasticError:
            pass
        scalar = build_m100_structure(Tensor11.scalar(n, RHO))
        vectors, forms = basis_sections(n)
        if any(not scalar.apply(s) == s.scale(RationalFn.constant(n, RHO)) for s in vectors + forms):
            out.ok, out.reason = False, "diag(rho*I, rho*I) does not act as rho"
    if not out.ok:
        out.instance = inst.describe()
    return out


def _trial_pairing(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    g = inst.g
    m100 = build_m100_structure(inst.J1)
    m10 = build_diag_structure(inst.J1, inst.J2)
    out = TrialOutcome(ok=True)
    for k, (sigma, tau) in enumerate(random_section_pairs(ctx.rng, inst.dim)):
        indefinite = pair_indefinite(m100.apply(sigma), tau) - pair_indefinite(sigma, m100.apply(tau))
        gcheck = pair_gcheck(g, m10.apply(sigma), tau) - pair_gcheck(g, sigma, m10.apply(tau))
        out.zero_residuals.extend([indefinite, gcheck])
        if not indefinite.is_zero():
            out.ok, out.reason, out.residual = False, f"<J sigma, tau> != <sigma, J tau> on pair {k}", indefinite
            break
        if not gcheck.is_zero():
            out.ok, out.reason, out.residual = False, f"gcheck(J sigma, tau) != gcheck(sigma, J tau) on pair {k}", gcheck
            break
    if not out.ok:
        out.instance = inst.describe()
    return out


def _trial_hat_check(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    n = inst.dim
    vectors, forms = basis_sections(n)
    directions = [GenSection.of_vector(X) for X in _basis_vectors(n)]
    pairs = [(s, t) for s in directions for t in vectors + forms]
    pairs += random_section_pairs(ctx.rng, n, count=2)
    differences = [hat_nabla(inst.nabla, inst.g, s, t) - check_nabla(inst.nabla, s, t) for s, t in pairs]
    coincide = all(d.is_zero() for d in differences)
    metric_parallel = inst.nabla.metric_is_parallel(inst.g)
    out = TrialOutcome(
        ok=coincide == metric_parallel,
        row={"coincide": coincide, "metric_parallel": metric_parallel},
        witnesses={"coincide" if metric_parallel else "differ": 1},
    )
    if metric_parallel:
        out.zero_residuals = differences
    if not out.ok:
        out.reason = "hat/check coincidence disagrees with nabla g = 0"
        out.residual = next((d for d in differences if not d.is_zero()), None)
        out.instance = inst.describe()
    return out


def _trial_m10_parallel(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    nabla, g, J1, J2 = inst.nabla, inst.g, inst.J1, inst.J2
    J_hat = build_diag_structure(J1, J2)
    rhs = nabla.is_parallel(J1) and nabla.is_parallel(J2)
    row: Dict[str, Any] = {"nabla_J1_J2_zero": rhs}
    out = TrialOutcome(ok=True, row=row, witnesses={"parallel" if rhs else "non-parallel": 1})
    for variant in (HAT, CHECK):
        derivatives = _lifted_derivatives(variant, inst, J_hat)
        lhs = all(D.is_zero() for D in derivatives)
        row[variant] = lhs
        if lhs:
            out.zero_residuals.extend(derivatives)
        mismatch = _expanded_mismatch(
            derivatives, lambda X, tau, v=variant: expanded_diag_derivative(v, nabla, g, J1, J2, X, tau)
        )
        if lhs != rhs:
            out.ok, out.reason = False, f"{variant}-parallel = {lhs} but nabla J1 = nabla J2 = 0 is {rhs}"
            out.residual = next((D for D in derivatives if not D.is_zero()), None)
        elif mismatch is not None:
            out.ok, out.reason, out.residual = False, f"{variant} expanded formula differs ({mismatch[0]})", mismatch[1]
        if not out.ok:
            break
    if not out.ok:
        out.instance = inst.describe()
    return out


def _trial_m15_cubic(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    J_hat = build_two_tensor_structure(inst.g, inst.J1, inst.J2)
    residual = J_hat.cubic_residual(PLASTIC)
    out = TrialOutcome(ok=True, zero_residuals=[residual])
    if not residual.is_zero():
        out.ok, out.reason, out.residual = False, "two-tensor structure fails the plastic cubic", residual
    if ctx.trial == 0:
        try:
            build_two_tensor_structure(inst.g, inst.T, Tensor11.identity(inst.dim))
            out.ok, out.reason = False, "J2 = I was accepted although J1 + J2 is not a dual root"
        except StructurePreconditionError as exc:
            if "sum_cubic" not in [name for name, _ in exc.violations]:
                out.ok, out.reason = False, f"unexpected violations {[name for name, _ in exc.violations]}"
    if not out.ok:
        out.instance = inst.describe()
    return out


def _trial_duality(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    g, J1, J2, T = inst.g, inst.J1, inst.J2, inst.T
    dual_mode = build_two_tensor_structure(g, J1, J2, dual=True).cubic_residual(DUAL)
    flipped = build_two_tensor_structure(g, -J1, -J2).cubic_residual(PLASTIC)
    single = build_dual_structure(g, -T)
    single_residual = single.cubic_residual(PLASTIC)
    out = TrialOutcome(ok=True, zero_residuals=[dual_mode, flipped, single_residual])
    if not dual_mode.is_zero():
        out.ok, out.reason, out.residual = False, "dual mode fails J^3 - J + I = 0", dual_mode
    elif not flipped.is_zero():
        out.ok, out.reason, out.residual = False, "sign-flipped pair fails J^3 - J - I = 0", flipped
    elif not single_residual.is_zero():
        out.ok, out.reason, out.residual = False, "[[J, (I - J^2)g^-1], [g, 0]] fails J^3 - J - I = 0", single_residual
    elif not single == build_two_tensor_structure(g, -T, Tensor11.zero(inst.dim)):
        out.ok, out.reason = False, "single-tensor structure differs from the pair (J, 0)"
    if not out.ok:
        out.instance = inst.describe()
    return out


def _trial_m15_parallel(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    nabla, g, J1, J2 = inst.nabla, inst.g, inst.J1, inst.J2
    J_hat = build_two_tensor_structure(g, J1, J2)
    tensors_parallel = nabla.is_parallel(J1) and nabla.is_parallel(J2)
    metric_parallel = nabla.metric_is_parallel(g)
    expected = {HAT: tensors_parallel, CHECK: tensors_parallel and metric_parallel}
    row: Dict[str, Any] = {"nabla_J1_J2_zero": tensors_parallel, "nabla_g_zero": metric_parallel}
    out = TrialOutcome(ok=True, row=row)
    for variant in (HAT, CHECK):
        derivatives = _lifted_derivatives(variant, inst, J_hat)
        lhs = all(D.is_zero() for D in derivatives)
        row[variant] = lhs
        out.witnesses[f"{variant}-{'parallel' if lhs else 'non-parallel'}"] = 1
        if lhs:
            out.zero_residuals.extend(derivatives)
        mismatch = _expanded_mismatch(
            derivatives, lambda X, tau, v=variant: expanded_two_tensor_derivative(v, nabla, g, J1, J2, X, tau)
        )
        if lhs != expected[variant]:
            out.ok, out.reason = False, f"{variant}-parallel = {lhs}, expected {expected[variant]}"
            out.residual = next((D for D in derivatives if not D.is_zero()), None)
        elif mismatch is not None:
            out.ok, out.reason, out.residual = False, f"{variant} expanded formula differs ({mismatch[0]})", mismatch[1]
        if not out.ok:
            break
    if not out.ok:
        out.instance = inst.describe()
    return out


# ---------------------------------------------------------------------------
# ∇-可积性
# ---------------------------------------------------------------------------


def _derivative_orders(nabla, J1: Tensor11, J2: Tensor11) -> Tuple[bool, bool]:
    """
    (∇_{J₁X}J₂ = (∇_X J₂)∘J₂, ∇_{J₁X}J₂ = J₂∘(∇_X J₂)) 对全部基方向 X。
    前者是对偶作用展开得到的顺序，后者是通常书写的顺序。
    """
    derived = stated = True
    for X in _basis_vectors(J1.dim):
        left = nabla.covariant_tensor(J1.apply(X), J2)
        dX = nabla.covariant_tensor(X, J2)
        derived = derived and left == dX @ J2
        stated = stated and left == J2 @ dX
    return derived, stated


def _trial_diag_integrability(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    nabla, J1, J2 = inst.nabla, inst.J1, inst.J2
    J_hat = build_diag_structure(J1, J2)
    failure = nijenhuis_failure(nabla, J_hat, random_section_pairs(ctx.rng, inst.dim))
    lhs = failure is None
    torsion_free_part = is_integrable(J1)
    derived, stated = _derivative_orders(nabla, J1, J2)
    rhs = torsion_free_part and derived
    out = TrialOutcome(
        ok=lhs == rhs,
        row={
            "nabla_integrable": lhs,
            "N_J1_zero": torsion_free_part,
            "condition": derived,
            "condition_stated_order": stated,
        },
        witnesses={"integrable" if lhs else "non-integrable": 1},
        notes={"stated_order_agrees": int((torsion_free_part and stated) == lhs)},
    )
    if not out.ok:
        out.reason = f"N^nabla = 0 is {lhs} but N(J1) = 0 and the derivative condition give {rhs}"
        out.residual = failure[1] if failure else None
        out.instance = inst.describe()
    return out


def _trial_j1_eq_j2(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    nabla, J = inst.nabla, inst.J1
    failure = nijenhuis_failure(nabla, build_m100_structure(J), random_section_pairs(ctx.rng, inst.dim))
    lhs = failure is None
    integrable = is_integrable(J)
    derived, stated = _derivative_orders(nabla, J, J)
    # 判定与 diag-integrability 一致：N(J) = 0 且 (∇_X J)∘J 的顺序
    rhs = integrable and derived
    out = TrialOutcome(
        ok=lhs == rhs,
        row={
            "nabla_integrable": lhs,
            "N_J_zero": integrable,
            "condition": derived,
            "condition_stated_order": stated,
        },
        witnesses={"integrable" if lhs else "non-integrable": 1},
        notes={"stated_order_agrees": int(stated == lhs)},
    )
    if nabla.has_torsion():
        out.ok, out.reason = False, "generated connection has torsion"
    elif not out.ok:
        out.reason = f"N^nabla = 0 is {lhs} but N(J) = 0 and nabla_(JX) J = (nabla_X J) J give {rhs}"
        out.residual = failure[1] if failure else None
    if not out.ok:
        out.instance = inst.describe()
    return out


def _hypotheses(inst: Instance) -> Dict[str, bool]:
    return {
        "integrable": is_integrable(inst.J1),
        "parallel": inst.nabla.is_parallel(inst.J1),
        "quasi_statistical": inst.nabla.is_quasi_statistical(inst.g),
    }


def _trial_m45_sufficiency(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    hypotheses = _hypotheses(inst)
    torsion = inst.nabla.has_torsion()
    row = dict(hypotheses, torsion=torsion)
    non_scalar = torsion and inst.spec.tensor == "block"
    out = TrialOutcome(
        ok=True,
        row=row,
        witnesses={"torsion": int(torsion), "non-scalar-torsion": int(non_scalar), "hypotheses": 1},
    )
    if not all(hypotheses.values()):
        out.ok, out.reason = False, f"generated instance violates the hypotheses {hypotheses}"
    else:
        J_hat = build_dual_structure(inst.g, inst.J1)
        failure = nijenhuis_failure(inst.nabla, J_hat, random_section_pairs(ctx.rng, inst.dim))
        row["nabla_integrable"] = failure is None
        if failure is not None:
            out.ok, out.reason, out.residual = False, f"N^nabla != 0 on {failure[0]}", failure[1]
    if not out.ok:
        out.instance = inst.describe()
    return out


def _trial_m45_formulas(ctx: TrialContext) -> TrialOutcome:
    inst = ctx.instance()
    n, nabla, g, J = inst.dim, inst.nabla, inst.g, inst.J1
    hypotheses = all(_hypotheses(inst).values())
    J_hat = build_dual_structure(g, J)
    vectors, forms = basis_sections(n)
    mismatches = {"vector": 0, "mixed": 0, "form": 0, "form_printed": 0}
    first: Dict[str, Tuple[str, GenSection]] = {}

    def compare(kind: str, label: str, display: GenSection, definitional: GenSection) -> None:
        diff = display - definitional
        if not diff.is_zero():
            mismatches[kind] += 1
            first.setdefault(kind, (label, diff))

    for i in range(n):
        for j in range(i + 1, n):
            compare(
                "vector",
                f"(d{i + 1},d{j + 1})",
                display_vector_pair(nabla, g, J, VectorField.basis(n, i), VectorField.basis(n, j)),
                gen_nijenhuis(nabla, J_hat, vectors[i], vectors[j]),
            )
    for i in range(n):
        for j in range(n):
            Z = g.sharp(OneForm.basis(n, j))
            compare(
                "mixed",
                f"(d{i + 1},dx{j + 1})",
                display_mixed_pair(nabla, g, J, VectorField.basis(n, i), Z),
                gen_nijenhuis(nabla, J_hat, vectors[i], forms[j]),
            )
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            Z, W = g.sharp(OneForm.basis(n, i)), g.sharp(OneForm.basis(n, j))
            definitional = gen_nijenhuis(nabla, J_hat, forms[i], forms[j])
            label = f"(dx{i + 1},dx{j + 1})"
            compare("form", label, display_form_pair(nabla, g, J, Z, W, printed=False), definitional)
            compare("form_printed", label, display_form_pair(nabla, g, J, Z, W, printed=True), definitional)

    out = TrialOutcome(
        ok=True,
        row=dict(mismatches, hypotheses=hypotheses),
        witnesses={"hypotheses": int(hypotheses)},
        notes={
            "hypothesis_instances": int(hypotheses),
            "printed_mismatch_instances": int(mismatches["form_printed"] > 0),
            "generic_mismatch_instances": int(not hypotheses and any(mismatches.values())),
        },
    )
    if hypotheses:
        for kind in ("vector", "mixed", "form"):
            if kind in first:
                label, diff = first[kind]
                out.ok, out.reason, out.residual = False, f"{kind} display differs from N^nabla on {label}", diff
                out.instance = inst.describe()
                break
    return out


def _summarize_formulas(outcomes: List[TrialOutcome]) -> Optional[Dict[str, Any]]:
    totals: Dict[str, int] = {}
    for o in outcomes:
        for k, v in o.notes.items():
            totals[k] = totals.get(k, 0) + v
    if not totals.get("printed_mismatch_instances") and not totals.get("generic_mismatch_instances"):
        return None
    return {
        "display": "form-form pair (sharp Z, sharp W)",
        "detail": "the display as printed differs from the definitional N^nabla; "
        "the symmetric reading Q(J^2 Z, W) matches under the hypotheses",
        **totals,
    }


def _order_summary(condition: str, verdict_uses: str) -> Callable[[List[TrialOutcome]], Optional[Dict[str, Any]]]:
    def summarize(outcomes: List[TrialOutcome]) -> Optional[Dict[str, Any]]:
        agree = sum(o.notes.get("stated_order_agrees", 0) for o in outcomes)
        if agree == len(outcomes):
            return None
        return {
            "condition": condition,
            "verdict_uses": verdict_uses,
            "stated_order_agrees": agree,
            "instances": len(outcomes),
        }

    return summarize


# ---------------------------------------------------------------------------
# 目录
# ---------------------------------------------------------------------------

_PAIR = {"tensors": 2, "pair": "independent"}
_SPLIT = {"tensors": 2, "pair": "split"}

SUITES: Tuple[SuiteDefinition, ...] = (
    SuiteDefinition("m20-form", "2x2 plastic matrices are exactly those with trace -rho", _trial_m20_form),
    SuiteDefinition("m30-canonical", "every non-scalar plastic 2x2 matrix is conjugate to S", _trial_m30_canonical),
    SuiteDefinition(
        "inverse-remark",
        "J^-1 = J^2 - I and (J^-1)^3 - J^-1 - I = -J",
        _trial_inverse_remark,
        families=(
            ("dim2-constant", {"dim": 2, "tensor": "block", "frame": "constant"}),
            ("dim3-polynomial", {"dim": 3, "tensor": "block", "frame": "polynomial"}),
            ("dim4-constant", {"dim": 4, "tensor": "block", "frame": "constant"}),
            ("dim2-polynomial", {"dim": 2, "tensor": "block", "frame": "polynomial"}),
            ("dim3-constant", {"dim": 3, "tensor": "block", "frame": "constant"}),
            ("dim4-polynomial", {"dim": 4, "tensor": "block", "frame": "polynomial"}),
        ),
    ),
    SuiteDefinition("metallic-remark", "no metallic structure J^2 = pJ + qI is plastic", _trial_metallic),
    SuiteDefinition(
        "m10-cubic",
        "diag(J1, J2*) and diag(J, J*) are generalized almost plastic",
        _trial_m10_cubic,
        families=(
            ("constant", dict(_PAIR, frame="constant")),
            ("polynomial", dict(_PAIR, frame="polynomial")),
            ("constant-dim+1", dict(_PAIR, frame="constant", dim_offset=1)),
            ("polynomial-dim+1", dict(_PAIR, frame="polynomial", dim_offset=1)),
        ),
    ),
    SuiteDefinition(
        "pairing-symmetry",
        "<J sigma, tau> = <sigma, J tau> and gcheck(J sigma, tau) = gcheck(sigma, J tau)",
        _trial_pairing,
        families=(
            ("constant", dict(_PAIR, frame="constant", metric="constant")),
            ("polynomial-frame", dict(_PAIR, frame="polynomial", metric="constant")),
            ("polynomial-metric", dict(_PAIR, frame="constant", metric="polynomial")),
        ),
    ),
    SuiteDefinition(
        "hat-check-coincide",
        "hat and check lifts coincide iff nabla g = 0",
        _trial_hat_check,
        families=(
            ("levi-civita", {"tensors": 0, "frame": "polynomial", "metric": "constant", "connection": "levi_civita"}),
            ("non-metric-metric", {"tensors": 0, "metric": "example", "connection": "flat"}),
            ("metric-parallel", {"tensors": 0, "frame": "polynomial", "metric": "constant", "connection": "solved", "metric_parallel": True}),
            ("generic", {"tensors": 0, "metric": "constant", "connection": "generic"}),
        ),
        required_witnesses=("coincide", "differ"),
    ),
    SuiteDefinition(
        "m10-parallel-iff",
        "hat/check nabla of diag(J1, J2*) vanishes iff nabla J1 = nabla J2 = 0",
        _trial_m10_parallel,
        families=(
            ("parallel-constant", dict(_PAIR, metric="constant", connection="solved", parallel=True)),
            ("flat-polynomial", dict(_PAIR, frame="polynomial", metric="constant", connection="flat")),
            ("parallel-polynomial", dict(_PAIR, frame="polynomial", metric="constant", connection="solved", parallel=True)),
            ("generic", dict(_PAIR, metric="constant", connection="generic")),
        ),
        required_witnesses=("parallel", "non-parallel"),
    ),
    SuiteDefinition(
        "m15-cubic",
        "the two-tensor structure is generalized almost plastic",
        _trial_m15_cubic,
        families=(
            ("constant", dict(_SPLIT, cubic="dual", metric="constant")),
            ("polynomial-frame", dict(_SPLIT, cubic="dual", frame="polynomial", metric="constant")),
            ("polynomial-metric", dict(_SPLIT, cubic="dual", metric="polynomial")),
            ("scalar", dict(_SPLIT, cubic="dual", tensor="scalar", metric="constant")),
        ),
    ),
    SuiteDefinition(
        "duality",
        "J1 + J2 plastic gives J^3 - J + I = 0, J1 + J2 dual gives J^3 - J - I = 0",
        _trial_duality,
        families=(
            ("constant", dict(_SPLIT, metric="constant")),
            ("polynomial-frame", dict(_SPLIT, frame="polynomial", metric="constant")),
            ("polynomial-metric", dict(_SPLIT, metric="polynomial")),
            ("scalar", dict(_SPLIT, tensor="scalar", metric="constant")),
        ),
    ),
    SuiteDefinition(
        "m15-parallel-iff",
        "hat nabla J = 0 iff nabla J1 = nabla J2 = 0; check additionally needs nabla g = 0",
        _trial_m15_parallel,
        families=(
            ("parallel-metric", dict(_SPLIT, cubic="dual", metric="constant", connection="solved", parallel=True, metric_parallel=True)),
            ("polynomial-metric", dict(_SPLIT, cubic="dual", metric="polynomial", connection="flat")),
            ("flat-polynomial", dict(_SPLIT, cubic="dual", frame="polynomial", metric="constant", connection="flat")),
            ("generic", dict(_SPLIT, cubic="dual", metric="constant", connection="generic")),
        ),
        required_witnesses=("hat-parallel", "hat-non-parallel", "check-parallel", "check-non-parallel"),
    ),
    SuiteDefinition(
        "diag-integrability",
        "diag(J1, J2*) is nabla-integrable iff N(J1) = 0 and nabla_(J1 X) J2 = (nabla_X J2) J2",
        _trial_diag_integrability,
        families=(
            ("flat-constant", dict(_PAIR, connection="flat")),
            ("non-integrable", dict(_PAIR, non_integrable=True, dim_min=3, connection="flat")),
            ("flat-polynomial", dict(_PAIR, frame="polynomial", connection="flat")),
            ("scalar-generic", dict(_PAIR, tensor="scalar", connection="generic")),
            ("constant-generic", dict(_PAIR, connection="generic")),
        ),
        required_witnesses=("integrable", "non-integrable"),
        summarize=_order_summary("nabla_(J1 X) J2 = J2 (nabla_X J2)", "(nabla_X J2) J2"),
    ),
    SuiteDefinition(
        "j1-eq-j2-remark",
        "for torsion-free nabla, diag(J, J*) is nabla-integrable iff nabla_(JX) J = J nabla_X J",
        _trial_j1_eq_j2,
        families=(
            ("parallel-torsion-free", {"connection": "solved", "parallel": True, "torsion_free": True}),
            ("flat-polynomial", {"frame": "polynomial", "connection": "flat"}),
            ("scalar-torsion-free", {"tensor": "scalar", "connection": "solved", "torsion_free": True}),
        ),
        required_witnesses=("integrable", "non-integrable"),
        summarize=_order_summary("nabla_(JX) J = J (nabla_X J)", "N(J) = 0 and (nabla_X J) J"),
    ),
    SuiteDefinition(
        "m45-sufficiency",
        "N(J) = 0, nabla J = 0 and (g, nabla) quasi-statistical imply [[J, P#], [b, 0]] is nabla-integrable",
        _trial_m45_sufficiency,
        families=(
            ("torsion", {"cubic": "dual", "tensor": "scalar", "g_symmetric": False, "metric": "constant", "connection": "solved", "quasi_statistical": True, "parallel": True, "require_torsion": True}),
            ("hessian", {"cubic": "dual", "tensor": "scalar", "metric": "hessian", "connection": "flat"}),
            ("torsion-again", {"cubic": "dual", "tensor": "scalar", "g_symmetric": False, "metric": "constant", "connection": "solved", "quasi_statistical": True, "parallel": True, "require_torsion": True}),
            ("block", {"cubic": "dual", "tensor": "block", "metric": "constant", "connection": "solved", "quasi_statistical": True, "parallel": True}),
            # 块 J 在 dim 2、3 上特征值互异，满足约束的联络都无挠；dim 4 才有重特征值
            ("block-torsion", {"cubic": "dual", "tensor": "block", "dim_min": 4, "metric": "constant", "connection": "solved", "quasi_statistical": True, "parallel": True, "require_torsion": True}),
        ),
        required_witnesses=("torsion", "non-scalar-torsion"),
        witness_minimums=(("torsion", 3),),
    ),
    SuiteDefinition(
        "m45-formula-crosscheck",
        "expanded displays of N^nabla for [[J, P#], [b, 0]] against the definition",
        _trial_m45_formulas,
        families=(
            ("torsion", {"cubic": "dual", "tensor": "scalar", "g_symmetric": False, "metric": "constant", "connection": "solved", "quasi_statistical": True, "parallel": True, "require_torsion": True}),
            ("non-metric-metric", {"cubic": "dual", "tensor": "scalar", "metric": "example", "connection": "flat"}),
            ("hessian", {"cubic": "dual", "tensor": "scalar", "metric": "hessian", "connection": "flat"}),
            ("block", {"cubic": "dual", "tensor": "block", "metric": "constant", "connection": "solved", "quasi_statistical": True, "parallel": True}),
            ("generic", {"cubic": "dual", "tensor": "scalar", "g_symmetric": False, "metric": "constant", "connection": "generic"}),
        ),
        required_witnesses=("hypotheses",),
        summarize=_summarize_formulas,
    ),
)


# ---------------------------------------------------------------------------
# 执行
# ---------------------------------------------------------------------------


class SuiteRunner:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(SuiteRunner, cls).__new__(cls)
            cls._instance.registry: Dict[str, SuiteDefinition] = {}
            for definition in SUITES:
                cls._instance.register(definition)
        return cls._instance

    def register(self, definition: SuiteDefinition) -> None:
        self.registry[definition.id] = definition

    def known(self) -> List[str]:
        return list(self.registry)

    def get(self, suite: str) -> SuiteDefinition:
        if suite not in self.registry:
            raise UnknownSuiteError(suite, self.known())
        return self.registry[suite]

    def _run_trial(self, definition: SuiteDefinition, seed: int, trial: int, dim: int) -> Tuple[str, TrialOutcome]:
        family, params = definition.families[trial % len(definition.families)]
        ctx = TrialContext(
            suite=definition.id,
            seed=seed,
            trial=trial,
            dim=dim,
            family=family,
            params=params,
            rng=np.random.default_rng(np.random.SeedSequence([seed, trial, 1])),
        )
        try:
            return family, definition.trial(ctx)
        except Exception as e:
            # 试验内部的任何异常都按失败记录，附上异常类型
            logger.exception(f"suite {definition.id} trial {trial} raised")
            return family, TrialOutcome(ok=False, reason=f"{type(e).__name__}: {e}")

    def run_suite(
        self,
        suite: str,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        dim: Optional[int] = None,
        float_check: bool = False,
    ) -> SuiteReport:
        definition = self.get(suite)
        trials = settings.DEFAULT_TRIALS if trials is None else trials
        seed = settings.DEFAULT_SEED if seed is None else seed
        dim = settings.DEFAULT_DIM if dim is None else dim
        if trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {trials}")
        if seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {seed}")
        if not settings.MIN_DIM <= dim <= settings.MAX_DIM:
            raise InvalidParameterError(f"dim must be in [{settings.MIN_DIM}, {settings.MAX_DIM}], got {dim}")

        # 每个实例族至少跑一次，保证充要命题两个方向都有见证
        effective = max(trials, len(definition.families))
        logger.info(f"suite {suite}: {effective} trials, seed={seed}, dim={dim}")
        start = time.perf_counter()

        if settings.SUITE_WORKERS > 1:
            with ThreadPoolExecutor(max_workers=settings.SUITE_WORKERS) as pool:
                results = list(pool.map(lambda t: self._run_trial(definition, seed, t, dim), range(effective)))
        else:
            results = [self._run_trial(definition, seed, t, dim) for t in range(effective)]

        failures: List[Failure] = []
        witnesses: Dict[str, int] = {name: 0 for name in definition.required_witnesses}
        truth_table: List[Dict[str, Any]] = []
        for trial, (family, outcome) in enumerate(results):
            for key, count in outcome.witnesses.items():
                witnesses[key] = witnesses.get(key, 0) + count
            if outcome.row is not None:
                truth_table.append({"trial": trial, "family": family, **outcome.row})
            if not outcome.ok:
                logger.warning(f"suite {suite} trial {trial} ({family}) failed: {outcome.reason}")
                failures.append(
                    Failure(
                        trial=trial,
                        seed=seed,
                        family=family,
                        reason=outcome.reason,
                        instance=outcome.instance or {},
                        residual=render(outcome.residual),
                    )
                )
        minimums = dict(definition.witness_minimums)
        for name in definition.required_witnesses:
            count, need = witnesses.get(name, 0), minimums.get(name, 1)
            if count == 0:
                failures.append(
                    Failure(trial=-1, seed=seed, reason=f"no generated instance exercised the '{name}' direction")
                )
            elif count < need:
                failures.append(
                    Failure(trial=-1, seed=seed, reason=f"only {count} of the required {need} '{name}' instances")
                )

        float_max = None
        if float_check:
            float_max = 0.0
            for trial, (_, outcome) in enumerate(results):
                for residual in outcome.zero_residuals:
                    float_max = max(float_max, float_crosscheck(residual, seed=seed + trial))
            if not within_tolerance(float_max):
                logger.warning(f"suite {suite}: float cross-check max {float_max} above tolerance")

        discrepancy = definition.summarize([o for _, o in results]) if definition.summarize else None
        ms = (time.perf_counter() - start) * 1000
        report = SuiteReport(
            suite=suite,
            trials=effective,
            verdict="pass" if not failures else "fail",
            failures=failures,
            ms=round(ms, 3),
            seed=seed,
            dim=dim,
            witnesses=witnesses,
            truth_table=truth_table,
            discrepancy=discrepancy,
            float_max=float_max,
        )
        logger.info(f"suite {suite}: {report.verdict} ({len(failures)} failures, {ms:.0f} ms)")
        return report

    def run_all(
        self,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        dim: Optional[int] = None,
        float_check: bool = False,
    ) -> AggregateReport:
        start = time.perf_counter()
        reports = [self.run_suite(s, trials, seed, dim, float_check) for s in self.known()]
        return AggregateReport(
            trials=settings.DEFAULT_TRIALS if trials is None else trials,
            seed=settings.DEFAULT_SEED if seed is None else seed,
            dim=settings.DEFAULT_DIM if dim is None else dim,
            verdict="pass" if all(r.verdict == "pass" for r in reports) else "fail",
            reports=reports,
            ms=round((time.perf_counter() - start) * 1000, 3),
        )


suite_runner = SuiteRunner()


def run_suite(suite: str, trials: Optional[int] = None, seed: Optional[int] = None, dim: Optional[int] = None, float_check: bool = False) -> SuiteReport:
    return suite_runner.run_suite(suite, trials, seed, dim, float_check)
