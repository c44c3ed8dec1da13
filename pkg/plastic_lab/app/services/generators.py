"""
随机实例生成器。

随机源统一为 numpy Generator (PCG64)，种子 SeedSequence([seed, trial])，
同一 (spec, seed, trial) 总是得到同一个实例。

带约束的生成全部化为 Q(ρ) 上齐次线性方程组的零空间，再随机线性组合：
    g-自伴度量    G·D = Dᵀ·G                   (对称未知量)
    平行联络      [Aᵢ, D] = 0，Γᵢ = U⁻¹AᵢU + U⁻¹∂ᵢU  (标架内求解后规范变换)
    ∇g = 0        AᵢᵀG + G·Aᵢ = 0
    无挠 / 拟统计   直接在 Γᵏᵢⱼ 上列方程 (要求 J、g 为常数)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from plastic_lab.app.core.config import settings
from plastic_lab.app.core.errors import DegenerateMetricError, InfeasibleSpecError, InvalidParameterError
from plastic_lab.app.core.logger import logger
from plastic_lab.app.geometry.chart import Chart, Metric, OneForm, Tensor11, VectorField, matmul
from plastic_lab.app.geometry.connection import Connection, is_integrable
from plastic_lab.app.geometry.generalized import GenSection
from plastic_lab.app.geometry.numberfield import ONE, RHO, ZERO, FieldElem, nullspace
from plastic_lab.app.geometry.plastic import DUAL, PLASTIC, Matrix2, block_diagonal, canonical_plastic, unipotent_inverse
from plastic_lab.app.geometry.symfunc import Polynomial, RationalFn
from plastic_lab.app.schemas.scenario import InstanceSpec

ConstRows = List[List[FieldElem]]


class _Resample(Exception):
    """抽到的实例不满足要求，换一组随机数重来"""


# ---------------------------------------------------------------------------
# 随机源
# ---------------------------------------------------------------------------


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    if seed < 0 or trial < 0:
        raise InvalidParameterError(f"seed and trial must be non-negative, got seed={seed}, trial={trial}")
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def random_rational(rng: np.random.Generator, bound: int = 3, nonzero: bool = False) -> Fraction:
    while True:
        value = Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, 4)))
        if value or not nonzero:
            return value


def random_field_elem(rng: np.random.Generator, rational: bool = False, nonzero: bool = False) -> FieldElem:
    while True:
        if rational or rng.random() < 0.5:
            value = FieldElem(random_rational(rng))
        else:
            value = FieldElem(random_rational(rng), random_rational(rng), random_rational(rng))
        if not nonzero or not value.is_zero():
            return value


def random_monomial(rng: np.random.Generator, n: int, degree: int) -> Tuple[int, ...]:
    exp = [0] * n
    for idx in rng.integers(0, n, size=int(rng.integers(0, degree + 1))):
        exp[int(idx)] += 1
    return tuple(exp)


def random_polynomial(
    rng: np.random.Generator,
    n: int,
    degree: int,
    max_terms: Optional[int] = None,
    nonconstant: bool = False,
    rational: bool = True,
) -> Polynomial:
    max_terms = max_terms or settings.MAX_TERMS
    while True:
        terms: Dict[Tuple[int, ...], FieldElem] = {}
        for _ in range(int(rng.integers(1, max_terms + 1))):
            exp = random_monomial(rng, n, degree)
            terms[exp] = terms.get(exp, ZERO) + random_field_elem(rng, rational=rational, nonzero=True)
        p = Polynomial(n, terms)
        if p.is_zero():
            continue
        if nonconstant and degree > 0 and p.is_constant():
            continue
        return p


def random_function(rng: np.random.Generator, n: int, degree: int, nonconstant: bool = False) -> RationalFn:
    return RationalFn.from_polynomial(random_polynomial(rng, n, degree, max_terms=2, nonconstant=nonconstant))


def random_section(rng: np.random.Generator, n: int, degree: int = 1) -> GenSection:
    vec = VectorField([random_function(rng, n, degree) for _ in range(n)])
    form = OneForm([random_function(rng, n, degree) for _ in range(n)])
    return GenSection(vec, form)


def random_section_pairs(
    rng: np.random.Generator, n: int, count: Optional[int] = None, degree: int = 1
) -> List[Tuple[GenSection, GenSection]]:
    count = settings.RANDOM_SECTION_PAIRS if count is None else count
    return [(random_section(rng, n, degree), random_section(rng, n, degree)) for _ in range(count)]


# ---------------------------------------------------------------------------
# 实例
# ---------------------------------------------------------------------------


@dataclass
class Instance:
    spec: InstanceSpec
    seed: int
    trial: int
    chart: Chart
    frame: Tensor11
    T: Optional[Tensor11] = None
    J1: Optional[Tensor11] = None
    J2: Optional[Tensor11] = None
    g: Optional[Metric] = None
    nabla: Optional[Connection] = None

    @property
    def dim(self) -> int:
        return self.chart.dim

    def describe(self) -> Dict[str, Any]:
        """失败记录里的实例序列化 (字符串文法)"""
        data: Dict[str, Any] = {
            "spec": self.spec.model_dump(),
            "seed": self.seed,
            "trial": self.trial,
            "coords": list(self.chart.coords),
        }
        for name in ("T", "J1", "J2"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value.to_strings(self.chart.coords)
        if self.g is not None:
            data["metric"] = self.g.to_strings(self.chart.coords)
        if self.nabla is not None:
            data["christoffels"] = self.nabla.to_strings(self.chart.coords)
        return data


def _is_constant(tensor) -> bool:
    return all(e.is_constant() for e in tensor.entries())


def constant_rows(tensor, what: str = "tensor") -> ConstRows:
    if not _is_constant(tensor):
        raise InfeasibleSpecError(f"{what} must be constant for the linear Christoffel solve")
    return [[e.constant_value() for e in row] for row in tensor.rows]


def _combine(n: int, basis: Sequence[ConstRows], coefficients: Sequence[RationalFn]) -> List[List[RationalFn]]:
    total = [[RationalFn.zero(n)] * n for _ in range(n)]
    for B, c in zip(basis, coefficients):
        if c.is_zero():
            continue
        total = [[total[i][j] + c * B[i][j] for j in range(n)] for i in range(n)]
    return total


def _coefficient(rng: np.random.Generator, n: int, degree: int, density: float = 0.7) -> RationalFn:
    if rng.random() > density:
        return RationalFn.zero(n)
    if degree > 0:
        return random_function(rng, n, min(degree, 1))
    return RationalFn.constant(n, random_rational(rng, nonzero=True))


# ---------------------------------------------------------------------------
# 可行性
# ---------------------------------------------------------------------------


def check_feasible(spec: InstanceSpec) -> None:
    block = spec.tensors > 0 and (spec.tensor == "block" or spec.non_integrable)
    if spec.non_integrable and spec.dim < 3:
        raise InfeasibleSpecError(
            "plastic tensors on a 2-dimensional chart are always integrable; a non-integrable one needs dim >= 3"
        )
    if spec.positive_definite and block and spec.g_symmetric:
        raise InfeasibleSpecError(
            "a positive-definite metric admits only scalar self-adjoint plastic tensors (J = rho*I)"
        )
    if spec.metric in ("hessian", "example") and block and spec.g_symmetric:
        raise InfeasibleSpecError(f"metric {spec.metric!r} is only self-adjoint for scalar tensors")
    if spec.connection == "levi_civita" and spec.metric == "none":
        raise InfeasibleSpecError("the Levi-Civita connection needs a metric")
    if (spec.quasi_statistical or spec.metric_parallel) and spec.metric == "none":
        raise InfeasibleSpecError("metric constraints on the connection need a metric")
    if spec.require_torsion and (spec.torsion_free or spec.connection in ("none", "flat", "levi_civita")):
        raise InfeasibleSpecError("torsion requested from a torsion-free connection family")
    if spec.connection == "solved":
        coordinate_solve = spec.torsion_free or spec.quasi_statistical
        if coordinate_solve and block and spec.frame == "polynomial":
            raise InfeasibleSpecError("the linear Christoffel solve needs constant tensors")
        metric_constant = spec.metric == "constant" or (spec.metric == "polynomial" and spec.degree == 0)
        if coordinate_solve and (spec.quasi_statistical or spec.metric_parallel):
            if not metric_constant or spec.frame == "polynomial":
                raise InfeasibleSpecError("the linear Christoffel solve needs a constant metric")
        if spec.metric_parallel and not metric_constant:
            raise InfeasibleSpecError("metric-parallel connections are drawn for constant frame metrics only")


# ---------------------------------------------------------------------------
# 张量、标架、度量
# ---------------------------------------------------------------------------


def _draw_blocks(spec: InstanceSpec, rng: np.random.Generator) -> Tuple[list, list]:
    n = spec.dim
    sign = PLASTIC if spec.cubic == "plastic" else DUAL
    scalar = RHO if sign == PLASTIC else -RHO
    S = canonical_plastic() if sign == PLASTIC else -canonical_plastic()
    if spec.non_integrable:
        blocks = [S] + [scalar] * (n - 2)
    elif spec.tensor == "scalar":
        blocks = [scalar] * n
    else:
        count = 1 if n < 4 else int(rng.integers(1, 3))
        blocks = [S] * count + [scalar] * (n - 2 * count)
        blocks = [blocks[int(i)] for i in rng.permutation(len(blocks))]
    second = [
        b if isinstance(b, FieldElem) or rng.random() < 0.5 else Matrix2.scalar(scalar)
        for b in blocks
    ]
    return blocks, second


def _draw_frame(spec: InstanceSpec, rng: np.random.Generator) -> Tensor11:
    n = spec.dim
    rows = [[RationalFn.constant(n, 1 if i == j else 0) for j in range(n)] for i in range(n)]
    if spec.non_integrable:
        # U = I + c·x₂·E₃₁：D = diag(S, ρ, …) 共轭后 N(J) ≠ 0
        rows[2][0] = RationalFn.coordinate(n, 1) * random_rational(rng, nonzero=True)
        return Tensor11(rows)
    for i in range(n):
        for j in range(i):
            if rng.random() < 0.5:
                rows[i][j] = RationalFn.constant(n, random_rational(rng))
    if spec.frame == "polynomial" and spec.degree > 0:
        # 只有 (2,1) 位置是非常数，控制共轭后的次数
        rows[1][0] = random_function(rng, n, 1, nonconstant=True)
    return Tensor11(rows)


def gsym_metric_basis(Ds: Sequence[ConstRows], n: int) -> List[ConstRows]:
    """对称 G 满足 G·D = Dᵀ·G (对每个 D) 的零空间基"""
    unknowns = [(i, j) for i in range(n) for j in range(i, n)]
    index: Dict[Tuple[int, int], int] = {}
    for k, (i, j) in enumerate(unknowns):
        index[(i, j)] = index[(j, i)] = k
    rows = []
    for D in Ds:
        for a in range(n):
            for b in range(n):
                row = [ZERO] * len(unknowns)
                for c in range(n):
                    row[index[(a, c)]] = row[index[(a, c)]] + D[c][b]
                    row[index[(c, b)]] = row[index[(c, b)]] - D[c][a]
                if any(not v.is_zero() for v in row):
                    rows.append(row)
    return [[[vec[index[(i, j)]] for j in range(n)] for i in range(n)] for vec in nullspace(rows, len(unknowns))]


def _draw_metric(
    spec: InstanceSpec, rng: np.random.Generator, Ds: Sequence[ConstRows], U: Tensor11
) -> Tuple[Optional[ConstRows], Optional[Metric]]:
    n = spec.dim
    if spec.metric == "none":
        return None, None
    if spec.metric == "example":
        rows = [[RationalFn.constant(n, 1 if i == j else 0) for j in range(n)] for i in range(n)]
        rows[0][0] = RationalFn.coordinate(n, 0) + 2
        return None, Metric(rows)

    if spec.positive_definite:
        G = [[RationalFn.zero(n)] * n for _ in range(n)]
        for i in range(n):
            G[i][i] = RationalFn.constant(n, Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 3))))
    else:
        constraints = Ds if spec.g_symmetric and spec.tensors else []
        basis = gsym_metric_basis(constraints, n)
        if not basis:
            raise InfeasibleSpecError("no symmetric metric is self-adjoint for the drawn tensors")
        polynomial = spec.metric == "polynomial" and spec.degree > 0 and _is_constant(U)
        coefficients = []
        for k in range(len(basis)):
            if polynomial:
                coefficients.append(random_function(rng, n, 1, nonconstant=(k == 0)))
            else:
                coefficients.append(RationalFn.constant(n, random_rational(rng)))
        G = _combine(n, basis, coefficients)

    if spec.metric == "hessian":
        while True:
            phi = random_polynomial(rng, n, 3)
            if phi.degree() == 3:
                break
        rows = [[G[i][j] + RationalFn.from_polynomial(phi.partial(i).partial(j)) for j in range(n)] for i in range(n)]
        g = Metric(rows)
    else:
        g = Metric(matmul(U.transpose_rows(), matmul(G, U.rows)))
    if spec.metric in ("polynomial", "hessian") and spec.degree > 0 and _is_constant(g):
        raise _Resample("metric came out constant")
    G_const = [[e.constant_value() for e in row] for row in G] if all(e.is_constant() for row in G for e in row) else None
    return G_const, g


# ---------------------------------------------------------------------------
# 联络
# ---------------------------------------------------------------------------


def _generic_connection(spec: InstanceSpec, rng: np.random.Generator) -> Connection:
    n = spec.dim
    while True:
        gammas = [[[_coefficient(rng, n, spec.degree, density=0.4) for _ in range(n)] for _ in range(n)] for _ in range(n)]
        nabla = Connection(gammas)
        if not all(c.is_zero() for c in nabla.entries()):
            return nabla


def _gauge_connection(
    spec: InstanceSpec,
    rng: np.random.Generator,
    Ds: Sequence[ConstRows],
    U: Tensor11,
    U_inv: Tensor11,
    G: Optional[ConstRows],
) -> Connection:
    """标架内 Aᵢ 满足常系数约束，Γᵢ = U⁻¹AᵢU + U⁻¹∂ᵢU"""
    n = spec.dim

    def var(a: int, b: int) -> int:
        return a * n + b

    rows = []
    if spec.parallel:
        for D in Ds:
            for a in range(n):
                for b in range(n):
                    row = [ZERO] * (n * n)
                    for c in range(n):
                        row[var(a, c)] = row[var(a, c)] + D[c][b]
                        row[var(c, b)] = row[var(c, b)] - D[a][c]
                    rows.append(row)
    if spec.metric_parallel:
        if G is None:
            raise InfeasibleSpecError("metric-parallel connections need a constant frame metric")
        for a in range(n):
            for b in range(n):
                row = [ZERO] * (n * n)
                for c in range(n):
                    row[var(c, a)] = row[var(c, a)] + G[c][b]
                    row[var(c, b)] = row[var(c, b)] + G[a][c]
                rows.append(row)
    basis = [[[vec[var(a, b)] for b in range(n)] for a in range(n)] for vec in nullspace(rows, n * n)]
    gammas = []
    for i in range(n):
        A = Tensor11(_combine(n, basis, [_coefficient(rng, n, spec.degree) for _ in basis]))
        dU = Tensor11([[e.partial(i) for e in row] for row in U.rows])
        gammas.append(U_inv @ A @ U + U_inv @ dU)
    return Connection.from_matrices(gammas)


def _coordinate_connection(
    spec: InstanceSpec,
    rng: np.random.Generator,
    tensors: Sequence[Tensor11],
    g: Optional[Metric],
) -> Connection:
    """直接在 Γᵏᵢⱼ 上求解 (J、g 为常数，系数可为多项式)"""
    n = spec.dim
    size = n ** 3

    def var(k: int, i: int, j: int) -> int:
        return (k * n + i) * n + j

    rows = []
    if spec.parallel:
        for J in (constant_rows(t) for t in tensors):
            # (∇_{∂ᵢ}J)ᵏⱼ = Σₗ Γᵏᵢₗ Jˡⱼ − Jᵏₗ Γˡᵢⱼ
            for i in range(n):
                for k in range(n):
                    for j in range(n):
                        row = [ZERO] * size
                        for l in range(n):
                            row[var(k, i, l)] = row[var(k, i, l)] + J[l][j]
                            row[var(l, i, j)] = row[var(l, i, j)] - J[k][l]
                        rows.append(row)
    if spec.metric_parallel or spec.quasi_statistical:
        G = constant_rows(g, "metric")
        if spec.metric_parallel:
            # Σₗ Γˡᵢⱼ gₗₖ + Γˡᵢₖ gⱼₗ = 0
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        row = [ZERO] * size
                        for l in range(n):
                            row[var(l, i, j)] = row[var(l, i, j)] + G[l][k]
                            row[var(l, i, k)] = row[var(l, i, k)] + G[j][l]
                        rows.append(row)
        if spec.quasi_statistical:
            # Σₗ (−Γˡᵢₖ gⱼₗ + Γˡⱼₖ gᵢₗ) = 0
            for i in range(n):
                for j in range(i + 1, n):
                    for k in range(n):
                        row = [ZERO] * size
                        for l in range(n):
                            row[var(l, i, k)] = row[var(l, i, k)] - G[j][l]
                            row[var(l, j, k)] = row[var(l, j, k)] + G[i][l]
                        rows.append(row)
    if spec.torsion_free:
        for k in range(n):
            for i in range(n):
                for j in range(i + 1, n):
                    row = [ZERO] * size
                    row[var(k, i, j)] = ONE
                    row[var(k, j, i)] = -ONE
                    rows.append(row)
    basis = nullspace(rows, size)
    if spec.require_torsion and not any(
        vec[var(k, i, j)] != vec[var(k, j, i)] for vec in basis for k in range(n) for i in range(n) for j in range(n)
    ):
        raise InfeasibleSpecError("every connection satisfying the constraints is torsion-free")
    gammas = [[[RationalFn.zero(n)] * n for _ in range(n)] for _ in range(n)]
    for vec in basis:
        c = _coefficient(rng, n, spec.degree)
        if c.is_zero():
            continue
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    v = vec[var(k, i, j)]
                    if not v.is_zero():
                        gammas[k][i][j] = gammas[k][i][j] + c * v
    return Connection(gammas)


def _draw_connection(
    spec: InstanceSpec,
    rng: np.random.Generator,
    Ds: Sequence[ConstRows],
    U: Tensor11,
    U_inv: Tensor11,
    G: Optional[ConstRows],
    g: Optional[Metric],
    tensors: Sequence[Tensor11],
) -> Optional[Connection]:
    n = spec.dim
    if spec.connection == "none":
        return None
    if spec.connection == "flat":
        return Connection.flat(n)
    if spec.connection == "levi_civita":
        return Connection.levi_civita(g)
    if spec.connection == "generic":
        return _generic_connection(spec, rng)
    if spec.torsion_free or spec.quasi_statistical:
        return _coordinate_connection(spec, rng, tensors, g)
    return _gauge_connection(spec, rng, Ds, U, U_inv, G)


# ---------------------------------------------------------------------------
# 入口
# ---------------------------------------------------------------------------


def _draw(spec: InstanceSpec, rng: np.random.Generator, seed: int, trial: int) -> Instance:
    n = spec.dim
    blocks, second = _draw_blocks(spec, rng)
    D1 = block_diagonal(blocks)
    Ds = [constant_rows(D1)]
    if spec.tensors == 2 and spec.pair == "independent":
        D2 = block_diagonal(second)
        Ds.append(constant_rows(D2))
    else:
        D2 = None
    U = _draw_frame(spec, rng)
    U_inv = unipotent_inverse(U)

    T = J1 = J2 = None
    if spec.tensors:
        T = U_inv @ D1 @ U
        block = spec.tensor == "block" or spec.non_integrable
        if block and not _is_constant(U) and _is_constant(T):
            raise _Resample("conjugated tensor came out constant")
        J1 = T
        if spec.tensors == 2:
            if spec.pair == "same":
                J2 = T
            elif spec.pair == "independent":
                J2 = U_inv @ D2 @ U
            else:
                lam, mu = random_rational(rng), random_rational(rng)
                T2 = T @ T
                J1 = T.scale(lam) + T2.scale(mu)
                J2 = T.scale(1 - lam) - T2.scale(mu)
        if spec.non_integrable and is_integrable(T):
            raise _Resample("witness tensor came out integrable")

    G, g = _draw_metric(spec, rng, Ds, U)
    tensors = [J for J in (J1, J2) if J is not None]
    nabla = _draw_connection(spec, rng, Ds, U, U_inv, G, g, tensors)
    if spec.require_torsion and (nabla is None or not nabla.has_torsion()):
        raise _Resample("connection came out torsion-free")
    return Instance(spec=spec, seed=seed, trial=trial, chart=Chart(n), frame=U, T=T, J1=J1, J2=J2, g=g, nabla=nabla)


def generate_instance(spec: InstanceSpec, seed: int, trial: int = 0) -> Instance:
    check_feasible(spec)
    rng = trial_rng(seed, trial)
    for attempt in range(settings.GENERATOR_ATTEMPTS):
        try:
            return _draw(spec, rng, seed, trial)
        except (_Resample, DegenerateMetricError) as exc:
            logger.debug(f"resampling instance (seed={seed}, trial={trial}, attempt {attempt + 1}): {exc}")
    raise InfeasibleSpecError(
        f"no instance found for {spec.model_dump()} after {settings.GENERATOR_ATTEMPTS} attempts"
    )
