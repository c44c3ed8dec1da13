"""
塑性矩阵代数与广义结构构造器。

    build_diag_structure        diag(J₁, J₂*)
    build_m100_structure        diag(J, J*)
    build_two_tensor_structure  [[J₁, P∘g⁻¹], [g, J₂*]]，P = I − J₁J₂ − J₁² − J₂²
    build_dual_structure        [[J, (I − J²)∘g⁻¹], [g, 0]]

构造器精确校验全部前提，失败时把残差挂在异常上。
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from plastic_lab.app.core.errors import (
    InvalidParameterError,
    NotPlasticError,
    ScalarCanonicalFormError,
    StructurePreconditionError,
)
from plastic_lab.app.core.logger import logger
from plastic_lab.app.geometry.chart import Metric, Tensor02, Tensor11, Tensor20, gsym_residual, matmul
from plastic_lab.app.geometry.generalized import GenOperator
from plastic_lab.app.geometry.numberfield import ONE, RHO, ZERO, FieldElem
from plastic_lab.app.geometry.symfunc import RationalFn

PLASTIC = 1
DUAL = -1


@dataclass(frozen=True)
class Matrix2:
    a11: FieldElem
    a12: FieldElem
    a21: FieldElem
    a22: FieldElem

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "Matrix2":
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise InvalidParameterError("expected a 2x2 matrix")
        (a, b), (c, d) = rows
        return cls(FieldElem.coerce(a), FieldElem.coerce(b), FieldElem.coerce(c), FieldElem.coerce(d))

    @classmethod
    def parse(cls, text: str) -> "Matrix2":
        from plastic_lab.app.geometry.grammar import parse_matrix

        return cls.of(parse_matrix(text))

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(ONE, ZERO, ZERO, ONE)

    @classmethod
    def scalar(cls, value) -> "Matrix2":
        v = FieldElem.coerce(value)
        return cls(v, ZERO, ZERO, v)

    def rows(self) -> List[List[FieldElem]]:
        return [[self.a11, self.a12], [self.a21, self.a22]]

    def __add__(self, o: "Matrix2") -> "Matrix2":
        return Matrix2(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)

    def __sub__(self, o: "Matrix2") -> "Matrix2":
        return Matrix2(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)

    def __neg__(self) -> "Matrix2":
        return Matrix2(-self.a11, -self.a12, -self.a21, -self.a22)

    def scale(self, k) -> "Matrix2":
        k = FieldElem.coerce(k)
        return Matrix2(self.a11 * k, self.a12 * k, self.a21 * k, self.a22 * k)

    def __matmul__(self, o: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )

    def trace(self) -> FieldElem:
        return self.a11 + self.a22

    def det(self) -> FieldElem:
        return self.a11 * self.a22 - self.a12 * self.a21

    def inverse(self) -> "Matrix2":
        d = self.det()
        if d.is_zero():
            raise ZeroDivisionError("singular 2x2 matrix")
        inv = d.inv()
        return Matrix2(self.a22 * inv, -self.a12 * inv, -self.a21 * inv, self.a11 * inv)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in (self.a11, self.a12, self.a21, self.a22))

    def is_scalar(self, value=None) -> bool:
        if not (self.a12.is_zero() and self.a21.is_zero() and self.a11 == self.a22):
            return False
        return value is None or self.a11 == FieldElem.coerce(value)

    def to_tensor(self) -> Tensor11:
        return Tensor11([[RationalFn.constant(2, v) for v in row] for row in self.rows()])

    def to_strings(self) -> List[List[str]]:
        return [[str(v) for v in row] for row in self.rows()]

    def __str__(self) -> str:
        return "; ".join(", ".join(str(v) for v in row) for row in self.rows())


def canonical_plastic() -> Matrix2:
    """B = [[α, 1−α²],[1, 0]]，α = −ρ"""
    a = -RHO
    return Matrix2(a, ONE - a * a, ONE, ZERO)


def matrix_cubic_residual(A: Union[Matrix2, Tensor11], sign: int = PLASTIC):
    """A³ − A − sign·I"""
    if sign not in (PLASTIC, DUAL):
        raise InvalidParameterError("sign must be +1 or -1")
    if isinstance(A, Matrix2):
        return (A @ A @ A) - A - Matrix2.scalar(sign)
    return (A @ A @ A) - A - Tensor11.scalar(A.dim, sign)


def is_plastic(A: Union[Matrix2, Tensor11], sign: int = PLASTIC) -> bool:
    return matrix_cubic_residual(A, sign).is_zero()


def make_plastic_2x2(a11, a21, a22) -> Matrix2:
    a11, a21, a22 = (FieldElem.coerce(v) for v in (a11, a21, a22))
    if a21.is_zero():
        raise InvalidParameterError("a21 must be non-zero")
    t = a11 + a22
    trace_residual = t * t * t - t + 1
    if not trace_residual.is_zero():
        raise InvalidParameterError(
            f"trace {t} fails (trA)^3 - trA + 1 = 0 (residual {trace_residual}); over Q(rho) the trace must be -rho"
        )
    a12 = (ONE - a11 * a22 - a11 * a11 - a22 * a22) / a21
    A = Matrix2(a11, a12, a21, a22)
    residual = matrix_cubic_residual(A)
    if not residual.is_zero():
        raise NotPlasticError("constructed matrix is not plastic", residual)
    return A


def make_plastic_from_trace(a11, a21) -> Matrix2:
    """a22 = −ρ − a11 使迹条件自动成立"""
    a11 = FieldElem.coerce(a11)
    return make_plastic_2x2(a11, a21, -RHO - a11)


def canonical_form(A: Matrix2) -> Tuple[Matrix2, Matrix2]:
    """返回 (C, B)，满足 C·A = B·C，C = [[a21, a22],[0, 1]]"""
    if A.is_scalar(RHO):
        raise ScalarCanonicalFormError("A = rho*I is already canonical")
    residual = matrix_cubic_residual(A)
    if not residual.is_zero():
        raise NotPlasticError("matrix does not satisfy A^3 - A - I = 0", residual)
    if A.a21.is_zero():
        raise NotPlasticError("plastic matrix with a21 = 0 must be rho*I", residual)
    C = Matrix2(A.a21, A.a22, ZERO, ONE)
    B = canonical_plastic()
    if not ((C @ A) - (B @ C)).is_zero():
        raise NotPlasticError("conjugation identity C*A = B*C failed", (C @ A) - (B @ C))
    return C, B


def classify_matrix(A: Matrix2) -> Dict[str, Any]:
    residual = matrix_cubic_residual(A)
    dual_residual = matrix_cubic_residual(A, DUAL)
    result: Dict[str, Any] = {
        "plastic": residual.is_zero(),
        "dual": dual_residual.is_zero(),
        "branch": "none",
        "C": None,
        "B": None,
        "residual": residual.to_strings(),
    }
    if not result["plastic"]:
        return result
    try:
        C, B = canonical_form(A)
    except ScalarCanonicalFormError:
        result["branch"] = "scalar"
        return result
    result.update(branch="conjugate", C=C.to_strings(), B=B.to_strings())
    return result


# ---------------------------------------------------------------------------
# n×n 块对角塑性张量
# ---------------------------------------------------------------------------


def block_diagonal(blocks: Sequence[Union[FieldElem, Matrix2]]) -> Tensor11:
    """标量块 (1×1) 与 2×2 块拼成常系数 (1,1)-张量"""
    sizes = [1 if isinstance(b, FieldElem) else 2 for b in blocks]
    n = sum(sizes)
    entries = [[ZERO] * n for _ in range(n)]
    offset = 0
    for block, size in zip(blocks, sizes):
        if size == 1:
            entries[offset][offset] = block
        else:
            for i, row in enumerate(block.rows()):
                for j, v in enumerate(row):
                    entries[offset + i][offset + j] = v
        offset += size
    return Tensor11([[RationalFn.constant(n, v) for v in row] for row in entries])


def unipotent_inverse(U: Tensor11) -> Tensor11:
    """U = I + N，N 严格下三角 (幂零)：U⁻¹ = Σₖ (−N)ᵏ"""
    n = U.dim
    I = Tensor11.identity(n)
    N = U - I
    result = I
    term = I
    for _ in range(1, n):
        term = term @ (-N)
        if term.is_zero():
            break
        result = result + term
    return result


def conjugate(D: Tensor11, U: Tensor11, U_inv: Optional[Tensor11] = None) -> Tensor11:
    """U⁻¹ D U"""
    U_inv = U_inv if U_inv is not None else U.inverse()
    return U_inv @ D @ U


# ---------------------------------------------------------------------------
# 广义结构构造器
# ---------------------------------------------------------------------------


def _require(J: Tensor11, sign: int, name: str) -> None:
    residual = matrix_cubic_residual(J, sign)
    if not residual.is_zero():
        equation = "J^3 - J - I" if sign == PLASTIC else "J^3 - J + I"
        raise NotPlasticError(f"{name} does not satisfy {equation} = 0", residual)


def build_diag_structure(J1: Tensor11, J2: Tensor11) -> GenOperator:
    _require(J1, PLASTIC, "J1")
    _require(J2, PLASTIC, "J2")
    n = J1.dim
    return GenOperator(J1, Tensor20.zero(n), Tensor02.zero(n), J2)


def build_m100_structure(J: Tensor11) -> GenOperator:
    return build_diag_structure(J, J)


def two_tensor_violations(g: Metric, J1: Tensor11, J2: Tensor11, dual: bool = False) -> List[Tuple[str, Any]]:
    violations: List[Tuple[str, Any]] = []
    commutator = (J1 @ J2) - (J2 @ J1)
    if not commutator.is_zero():
        violations.append(("commute", commutator))
    # 标准模式要求 J₁+J₂ 满足对偶方程；对偶模式要求它满足塑性方程
    sum_residual = matrix_cubic_residual(J1 + J2, PLASTIC if dual else DUAL)
    if not sum_residual.is_zero():
        violations.append(("sum_cubic", sum_residual))
    for name, J in (("g_symmetric_J1", J1), ("g_symmetric_J2", J2)):
        residual = gsym_residual(g, J)
        if not residual.is_zero():
            violations.append((name, residual))
    return violations


def build_two_tensor_structure(g: Metric, J1: Tensor11, J2: Tensor11, dual: bool = False) -> GenOperator:
    """
    [[J₁, P∘g⁻¹], [g, J₂*]]。条件 (交换、和满足三次方程、两者 g-对称) 逐条校验。
    dual=False：J₁+J₂ 满足 x³−x+1=0，结果满足 Ĵ³−Ĵ−I=0；
    dual=True ：J₁+J₂ 满足 x³−x−1=0，结果满足 Ĵ³−Ĵ+I=0。
    """
    violations = two_tensor_violations(g, J1, J2, dual)
    if violations:
        logger.debug(f"two-tensor structure rejected: {[name for name, _ in violations]}")
        raise StructurePreconditionError(violations)
    n = J1.dim
    P = Tensor11.identity(n) - (J1 @ J2) - (J1 @ J1) - (J2 @ J2)
    tf = Tensor20(matmul(P.rows, g.inverse.rows))
    return GenOperator(J1, tf, Tensor02(g.rows), J2)


def build_dual_structure(g: Metric, J: Tensor11) -> GenOperator:
    _require(J, DUAL, "J")
    n = J.dim
    P = Tensor11.identity(n) - (J @ J)
    tf = Tensor20(matmul(P.rows, g.inverse.rows))
    return GenOperator(J, tf, Tensor02(g.rows), Tensor11.zero(n))


# ---------------------------------------------------------------------------
# 金属结构 J² = pJ + qI
# ---------------------------------------------------------------------------


def metallic_companion(p, q) -> Matrix2:
    """x² − px − q 的友矩阵，满足 J² = pJ + qI"""
    return Matrix2(ZERO, FieldElem.coerce(q), ONE, FieldElem.coerce(p))


def metallic_compat(p, q, reading: str = "integer") -> Dict[str, Any]:
    """
    J² = pJ + qI 时
        J³ − J − I = (p²+q−1)J + (pq−1)I
        J³ − J + I = (p²+q−1)J + (pq+1)I
    分支 1：两个系数同时为零；分支 2：p²+q−1 ≠ 0，J 被迫为标量。
    reading="integer" 要求 p, q 为正整数；reading="symbolic" 接受 Q(ρ) 中的值。
    """
    if reading == "integer":
        for name, v in (("p", p), ("q", q)):
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise InvalidParameterError(f"{name} must be a positive integer, got {v!r}")
    elif reading != "symbolic":
        raise InvalidParameterError(f"unknown reading {reading!r}")
    p, q = FieldElem.coerce(p), FieldElem.coerce(q)
    lead = p * p + q - 1

    def branches(sign: int) -> Dict[str, Any]:
        # sign = +1: x³−x−1；sign = −1: x³−x+1
        constant = p * q - 1 if sign == PLASTIC else p * q + 1
        branch1_poly = p * p * p - p + 1 if sign == PLASTIC else p * p * p - p - 1
        q_required = ONE - p * p
        branch1 = {
            "possible": lead.is_zero() and constant.is_zero(),
            "p_residual": str(branch1_poly),
            "q_required": str(q_required),
        }
        if lead.is_zero():
            branch2: Dict[str, Any] = {"applicable": False, "scalar": None, "satisfies": False}
        else:
            c = -constant / lead
            cubic = c * c * c - c - sign
            branch2 = {"applicable": True, "scalar": str(c), "satisfies": cubic.is_zero()}
        return {"branch1": branch1, "branch2": branch2}

    return {
        "p": str(p),
        "q": str(q),
        "reading": reading,
        "plastic": branches(PLASTIC),
        "dual": branches(DUAL),
    }


def metallic_identity_holds(p, q) -> bool:
    """在友矩阵上精确校验两个展开恒等式"""
    p, q = FieldElem.coerce(p), FieldElem.coerce(q)
    J = metallic_companion(p, q)
    lead = p * p + q - 1
    ok_plastic = matrix_cubic_residual(J, PLASTIC) == J.scale(lead) + Matrix2.scalar(p * q - 1)
    ok_dual = matrix_cubic_residual(J, DUAL) == J.scale(lead) + Matrix2.scalar(p * q + 1)
    return ok_plastic and ok_dual
