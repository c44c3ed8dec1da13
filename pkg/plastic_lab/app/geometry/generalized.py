"""
广义切丛 TM⊕T*M：截面、三种配对、提升联络 ∇̂ / ∇̌、括号 [·,·]_∇、
块算子 Ĵ 及其协变导数、广义 Nijenhuis 张量 N^∇(Ĵ)。
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from plastic_lab.app.core.errors import DimensionMismatchError
from plastic_lab.app.geometry.chart import (
    Metric,
    OneForm,
    Tensor02,
    Tensor11,
    Tensor20,
    VectorField,
    matmul,
)
from plastic_lab.app.geometry.connection import Connection, lie_bracket, nijenhuis_tm
from plastic_lab.app.geometry.symfunc import RationalFn

HAT = "hat"
CHECK = "check"


class GenSection:
    """σ = X + η"""

    __slots__ = ("vec", "form")

    def __init__(self, vec: VectorField, form: OneForm):
        if vec.dim != form.dim:
            raise DimensionMismatchError(f"vector part has dimension {vec.dim}, form part {form.dim}")
        self.vec = vec
        self.form = form

    @property
    def dim(self) -> int:
        return self.vec.dim

    @classmethod
    def zero(cls, n: int) -> "GenSection":
        return cls(VectorField.zero(n), OneForm.zero(n))

    @classmethod
    def of_vector(cls, X: VectorField) -> "GenSection":
        return cls(X, OneForm.zero(X.dim))

    @classmethod
    def of_form(cls, eta: OneForm) -> "GenSection":
        return cls(VectorField.zero(eta.dim), eta)

    def __add__(self, other: "GenSection") -> "GenSection":
        return GenSection(self.vec + other.vec, self.form + other.form)

    def __sub__(self, other: "GenSection") -> "GenSection":
        return GenSection(self.vec - other.vec, self.form - other.form)

    def __neg__(self) -> "GenSection":
        return GenSection(-self.vec, -self.form)

    def scale(self, f) -> "GenSection":
        return GenSection(self.vec.scale(f), self.form.scale(f))

    def is_zero(self) -> bool:
        return self.vec.is_zero() and self.form.is_zero()

    def entries(self) -> Iterator[RationalFn]:
        yield from self.vec.entries()
        yield from self.form.entries()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GenSection):
            return False
        return self.vec == other.vec and self.form == other.form

    __hash__ = None

    def to_dict(self, coords=None) -> Dict[str, List[str]]:
        return {"vec": self.vec.to_strings(coords), "form": self.form.to_strings(coords)}

    def __repr__(self) -> str:
        return f"GenSection({self.to_dict()})"


def basis_sections(n: int) -> Tuple[List[GenSection], List[GenSection]]:
    vectors = [GenSection.of_vector(VectorField.basis(n, i)) for i in range(n)]
    forms = [GenSection.of_form(OneForm.basis(n, i)) for i in range(n)]
    return vectors, forms


def basis_section_pairs(n: int) -> List[Tuple[str, GenSection, GenSection]]:
    """(∂ᵢ, ∂ⱼ) i<j，(∂ᵢ, dxʲ) 全部，(dxⁱ, dxʲ) i<j"""
    vectors, forms = basis_sections(n)
    pairs: List[Tuple[str, GenSection, GenSection]] = []
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append((f"(d{i + 1},d{j + 1})", vectors[i], vectors[j]))
    for i in range(n):
        for j in range(n):
            pairs.append((f"(d{i + 1},dx{j + 1})", vectors[i], forms[j]))
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append((f"(dx{i + 1},dx{j + 1})", forms[i], forms[j]))
    return pairs


# ---------------------------------------------------------------------------
# 配对
# ---------------------------------------------------------------------------


def pair_indefinite(sigma: GenSection, tau: GenSection) -> RationalFn:
    """⟨X+η, Y+β⟩ = −½(η(Y) + β(X))"""
    return (sigma.form(tau.vec) + tau.form(sigma.vec)) * Fraction(-1, 2)


def pair_symplectic(sigma: GenSection, tau: GenSection) -> RationalFn:
    """(X+η, Y+β) = −½(η(Y) − β(X))"""
    return (sigma.form(tau.vec) - tau.form(sigma.vec)) * Fraction(-1, 2)


def pair_gcheck(g: Metric, sigma: GenSection, tau: GenSection) -> RationalFn:
    """ǧ(X+η, Y+β) = g(X,Y) + g(♯η, ♯β)"""
    return g(sigma.vec, tau.vec) + g(g.sharp(sigma.form), g.sharp(tau.form))


# ---------------------------------------------------------------------------
# 提升联络与括号
# ---------------------------------------------------------------------------


def hat_nabla(nabla: Connection, g: Metric, sigma: GenSection, tau: GenSection) -> GenSection:
    """∇̂_{X+η}(Y+β) = ∇_X Y + ♭(∇_X ♯β)"""
    X = sigma.vec
    return GenSection(nabla.covariant(X, tau.vec), g.flat(nabla.covariant(X, g.sharp(tau.form))))


def check_nabla(nabla: Connection, sigma: GenSection, tau: GenSection) -> GenSection:
    """∇̌_{X+η}(Y+β) = ∇_X Y + ∇_X β"""
    X = sigma.vec
    return GenSection(nabla.covariant(X, tau.vec), nabla.covariant_form(X, tau.form))


def lifted_nabla(variant: str, nabla: Connection, g: Optional[Metric], sigma: GenSection, tau: GenSection) -> GenSection:
    if variant == HAT:
        if g is None:
            raise ValueError("the hat connection needs a metric")
        return hat_nabla(nabla, g, sigma, tau)
    if variant == CHECK:
        return check_nabla(nabla, sigma, tau)
    raise ValueError(f"unknown lifted connection {variant!r}")


def gen_bracket(nabla: Connection, sigma: GenSection, tau: GenSection) -> GenSection:
    """[X+η, Y+β]_∇ = [X,Y] + ∇_X β − ∇_Y η"""
    return GenSection(
        lie_bracket(sigma.vec, tau.vec),
        nabla.covariant_form(sigma.vec, tau.form) - nabla.covariant_form(tau.vec, sigma.form),
    )


# ---------------------------------------------------------------------------
# 块算子
# ---------------------------------------------------------------------------


class GenOperator:
    """
    Ĵ(X+η) = (TT·X + TF·η) + (FT·X + FF*·η)

    TT: TM→TM，TF: T*M→TM，FT: TM→T*M (按 (i_X FT) 作用)，
    FF 存的是底层 (1,1)-张量，对形式按对偶作用。
    """

    __slots__ = ("tt", "tf", "ft", "ff")

    def __init__(self, tt: Tensor11, tf: Tensor20, ft: Tensor02, ff: Tensor11):
        dims = {tt.dim, tf.dim, ft.dim, ff.dim}
        if len(dims) != 1:
            raise DimensionMismatchError(f"block dimensions disagree: {sorted(dims)}")
        self.tt = tt if type(tt) is Tensor11 else Tensor11(tt.rows)
        self.tf = tf if type(tf) is Tensor20 else Tensor20(tf.rows)
        self.ft = ft if type(ft) is Tensor02 else Tensor02(ft.rows)
        self.ff = ff if type(ff) is Tensor11 else Tensor11(ff.rows)

    @property
    def dim(self) -> int:
        return self.tt.dim

    @classmethod
    def zero(cls, n: int) -> "GenOperator":
        return cls(Tensor11.zero(n), Tensor20.zero(n), Tensor02.zero(n), Tensor11.zero(n))

    @classmethod
    def scalar(cls, n: int, value) -> "GenOperator":
        return cls(Tensor11.scalar(n, value), Tensor20.zero(n), Tensor02.zero(n), Tensor11.scalar(n, value))

    @classmethod
    def identity(cls, n: int) -> "GenOperator":
        return cls.scalar(n, 1)

    def apply(self, sigma: GenSection) -> GenSection:
        X, eta = sigma.vec, sigma.form
        return GenSection(
            self.tt.apply(X) + self.tf.apply(eta),
            self.ft.contract(X) + self.ff.dual(eta),
        )

    # 2n×2n 矩阵：[[TT, TF], [FTᵀ, FFᵀ]] 作用在列向量 (X; η) 上
    def block_rows(self) -> List[List[RationalFn]]:
        n = self.dim
        top = [list(self.tt.rows[i]) + list(self.tf.rows[i]) for i in range(n)]
        bottom = [
            [self.ft.rows[j][i] for j in range(n)] + [self.ff.rows[j][i] for j in range(n)]
            for i in range(n)
        ]
        return top + bottom

    @classmethod
    def from_block_rows(cls, rows: Sequence[Sequence[RationalFn]]) -> "GenOperator":
        n = len(rows) // 2
        tt = [[rows[i][j] for j in range(n)] for i in range(n)]
        tf = [[rows[i][n + j] for j in range(n)] for i in range(n)]
        ft = [[rows[n + b][a] for b in range(n)] for a in range(n)]
        ff = [[rows[n + b][n + a] for b in range(n)] for a in range(n)]
        return cls(Tensor11(tt), Tensor20(tf), Tensor02(ft), Tensor11(ff))

    def __matmul__(self, other: "GenOperator") -> "GenOperator":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {other.dim}")
        return GenOperator.from_block_rows(matmul(self.block_rows(), other.block_rows()))

    def compose(self, other: "GenOperator") -> "GenOperator":
        return self @ other

    def __add__(self, other: "GenOperator") -> "GenOperator":
        return GenOperator(self.tt + other.tt, self.tf + other.tf, self.ft + other.ft, self.ff + other.ff)

    def __sub__(self, other: "GenOperator") -> "GenOperator":
        return GenOperator(self.tt - other.tt, self.tf - other.tf, self.ft - other.ft, self.ff - other.ff)

    def __neg__(self) -> "GenOperator":
        return GenOperator(-self.tt, -self.tf, -self.ft, -self.ff)

    def scale(self, f) -> "GenOperator":
        return GenOperator(self.tt.scale(f), self.tf.scale(f), self.ft.scale(f), self.ff.scale(f))

    def __pow__(self, k: int) -> "GenOperator":
        result = GenOperator.identity(self.dim)
        for _ in range(k):
            result = result @ self
        return result

    def cubic_residual(self, sign: int = 1) -> "GenOperator":
        """Ĵ³ − Ĵ − sign·I"""
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        square = self @ self
        return (square @ self) - self - GenOperator.scalar(self.dim, sign)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.entries())

    def entries(self) -> Iterator[RationalFn]:
        for block in (self.tt, self.tf, self.ft, self.ff):
            yield from block.entries()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GenOperator) or other.dim != self.dim:
            return False
        return self.tt == other.tt and self.tf == other.tf and self.ft == other.ft and self.ff == other.ff

    __hash__ = None

    def to_dict(self, coords=None) -> Dict[str, List[List[str]]]:
        return {
            "TT": self.tt.to_strings(coords),
            "TF": self.tf.to_strings(coords),
            "FT": self.ft.to_strings(coords),
            "FF": self.ff.to_strings(coords),
        }

    def __repr__(self) -> str:
        return f"GenOperator({self.to_dict()})"


def gen_op_apply(J: GenOperator, sigma: GenSection) -> GenSection:
    return J.apply(sigma)


def gen_op_compose(J: GenOperator, K: GenOperator) -> GenOperator:
    return J @ K


def gen_cubic_residual(J: GenOperator, sign: int = 1) -> GenOperator:
    return J.cubic_residual(sign)


# ---------------------------------------------------------------------------
# 协变导数
# ---------------------------------------------------------------------------


def gen_cov_deriv(variant: str, nabla: Connection, g: Optional[Metric], J: GenOperator, X: VectorField) -> GenOperator:
    """
    (∇Ĵ)_X (τ) = ∇_X(Ĵτ) − Ĵ(∇_X τ)，在基截面 ∂ⱼ, dxʲ 上求值后拼回块算子。
    方向槽只用到 X。
    """
    n = J.dim
    direction = GenSection.of_vector(X)
    vectors, forms = basis_sections(n)

    def column(tau: GenSection) -> GenSection:
        return lifted_nabla(variant, nabla, g, direction, J.apply(tau)) - J.apply(
            lifted_nabla(variant, nabla, g, direction, tau)
        )

    from_vectors = [column(t) for t in vectors]
    from_forms = [column(t) for t in forms]
    tt = [[from_vectors[j].vec[i] for j in range(n)] for i in range(n)]
    tf = [[from_forms[j].vec[i] for j in range(n)] for i in range(n)]
    ft = [list(from_vectors[j].form.components) for j in range(n)]
    ff = [list(from_forms[j].form.components) for j in range(n)]
    return GenOperator(Tensor11(tt), Tensor20(tf), Tensor02(ft), Tensor11(ff))


def gen_is_parallel(variant: str, nabla: Connection, g: Optional[Metric], J: GenOperator) -> bool:
    n = J.dim
    return all(gen_cov_deriv(variant, nabla, g, J, VectorField.basis(n, i)).is_zero() for i in range(n))


# ---------------------------------------------------------------------------
# 广义 Nijenhuis 张量
# ---------------------------------------------------------------------------


def gen_nijenhuis(nabla: Connection, J: GenOperator, sigma: GenSection, tau: GenSection) -> GenSection:
    """N^∇(Ĵ)(σ,τ) = [Ĵσ,Ĵτ]_∇ − Ĵ[Ĵσ,τ]_∇ − Ĵ[σ,Ĵτ]_∇ + Ĵ²[σ,τ]_∇"""
    Js, Jt = J.apply(sigma), J.apply(tau)
    return (
        gen_bracket(nabla, Js, Jt)
        - J.apply(gen_bracket(nabla, Js, tau))
        - J.apply(gen_bracket(nabla, sigma, Jt))
        + J.apply(J.apply(gen_bracket(nabla, sigma, tau)))
    )


def nijenhuis_failure(
    nabla: Connection,
    J: GenOperator,
    extra_pairs: Sequence[Tuple[GenSection, GenSection]] = (),
) -> Optional[Tuple[str, GenSection]]:
    """返回第一个使 N^∇(Ĵ) 非零的截面对 (标签, 残差)；全部为零时返回 None"""
    for label, sigma, tau in basis_section_pairs(J.dim):
        value = gen_nijenhuis(nabla, J, sigma, tau)
        if not value.is_zero():
            return label, value
    for k, (sigma, tau) in enumerate(extra_pairs):
        value = gen_nijenhuis(nabla, J, sigma, tau)
        if not value.is_zero():
            return f"random#{k}", value
    return None


def is_nabla_integrable(
    nabla: Connection,
    J: GenOperator,
    extra_pairs: Sequence[Tuple[GenSection, GenSection]] = (),
) -> bool:
    return nijenhuis_failure(nabla, J, extra_pairs) is None


# ---------------------------------------------------------------------------
# 展开公式 (与定义式计算互相校验)
# ---------------------------------------------------------------------------


def expanded_diag_derivative(
    variant: str, nabla: Connection, g: Optional[Metric], J1: Tensor11, J2: Tensor11, X: VectorField, tau: GenSection
) -> GenSection:
    """
    对角结构 diag(J₁, J₂*)：
        hat   (∇_X J₁)Y + ♭((∇_X J₂)♯β)
        check (∇_X J₁)Y + (∇_X J₂)*β
    """
    vec = nabla.covariant_tensor(X, J1).apply(tau.vec)
    dJ2 = nabla.covariant_tensor(X, J2)
    if variant == HAT:
        form = g.flat(dJ2.apply(g.sharp(tau.form)))
    else:
        form = dJ2.dual(tau.form)
    return GenSection(vec, form)


def expanded_two_tensor_derivative(
    variant: str, nabla: Connection, g: Metric, J1: Tensor11, J2: Tensor11, X: VectorField, tau: GenSection
) -> GenSection:
    """
    双张量结构，P = I − J₁J₂ − J₁² − J₂²：
        hat   (∇_X J₁)Y + (∇_X P)♯β  +  ♭((∇_X J₂)♯β)
        check (∇_X J₁)Y + ∇_X(P♯β) − P♯(∇_X β)  +  (∇_X g)(Y,·) + (∇_X J₂)*β
    """
    n = J1.dim
    P = Tensor11.identity(n) - (J1 @ J2) - (J1 @ J1) - (J2 @ J2)
    Y, beta = tau.vec, tau.form
    vec = nabla.covariant_tensor(X, J1).apply(Y)
    dJ2 = nabla.covariant_tensor(X, J2)
    if variant == HAT:
        vec = vec + nabla.covariant_tensor(X, P).apply(g.sharp(beta))
        form = g.flat(dJ2.apply(g.sharp(beta)))
    else:
        vec = vec + nabla.covariant(X, P.apply(g.sharp(beta))) - P.apply(g.sharp(nabla.covariant_form(X, beta)))
        form = nabla.covariant_metric(X, g).contract(Y) + dJ2.dual(beta)
    return GenSection(vec, form)


def _q(nabla: Connection, g: Metric, X: VectorField, Y: VectorField) -> OneForm:
    return nabla.quasi_statistical_residual(g, X, Y)


def display_vector_pair(nabla: Connection, g: Metric, J: Tensor11, X: VectorField, Y: VectorField) -> GenSection:
    """
    对偶结构 [[J, P♯],[♭, 0]] (P = I − J²) 在 (X, Y) 上的展开式：
        N(J)(X,Y) + P♯Q(Y,X)
        + Q(JX,Y) + Q(X,JY) + Q(Y,X) + (∇_Y J)*♭X − (∇_X J)*♭Y + J*Q(Y,X)
    Q(X,Y) = (∇_X g)(Y,·) − (∇_Y g)(X,·) + ♭T(X,Y)
    """
    n = J.dim
    P = Tensor11.identity(n) - (J @ J)
    qyx = _q(nabla, g, Y, X)
    vec = nijenhuis_tm(J, X, Y) + P.apply(g.sharp(qyx))
    form = (
        _q(nabla, g, J.apply(X), Y)
        + _q(nabla, g, X, J.apply(Y))
        + qyx
        + nabla.covariant_tensor(Y, J).dual(g.flat(X))
        - nabla.covariant_tensor(X, J).dual(g.flat(Y))
        + J.dual(qyx)
    )
    return GenSection(vec, form)


def display_mixed_pair(nabla: Connection, g: Metric, J: Tensor11, X: VectorField, Z: VectorField) -> GenSection:
    """(X, ♭Z)：−♯Q(JX,PZ) + J♯Q(X,PZ)  +  Q(X,Z) − Q(X,J²Z)"""
    n = J.dim
    J2 = J @ J
    P = Tensor11.identity(n) - J2
    PZ = P.apply(Z)
    vec = -g.sharp(_q(nabla, g, J.apply(X), PZ)) + J.apply(g.sharp(_q(nabla, g, X, PZ)))
    form = _q(nabla, g, X, Z) - _q(nabla, g, X, J2.apply(Z))
    return GenSection(vec, form)


def display_form_pair(
    nabla: Connection, g: Metric, J: Tensor11, Z: VectorField, W: VectorField, printed: bool = True
) -> GenSection:
    """
    (♭Z, ♭W)：♯[Q(W,Z) + Q(J²W,J²Z) + Q(Z,J²W) + R]，形式部分为零。
    printed=True 时 R = (∇_{J²Z}g)(W,·) − (∇_W g)(J²W,·) + ♭T(J²Z,W) (书面展开式)；
    printed=False 时 R = Q(J²Z, W)。
    """
    n = J.dim
    J2 = J @ J
    J2Z, J2W = J2.apply(Z), J2.apply(W)
    if printed:
        R = (
            nabla.covariant_metric(J2Z, g).contract(W)
            - nabla.covariant_metric(W, g).contract(J2W)
            + g.flat(nabla.torsion(J2Z, W))
        )
    else:
        R = _q(nabla, g, J2Z, W)
    total = _q(nabla, g, W, Z) + _q(nabla, g, J2W, J2Z) + _q(nabla, g, Z, J2W) + R
    return GenSection(g.sharp(total), OneForm.zero(n))
