"""
单一坐标卡 M = Rⁿ 上的张量场。所有分量都是 n 元 RationalFn。

指标约定：
    Tensor11   J[i][j] = Jⁱⱼ，(JX)ⁱ = Σⱼ Jⁱⱼ Xʲ，(J*η)ⱼ = Σᵢ ηᵢ Jⁱⱼ
    Tensor02   B[i][j] = Bᵢⱼ，(i_X B)ⱼ = Σᵢ Xⁱ Bᵢⱼ
    Tensor20   H[i][j] = Hⁱʲ，(Hη)ⁱ = Σⱼ Hⁱʲ ηⱼ
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from plastic_lab.app.core.errors import (
    AsymmetricMetricError,
    DegenerateMetricError,
    DimensionMismatchError,
    ParseError,
)
from plastic_lab.app.geometry.symfunc import RationalFn, as_rational, default_coords, rational_sum

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")
_RESERVED = {"rho", "alpha"}


@dataclass(frozen=True)
class Chart:
    dim: int
    coords: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise DimensionMismatchError(f"chart dimension must be >= 1, got {self.dim}")
        coords = tuple(self.coords) or tuple(default_coords(self.dim))
        if len(coords) != self.dim:
            raise DimensionMismatchError(f"{len(coords)} coordinate names for a {self.dim}-dimensional chart")
        if len(set(coords)) != len(coords):
            raise ParseError(f"duplicate coordinate names in {coords}", location="chart.coords")
        for name in coords:
            if not _IDENT.match(name) or name in _RESERVED:
                raise ParseError(f"invalid coordinate name {name!r}", location="chart.coords")
        object.__setattr__(self, "coords", coords)

    def parse(self, text) -> RationalFn:
        from plastic_lab.app.geometry.grammar import parse_rational

        if not isinstance(text, str):
            return as_rational(text, self.dim)
        return parse_rational(text, self.coords)

    def coordinate(self, index: int) -> RationalFn:
        return RationalFn.coordinate(self.dim, index)

    def zero(self) -> RationalFn:
        return RationalFn.zero(self.dim)

    def constant(self, value) -> RationalFn:
        return RationalFn.constant(self.dim, value)

    def vector(self, components: Sequence) -> "VectorField":
        return VectorField([self.parse(c) for c in components])

    def form(self, components: Sequence) -> "OneForm":
        return OneForm([self.parse(c) for c in components])

    def rows(self, rows: Sequence[Sequence]) -> List[List[RationalFn]]:
        return [[self.parse(c) for c in row] for row in rows]

    def format(self, f: RationalFn) -> str:
        return f.to_string(self.coords)


# ---------------------------------------------------------------------------
# 向量场与 1-形式
# ---------------------------------------------------------------------------


class _Components:
    __slots__ = ("components",)

    def __init__(self, components: Sequence):
        n = len(components)
        if n < 1:
            raise DimensionMismatchError("empty component list")
        self.components: Tuple[RationalFn, ...] = tuple(as_rational(c, n) for c in components)

    @property
    def dim(self) -> int:
        return len(self.components)

    @classmethod
    def zero(cls, n: int):
        return cls([RationalFn.zero(n)] * n)

    @classmethod
    def basis(cls, n: int, index: int):
        return cls([RationalFn.constant(n, 1 if i == index else 0) for i in range(n)])

    def __getitem__(self, i: int) -> RationalFn:
        return self.components[i]

    def __iter__(self) -> Iterator[RationalFn]:
        return iter(self.components)

    def _check(self, other) -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._check(other)
        return type(self)([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        self._check(other)
        return type(self)([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return type(self)([-a for a in self.components])

    def scale(self, f):
        return type(self)([a * f for a in self.components])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def entries(self) -> Iterator[RationalFn]:
        return iter(self.components)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self) or other.dim != self.dim:
            return False
        return all(a == b for a, b in zip(self.components, other.components))

    __hash__ = None

    def to_strings(self, coords: Optional[Sequence[str]] = None) -> List[str]:
        return [c.to_string(coords) for c in self.components]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_strings()})"


class VectorField(_Components):
    """X = Σ Xⁱ ∂ᵢ"""

    def derive(self, f: RationalFn) -> RationalFn:
        """方向导数 X(f) = Σ Xⁱ ∂ᵢf"""
        return rational_sum(
            (x * f.partial(i) for i, x in enumerate(self.components) if not x.is_zero()),
            self.dim,
        )


class OneForm(_Components):
    """η = Σ ηᵢ dxⁱ"""

    def __call__(self, X: VectorField) -> RationalFn:
        if X.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {X.dim}")
        return rational_sum((a * b for a, b in zip(self.components, X.components)), self.dim)


# ---------------------------------------------------------------------------
# 矩阵型张量
# ---------------------------------------------------------------------------


Rows = List[List[RationalFn]]


def matmul(a: Sequence[Sequence[RationalFn]], b: Sequence[Sequence[RationalFn]]) -> Rows:
    n, m, p = len(a), len(b), len(b[0])
    if len(a[0]) != m:
        raise DimensionMismatchError(f"cannot multiply {n}x{len(a[0])} by {m}x{p}")
    arity = a[0][0].arity
    return [
        [rational_sum((a[i][k] * b[k][j] for k in range(m)), arity) for j in range(p)]
        for i in range(n)
    ]


def determinant(rows: Sequence[Sequence[RationalFn]]) -> RationalFn:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    arity = rows[0][0].arity
    total = RationalFn.zero(arity)
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = rows[0][j] * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def adjugate(rows: Sequence[Sequence[RationalFn]]) -> Rows:
    n = len(rows)
    arity = rows[0][0].arity
    if n == 1:
        return [[RationalFn.constant(arity, 1)]]
    adj = [[RationalFn.zero(arity)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = determinant(minor)
            # adj = cofactorᵀ
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


class FieldMatrix:
    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence]):
        n = len(rows)
        if n < 1 or any(len(r) != n for r in rows):
            raise DimensionMismatchError("tensor components must form a non-empty square matrix")
        self.rows: Tuple[Tuple[RationalFn, ...], ...] = tuple(
            tuple(as_rational(c, n) for c in row) for row in rows
        )

    @property
    def dim(self) -> int:
        return len(self.rows)

    # 算术结果的类型；Metric 的线性组合只是一般 (0,2)-张量
    def _like(self, rows):
        return type(self)(rows)

    @classmethod
    def zero(cls, n: int):
        z = RationalFn.zero(n)
        return cls([[z] * n for _ in range(n)])

    @classmethod
    def identity(cls, n: int):
        return cls.scalar(n, 1)

    @classmethod
    def scalar(cls, n: int, value):
        v = as_rational(value, n)
        z = RationalFn.zero(n)
        return cls([[v if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_fn(cls, n: int, fn: Callable[[int, int], object]):
        return cls([[fn(i, j) for j in range(n)] for i in range(n)])

    def __getitem__(self, idx: Tuple[int, int]) -> RationalFn:
        i, j = idx
        return self.rows[i][j]

    def entries(self) -> Iterator[RationalFn]:
        for row in self.rows:
            yield from row

    def _check(self, other: "FieldMatrix") -> None:
        if not isinstance(other, FieldMatrix):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._check(other)
        return self._like([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._check(other)
        return self._like([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return self._like([[-a for a in row] for row in self.rows])

    def scale(self, f):
        return self._like([[a * f for a in row] for row in self.rows])

    def transpose_rows(self) -> Rows:
        n = self.dim
        return [[self.rows[j][i] for j in range(n)] for i in range(n)]

    def determinant(self) -> RationalFn:
        return determinant(self.rows)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.entries())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldMatrix) or other.dim != self.dim:
            return False
        return all(a == b for a, b in zip(self.entries(), other.entries()))

    __hash__ = None

    def to_strings(self, coords: Optional[Sequence[str]] = None) -> List[List[str]]:
        return [[c.to_string(coords) for c in row] for row in self.rows]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_strings()})"


class Tensor11(FieldMatrix):
    """(1,1)-张量场 J，J[i][j] = Jⁱⱼ"""

    def apply(self, X: VectorField) -> VectorField:
        if X.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {X.dim}")
        n = self.dim
        return VectorField(
            [rational_sum((self.rows[i][j] * X[j] for j in range(n)), n) for i in range(n)]
        )

    def dual(self, eta: OneForm) -> OneForm:
        """(J*η)(X) = η(JX)"""
        if eta.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {eta.dim}")
        n = self.dim
        return OneForm(
            [rational_sum((eta[i] * self.rows[i][j] for i in range(n)), n) for j in range(n)]
        )

    def __matmul__(self, other: "Tensor11") -> "Tensor11":
        self._check(other)
        return Tensor11(matmul(self.rows, other.rows))

    def transpose(self) -> "Tensor11":
        return Tensor11(self.transpose_rows())

    def __pow__(self, k: int) -> "Tensor11":
        if not isinstance(k, int) or k < 0:
            raise ValueError("tensor power must be a non-negative integer")
        result = Tensor11.identity(self.dim)
        for _ in range(k):
            result = result @ self
        return result

    def polynomial(self, coeffs: Sequence) -> "Tensor11":
        """Σₖ coeffs[k]·Jᵏ (Horner)"""
        n = self.dim
        result = Tensor11.zero(n)
        for c in reversed(list(coeffs)):
            result = (result @ self) + Tensor11.scalar(n, c)
        return result

    def commutes_with(self, other: "Tensor11") -> bool:
        return (self @ other) == (other @ self)

    def inverse(self) -> "Tensor11":
        det = self.determinant()
        if det.is_zero():
            raise ZeroDivisionError("tensor is not invertible")
        inv_det = det.reciprocal()
        return Tensor11([[c * inv_det for c in row] for row in adjugate(self.rows)])


class Tensor02(FieldMatrix):
    """(0,2)-张量场 B，B[i][j] = Bᵢⱼ"""

    def __call__(self, X: VectorField, Y: VectorField) -> RationalFn:
        return self.contract(X)(Y)

    def contract(self, X: VectorField) -> OneForm:
        if X.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {X.dim}")
        n = self.dim
        return OneForm(
            [rational_sum((X[i] * self.rows[i][j] for i in range(n)), n) for j in range(n)]
        )

    def is_symmetric(self) -> bool:
        n = self.dim
        return all(self.rows[i][j] == self.rows[j][i] for i in range(n) for j in range(i + 1, n))


class Tensor20(FieldMatrix):
    """(2,0)-张量场 H，作用在 1-形式上：(Hη)ⁱ = Σⱼ Hⁱʲ ηⱼ"""

    def apply(self, eta: OneForm) -> VectorField:
        if eta.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {eta.dim}")
        n = self.dim
        return VectorField(
            [rational_sum((self.rows[i][j] * eta[j] for j in range(n)), n) for i in range(n)]
        )


class Metric(Tensor02):
    """
    非退化对称 (0,2)-张量场 g (不要求正定)。
    构造时校验对称性与 det(g) ≠ 0，并立即用伴随矩阵求出 g⁻¹。
    """

    __slots__ = ("det", "inverse")

    def __init__(self, rows: Sequence[Sequence]):
        super().__init__(rows)
        n = self.dim
        for i in range(n):
            for j in range(i + 1, n):
                if not self.rows[i][j] == self.rows[j][i]:
                    raise AsymmetricMetricError(
                        f"metric component g[{i + 1}][{j + 1}] differs from g[{j + 1}][{i + 1}]"
                    )
        det = determinant(self.rows)
        if det.is_zero():
            raise DegenerateMetricError("metric determinant vanishes identically")
        self.det: RationalFn = det
        inv_det = det.reciprocal()
        self.inverse: Tensor20 = Tensor20([[c * inv_det for c in row] for row in adjugate(self.rows)])

    def _like(self, rows):
        return Tensor02(rows)

    def flat(self, X: VectorField) -> OneForm:
        """♭X = i_X g"""
        return self.contract(X)

    def sharp(self, eta: OneForm) -> VectorField:
        """♯η = g⁻¹η"""
        return self.inverse.apply(eta)


# ---------------------------------------------------------------------------
# 模块级操作
# ---------------------------------------------------------------------------


def metric_flat(g: Metric, X: VectorField) -> OneForm:
    return g.flat(X)


def metric_sharp(g: Metric, eta: OneForm) -> VectorField:
    return g.sharp(eta)


def tensor_dual(J: Tensor11) -> Callable[[OneForm], OneForm]:
    return J.dual


def tensor_compose(J: Tensor11, K: Tensor11) -> Tensor11:
    return J @ K


def tensor_poly(J: Tensor11, coeffs: Sequence) -> Tensor11:
    return J.polynomial(coeffs)


def gsym_check(g: Tensor02, J: Tensor11) -> bool:
    """g(JX, Y) = g(X, JY)  ⇔  G·J = Jᵀ·G"""
    if g.dim != J.dim:
        raise DimensionMismatchError(f"dimension {g.dim} vs {J.dim}")
    left = matmul(g.rows, J.rows)
    right = matmul(J.transpose_rows(), g.rows)
    return all(a == b for r1, r2 in zip(left, right) for a, b in zip(r1, r2))


def gsym_residual(g: Tensor02, J: Tensor11) -> Tensor02:
    left = matmul(g.rows, J.rows)
    right = matmul(J.transpose_rows(), g.rows)
    return Tensor02([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(left, right)])
