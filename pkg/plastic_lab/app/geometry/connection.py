"""
仿射联络 (Christoffel 记号)、协变导数、挠率、Lie 括号、Nijenhuis 张量与拟统计条件。

约定：(∇_{∂ᵢ}∂ⱼ)ᵏ = Γᵏᵢⱼ，存储为 christoffels[k][i][j]。不假设对称 (允许挠率)。
所有「对所有 X, Y」的谓词只在坐标基上检查，依据是相应表达式的张量性。
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

from plastic_lab.app.core.errors import DimensionMismatchError
from plastic_lab.app.geometry.chart import (
    Metric,
    OneForm,
    Tensor02,
    Tensor11,
    VectorField,
)
from plastic_lab.app.geometry.symfunc import RationalFn, as_rational, rational_sum


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X,Y]ᵏ = Σᵢ (Xⁱ ∂ᵢYᵏ − Yⁱ ∂ᵢXᵏ)"""
    if X.dim != Y.dim:
        raise DimensionMismatchError(f"dimension {X.dim} vs {Y.dim}")
    return VectorField([X.derive(Y[k]) - Y.derive(X[k]) for k in range(X.dim)])


def nijenhuis_tm(J: Tensor11, X: VectorField, Y: VectorField) -> VectorField:
    """N(J)(X,Y) = [JX,JY] − J[JX,Y] − J[X,JY] + J²[X,Y]"""
    JX, JY = J.apply(X), J.apply(Y)
    return (
        lie_bracket(JX, JY)
        - J.apply(lie_bracket(JX, Y))
        - J.apply(lie_bracket(X, JY))
        + J.apply(J.apply(lie_bracket(X, Y)))
    )


def coordinate_pairs(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def is_integrable(J: Tensor11) -> bool:
    n = J.dim
    return all(
        nijenhuis_tm(J, VectorField.basis(n, i), VectorField.basis(n, j)).is_zero()
        for i, j in coordinate_pairs(n)
    )


class Connection:
    __slots__ = ("christoffels",)

    def __init__(self, christoffels: Sequence[Sequence[Sequence]]):
        n = len(christoffels)
        if n < 1:
            raise DimensionMismatchError("connection on a zero-dimensional chart")
        for k, plane in enumerate(christoffels):
            if len(plane) != n or any(len(row) != n for row in plane):
                raise DimensionMismatchError(f"christoffels[{k}] is not {n}x{n}")
        self.christoffels: Tuple[Tuple[Tuple[RationalFn, ...], ...], ...] = tuple(
            tuple(tuple(as_rational(c, n) for c in row) for row in plane) for plane in christoffels
        )

    @property
    def dim(self) -> int:
        return len(self.christoffels)

    def gamma(self, k: int, i: int, j: int) -> RationalFn:
        return self.christoffels[k][i][j]

    def entries(self):
        for plane in self.christoffels:
            for row in plane:
                yield from row

    @classmethod
    def flat(cls, n: int) -> "Connection":
        z = RationalFn.zero(n)
        return cls([[[z] * n for _ in range(n)] for _ in range(n)])

    @classmethod
    def from_matrices(cls, gammas: Sequence[Tensor11]) -> "Connection":
        """由 Γᵢ (第 i 个矩阵的 [k][j] 元为 Γᵏᵢⱼ) 组装"""
        n = len(gammas)
        return cls([[[gammas[i][k, j] for j in range(n)] for i in range(n)] for k in range(n)])

    def matrix(self, i: int) -> Tensor11:
        """Γᵢ：(Γᵢ)ᵏⱼ = Γᵏᵢⱼ，即 ∇_{∂ᵢ} 的零阶部分"""
        n = self.dim
        return Tensor11([[self.christoffels[k][i][j] for j in range(n)] for k in range(n)])

    @classmethod
    def levi_civita(cls, g: Metric) -> "Connection":
        """Γᵏᵢⱼ = ½ gᵏˡ (∂ᵢgⱼₗ + ∂ⱼgᵢₗ − ∂ₗgᵢⱼ)"""
        n = g.dim
        dg = [[[g[a, b].partial(c) for c in range(n)] for b in range(n)] for a in range(n)]
        half = RationalFn.constant(n, 1) / 2
        lower = [
            [
                [(dg[j][l][i] + dg[i][l][j] - dg[i][j][l]) * half for l in range(n)]
                for j in range(n)
            ]
            for i in range(n)
        ]
        gammas = [
            [
                [rational_sum((g.inverse[k, l] * lower[i][j][l] for l in range(n)), n) for j in range(n)]
                for i in range(n)
            ]
            for k in range(n)
        ]
        return cls(gammas)

    def _check(self, *items) -> None:
        for item in items:
            if item.dim != self.dim:
                raise DimensionMismatchError(f"dimension {self.dim} vs {item.dim}")

    def _gamma_contract(self, X: VectorField, Y: VectorField) -> List[RationalFn]:
        n = self.dim
        out = []
        for k in range(n):
            terms = (
                self.christoffels[k][i][j] * X[i] * Y[j]
                for i in range(n)
                if not X[i].is_zero()
                for j in range(n)
                if not Y[j].is_zero() and not self.christoffels[k][i][j].is_zero()
            )
            out.append(rational_sum(terms, n))
        return out

    def covariant(self, X: VectorField, Y: VectorField) -> VectorField:
        """(∇_X Y)ᵏ = X(Yᵏ) + Σ Γᵏᵢⱼ Xⁱ Yʲ"""
        self._check(X, Y)
        g = self._gamma_contract(X, Y)
        return VectorField([X.derive(Y[k]) + g[k] for k in range(self.dim)])

    def covariant_form(self, X: VectorField, beta: OneForm) -> OneForm:
        """(∇_X β)ⱼ = X(βⱼ) − Σ Γᵏᵢⱼ Xⁱ βₖ"""
        self._check(X, beta)
        n = self.dim
        comps = []
        for j in range(n):
            corr = rational_sum(
                (
                    self.christoffels[k][i][j] * X[i] * beta[k]
                    for k in range(n)
                    if not beta[k].is_zero()
                    for i in range(n)
                    if not X[i].is_zero() and not self.christoffels[k][i][j].is_zero()
                ),
                n,
            )
            comps.append(X.derive(beta[j]) - corr)
        return OneForm(comps)

    def covariant_tensor(self, X: VectorField, J: Tensor11) -> Tensor11:
        """(∇_X J)ᵏⱼ = X(Jᵏⱼ) + Σᵢ Xⁱ (Γᵢ J − J Γᵢ)ᵏⱼ"""
        self._check(X, J)
        n = self.dim
        result = Tensor11([[X.derive(J[k, j]) for j in range(n)] for k in range(n)])
        for i in range(n):
            if X[i].is_zero():
                continue
            G = self.matrix(i)
            if G.is_zero():
                continue
            result = result + ((G @ J) - (J @ G)).scale(X[i])
        return result

    def covariant_metric(self, X: VectorField, g: Tensor02) -> Tensor02:
        """(∇_X g)(Y,Z) = X(g(Y,Z)) − g(∇_X Y, Z) − g(Y, ∇_X Z)"""
        self._check(X, g)
        n = self.dim
        rows = []
        for j in range(n):
            row = []
            for k in range(n):
                corr = rational_sum(
                    (
                        X[i] * (self.christoffels[l][i][j] * g[l, k] + self.christoffels[l][i][k] * g[j, l])
                        for i in range(n)
                        if not X[i].is_zero()
                        for l in range(n)
                    ),
                    n,
                )
                row.append(X.derive(g[j, k]) - corr)
            rows.append(row)
        return Tensor02(rows)

    def torsion(self, X: VectorField, Y: VectorField) -> VectorField:
        """T(X,Y) = ∇_X Y − ∇_Y X − [X,Y]"""
        return self.covariant(X, Y) - self.covariant(Y, X) - lie_bracket(X, Y)

    def has_torsion(self) -> bool:
        n = self.dim
        return any(
            not (self.christoffels[k][i][j] == self.christoffels[k][j][i])
            for k in range(n)
            for i, j in coordinate_pairs(n)
        )

    def is_parallel(self, J: Tensor11) -> bool:
        n = self.dim
        return all(self.covariant_tensor(VectorField.basis(n, i), J).is_zero() for i in range(n))

    def metric_is_parallel(self, g: Tensor02) -> bool:
        n = self.dim
        return all(self.covariant_metric(VectorField.basis(n, i), g).is_zero() for i in range(n))

    def quasi_statistical_residual(self, g: Tensor02, X: VectorField, Y: VectorField) -> OneForm:
        """Z ↦ (∇_X g)(Y,Z) − (∇_Y g)(X,Z) + g(T(X,Y), Z)"""
        return (
            self.covariant_metric(X, g).contract(Y)
            - self.covariant_metric(Y, g).contract(X)
            + g.contract(self.torsion(X, Y))
        )

    def is_quasi_statistical(self, g: Tensor02) -> bool:
        n = self.dim
        return all(
            self.quasi_statistical_residual(g, VectorField.basis(n, i), VectorField.basis(n, j)).is_zero()
            for i, j in coordinate_pairs(n)
        )

    def torsion_nijenhuis(self, J: Tensor11, X: VectorField, Y: VectorField) -> VectorField:
        """T(JX,JY) − J T(JX,Y) − J T(X,JY) + J² T(X,Y)"""
        JX, JY = J.apply(X), J.apply(Y)
        return (
            self.torsion(JX, JY)
            - J.apply(self.torsion(JX, Y))
            - J.apply(self.torsion(X, JY))
            + J.apply(J.apply(self.torsion(X, Y)))
        )

    def to_strings(self, coords=None):
        return [[[c.to_string(coords) for c in row] for row in plane] for plane in self.christoffels]


def cov_deriv_vector(nabla: Connection, X: VectorField, Y: VectorField) -> VectorField:
    return nabla.covariant(X, Y)


def cov_deriv_oneform(nabla: Connection, X: VectorField, beta: OneForm) -> OneForm:
    return nabla.covariant_form(X, beta)


def cov_deriv_tensor11(nabla: Connection, X: VectorField, J: Tensor11) -> Tensor11:
    return nabla.covariant_tensor(X, J)


def cov_deriv_metric(nabla: Connection, X: VectorField, g: Tensor02) -> Tensor02:
    return nabla.covariant_metric(X, g)


def torsion(nabla: Connection, X: VectorField, Y: VectorField) -> VectorField:
    return nabla.torsion(X, Y)


def quasi_statistical_check(g: Tensor02, nabla: Connection) -> bool:
    return nabla.is_quasi_statistical(g)
