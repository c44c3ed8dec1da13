"""
Q(ρ) 上的精确算术，ρ 为塑性数 (x³ − x − 1 = 0 的唯一实根)。

元素以 {1, ρ, ρ²} 为基存储三个 Fraction 系数；每次乘法都把 ρ³ 约化为 ρ + 1。
对偶方程 x³ − x + 1 = 0 的实根就是 −ρ，不单独建类型。
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

Scalar = Union[int, Fraction, "FieldElem"]


class FieldElem:
    __slots__ = ("_c",)

    def __init__(self, c0: Union[int, Fraction] = 0, c1: Union[int, Fraction] = 0, c2: Union[int, Fraction] = 0):
        self._c: Tuple[Fraction, Fraction, Fraction] = (
            Fraction(c0),
            Fraction(c1),
            Fraction(c2),
        )

    @property
    def c0(self) -> Fraction:
        return self._c[0]

    @property
    def c1(self) -> Fraction:
        return self._c[1]

    @property
    def c2(self) -> Fraction:
        return self._c[2]

    @property
    def coefficients(self) -> Tuple[Fraction, Fraction, Fraction]:
        return self._c

    @classmethod
    def coerce(cls, value: Scalar) -> "FieldElem":
        if isinstance(value, FieldElem):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value)
        raise TypeError(f"cannot coerce {type(value).__name__} into Q(rho)")

    # ---- 比较 ----

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElem):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == (Fraction(other), 0, 0)
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self._c[0])
        return hash(self._c)

    def __bool__(self) -> bool:
        return any(self._c)

    def is_zero(self) -> bool:
        return not any(self._c)

    def is_rational(self) -> bool:
        return self._c[1] == 0 and self._c[2] == 0

    # ---- 算术 ----

    def __add__(self, other: Scalar) -> "FieldElem":
        try:
            o = FieldElem.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self._c, o._c
        return FieldElem(a[0] + b[0], a[1] + b[1], a[2] + b[2])

    __radd__ = __add__

    def __neg__(self) -> "FieldElem":
        return FieldElem(-self._c[0], -self._c[1], -self._c[2])

    def __sub__(self, other: Scalar) -> "FieldElem":
        try:
            o = FieldElem.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Scalar) -> "FieldElem":
        return (-self) + other

    def __mul__(self, other: Scalar) -> "FieldElem":
        if isinstance(other, (int, Fraction)):
            k = Fraction(other)
            return FieldElem(self._c[0] * k, self._c[1] * k, self._c[2] * k)
        if not isinstance(other, FieldElem):
            return NotImplemented
        a0, a1, a2 = self._c
        b0, b1, b2 = other._c
        p0 = a0 * b0
        p1 = a0 * b1 + a1 * b0
        p2 = a0 * b2 + a1 * b1 + a2 * b0
        p3 = a1 * b2 + a2 * b1
        p4 = a2 * b2
        # ρ³ = ρ + 1, ρ⁴ = ρ² + ρ
        return FieldElem(p0 + p3, p1 + p3 + p4, p2 + p4)

    __rmul__ = __mul__

    def inv(self) -> "FieldElem":
        """乘法逆元：解 M·x = e₀，M 的列是 a·1, a·ρ, a·ρ²。"""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(rho)")
        a0, a1, a2 = self._c
        m = [
            [a0, a2, a1],
            [a1, a0 + a2, a1 + a2],
            [a2, a1, a0 + a2],
        ]
        det = _det3(m)
        # Cramer：右端为 (1, 0, 0)
        x0 = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det
        x1 = -(m[1][0] * m[2][2] - m[1][2] * m[2][0]) / det
        x2 = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det
        return FieldElem(x0, x1, x2)

    def __truediv__(self, other: Scalar) -> "FieldElem":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(rho)")
            return self * (Fraction(1) / Fraction(other))
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other: Scalar) -> "FieldElem":
        return FieldElem.coerce(other) * self.inv()

    def __pow__(self, exponent: int) -> "FieldElem":
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inv() ** (-exponent)
        result = ONE
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # ---- 嵌入与文本 ----

    def embed(self) -> float:
        r = plastic_float()
        return float(self._c[0]) + float(self._c[1]) * r + float(self._c[2]) * r * r

    def __float__(self) -> float:
        return self.embed()

    def __repr__(self) -> str:
        return f"FieldElem({self._c[0]!s}, {self._c[1]!s}, {self._c[2]!s})"

    def __str__(self) -> str:
        parts: List[str] = []
        for k, c in enumerate(self._c):
            if c == 0:
                continue
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if k == 0:
                body = str(mag)
            else:
                atom = "rho" if k == 1 else "rho^2"
                body = atom if mag == 1 else f"{mag}*{atom}"
            parts.append((sign, body))
        if not parts:
            return "0"
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    @classmethod
    def parse(cls, text: str) -> "FieldElem":
        from plastic_lab.app.geometry.grammar import parse_constant

        return parse_constant(text)


def _det3(m: Sequence[Sequence[Fraction]]) -> Fraction:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


_PLASTIC_FLOAT: Optional[float] = None


def plastic_float() -> float:
    """ρ 的双精度值：根式公式给初值，再做 Newton 迭代打磨。"""
    global _PLASTIC_FLOAT
    if _PLASTIC_FLOAT is None:
        s = math.sqrt(69.0)
        u = (9.0 + s) / 18.0
        v = (9.0 - s) / 18.0
        x = math.copysign(abs(u) ** (1.0 / 3.0), u) + math.copysign(abs(v) ** (1.0 / 3.0), v)
        for _ in range(8):
            fx = x * x * x - x - 1.0
            x_next = x - fx / (3.0 * x * x - 1.0)
            if x_next == x:
                break
            x = x_next
        _PLASTIC_FLOAT = x
    return _PLASTIC_FLOAT


ZERO = FieldElem(0)
ONE = FieldElem(1)
RHO = FieldElem(0, 1)
# 对偶方程 x³ − x + 1 = 0 的实根
ALPHA = -RHO


def rho() -> FieldElem:
    return RHO


def alpha() -> FieldElem:
    return ALPHA


def nf_add(a: FieldElem, b: FieldElem) -> FieldElem:
    return a + b


def nf_mul(a: FieldElem, b: FieldElem) -> FieldElem:
    return a * b


def nf_inv(a: FieldElem) -> FieldElem:
    return a.inv()


def nf_embed(a: FieldElem) -> float:
    return a.embed()


def nullspace(rows: Sequence[Sequence[Scalar]], ncols: int) -> List[List[FieldElem]]:
    """
    Q(ρ) 上齐次线性方程组的零空间基 (Gauss-Jordan 消元)。
    rows 为系数矩阵的行；返回的每个向量长度为 ncols。
    """
    mat = [[FieldElem.coerce(v) for v in row] for row in rows]
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        pivot = None
        for i in range(r, len(mat)):
            if not mat[i][col].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = mat[r][col].inv()
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and not mat[i][col].is_zero():
                factor = mat[i][col]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break

    basis: List[List[FieldElem]] = []
    free = [c for c in range(ncols) if c not in pivots]
    for f in free:
        vec = [ZERO] * ncols
        vec[f] = ONE
        for row_idx, pc in enumerate(pivots):
            vec[pc] = -mat[row_idx][f]
        basis.append(vec)
    return basis
