"""
坐标卡上的分量函数环：Q(ρ) 系数的稀疏多元多项式，以及有理函数。

RationalFn 的分母以「多项式底 -> 重数」的因子分解形式保存，底都归一为首项系数 1。
不做多元 gcd 约分，相等性按交叉相乘后展开判零 (rf_equal)。
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from plastic_lab.app.core.errors import CoordinateIndexError, DimensionMismatchError, PoleError
from plastic_lab.app.geometry.numberfield import ONE, ZERO, FieldElem

Exponent = Tuple[int, ...]
Coefficient = Union[int, Fraction, FieldElem]


def default_coords(arity: int) -> List[str]:
    return [f"x{i + 1}" for i in range(arity)]


def _coeff_str(c: FieldElem) -> Tuple[str, str]:
    """返回 (符号, 系数文本)，多分量系数加括号。"""
    if c.is_rational():
        v = c.c0
        return ("-" if v < 0 else "+", str(abs(v)))
    return ("+", f"({c})")


class Polynomial:
    __slots__ = ("arity", "_terms", "_hash")

    def __init__(self, arity: int, terms: Optional[Mapping[Exponent, Coefficient]] = None):
        self.arity = arity
        clean: Dict[Exponent, FieldElem] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != arity:
                raise DimensionMismatchError(
                    f"exponent {exp} has length {len(exp)}, expected {arity}"
                )
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = FieldElem.coerce(coeff)
            if not c.is_zero():
                clean[exp] = clean[exp] + c if exp in clean else c
        self._terms = {e: c for e, c in clean.items() if not c.is_zero()}
        self._hash: Optional[int] = None

    @classmethod
    def _raw(cls, arity: int, terms: Dict[Exponent, FieldElem]) -> "Polynomial":
        obj = cls.__new__(cls)
        obj.arity = arity
        obj._terms = terms
        obj._hash = None
        return obj

    # ---- 构造 ----

    @classmethod
    def zero(cls, arity: int) -> "Polynomial":
        return cls._raw(arity, {})

    @classmethod
    def constant(cls, arity: int, value: Coefficient) -> "Polynomial":
        c = FieldElem.coerce(value)
        if c.is_zero():
            return cls.zero(arity)
        return cls._raw(arity, {(0,) * arity: c})

    @classmethod
    def coordinate(cls, arity: int, index: int) -> "Polynomial":
        if not 0 <= index < arity:
            raise CoordinateIndexError(f"coordinate index {index + 1} out of range 1..{arity}")
        exp = [0] * arity
        exp[index] = 1
        return cls._raw(arity, {tuple(exp): ONE})

    @classmethod
    def parse(cls, text: str, coords: Optional[Sequence[str]] = None, arity: Optional[int] = None) -> "Polynomial":
        from plastic_lab.app.geometry.grammar import parse_polynomial

        if coords is None:
            coords = default_coords(arity or 0)
        return parse_polynomial(text, coords)

    # ---- 查询 ----

    @property
    def terms(self) -> Dict[Exponent, FieldElem]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> FieldElem:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get((0,) * self.arity, ZERO)

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def leading_coefficient(self) -> FieldElem:
        if not self._terms:
            return ZERO
        return self._terms[max(self._terms)]

    def depends_on(self, index: int) -> bool:
        return any(e[index] for e in self._terms)

    def _check(self, other: "Polynomial") -> None:
        if other.arity != self.arity:
            raise DimensionMismatchError(f"arity {self.arity} vs {other.arity}")

    def _coerce(self, other) -> Optional["Polynomial"]:
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, FieldElem)):
            return Polynomial.constant(self.arity, other)
        return None

    # ---- 算术 ----

    def __add__(self, other) -> "Polynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        res = dict(self._terms)
        for e, c in o._terms.items():
            if e in res:
                s = res[e] + c
                if s.is_zero():
                    del res[e]
                else:
                    res[e] = s
            else:
                res[e] = c
        return Polynomial._raw(self.arity, res)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.arity, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def scale(self, k: Coefficient) -> "Polynomial":
        k = FieldElem.coerce(k)
        if k.is_zero():
            return Polynomial.zero(self.arity)
        return Polynomial._raw(self.arity, {e: c * k for e, c in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction, FieldElem)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        res: Dict[Exponent, FieldElem] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                if e in res:
                    res[e] = res[e] + v
                else:
                    res[e] = v
        return Polynomial._raw(self.arity, {e: c for e, c in res.items() if not c.is_zero()})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial exponent must be a non-negative integer")
        result = Polynomial.constant(self.arity, ONE)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def partial(self, index: int) -> "Polynomial":
        """∂/∂x_{index+1}，index 从 0 开始。"""
        if not 0 <= index < self.arity:
            raise CoordinateIndexError(f"coordinate index {index + 1} out of range 1..{self.arity}")
        res: Dict[Exponent, FieldElem] = {}
        for e, c in self._terms.items():
            k = e[index]
            if k == 0:
                continue
            ne = list(e)
            ne[index] = k - 1
            res[tuple(ne)] = c * k
        return Polynomial._raw(self.arity, res)

    def evaluate(self, point: Sequence[Coefficient]) -> FieldElem:
        if len(point) != self.arity:
            raise DimensionMismatchError(f"point has {len(point)} coordinates, expected {self.arity}")
        xs = [FieldElem.coerce(v) for v in point]
        total = ZERO
        for e, c in self._terms.items():
            term = c
            for x, k in zip(xs, e):
                if k:
                    term = term * (x ** k)
            total = total + term
        return total

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if not self._terms:
            return np.zeros(points.shape[0])
        exps = np.array(list(self._terms.keys()), dtype=float).reshape(len(self._terms), self.arity)
        coeffs = np.array([c.embed() for c in self._terms.values()])
        monomials = np.prod(points[:, None, :] ** exps[None, :, :], axis=2)
        return monomials @ coeffs

    # ---- 比较与文本 ----

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.arity == other.arity and self._terms == other._terms
        if isinstance(other, (int, Fraction, FieldElem)):
            return self._terms == Polynomial.constant(self.arity, other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    def to_string(self, coords: Optional[Sequence[str]] = None) -> str:
        if not self._terms:
            return "0"
        names = list(coords) if coords is not None else default_coords(self.arity)
        ordered = sorted(self._terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-k for k in kv[0])))
        pieces: List[str] = []
        for idx, (e, c) in enumerate(ordered):
            sign, coeff = _coeff_str(c)
            mono = "*".join(
                (names[i] if k == 1 else f"{names[i]}^{k}") for i, k in enumerate(e) if k
            )
            if mono:
                body = mono if coeff == "1" else f"{coeff}*{mono}"
            else:
                body = coeff
            if idx == 0:
                pieces.append(("-" if sign == "-" else "") + body)
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"Polynomial({self.arity}, {self.to_string()!r})"


def poly_partial(p: Polynomial, i: int) -> Polynomial:
    """坐标下标从 1 开始：poly_partial(p, 1) = ∂p/∂x₁。"""
    if not 1 <= i <= p.arity:
        raise CoordinateIndexError(f"coordinate index {i} out of range 1..{p.arity}")
    return p.partial(i - 1)


Factors = Dict[Polynomial, int]


def _monic(p: Polynomial) -> Tuple[Polynomial, FieldElem]:
    lc = p.leading_coefficient()
    if lc == ONE:
        return p, ONE
    return p.scale(lc.inv()), lc


def _product(factors: Mapping[Polynomial, int], arity: int) -> Polynomial:
    result = Polynomial.constant(arity, ONE)
    for base, exp in factors.items():
        if exp:
            result = result * (base ** exp)
    return result


class RationalFn:
    __slots__ = ("arity", "num", "_den")

    def __init__(self, num: Polynomial, den: Optional[Polynomial] = None):
        if den is None:
            self.arity = num.arity
            self.num = num
            self._den: Factors = {}
            return
        num._check(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        built = RationalFn._make(num, {}).__truediv__(RationalFn._make(den, {}))
        self.arity = built.arity
        self.num = built.num
        self._den = built._den

    @classmethod
    def _make(cls, num: Polynomial, den: Factors) -> "RationalFn":
        obj = cls.__new__(cls)
        obj.arity = num.arity
        if num.is_zero():
            obj.num = num
            obj._den = {}
        else:
            obj.num = num
            obj._den = {b: e for b, e in den.items() if e}
        return obj

    # ---- 构造 ----

    @classmethod
    def zero(cls, arity: int) -> "RationalFn":
        return cls._make(Polynomial.zero(arity), {})

    @classmethod
    def constant(cls, arity: int, value: Coefficient) -> "RationalFn":
        return cls._make(Polynomial.constant(arity, value), {})

    @classmethod
    def coordinate(cls, arity: int, index: int) -> "RationalFn":
        return cls._make(Polynomial.coordinate(arity, index), {})

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFn":
        return cls._make(p, {})

    @classmethod
    def parse(cls, text: str, coords: Optional[Sequence[str]] = None, arity: Optional[int] = None) -> "RationalFn":
        from plastic_lab.app.geometry.grammar import parse_rational

        if coords is None:
            coords = default_coords(arity or 0)
        return parse_rational(text, coords)

    def coerce(self, other) -> Optional["RationalFn"]:
        if isinstance(other, RationalFn):
            if other.arity != self.arity:
                raise DimensionMismatchError(f"arity {self.arity} vs {other.arity}")
            return other
        if isinstance(other, Polynomial):
            if other.arity != self.arity:
                raise DimensionMismatchError(f"arity {self.arity} vs {other.arity}")
            return RationalFn._make(other, {})
        if isinstance(other, (int, Fraction, FieldElem)):
            return RationalFn.constant(self.arity, other)
        return None

    # ---- 查询 ----

    @property
    def denominator_factors(self) -> Dict[Polynomial, int]:
        return dict(self._den)

    def denominator(self) -> Polynomial:
        return _product(self._den, self.arity)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self._den

    def as_polynomial(self) -> Polynomial:
        if self._den:
            raise ValueError("rational function has a non-constant denominator")
        return self.num

    def is_constant(self) -> bool:
        return not self._den and self.num.is_constant()

    def constant_value(self) -> FieldElem:
        if not self.is_constant():
            raise ValueError("rational function is not constant")
        return self.num.constant_value()

    # ---- 算术 ----

    def __add__(self, other) -> "RationalFn":
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if self._den == o._den:
            return RationalFn._make(self.num + o.num, self._den)
        lcm: Factors = dict(self._den)
        for b, e in o._den.items():
            if lcm.get(b, 0) < e:
                lcm[b] = e
        left = self.num * _product({b: e - self._den.get(b, 0) for b, e in lcm.items()}, self.arity)
        right = o.num * _product({b: e - o._den.get(b, 0) for b, e in lcm.items()}, self.arity)
        return RationalFn._make(left + right, lcm)

    __radd__ = __add__

    def __neg__(self) -> "RationalFn":
        return RationalFn._make(-self.num, self._den)

    def __sub__(self, other) -> "RationalFn":
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "RationalFn":
        return (-self) + other

    def __mul__(self, other) -> "RationalFn":
        if isinstance(other, (int, Fraction, FieldElem)):
            return RationalFn._make(self.num.scale(other), self._den)
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return RationalFn.zero(self.arity)
        den = dict(self._den)
        for b, e in o._den.items():
            den[b] = den.get(b, 0) + e
        return RationalFn._make(self.num * o.num, den)

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalFn":
        if self.is_zero():
            raise ZeroDivisionError("division by the zero function")
        top = self.denominator()
        if self.num.is_constant():
            return RationalFn._make(top.scale(self.num.constant_value().inv()), {})
        base, lc = _monic(self.num)
        return RationalFn._make(top.scale(lc.inv()), {base: 1})

    def __truediv__(self, other) -> "RationalFn":
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other) -> "RationalFn":
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __pow__(self, n: int) -> "RationalFn":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.reciprocal() ** (-n)
        return RationalFn._make(self.num ** n, {b: e * n for b, e in self._den.items()})

    def partial(self, index: int) -> "RationalFn":
        """商法则：∂(N/D) = (N' − N·Σ eₖ bₖ'/bₖ) / D，只对依赖该坐标的底乘开。"""
        dnum = self.num.partial(index)
        moving = [(b, e) for b, e in self._den.items() if b.depends_on(index)]
        if not moving:
            return RationalFn._make(dnum, self._den)
        bases = [b for b, _ in moving]
        all_prod = _product({b: 1 for b in bases}, self.arity)
        top = dnum * all_prod
        for k, (b, e) in enumerate(moving):
            others = _product({bb: 1 for j, bb in enumerate(bases) if j != k}, self.arity)
            top = top - (self.num * b.partial(index) * others).scale(e)
        den = dict(self._den)
        for b in bases:
            den[b] += 1
        return RationalFn._make(top, den)

    # ---- 求值 ----

    def evaluate(self, point: Sequence[Coefficient]) -> FieldElem:
        if len(point) != self.arity:
            raise DimensionMismatchError(f"point has {len(point)} coordinates, expected {self.arity}")
        den_value = ONE
        for b, e in self._den.items():
            v = b.evaluate(point)
            if v.is_zero():
                raise PoleError(f"denominator factor {b} vanishes at {[str(x) for x in point]}")
            den_value = den_value * (v ** e)
        return self.num.evaluate(point) * den_value.inv()

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        values = self.num.evaluate_float(points)
        for b, e in self._den.items():
            values = values / (b.evaluate_float(points) ** e)
        return values

    # ---- 比较与文本 ----

    def __eq__(self, other: object) -> bool:
        try:
            o = self.coerce(other)
        except DimensionMismatchError:
            return False
        if o is None:
            return NotImplemented
        if self._den == o._den:
            return self.num == o.num
        return (self - o).is_zero()

    __hash__ = None

    def to_string(self, coords: Optional[Sequence[str]] = None) -> str:
        top = self.num.to_string(coords)
        if not self._den:
            return top
        parts = []
        for b, e in self._den.items():
            text = f"({b.to_string(coords)})"
            parts.append(text if e == 1 else f"{text}^{e}")
        return f"({top})/({'*'.join(parts)})"

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"RationalFn({self.arity}, {self.to_string()!r})"


def rf_equal(f: RationalFn, g: RationalFn) -> bool:
    return f == g


def as_rational(value, arity: int) -> RationalFn:
    if isinstance(value, RationalFn):
        if value.arity != arity:
            raise DimensionMismatchError(f"arity {value.arity} vs {arity}")
        return value
    if isinstance(value, Polynomial):
        return RationalFn.from_polynomial(value)
    if isinstance(value, str):
        return RationalFn.parse(value, arity=arity)
    return RationalFn.constant(arity, value)


def rational_sum(values: Iterable[RationalFn], arity: int) -> RationalFn:
    total = RationalFn.zero(arity)
    for v in values:
        total = total + v
    return total
