"""
浮点交叉校验：精确残差经 nf_embed 嵌入 R，在 [−2,2]ⁿ 的随机有理点上用 numpy 求值。
结果只供参考，不会把精确判定的 fail 改成 pass。
"""

from fractions import Fraction
from typing import Iterable, List, Optional

import numpy as np

from plastic_lab.app.core.config import settings
from plastic_lab.app.core.errors import DimensionMismatchError, PoleError
from plastic_lab.app.geometry.numberfield import FieldElem
from plastic_lab.app.geometry.plastic import Matrix2
from plastic_lab.app.geometry.symfunc import RationalFn


def residual_entries(residual) -> List[RationalFn]:
    """把张量、块算子、截面或它们的列表摊平成分量列表"""
    if isinstance(residual, RationalFn):
        return [residual]
    if isinstance(residual, FieldElem):
        return [RationalFn.constant(1, residual)]
    if isinstance(residual, Matrix2):
        return [RationalFn.constant(1, v) for row in residual.rows() for v in row]
    if hasattr(residual, "entries"):
        return list(residual.entries())
    if isinstance(residual, Iterable):
        out: List[RationalFn] = []
        for item in residual:
            out.extend(residual_entries(item))
        return out
    raise TypeError(f"cannot cross-check {type(residual).__name__}")


def sample_points(entries: List[RationalFn], arity: int, count: int, seed: int) -> List[List[Fraction]]:
    """[−2,2]ⁿ 中的有理点；分母因子在点上精确为零时重抽"""
    rng = np.random.default_rng(np.random.SeedSequence([seed, arity, count]))
    bases = {b for e in entries for b in e.denominator_factors}
    points: List[List[Fraction]] = []
    misses = 0
    while len(points) < count:
        point = [Fraction(int(rng.integers(-200, 201)), 100) for _ in range(arity)]
        if any(b.evaluate(point).is_zero() for b in bases):
            misses += 1
            if misses >= settings.POLE_RESAMPLE_LIMIT:
                raise PoleError(f"sampled {misses} points on a pole of the residual")
            continue
        points.append(point)
    return points


def float_crosscheck(residual, points: Optional[int] = None, seed: int = 0) -> float:
    """max |value| over sampled points and all components"""
    entries = residual_entries(residual)
    count = settings.CROSSCHECK_POINTS if points is None else points
    if not entries or count <= 0:
        return 0.0
    arity = entries[0].arity
    if any(e.arity != arity for e in entries):
        raise DimensionMismatchError("residual components have different arities")
    sample = sample_points(entries, arity, count, seed)
    grid = np.array([[float(c) for c in p] for p in sample], dtype=float).reshape(count, arity)
    worst = 0.0
    for e in entries:
        if e.is_zero():
            continue
        worst = max(worst, float(np.max(np.abs(e.evaluate_float(grid)))))
    return worst


def within_tolerance(value: float) -> bool:
    return value < settings.FLOAT_TOLERANCE
