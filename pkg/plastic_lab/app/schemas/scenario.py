from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, StrictInt, StrictStr, field_validator, model_validator

from plastic_lab.app.core.config import settings

# 标量或函数均用字符串 (文法见 geometry.grammar)，整数直接接受
Entry = Union[StrictInt, StrictStr]
Matrix = List[List[Entry]]

TENSOR_NAMES = ("J", "J1", "J2")

# 检查名 → 需要的对象
CHECK_REQUIREMENTS: Dict[str, Tuple[str, ...]] = {
    "plastic": ("tensor",),
    "dual": ("tensor",),
    "g-symmetric": ("tensor", "metric"),
    "integrable": ("tensor",),
    "parallel": ("tensor", "connection"),
    "metric-parallel": ("metric", "connection"),
    "quasi-statistical": ("metric", "connection"),
    "generalized-plastic": ("operator",),
    "generalized-dual": ("operator",),
    "nabla-integrable": ("operator", "connection"),
    "hat-parallel": ("operator", "connection", "metric"),
    "check-parallel": ("operator", "connection"),
    "suite": (),
}

TENSOR_CHECKS = {"plastic", "dual", "g-symmetric", "integrable", "parallel"}


def split_check(check: str) -> Tuple[str, Optional[str]]:
    """"plastic:J1" → ("plastic", "J1")"""
    name, _, arg = check.partition(":")
    name = name.strip()
    arg = arg.strip() or None
    if name in TENSOR_CHECKS and arg is None:
        arg = "J"
    return name, arg


class ChartModel(BaseModel):
    dim: int = Field(ge=1)
    coords: Optional[List[str]] = None

    @model_validator(mode="after")
    def _coords_match_dim(self):
        if self.coords is not None and len(self.coords) != self.dim:
            raise ValueError(f"{len(self.coords)} coordinate names for dim {self.dim}")
        if self.coords is not None and len(set(self.coords)) != len(self.coords):
            raise ValueError(f"duplicate coordinate names {self.coords}")
        return self


class OperatorModel(BaseModel):
    """Ĵ 的四个块，FF 为底层 (1,1)-张量"""

    TT: Matrix
    TF: Matrix
    FT: Matrix
    FF: Matrix


class Scenario(BaseModel):
    chart: ChartModel
    metric: Optional[Matrix] = None
    christoffels: Optional[List[Matrix]] = None  # christoffels[k][i][j] = Γᵏᵢⱼ
    tensors: Dict[str, Matrix] = Field(default_factory=dict)
    operator: Optional[OperatorModel] = None
    structure: Optional[Literal["diag", "m100", "two-tensor", "two-tensor-dual", "dual"]] = None
    checks: List[str] = Field(min_length=1)

    @field_validator("tensors")
    @classmethod
    def _known_tensor_names(cls, value: Dict[str, Matrix]):
        for name in value:
            if name not in TENSOR_NAMES:
                raise ValueError(f"unknown tensor name {name!r}, expected one of {list(TENSOR_NAMES)}")
        return value

    @model_validator(mode="after")
    def _shapes_and_references(self):
        n = self.chart.dim

        def square(label: str, rows: Matrix) -> None:
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ValueError(f"{label} must be {n}x{n}")

        if self.metric is not None:
            square("metric", self.metric)
        if self.christoffels is not None:
            if len(self.christoffels) != n:
                raise ValueError(f"christoffels must have {n} planes")
            for k, plane in enumerate(self.christoffels):
                square(f"christoffels[{k}]", plane)
        for name, rows in self.tensors.items():
            square(f"tensors.{name}", rows)
        if self.operator is not None:
            for block in ("TT", "TF", "FT", "FF"):
                square(f"operator.{block}", getattr(self.operator, block))
            if self.structure is not None:
                raise ValueError("give either operator or structure, not both")

        if self.structure is not None:
            needed = {
                "diag": ("J1", "J2"),
                "m100": ("J",),
                "two-tensor": ("J1", "J2"),
                "two-tensor-dual": ("J1", "J2"),
                "dual": ("J",),
            }[self.structure]
            for name in needed:
                if name not in self.tensors:
                    raise ValueError(f"structure {self.structure!r} needs tensors.{name}")
            if self.structure in ("two-tensor", "two-tensor-dual", "dual") and self.metric is None:
                raise ValueError(f"structure {self.structure!r} needs a metric")

        available = {
            "metric": self.metric is not None,
            "connection": self.christoffels is not None,
            "operator": self.operator is not None or self.structure is not None,
        }
        for idx, check in enumerate(self.checks):
            name, arg = split_check(check)
            if name not in CHECK_REQUIREMENTS:
                raise ValueError(f"checks[{idx}]: unknown check {name!r}")
            for need in CHECK_REQUIREMENTS[name]:
                if need == "tensor":
                    if arg not in self.tensors:
                        raise ValueError(f"checks[{idx}]: {check!r} refers to missing tensors.{arg}")
                elif not available[need]:
                    raise ValueError(f"checks[{idx}]: {check!r} needs a {need}")
            if name == "suite" and not arg:
                raise ValueError(f"checks[{idx}]: suite check needs an id, e.g. 'suite:m10-cubic'")
        return self


class InstanceSpec(BaseModel):
    """
    随机实例的生成参数。

    tensor  scalar: J 为 ±ρI；block: 至少含一个 2×2 块 ±S
    frame   constant / polynomial: 单幂零标架 U = I + N，J = U⁻¹DU，g = UᵀGU
    pair    independent: J₂ 与 J₁ 共用标架，块取 S 或 ρI；same: J₂ = J₁；
            split: J₁ = λT + μT²，J₂ = (1−λ)T − μT²
    """

    dim: int = Field(default=settings.DEFAULT_DIM, ge=settings.MIN_DIM, le=settings.MAX_DIM)
    degree: int = Field(default=1, ge=0, le=settings.MAX_DEGREE)
    cubic: Literal["plastic", "dual"] = "plastic"
    tensors: int = Field(default=1, ge=0, le=2)
    tensor: Literal["scalar", "block"] = "block"
    pair: Literal["independent", "same", "split"] = "independent"
    frame: Literal["constant", "polynomial"] = "constant"
    non_integrable: bool = False
    metric: Literal["none", "constant", "polynomial", "hessian", "example"] = "none"
    g_symmetric: bool = True
    positive_definite: bool = False
    connection: Literal["none", "flat", "generic", "solved", "levi_civita"] = "none"
    parallel: bool = False
    metric_parallel: bool = False
    torsion_free: bool = False
    quasi_statistical: bool = False
    require_torsion: bool = False
