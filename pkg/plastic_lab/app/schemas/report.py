from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

Verdict = Literal["pass", "fail"]


class Failure(BaseModel):
    trial: int
    seed: int
    family: str = ""
    reason: str
    instance: Dict[str, Any] = Field(default_factory=dict)
    residual: Any = None  # 非零残差，多项式按字符串输出


class SuiteReport(BaseModel):
    suite: str
    trials: int
    verdict: Verdict
    failures: List[Failure] = Field(default_factory=list)
    ms: float = 0.0
    seed: int = 0
    dim: int = 2
    witnesses: Dict[str, int] = Field(default_factory=dict)
    truth_table: List[Dict[str, Any]] = Field(default_factory=list)
    discrepancy: Optional[Dict[str, Any]] = None
    float_max: Optional[float] = None

    @model_validator(mode="after")
    def _verdict_matches_failures(self):
        expected = "pass" if not self.failures else "fail"
        if self.verdict != expected:
            raise ValueError(f"verdict {self.verdict!r} inconsistent with {len(self.failures)} failure(s)")
        return self

    def stable_dump(self) -> Dict[str, Any]:
        """去掉计时字段，用于确定性比较"""
        return self.model_dump(exclude={"ms"})


class AggregateReport(BaseModel):
    suite: Literal["all"] = "all"
    trials: int
    seed: int
    dim: int
    verdict: Verdict
    reports: List[SuiteReport]
    ms: float = 0.0

    def stable_dump(self) -> Dict[str, Any]:
        data = self.model_dump(exclude={"ms"})
        data["reports"] = [r.stable_dump() for r in self.reports]
        return data


class CheckResult(BaseModel):
    check: str
    passed: bool
    detail: Dict[str, Any] = Field(default_factory=dict)
    residual: Any = None


class CheckReport(BaseModel):
    scenario: str
    verdict: Verdict
    results: List[CheckResult]


class Classification(BaseModel):
    matrix: List[List[str]]
    plastic: bool
    dual: bool
    branch: Literal["scalar", "conjugate", "none"]
    C: Optional[List[List[str]]] = None
    B: Optional[List[List[str]]] = None
    residual: List[List[str]]
