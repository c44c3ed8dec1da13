"""异常层级。所有领域错误都继承 PlasticLabError，CLI 据此映射退出码。"""

from typing import Any, List, Optional, Tuple


class PlasticLabError(Exception):
    pass


class ParseError(PlasticLabError, ValueError):
    def __init__(self, message: str, text: str = "", position: int = 0, location: str = ""):
        self.text = text
        self.position = position
        self.location = location
        self.reason = message
        super().__init__(self._render())

    def _render(self) -> str:
        where = f"{self.location}: " if self.location else ""
        if self.text:
            return f"{where}{self.reason} at column {self.position + 1} in {self.text!r}"
        return f"{where}{self.reason}"

    def at(self, location: str) -> "ParseError":
        """返回带 JSON 路径的副本"""
        return ParseError(self.reason, self.text, self.position, location)


class DimensionMismatchError(PlasticLabError, ValueError):
    pass


class CoordinateIndexError(PlasticLabError, IndexError):
    pass


class PoleError(PlasticLabError, ZeroDivisionError):
    pass


class DegenerateMetricError(PlasticLabError, ValueError):
    pass


class AsymmetricMetricError(PlasticLabError, ValueError):
    pass


class InvalidParameterError(PlasticLabError, ValueError):
    pass


class NotPlasticError(PlasticLabError, ValueError):
    def __init__(self, message: str, residual: Any = None):
        super().__init__(message)
        self.residual = residual


class ScalarCanonicalFormError(PlasticLabError, ValueError):
    """A = ρI：标准形就是标量本身，没有共轭矩阵 C"""


class StructurePreconditionError(PlasticLabError, ValueError):
    def __init__(self, violations: List[Tuple[str, Any]]):
        self.violations = violations
        names = ", ".join(name for name, _ in violations)
        super().__init__(f"violated conditions: {names}")


class InfeasibleSpecError(PlasticLabError, ValueError):
    pass


class UnknownSuiteError(PlasticLabError, KeyError):
    def __init__(self, suite: str, known: Optional[List[str]] = None):
        self.suite = suite
        self.known = known or []
        super().__init__(suite)

    def __str__(self) -> str:
        return f"unknown suite {self.suite!r}; known: {', '.join(self.known)}"
