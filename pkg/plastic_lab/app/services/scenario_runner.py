"""
场景文件 (JSON) → 对象 → 逐项检查。

输入错误 (文件缺失、JSON/模型校验失败、分量解析失败、度量退化) 抛 PlasticLabError / OSError，
由 CLI 映射为退出码 2；检查本身不通过只体现在 CheckReport 里。
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from plastic_lab.app.core.errors import NotPlasticError, ParseError, StructurePreconditionError
from plastic_lab.app.core.logger import logger
from plastic_lab.app.geometry.chart import Chart, Metric, Tensor02, Tensor11, Tensor20, VectorField, gsym_residual
from plastic_lab.app.geometry.connection import Connection, coordinate_pairs, nijenhuis_tm
from plastic_lab.app.geometry.generalized import CHECK, HAT, GenOperator, gen_cov_deriv, nijenhuis_failure
from plastic_lab.app.geometry.plastic import (
    DUAL,
    PLASTIC,
    build_diag_structure,
    build_dual_structure,
    build_m100_structure,
    build_two_tensor_structure,
    matrix_cubic_residual,
)
from plastic_lab.app.schemas.report import CheckReport, CheckResult
from plastic_lab.app.schemas.scenario import Scenario, split_check
from plastic_lab.app.services.suites import render, suite_runner


@dataclass
class SuiteOptions:
    """`suite:<id>` 检查沿用命令行的 --trials/--seed/--dim/--float-crosscheck"""

    trials: Optional[int] = None
    seed: Optional[int] = None
    dim: Optional[int] = None
    float_check: bool = False


@dataclass
class ScenarioObjects:
    chart: Chart
    tensors: Dict[str, Tensor11] = field(default_factory=dict)
    metric: Optional[Metric] = None
    nabla: Optional[Connection] = None
    operator: Optional[GenOperator] = None
    # 结构构造失败时的违例，operator 随之缺席
    structure_error: Optional[CheckResult] = None


def _location(loc: Tuple[Any, ...]) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path


def load_scenario(source: Union[str, Path]) -> Scenario:
    try:
        text = Path(source).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not valid UTF-8 (byte {e.start})", location=str(source)) from e
    try:
        return Scenario.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        raise ParseError(first["msg"], location=_location(tuple(first["loc"])) or "scenario") from e


def _rows(chart: Chart, rows, path: str) -> List[list]:
    out = []
    for i, row in enumerate(rows):
        parsed = []
        for j, entry in enumerate(row):
            try:
                parsed.append(chart.parse(entry))
            except ParseError as e:
                raise e.at(f"{path}[{i}][{j}]") from e
        out.append(parsed)
    return out


def build_objects(scenario: Scenario) -> ScenarioObjects:
    chart = Chart(scenario.chart.dim, tuple(scenario.chart.coords or ()))
    objects = ScenarioObjects(chart=chart)
    for name, rows in scenario.tensors.items():
        objects.tensors[name] = Tensor11(_rows(chart, rows, f"tensors.{name}"))
    if scenario.metric is not None:
        objects.metric = Metric(_rows(chart, scenario.metric, "metric"))
    if scenario.christoffels is not None:
        objects.nabla = Connection(
            [_rows(chart, plane, f"christoffels[{k}]") for k, plane in enumerate(scenario.christoffels)]
        )
    if scenario.operator is not None:
        op = scenario.operator
        objects.operator = GenOperator(
            Tensor11(_rows(chart, op.TT, "operator.TT")),
            Tensor20(_rows(chart, op.TF, "operator.TF")),
            Tensor02(_rows(chart, op.FT, "operator.FT")),
            Tensor11(_rows(chart, op.FF, "operator.FF")),
        )
    elif scenario.structure is not None:
        objects.operator, objects.structure_error = _build_structure(scenario.structure, objects)
    return objects


def _build_structure(kind: str, objects: ScenarioObjects) -> Tuple[Optional[GenOperator], Optional[CheckResult]]:
    t, g = objects.tensors, objects.metric
    builders: Dict[str, Callable[[], GenOperator]] = {
        "diag": lambda: build_diag_structure(t["J1"], t["J2"]),
        "m100": lambda: build_m100_structure(t["J"]),
        "two-tensor": lambda: build_two_tensor_structure(g, t["J1"], t["J2"]),
        "two-tensor-dual": lambda: build_two_tensor_structure(g, t["J1"], t["J2"], dual=True),
        "dual": lambda: build_dual_structure(g, t["J"]),
    }
    coords = objects.chart.coords
    try:
        return builders[kind](), None
    except StructurePreconditionError as e:
        detail = {"violations": [name for name, _ in e.violations]}
        residual = {name: _strings(r, coords) for name, r in e.violations}
    except NotPlasticError as e:
        detail = {"error": str(e)}
        residual = _strings(e.residual, coords)
    logger.warning(f"structure {kind!r} could not be built: {detail}")
    return None, CheckResult(check=f"structure:{kind}", passed=False, detail=detail, residual=residual)


def _strings(value: Any, coords) -> Any:
    if hasattr(value, "to_strings"):
        return value.to_strings(coords)
    if hasattr(value, "to_dict"):
        return value.to_dict(coords)
    return render(value)


def _first_nonzero(items) -> Tuple[Optional[str], Any]:
    for label, value in items:
        if not value.is_zero():
            return label, value
    return None, None


def _result(check: str, objects: ScenarioObjects, label: Optional[str], residual: Any, **detail) -> CheckResult:
    if label is not None:
        detail["at"] = label
    return CheckResult(
        check=check,
        passed=residual is None,
        detail=detail,
        residual=None if residual is None else _strings(residual, objects.chart.coords),
    )


def run_check(check: str, objects: ScenarioObjects, options: SuiteOptions) -> CheckResult:
    name, arg = split_check(check)
    n = objects.chart.dim
    basis = [VectorField.basis(n, i) for i in range(n)]
    J = objects.tensors.get(arg) if arg else None
    g, nabla, op = objects.metric, objects.nabla, objects.operator

    if name in ("plastic", "dual"):
        residual = matrix_cubic_residual(J, PLASTIC if name == "plastic" else DUAL)
        return _result(check, objects, None, None if residual.is_zero() else residual)
    if name == "g-symmetric":
        residual = gsym_residual(g, J)
        return _result(check, objects, None, None if residual.is_zero() else residual)
    if name == "integrable":
        label, residual = _first_nonzero(
            (f"(d{i + 1},d{j + 1})", nijenhuis_tm(J, basis[i], basis[j])) for i, j in coordinate_pairs(n)
        )
        return _result(check, objects, label, residual)
    if name == "parallel":
        label, residual = _first_nonzero((f"d{i + 1}", nabla.covariant_tensor(X, J)) for i, X in enumerate(basis))
        return _result(check, objects, label, residual)
    if name == "metric-parallel":
        label, residual = _first_nonzero((f"d{i + 1}", nabla.covariant_metric(X, g)) for i, X in enumerate(basis))
        return _result(check, objects, label, residual)
    if name == "quasi-statistical":
        label, residual = _first_nonzero(
            (f"(d{i + 1},d{j + 1})", nabla.quasi_statistical_residual(g, basis[i], basis[j]))
            for i, j in coordinate_pairs(n)
        )
        return _result(check, objects, label, residual)
    if name == "suite":
        report = suite_runner.run_suite(arg, options.trials, options.seed, options.dim, options.float_check)
        return CheckResult(check=check, passed=report.verdict == "pass", detail={"report": report.stable_dump()})

    # 以下都需要 Ĵ
    if op is None:
        return CheckResult(check=check, passed=False, detail={"error": "operator unavailable, structure was rejected"})
    if name in ("generalized-plastic", "generalized-dual"):
        residual = op.cubic_residual(PLASTIC if name == "generalized-plastic" else DUAL)
        return _result(check, objects, None, None if residual.is_zero() else residual)
    if name == "nabla-integrable":
        failure = nijenhuis_failure(nabla, op)
        return _result(check, objects, *(failure or (None, None)))
    if name in ("hat-parallel", "check-parallel"):
        variant = HAT if name == "hat-parallel" else CHECK
        label, residual = _first_nonzero(
            (f"d{i + 1}", gen_cov_deriv(variant, nabla, g, op, X)) for i, X in enumerate(basis)
        )
        return _result(check, objects, label, residual)
    raise ParseError(f"unknown check {name!r}", location="checks")


def run_scenario(source: Union[str, Path], options: Optional[SuiteOptions] = None) -> CheckReport:
    options = options or SuiteOptions()
    scenario = load_scenario(source)
    objects = build_objects(scenario)
    logger.info(f"scenario {source}: {len(scenario.checks)} checks on a {objects.chart.dim}-dimensional chart")
    results: List[CheckResult] = []
    if objects.structure_error is not None:
        results.append(objects.structure_error)
    results.extend(run_check(check, objects, options) for check in scenario.checks)
    for r in results:
        if not r.passed:
            logger.warning(f"check {r.check} failed: {r.detail}")
    return CheckReport(
        scenario=str(source),
        verdict="pass" if all(r.passed for r in results) else "fail",
        results=results,
    )
