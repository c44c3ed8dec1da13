from plastic_lab.app.core.logger import logger
from plastic_lab.app.geometry.plastic import Matrix2, classify_matrix
from plastic_lab.app.schemas.report import Classification


def classify(text: str) -> Classification:
    """
    "a,b;c,d" → 是否塑性 / 标量分支 ρI / 共轭分支 (C, B)。
    解析失败抛 ParseError。
    """
    A = Matrix2.parse(text)
    result = classify_matrix(A)
    logger.debug(f"classified {A}: {result['branch']}")
    return Classification(matrix=A.to_strings(), **result)
