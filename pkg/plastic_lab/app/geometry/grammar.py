"""
表达式文法 (场景文件、CLI 参数共用)：

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') INT)?
    atom   := NUMBER | 'rho' | 'alpha' | COORD | '(' expr ')'

'alpha' 是对偶方程的实根 −ρ。除法允许除以任意非零表达式，结果是 RationalFn。
"""

import re
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from plastic_lab.app.core.config import settings
from plastic_lab.app.core.errors import ParseError
from plastic_lab.app.geometry.numberfield import ALPHA, RHO, FieldElem
from plastic_lab.app.geometry.symfunc import Polynomial, RationalFn

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),]))"
)

Token = Tuple[str, str, int]


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError("unexpected character", text, offset)
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class ExpressionParser:
    def __init__(self, text: str, coords: Sequence[str] = ()):
        self.text = text
        self.coords = list(coords)
        self.arity = len(self.coords)
        self.tokens = tokenize(text)
        self.index = 0

    # ---- token 游标 ----

    def _peek(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def _error(self, reason: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self._peek()
        return ParseError(reason, self.text, tok[2])

    def parse(self) -> RationalFn:
        if self._peek()[0] == "end":
            raise self._error("empty expression")
        value = self._expr()
        if self._peek()[0] != "end":
            raise self._error(f"unexpected token {self._peek()[1]!r}")
        return value

    def _expr(self) -> RationalFn:
        value = self._term()
        while self._peek()[1] in ("+", "-") and self._peek()[0] == "op":
            op = self._advance()[1]
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _term(self) -> RationalFn:
        value = self._unary()
        while self._peek()[0] == "op" and self._peek()[1] in ("*", "/"):
            op_tok = self._advance()
            rhs = self._unary()
            if op_tok[1] == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise self._error("division by zero", op_tok)
                value = value / rhs
        return value

    def _unary(self) -> RationalFn:
        tok = self._peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self._advance()
            operand = self._unary()
            return -operand if tok[1] == "-" else operand
        return self._power()

    def _power(self) -> RationalFn:
        base = self._atom()
        tok = self._peek()
        if tok[0] == "op" and tok[1] in ("^", "**"):
            self._advance()
            exp_tok = self._peek()
            if exp_tok[0] != "num" or "." in exp_tok[1]:
                raise self._error("exponent must be a non-negative integer", exp_tok)
            self._advance()
            exponent = int(exp_tok[1])
            if exponent > settings.MAX_EXPONENT:
                raise self._error(f"exponent {exponent} exceeds {settings.MAX_EXPONENT}", exp_tok)
            return base ** exponent
        return base

    def _atom(self) -> RationalFn:
        tok = self._advance()
        kind, value, _ = tok
        if kind == "num":
            return RationalFn.constant(self.arity, Fraction(value))
        if kind == "name":
            if value == "rho":
                return RationalFn.constant(self.arity, RHO)
            if value == "alpha":
                return RationalFn.constant(self.arity, ALPHA)
            if value in self.coords:
                return RationalFn.coordinate(self.arity, self.coords.index(value))
            raise ParseError(f"unknown name {value!r}", self.text, tok[2])
        if kind == "op" and value == "(":
            inner = self._expr()
            close = self._advance()
            if close[1] != ")":
                raise ParseError("expected ')'", self.text, close[2])
            return inner
        if kind == "end":
            raise ParseError("unexpected end of expression", self.text, tok[2])
        raise ParseError(f"unexpected token {value!r}", self.text, tok[2])


def parse_rational(text: str, coords: Sequence[str] = ()) -> RationalFn:
    if not isinstance(text, str):
        text = str(text)
    return ExpressionParser(text, coords).parse()


def parse_polynomial(text: str, coords: Sequence[str] = ()) -> Polynomial:
    value = parse_rational(text, coords)
    if not value.is_polynomial():
        raise ParseError("expected a polynomial, got a rational function", text, 0)
    return value.as_polynomial()


def parse_constant(text: str) -> FieldElem:
    value = parse_rational(text, ())
    return value.constant_value()


def parse_matrix(text: str) -> List[List[FieldElem]]:
    """CLI 矩阵参数：行以 ';' 分隔，元素以 ',' 分隔。"""
    rows: List[List[FieldElem]] = []
    offset = 0
    for row_text in text.split(";"):
        row: List[FieldElem] = []
        col_offset = offset
        for entry in row_text.split(","):
            try:
                row.append(parse_constant(entry))
            except ParseError as e:
                raise ParseError(e.reason, text, col_offset + e.position) from e
            col_offset += len(entry) + 1
        rows.append(row)
        offset += len(row_text) + 1
    return rows
