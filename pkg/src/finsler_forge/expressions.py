"""Coefficient expressions for run configurations.

A small Pratt parser for ``+ - * / ^``, unary minus, parentheses, coordinates and parameters by name,
the constants ``pi`` and ``e`` and the functions listed in ``FUNCTIONS``. Parsed expressions compile to
closures over ``Number`` so they can be seeded like any other field.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING
from typing import Literal
from typing import NamedTuple

from finsler_forge import jetcalc
from finsler_forge.exceptions import ExpressionParseError
from finsler_forge.jetcalc import ScalarField

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Mapping
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number

type Evaluator = Callable[[Mapping[str, Number]], Number]

FUNCTIONS: dict[str, Callable[[Number], Number]] = {
    "abs": jetcalc.dabs,
    "cos": jetcalc.cos,
    "cosh": jetcalc.cosh,
    "exp": jetcalc.exp,
    "log": jetcalc.log,
    "sech": jetcalc.sech,
    "sin": jetcalc.sin,
    "sinh": jetcalc.sinh,
    "sqrt": jetcalc.sqrt,
    "tan": jetcalc.tan,
    "tanh": jetcalc.tanh,
}
CONSTANTS: dict[str, float] = {"pi": math.pi, "e": math.e}

_TOKEN_RE: re.Pattern[str] = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),]))",
)

# Binding powers
_INFIX: dict[str, int] = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40, "**": 40}
_PREFIX_POWER: int = 30


class Token(NamedTuple):
    kind: Literal["number", "name", "op", "end"]
    text: str
    position: int


def tokenize(source: str) -> list[Token]:
    """Split an expression into tokens.

    Returns:
        Tokens followed by an end marker.

    Raises:
        ExpressionParseError: On a character that starts no token.
    """
    tokens: list[Token] = []
    position: int = 0
    while position < len(source):
        if source[position:].strip() == "":
            break
        match: re.Match[str] | None = _TOKEN_RE.match(source, position)
        if match is None or match.end() == position:
            offset: int = position + len(source[position:]) - len(source[position:].lstrip())
            msg: str = f"Unexpected character {source[offset]!r}"
            raise ExpressionParseError(msg, source, offset)
        kind: str = match.lastgroup or "op"
        tokens.append(Token(kind, match.group(kind), match.start(kind)))  # type: ignore[arg-type]
        position = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


@dataclass(frozen=True)
class Expression:
    """A parsed coefficient expression."""

    source: str
    """The text the expression was parsed from."""

    names: frozenset[str]
    """Identifiers the expression reads (functions and constants excluded)."""

    evaluate: Evaluator
    """Closure evaluating the expression in an environment of named numbers."""

    def bind(self, coordinates: Sequence[str], parameters: Mapping[str, float] | None = None) -> ScalarField:
        """Turn the expression into a field over the named coordinates.

        Args:
            coordinates: Coordinate names in point order.
            parameters: Fixed named values.

        Returns:
            The field.

        Raises:
            ExpressionParseError: If the expression reads a name that is neither a coordinate nor a parameter.
        """
        params: dict[str, float] = dict(parameters or {})
        unknown: set[str] = set(self.names) - set(coordinates) - set(params)
        if unknown:
            name: str = sorted(unknown)[0]
            found: re.Match[str] | None = re.search(rf"\b{re.escape(name)}\b", self.source)
            position: int = found.start() if found else 0
            msg: str = f"Unknown name {name!r}"
            raise ExpressionParseError(msg, self.source, position)

        names: tuple[str, ...] = tuple(coordinates)
        evaluate: Evaluator = self.evaluate

        def field(point: Sequence[Number]) -> Number:
            env: dict[str, Number] = dict(params)
            env.update(zip(names, point, strict=True))
            return evaluate(env)

        return ScalarField(dim=len(names), fn=field, name=self.source)


class _Parser:
    def __init__(self, source: str) -> None:
        self.source: str = source
        self.tokens: list[Token] = tokenize(source)
        self.index: int = 0
        self.names: set[str] = set()

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def fail(self, message: str, token: Token) -> ExpressionParseError:
        return ExpressionParseError(message, self.source, token.position)

    def advance(self) -> Token:
        token: Token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> None:
        if self.current.text != text or self.current.kind != "op":
            shown: str = self.current.text or "end of input"
            raise self.fail(f"Expected {text!r}, found {shown!r}", self.current)
        self.advance()

    def parse(self) -> Evaluator:
        if self.current.kind == "end":
            raise self.fail("Empty expression", self.current)
        tree: Evaluator = self.expression(0)
        if self.current.kind != "end":
            raise self.fail(f"Unexpected {self.current.text!r}", self.current)
        return tree

    def expression(self, right_power: int) -> Evaluator:
        left: Evaluator = self.prefix(self.advance())
        while self.current.kind == "op" and _INFIX.get(self.current.text, 0) > right_power:
            operator: Token = self.advance()
            power: int = _INFIX[operator.text]
            # Exponentiation is right associative
            right: Evaluator = self.expression(power - 1 if operator.text in {"^", "**"} else power)
            left = _combine(operator.text, left, right)
        return left

    def prefix(self, token: Token) -> Evaluator:
        if token.kind == "number":
            value: float = float(token.text)
            return lambda _env: value
        if token.kind == "name":
            return self.name(token)
        if token.kind == "op" and token.text == "(":
            inner: Evaluator = self.expression(0)
            self.expect(")")
            return inner
        if token.kind == "op" and token.text in {"-", "+"}:
            operand: Evaluator = self.expression(_PREFIX_POWER)
            if token.text == "+":
                return operand
            return lambda env: jetcalc.neg(operand(env))
        shown: str = token.text or "end of input"
        raise self.fail(f"Unexpected {shown!r}", token)

    def name(self, token: Token) -> Evaluator:
        if token.text in FUNCTIONS:
            function: Callable[[Number], Number] = FUNCTIONS[token.text]
            self.expect("(")
            argument: Evaluator = self.expression(0)
            self.expect(")")
            return lambda env: function(argument(env))
        if token.text in CONSTANTS:
            constant: float = CONSTANTS[token.text]
            return lambda _env: constant
        self.names.add(token.text)
        key: str = token.text
        return lambda env: env[key]


def _combine(operator: str, left: Evaluator, right: Evaluator) -> Evaluator:
    match operator:
        case "+":
            return lambda env: jetcalc.add(left(env), right(env))
        case "-":
            return lambda env: jetcalc.add(left(env), jetcalc.neg(right(env)))
        case "*":
            return lambda env: jetcalc.mul(left(env), right(env))
        case "/":
            return lambda env: jetcalc.mul(left(env), jetcalc.reciprocal(right(env)))
        case _:
            return lambda env: jetcalc.power(left(env), right(env))


def parse_expression(source: str) -> Expression:
    """Parse a coefficient expression.

    Args:
        source: Expression text, e.g. ``"exp(psi0) * sin(theta)^2"``.

    Returns:
        The parsed expression.
    """
    parser = _Parser(source)
    evaluate: Evaluator = parser.parse()
    return Expression(source=source, names=frozenset(parser.names), evaluate=evaluate)


def compile_field(
    source: str | float, coordinates: Sequence[str], parameters: Mapping[str, float] | None = None
) -> ScalarField:
    """Parse ``source`` and bind it to coordinates in one step; numbers become constant fields.

    Returns:
        The field.
    """
    if isinstance(source, int | float):
        return jetcalc.constant_field(len(coordinates), float(source))
    return parse_expression(source).bind(coordinates, parameters)
