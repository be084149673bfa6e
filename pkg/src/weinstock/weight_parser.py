"""Boundary weights from text.

Expressions are sums and products of constants, ``cos(N*t)``, ``sin(N*t)`` and parenthesized
sub-expressions, optionally wrapped in one level of ``exp(...)``::

    1 + 0.2*cos(8*t)
    exp(0.1*cos(t))
    1.2 + 0.1*cos(2*t) - 0.05*sin(3*t)

Anything else is read as the path of a coefficient CSV with header ``n,re,im``. Modes with
``n > 0`` whose ``-n`` row is missing receive the conjugate coefficient.
"""

import csv
import re
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from weinstock.circle_fourier import FourierSeries, grid
from weinstock.errors import InvalidInputError, WeightSyntaxError
from weinstock.steklov_disk import DEFAULT_GRID_SIZE, BoundaryWeight

_TOKEN = re.compile(
    r'\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*/()]))'
)
_TRIG = {'cos': np.cos, 'sin': np.sin}

type Token = tuple[str, str, int]


def tokenize(text: str) -> list[Token]:
    """Split into ``(kind, text, position)`` tokens; kind is number, name, op or end."""
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        if text[position:].strip() == '':
            break
        match = _TOKEN.match(text, position)
        if match is None or match.lastgroup is None:
            offset = len(text[position:]) - len(text[position:].lstrip())
            raise WeightSyntaxError(
                f'Unexpected character "{text[position + offset]}"', position + offset
            )
        tokens.append((match.lastgroup, match[match.lastgroup], match.start(match.lastgroup)))
        position = match.end()
    tokens.append(('end', '', len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, angles: NDArray[np.float64]) -> None:
        self.tokens = tokenize(text)
        self.index = 0
        self.angles = angles

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, kind: str, text: str | None = None) -> Token:
        token = self.current
        if token[0] != kind or (text is not None and token[1] != text):
            wanted = text if text is not None else kind
            found = token[1] or 'end of input'
            raise WeightSyntaxError(f'Expected "{wanted}", found "{found}"', token[2])
        return self.advance()

    def parse(self) -> NDArray[np.float64]:
        values = self.expression(allow_exp=True)
        self.expect('end')
        return values

    def expression(self, allow_exp: bool) -> NDArray[np.float64]:
        values = self.term(allow_exp)
        while self.current[0] == 'op' and self.current[1] in '+-':
            sign = 1.0 if self.advance()[1] == '+' else -1.0
            values = values + sign * self.term(allow_exp)
        return values

    def term(self, allow_exp: bool) -> NDArray[np.float64]:
        sign = 1.0
        while self.current[0] == 'op' and self.current[1] in '+-':
            sign *= 1.0 if self.advance()[1] == '+' else -1.0
        values = sign * self.factor(allow_exp)
        while self.current[0] == 'op' and self.current[1] in '*/':
            operator = self.advance()
            right = self.factor(allow_exp)
            if operator[1] == '*':
                values = values * right
            else:
                if np.any(right == 0.0):
                    raise WeightSyntaxError('Division by zero', operator[2])
                values = values / right
        return values

    def factor(self, allow_exp: bool) -> NDArray[np.float64]:
        kind, text, position = self.current
        if kind == 'number':
            self.advance()
            return np.full(self.angles.shape, float(text))
        if kind == 'op' and text == '(':
            self.advance()
            values = self.expression(allow_exp)
            self.expect('op', ')')
            return values
        if kind == 'name' and text in _TRIG:
            self.advance()
            return _TRIG[text](self.frequency() * self.angles)
        if kind == 'name' and text == 'exp':
            if not allow_exp:
                raise WeightSyntaxError('exp(...) cannot be nested', position)
            self.advance()
            self.expect('op', '(')
            values = self.expression(allow_exp=False)
            self.expect('op', ')')
            return np.exp(values)
        found = text or 'end of input'
        raise WeightSyntaxError(f'Unexpected "{found}"', position)

    def frequency(self) -> int:
        """``(N*t)`` or ``(t)`` after a trigonometric function name."""
        self.expect('op', '(')
        n = 1
        if self.current[0] == 'number':
            token = self.advance()
            if not token[1].isdigit():
                raise WeightSyntaxError('Frequencies must be non-negative integers', token[2])
            n = int(token[1])
            self.expect('op', '*')
        self.expect('name', 't')
        self.expect('op', ')')
        return n


def evaluate_expression(text: str, angles: NDArray[np.float64]) -> NDArray[np.float64]:
    if not text.strip():
        raise WeightSyntaxError('Empty weight expression', 0)
    return _Parser(text, angles).parse()


def read_coefficients(path: Path, m: int = DEFAULT_GRID_SIZE) -> FourierSeries:
    if not path.is_file():
        raise InvalidInputError(f'Coefficient file not found: {path}')
    coeffs: dict[int, complex] = {}
    with open(path, newline='', encoding='utf-8') as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ['n', 're', 'im']:
            raise InvalidInputError(f'Coefficient file {path} must have the header "n,re,im"')
        for line, row in enumerate(reader, start=2):
            try:
                n = int(row['n'])
                coeffs[n] = complex(float(row['re']), float(row['im']))
            except (TypeError, ValueError) as ex:
                raise InvalidInputError(f'{path}:{line}: malformed coefficient row') from ex
    for n, value in list(coeffs.items()):
        if n > 0 and -n not in coeffs:
            coeffs[-n] = value.conjugate()
    if not coeffs:
        raise InvalidInputError(f'Coefficient file {path} contains no modes')
    return FourierSeries.from_mapping(coeffs, m)


def parse_weight(spec: str, m: int = DEFAULT_GRID_SIZE) -> BoundaryWeight:
    """Weight on the ``m``-point grid from an expression or a coefficient CSV path."""
    if spec.strip().lower().endswith('.csv') or Path(spec).is_file():
        return BoundaryWeight.from_series(read_coefficients(Path(spec), m), m)
    return BoundaryWeight.from_samples(evaluate_expression(spec, grid(m)))
