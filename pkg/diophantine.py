"""Exact multivariate integer polynomials: parsing, printing, evaluation and
the exhaustive lattice oracle every numerical procedure is checked against.

Variables range over the NON-NEGATIVE integers (Fock occupation numbers).
To ask about positive solutions of D, substitute x_i -> x_i + 1.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from errors import ArityError, EnumerationCapError, PolynomialSyntaxError, PrecisionOverflowError
from models import LatticeBox, MultiIndex, Polynomial

logger = logging.getLogger(__name__)

DOUBLE_EXACT_LIMIT = 2 ** 53

# Sparse monomial key used while parsing, before K is known: sorted (variable, exponent) pairs.
SparseKey = Tuple[Tuple[int, int], ...]
SparsePoly = Dict[SparseKey, int]


class OracleResult(NamedTuple):
    min_value: int
    witnesses: List[MultiIndex]


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int
    value: int = 0


# Token kinds
NUMBER = "number"
VARIABLE = "variable"
OPERATOR = "operator"
END = "end"


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            start = i
            while i < len(text) and text[i].isdigit():
                i += 1
            tokens.append(Token(NUMBER, text[start:i], start, int(text[start:i])))
        elif ch == "x":
            start = i
            i += 1
            while i < len(text) and text[i].isdigit():
                i += 1
            digits = text[start + 1:i]
            if not digits:
                raise PolynomialSyntaxError("variable index must be numeric", start + 1)
            if int(digits) == 0:
                raise PolynomialSyntaxError("variable indices start at 1", start + 1)
            if digits[0] == "0":
                raise PolynomialSyntaxError("variable index has a leading zero", start + 1)
            tokens.append(Token(VARIABLE, text[start:i], start, int(digits)))
        elif ch in "+-*^()":
            tokens.append(Token(OPERATOR, ch, i))
            i += 1
        else:
            raise PolynomialSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(Token(END, "", len(text)))
    return tokens


def _add(a: SparsePoly, b: SparsePoly, sign: int = 1) -> SparsePoly:
    result = dict(a)
    for key, coefficient in b.items():
        total = result.get(key, 0) + sign * coefficient
        if total:
            result[key] = total
        else:
            result.pop(key, None)
    return result


def _mul_keys(a: SparseKey, b: SparseKey) -> SparseKey:
    powers = dict(a)
    for var, exp in b:
        powers[var] = powers.get(var, 0) + exp
    return tuple(sorted(powers.items()))


def _mul(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    result: SparsePoly = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = _mul_keys(ka, kb)
            total = result.get(key, 0) + ca * cb
            if total:
                result[key] = total
            else:
                result.pop(key, None)
    return result


def _pow(base: SparsePoly, exponent: int) -> SparsePoly:
    result: SparsePoly = {(): 1}
    while exponent:
        if exponent & 1:
            result = _mul(result, base)
        exponent >>= 1
        if exponent:
            base = _mul(base, base)
    return result


class _Parser:
    """Recursive descent over the token stream, one method per grammar rule."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.index = 0
        self.max_var = 0

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def at_operator(self, symbols: str) -> bool:
        token = self.peek()
        return token.kind == OPERATOR and token.text in symbols

    def expr(self) -> SparsePoly:
        result = self.term()
        while self.at_operator("+-"):
            sign = 1 if self.advance().text == "+" else -1
            result = _add(result, self.term(), sign)
        return result

    def term(self) -> SparsePoly:
        result = self.factor()
        while self.at_operator("*"):
            self.advance()
            result = _mul(result, self.factor())
        return result

    def factor(self) -> SparsePoly:
        result = self.base()
        if self.at_operator("^"):
            self.advance()
            token = self.peek()
            if token.kind != NUMBER:
                raise PolynomialSyntaxError("exponent must be a non-negative integer literal", token.position)
            self.advance()
            result = _pow(result, token.value)
        return result

    def base(self) -> SparsePoly:
        token = self.peek()
        if token.kind == NUMBER:
            self.advance()
            return {(): token.value} if token.value else {}
        if token.kind == VARIABLE:
            self.advance()
            self.max_var = max(self.max_var, token.value)
            return {((token.value, 1),): 1}
        if token.kind == OPERATOR and token.text == "(":
            self.advance()
            inner = self.expr()
            closing = self.peek()
            if not (closing.kind == OPERATOR and closing.text == ")"):
                raise PolynomialSyntaxError("expected ')'", closing.position)
            self.advance()
            return inner
        if token.kind == OPERATOR and token.text == "-":
            self.advance()
            return {key: -c for key, c in self.factor().items()}
        if token.kind == END:
            raise PolynomialSyntaxError("unexpected end of input", token.position)
        raise PolynomialSyntaxError(f"expected a number, variable, '(' or '-' but found {token.text!r}", token.position)


def parse(text: str) -> Polynomial:
    """Parse, expand and collect ``text`` into a canonical Polynomial.

    K is the largest variable index mentioned (at least 1, so constants
    are one-variable polynomials).
    """
    parser = _Parser(tokenize(text))
    sparse = parser.expr()
    trailing = parser.peek()
    if trailing.kind != END:
        raise PolynomialSyntaxError(f"unexpected {trailing.text!r}", trailing.position)

    num_vars = max(parser.max_var, 1)
    dense: Dict[MultiIndex, int] = {}
    for key, coefficient in sparse.items():
        exponents = [0] * num_vars
        for var, exp in key:
            exponents[var - 1] = exp
        dense[tuple(exponents)] = coefficient
    return Polynomial.from_terms(num_vars, dense)


def _format_monomial(coefficient: int, exponents: MultiIndex) -> str:
    factors = []
    for i, exp in enumerate(exponents, 1):
        if exp == 1:
            factors.append(f"x{i}")
        elif exp > 1:
            factors.append(f"x{i}^{exp}")
    magnitude = abs(coefficient)
    if not factors:
        return str(magnitude)
    if magnitude != 1:
        factors.insert(0, str(magnitude))
    return "*".join(factors)


def format_polynomial(p: Polynomial) -> str:
    """Canonical text in graded-lexicographic order; parses back to ``p``."""
    if not p.monomials:
        return "0"
    pieces = []
    for i, (coefficient, exponents) in enumerate(p.monomials):
        body = _format_monomial(coefficient, exponents)
        if i == 0:
            pieces.append(f"-{body}" if coefficient < 0 else body)
        else:
            pieces.append(f"{'-' if coefficient < 0 else '+'} {body}")
    return " ".join(pieces)


def evaluate(p: Polynomial, point: Sequence[int]) -> int:
    if len(point) != p.num_vars:
        raise ArityError(f"Point has {len(point)} coordinates, polynomial has {p.num_vars} variables")
    if any(x < 0 for x in point):
        raise ValueError("Points must have non-negative coordinates")
    total = 0
    for coefficient, exponents in p.monomials:
        term = coefficient
        for x, e in zip(point, exponents):
            if e:
                term *= int(x) ** e
        total += term
    return total


def lattice_box(cutoffs: Sequence[int], lower: Optional[Sequence[int]] = None) -> LatticeBox:
    upper = tuple(int(d) for d in cutoffs)
    return LatticeBox(lower=tuple(lower) if lower is not None else (0,) * len(upper), upper=upper)


def box_points(box: LatticeBox) -> Iterable[MultiIndex]:
    return itertools.product(*(range(lo, hi + 1) for lo, hi in zip(box.lower, box.upper)))


def on_upper_boundary(point: Sequence[int], box: LatticeBox) -> bool:
    return any(x == hi for x, hi in zip(point, box.upper))


def squared_value_as_double(p: Polynomial, point: Sequence[int]) -> float:
    value = evaluate(p, point) ** 2
    if value > DOUBLE_EXACT_LIMIT:
        raise PrecisionOverflowError(
            f"D{tuple(point)}^2 = {value} exceeds 2^53 and cannot be represented exactly in double precision"
        )
    return float(value)


def require_double_exact(p: Polynomial, box: LatticeBox) -> None:
    for point in box_points(box):
        squared_value_as_double(p, point)


def _scan(p: Polynomial, box: LatticeBox) -> OracleResult:
    best: Optional[int] = None
    witnesses: List[MultiIndex] = []
    for point in box_points(box):
        value = evaluate(p, point) ** 2
        if best is None or value < best:
            best = value
            witnesses = [point]
        elif value == best:
            witnesses.append(point)
    return OracleResult(best, witnesses)


def brute_force_min_square(p: Polynomial, box: LatticeBox, cap: int = 1_000_000, workers: int = 1) -> OracleResult:
    """Minimum of D(n)^2 over the box and all minimizers in lexicographic order."""
    if box.dims != p.num_vars:
        raise ArityError(f"Box has {box.dims} dimensions, polynomial has {p.num_vars} variables")
    if box.volume > cap:
        raise EnumerationCapError(f"Box volume {box.volume} exceeds the enumeration cap {cap}")

    if workers <= 1 or box.upper[0] == box.lower[0]:
        return _scan(p, box)

    slabs = [
        LatticeBox(lower=(x,) + box.lower[1:], upper=(x,) + box.upper[1:])
        for x in range(box.lower[0], box.upper[0] + 1)
    ]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        partials = list(executor.map(lambda slab: _scan(p, slab), slabs))

    best = min(partial.min_value for partial in partials)
    witnesses = [w for partial in partials if partial.min_value == best for w in partial.witnesses]
    logger.debug("oracle scanned %d points in %d slabs, minimum %d", box.volume, len(slabs), best)
    return OracleResult(best, witnesses)
