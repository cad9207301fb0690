"""
Complex polynomials: arithmetic, an expression parser and a simultaneous root finder.
"""

import logging
import re
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import ExpressionSyntaxError, RootFindingError, ZeroDenominator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Poly:
    """Polynomial in z with complex coefficients in ascending degree; the zero polynomial is ()."""
    coeffs: Tuple[complex, ...] = ()

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[complex], threshold: float = DEFAULT_TOLERANCES.normalization) -> "Poly":
        values = [complex(c) for c in coeffs]
        while values and abs(values[-1]) <= threshold:
            values.pop()
        return cls(tuple(values))

    @classmethod
    def constant(cls, c: complex) -> "Poly":
        return cls.from_coeffs([c])

    @classmethod
    def variable(cls) -> "Poly":
        return cls((0j, 1 + 0j))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> complex:
        return self.coeffs[-1] if self.coeffs else 0j

    def scale(self) -> float:
        return max((abs(c) for c in self.coeffs), default=0.0)

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0j,) * (n - len(self.coeffs))
        b = other.coeffs + (0j,) * (n - len(other.coeffs))
        return Poly.from_coeffs([x + y for x, y in zip(a, b)])

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly()
        return Poly.from_coeffs(np.convolve(self.coeffs, other.coeffs).tolist())

    def __pow__(self, exponent: int) -> "Poly":
        result = Poly.constant(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def times(self, c: complex) -> "Poly":
        return Poly.from_coeffs([c * x for x in self.coeffs])

    def derivative(self) -> "Poly":
        return Poly.from_coeffs([k * c for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, z: complex) -> complex:
        value = 0j
        for c in reversed(self.coeffs):
            value = value * z + c
        return value

    def homogeneous(self, a: complex, b: complex, degree: int) -> complex:
        """Sum of c_k a^k b^(degree - k)."""
        return sum(c * a ** k * b ** (degree - k) for k, c in enumerate(self.coeffs))

    def padded(self, degree: int) -> List[complex]:
        return list(self.coeffs) + [0j] * (degree + 1 - len(self.coeffs))

    def reversed(self, degree: int) -> "Poly":
        """z^degree * p(1/z)."""
        return Poly.from_coeffs(self.padded(degree)[::-1])

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            monomial = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            coefficient = _format_coefficient(c)
            if monomial and coefficient in ("1", "-1"):
                coefficient = coefficient[:-1]
            elif monomial:
                coefficient += "*"
            terms.append(coefficient + monomial)
        text = " + ".join(terms)
        return text.replace("+ -", "- ")


def _format_coefficient(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:g}"
    if c.real == 0:
        return f"{c.imag:g}i"
    sign = "+" if c.imag > 0 else "-"
    return f"({c.real:g}{sign}{abs(c.imag):g}i)"


def wronskian(p: Poly, q: Poly) -> Poly:
    """p' q - p q'."""
    return p.derivative() * q - p * q.derivative()


def resultant(p: Poly, q: Poly) -> complex:
    """Sylvester resultant of two nonzero polynomials."""
    m, n = p.degree, q.degree
    if m <= 0 or n <= 0:
        return p.leading ** max(n, 0) * q.leading ** max(m, 0)
    size = m + n
    sylvester = np.zeros((size, size), dtype=complex)
    p_desc = p.coeffs[::-1]
    q_desc = q.coeffs[::-1]
    for i in range(n):
        sylvester[i, i:i + m + 1] = p_desc
    for i in range(m):
        sylvester[n + i, i:i + n + 1] = q_desc
    return complex(np.linalg.det(sylvester))


# Expression parsing

_TOKEN = re.compile(r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i)?|(?P<name>[A-Za-z]+)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if not match:
            start = position + len(text[position:]) - len(text[position:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[start]!r}", start)
        matched = match.group(0)
        start = position + len(matched) - len(matched.lstrip())
        if match.group("number") is not None:
            kind = "imag" if match.group("imag") else "number"
            tokens.append(_Token(kind, match.group("number"), start))
        elif match.group("name") is not None:
            name = match.group("name")
            if name not in ("z", "i"):
                raise ExpressionSyntaxError(f"unknown name {name!r}", start)
            tokens.append(_Token(name, name, start))
        else:
            tokens.append(_Token("op", match.group("op"), start))
        position = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over polynomial expressions in z; '/' is handled by the caller."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.current
        self.index += 1
        return token

    def at_op(self, *ops: str) -> bool:
        return self.current.kind == "op" and self.current.text in ops

    def expect_op(self, op: str) -> None:
        if not self.at_op(op):
            raise ExpressionSyntaxError(f"expected {op!r}", self.current.position)
        self.advance()

    def sum(self) -> Poly:
        result = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> Poly:
        result = self.unary()
        while True:
            if self.at_op("*"):
                self.advance()
                result = result * self.unary()
            elif self.current.kind in ("number", "imag", "z", "i") or self.at_op("("):
                result = result * self.unary()
            else:
                return result

    def unary(self) -> Poly:
        if self.at_op("-"):
            self.advance()
            return -self.unary()
        if self.at_op("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise ExpressionSyntaxError("exponent must be a non-negative integer", token.position)
            self.advance()
            return base ** int(token.text)
        return base

    def atom(self) -> Poly:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Poly.constant(float(token.text))
        if token.kind == "imag":
            self.advance()
            return Poly.constant(1j * float(token.text))
        if token.kind == "i":
            self.advance()
            return Poly.constant(1j)
        if token.kind == "z":
            self.advance()
            return Poly.variable()
        if self.at_op("("):
            self.advance()
            inner = self.sum()
            self.expect_op(")")
            return inner
        if self.at_op("/"):
            raise ExpressionSyntaxError("division is only allowed once at top level", token.position)
        if token.kind == "end":
            raise ExpressionSyntaxError("unexpected end of expression", token.position)
        raise ExpressionSyntaxError(f"unexpected {token.text!r}", token.position)


def parse_ratio(text: str) -> Tuple[Poly, Poly]:
    """Parse `poly` or `poly / poly` into a numerator and denominator."""
    parser = _Parser(text)
    num = parser.sum()
    den = Poly.constant(1)
    if parser.at_op("/"):
        parser.advance()
        den = parser.sum()
        if parser.at_op("/"):
            raise ExpressionSyntaxError("only one top-level division is allowed", parser.current.position)
    if parser.current.kind != "end":
        raise ExpressionSyntaxError(f"unexpected {parser.current.text!r}", parser.current.position)
    if den.is_zero:
        raise ZeroDenominator(f"denominator of {text!r} is the zero polynomial")
    return num, den


def parse_constant(text: str) -> complex:
    """Parse a complex literal expression such as '1+2i' or '-0.5i'."""
    num, den = parse_ratio(text)
    if num.degree > 0 or den.degree > 0:
        raise ExpressionSyntaxError("expected a constant, found z", text.find("z"))
    return num(0) / den(0)


# Root finding

def _union_find_clusters(roots: np.ndarray, radius: float) -> List[List[int]]:
    parent = list(range(len(roots)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i):
            scale = max(1.0, abs(roots[i]), abs(roots[j]))
            if abs(roots[i] - roots[j]) <= radius * scale:
                parent[find(i)] = find(j)

    groups = {}
    for i in range(len(roots)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def cluster_roots(roots: Sequence[complex], radius: float) -> List[Tuple[complex, int]]:
    """Merge nearby roots; each cluster is represented by its centroid with multiplicity = size."""
    values = np.asarray(roots, dtype=complex)
    clusters = [(complex(values[group].mean()), len(group)) for group in _union_find_clusters(values, radius)]
    return sorted(clusters, key=lambda item: (round(item[0].real, 9), round(item[0].imag, 9)))


def _aberth(coeffs: np.ndarray, tolerances: ToleranceConfig, seed: int) -> np.ndarray:
    """Simultaneous Aberth iteration; coeffs ascending with nonzero constant and leading terms."""
    n = len(coeffs) - 1
    desc = coeffs[::-1] / coeffs[-1]
    ddesc = np.polyder(desc)
    magnitudes = np.abs(desc)
    radius = max(abs(desc[k]) ** (1.0 / k) for k in range(1, n + 1))
    offset = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi)
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + offset))

    eps = np.finfo(float).eps
    done = np.zeros(n, dtype=bool)
    for sweep in range(1, tolerances.max_sweeps + 1):
        p = np.polyval(desc, z)
        done |= np.abs(p) <= 4 * n * eps * np.polyval(magnitudes, np.abs(z))
        if done.all():
            logger.debug(f"aberth converged in {sweep} sweeps (degree {n})")
            return z
        dp = np.polyval(ddesc, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        diff[diff == 0] = eps
        repulsion = (1.0 / diff).sum(axis=1) - 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = p / dp
            step = ratio / (1.0 - ratio * repulsion)
        step = np.where(np.isfinite(step), step, 1e-3 * radius * (1 + 1j))
        step[done] = 0
        z = z - step
        done |= np.abs(step) < tolerances.root_correction * np.maximum(1.0, np.abs(z))

    if done.all():
        return z
    residuals = np.abs(np.polyval(desc, z)).tolist()
    raise RootFindingError(residuals, tolerances.max_sweeps)


def find_roots(
    poly: Poly,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> List[Tuple[complex, int]]:
    """Roots of a nonzero polynomial as (centroid, multiplicity) clusters; multiplicities sum to the degree."""
    if poly.is_zero:
        raise ValueError("the zero polynomial has no isolated roots")
    coeffs = np.asarray(poly.coeffs, dtype=complex)
    cutoff = tolerances.normalization * poly.scale()
    zeros = 0
    while zeros < len(coeffs) - 1 and abs(coeffs[zeros]) <= cutoff:
        zeros += 1
    rest = coeffs[zeros:]

    roots = [] if len(rest) <= 1 else list(_aberth(rest, tolerances, seed))
    clusters = cluster_roots(roots, tolerances.cluster_radius) if roots else []
    if zeros:
        clusters = _merge_zero_roots(clusters, zeros, tolerances.cluster_radius)
    return clusters


def _merge_zero_roots(clusters: List[Tuple[complex, int]], zeros: int, radius: float) -> List[Tuple[complex, int]]:
    merged = [(0j, zeros)]
    for value, count in clusters:
        if abs(value) <= radius:
            merged[0] = (0j, merged[0][1] + count)
        else:
            merged.append((value, count))
    return sorted(merged, key=lambda item: (round(item[0].real, 9), round(item[0].imag, 9)))
