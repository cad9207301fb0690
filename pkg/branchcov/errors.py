"""
Exception hierarchy for branchcov.

Domain failures derive from BranchcovError rather than ValueError so that
they pass through pydantic validators without being rewrapped.
"""

from typing import List, Optional


class BranchcovError(Exception):
    """Base class for all computation failures."""


# fgab / ktheory

class IllDefinedHomomorphism(BranchcovError):
    """A matrix does not induce a homomorphism between the given groups."""

    def __init__(self, generator_index: int, message: Optional[str] = None):
        self.generator_index = generator_index
        super().__init__(
            message or f"matrix is not well defined on domain generator {generator_index}"
        )


class GeneratorMismatch(BranchcovError):
    """Two homomorphisms do not share the group they are composed through."""


class SequenceError(BranchcovError):
    """A six-term sequence is structurally invalid."""


class SpaceError(BranchcovError):
    """A space descriptor is malformed."""


# ratmap

class ExpressionSyntaxError(BranchcovError):
    """The rational-function expression could not be parsed."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class ZeroDenominator(BranchcovError):
    """The denominator of an expression is the zero polynomial."""


class DegenerateMapError(BranchcovError):
    """The expression does not define a map of degree at least 1."""


class CoprimalityError(BranchcovError):
    """Numerator and denominator share a root."""

    def __init__(self, resultant: float):
        self.resultant = resultant
        super().__init__(f"numerator and denominator are not coprime (|resultant| = {resultant:.3e})")


class RootFindingError(BranchcovError):
    """Simultaneous iteration failed to converge."""

    def __init__(self, residuals: List[float], sweeps: int):
        self.residuals = residuals
        self.sweeps = sweeps
        worst = max(residuals) if residuals else float("nan")
        super().__init__(f"root finder did not converge after {sweeps} sweeps (max residual {worst:.3e})")


class RiemannHurwitzError(BranchcovError):
    """Critical multiplicities do not add up to 2d - 2."""

    def __init__(self, expected: int, found: int):
        self.expected = expected
        self.found = found
        super().__init__(f"Riemann-Hurwitz violated: expected {expected}, found {found}")


class ExplosionError(BranchcovError):
    """A point enumeration exceeded its size guard."""

    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"enumeration produced {count} points, limit is {limit}")


# plcover / finmodel

class PLMapError(BranchcovError):
    """Invalid piecewise-linear map or argument."""


class ModelError(BranchcovError):
    """Invalid finite dynamical model."""
