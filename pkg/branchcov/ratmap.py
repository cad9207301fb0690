"""
Rational self-maps of the Riemann sphere.

Maps are evaluated on projective pairs so infinity needs no special case:
with D = degree, z = (a, b) maps to (A(a, b), B(a, b)) where A and B are the
numerator and denominator homogenized to degree D. All tolerances come from
one ToleranceConfig.

Density and expansion checks sample the sphere and are heuristic evidence
for simplicity and pure infiniteness, never proofs.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import BranchcovError, CoprimalityError, DegenerateMapError, ExplosionError, RiemannHurwitzError
from .polynomial import Poly, find_roots, parse_ratio, resultant, wronskian
from .sphere import (
    SpherePoint, cap_sample, covering_radius, fibonacci_sphere, merge_points, normalize_pairs,
    projective_to_r3, r3_to_projective, sort_points,
)

logger = logging.getLogger(__name__)

ScalarField = Callable[[SpherePoint], complex]


@dataclass(frozen=True)
class RationalMap:
    """num/den with coprime num, den scaled so the largest coefficient has modulus 1."""
    num: Poly
    den: Poly

    @classmethod
    def from_polys(cls, num: Poly, den: Poly, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> "RationalMap":
        if den.is_zero:
            raise DegenerateMapError("denominator is the zero polynomial")
        if num.is_zero or max(num.degree, den.degree) < 1:
            raise DegenerateMapError("constant expressions do not define a self-map of degree >= 1")
        if num.degree >= 1 and den.degree >= 1:
            res = abs(resultant(num.times(1 / num.scale()), den.times(1 / den.scale())))
            if res <= tolerances.coprimality:
                raise CoprimalityError(res)
        scale = max(num.scale(), den.scale())
        return cls(num.times(1 / scale), den.times(1 / scale))

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def __call__(self, z: SpherePoint) -> SpherePoint:
        return evaluate(self, z)

    def __str__(self) -> str:
        if self.den.degree == 0:
            return str(self.num.times(1 / self.den.leading))
        return f"({self.num}) / ({self.den})"


def parse_rational_map(text: str, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> RationalMap:
    """Parse an expression like '(z^2+1)^2 / (4*z*(z^2-1))'."""
    num, den = parse_ratio(text)
    q = RationalMap.from_polys(num, den, tolerances)
    logger.debug(f"parsed {text!r} as a map of degree {q.degree}")
    return q


def _homogeneous_pair(q: RationalMap, a: complex, b: complex) -> Tuple[complex, complex]:
    d = q.degree
    return q.num.homogeneous(a, b, d), q.den.homogeneous(a, b, d)


def evaluate(q: RationalMap, z: SpherePoint) -> SpherePoint:
    """Image of z under q, exact at poles and at infinity."""
    big_a, big_b = _homogeneous_pair(q, z.a, z.b)
    if big_a == 0 and big_b == 0:
        raise BranchcovError(f"indeterminate value at {z}")
    return SpherePoint(big_a, big_b)


def _evaluate_many(q: RationalMap, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d = q.degree
    big_a = sum(c * a ** k * b ** (d - k) for k, c in enumerate(q.num.coeffs))
    big_b = sum(c * a ** k * b ** (d - k) for k, c in enumerate(q.den.coeffs))
    return normalize_pairs(big_a, big_b)


def spherical_derivative(q: RationalMap, z: SpherePoint) -> float:
    """|q'(z)| (1 + |z|^2) / (1 + |q(z)|^2), computed on projective pairs."""
    d = q.degree
    a, b = z.a, z.b
    big_a, big_b = _homogeneous_pair(q, a, b)

    def partials(poly: Poly) -> Tuple[complex, complex]:
        da = sum(k * c * a ** (k - 1) * b ** (d - k) for k, c in enumerate(poly.coeffs) if k >= 1)
        db = sum((d - k) * c * a ** k * b ** (d - k - 1) for k, c in enumerate(poly.coeffs) if k < d)
        return da, db

    num_a, num_b = partials(q.num)
    den_a, den_b = partials(q.den)
    jacobian = num_a * den_b - num_b * den_a
    return abs(jacobian) * (abs(a) ** 2 + abs(b) ** 2) / (d * (abs(big_a) ** 2 + abs(big_b) ** 2))


def cycle_multiplier(q: RationalMap, cycle: List[SpherePoint]) -> float:
    """Product of spherical derivatives around a cycle."""
    product = 1.0
    for p in cycle:
        product *= spherical_derivative(q, p)
    return product


def preimages(
    q: RationalMap,
    w: SpherePoint,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> List[Tuple[SpherePoint, int]]:
    """The fiber q^-1(w) with multiplicities summing to the degree."""
    p = q.num.times(w.b) - q.den.times(w.a)
    if p.is_zero:
        raise BranchcovError(f"fiber over {w} is not finite")
    fiber = [(SpherePoint.from_complex(z), m) for z, m in (find_roots(p, tolerances, seed) if p.degree >= 1 else [])]
    at_infinity = q.degree - p.degree
    if at_infinity:
        fiber.append((SpherePoint.infinity(), at_infinity))
    return sorted(fiber, key=lambda item: item[0].sort_key())


# Branch data

@dataclass(frozen=True)
class CriticalPoint:
    point: SpherePoint
    multiplicity: int

    def to_dict(self) -> Dict[str, Any]:
        return {"point": self.point.to_dict(), "multiplicity": self.multiplicity}


@dataclass(frozen=True)
class BranchData:
    """Critical points, critical values (S'), the upstairs branch set (S) and the postcritical set."""
    degree: int
    critical_points: List[CriticalPoint]
    critical_values: List[SpherePoint]
    upstairs_branch: List[SpherePoint]
    infinity_local_degree: int
    riemann_hurwitz: int
    postcritical_set: List[SpherePoint] = field(default_factory=list)
    postcritically_finite: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "degree": self.degree,
            "critical_points": [c.to_dict() for c in self.critical_points],
            "critical_values": [p.to_dict() for p in self.critical_values],
            "upstairs_branch": [p.to_dict() for p in self.upstairs_branch],
            "infinity_local_degree": self.infinity_local_degree,
            "riemann_hurwitz": self.riemann_hurwitz,
            "postcritical_set": [p.to_dict() for p in self.postcritical_set],
            "postcritically_finite": self.postcritically_finite,
        }


def _vanishing_order_at_zero(poly: Poly, tolerances: ToleranceConfig) -> int:
    cutoff = tolerances.normalization * poly.scale()
    order = 0
    while order < poly.degree and abs(poly.coeffs[order]) <= cutoff:
        order += 1
    return order


def critical_points(
    q: RationalMap,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> BranchData:
    """
    Critical points from the roots of num' den - num den'; infinity is critical
    when the Wronskian of the map in the chart at infinity vanishes at 0.
    """
    d = q.degree
    w = wronskian(q.num, q.den)
    finite = find_roots(w, tolerances, seed) if w.degree >= 1 else []
    points = [CriticalPoint(SpherePoint.from_complex(z), m + 1) for z, m in finite]

    w_inf = wronskian(q.num.reversed(d), q.den.reversed(d))
    infinity_local_degree = _vanishing_order_at_zero(w_inf, tolerances) + 1
    if infinity_local_degree > 1:
        points.append(CriticalPoint(SpherePoint.infinity(), infinity_local_degree))
    logger.debug(f"local degree at infinity: {infinity_local_degree}")

    total = sum(c.multiplicity - 1 for c in points)
    if total != 2 * d - 2:
        raise RiemannHurwitzError(2 * d - 2, total)

    values = sort_points(merge_points((evaluate(q, c.point) for c in points), tolerances.value_merge))
    upstairs = []
    for v in values:
        upstairs.extend(x for x, _ in preimages(q, v, tolerances, seed))
    upstairs = sort_points(merge_points(upstairs, tolerances.cluster_radius))

    return BranchData(
        degree=d,
        critical_points=sorted(points, key=lambda c: c.point.sort_key()),
        critical_values=values,
        upstairs_branch=upstairs,
        infinity_local_degree=infinity_local_degree,
        riemann_hurwitz=total,
    )


def puncture_count(branch: BranchData, tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> int:
    """Number of points removed from the sphere to get the intersection of U and q(U): |S u S'|."""
    return len(merge_points(branch.upstairs_branch + branch.critical_values, tolerances.cluster_radius))


# Orbits

@dataclass(frozen=True)
class OrbitRecord:
    points: List[SpherePoint]
    cycle_start: Optional[int]
    cycle_length: Optional[int]
    finite: bool
    attracted: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [p.to_dict() for p in self.points],
            "cycle_start": self.cycle_start,
            "cycle_length": self.cycle_length,
            "finite": self.finite,
            "attracted": self.attracted,
        }


def _snap(p: SpherePoint, tolerances: ToleranceConfig) -> SpherePoint:
    return SpherePoint.infinity() if abs(p.b) < tolerances.infinity_snap else p


def forward_orbit(
    q: RationalMap,
    z: SpherePoint,
    max_steps: int,
    tol: Optional[float] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> OrbitRecord:
    """
    Iterate until an iterate returns within `tol` of an earlier one.

    A return closes a cycle when it is exact up to exact_return or when the
    cycle it closes is not attracting. A near return onto an attracting cycle
    means the orbit converges without landing, so it is reported as attracted
    and not finite.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    tol = tolerances.orbit_tol if tol is None else tol
    points = [_snap(z, tolerances)]
    for _ in range(max_steps):
        image = _snap(evaluate(q, points[-1]), tolerances)
        gaps = [image.chordal(p) for p in points]
        j = int(np.argmin(gaps))
        if gaps[j] <= tol:
            cycle = points[j:]
            if gaps[j] <= tolerances.exact_return or cycle_multiplier(q, cycle) >= 1:
                return OrbitRecord(points, j, len(cycle), finite=True)
            logger.debug(f"orbit of {z} converges to an attracting cycle of length {len(cycle)}")
            return OrbitRecord(points + [image], None, None, finite=False, attracted=True)
        points.append(image)
    return OrbitRecord(points, None, None, finite=False)


def postcritical_set(
    q: RationalMap,
    max_steps: int,
    tol: Optional[float] = None,
    branch: Optional[BranchData] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> BranchData:
    """Union of the forward orbits of the critical values."""
    branch = branch or critical_points(q, tolerances, seed)
    tol = tolerances.orbit_tol if tol is None else tol
    collected: List[SpherePoint] = []
    finite = True
    for v in branch.critical_values:
        orbit = forward_orbit(q, v, max_steps, tol, tolerances)
        collected.extend(orbit.points)
        finite = finite and orbit.finite
    return replace(
        branch,
        postcritical_set=sort_points(merge_points(collected, tol)),
        postcritically_finite=finite,
    )


def is_postcritically_finite(
    q: RationalMap,
    max_steps: int,
    tol: Optional[float] = None,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> bool:
    return bool(postcritical_set(q, max_steps, tol, tolerances=tolerances).postcritically_finite)


# Transfer operator

def iterated_fiber(
    q: RationalMap,
    y: SpherePoint,
    n: int,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> List[Tuple[SpherePoint, int]]:
    """Distinct points of q^-n(y) with multiplicities."""
    if n < 0:
        raise ValueError("n must be non-negative")
    fiber = [(y, 1)]
    for _ in range(n):
        merged: List[Tuple[SpherePoint, int]] = []
        for point, count in fiber:
            for x, e in preimages(q, point, tolerances, seed):
                for i, (other, total) in enumerate(merged):
                    if x.chordal(other) <= tolerances.cluster_radius:
                        merged[i] = (other, total + count * e)
                        break
                else:
                    merged.append((x, count * e))
        fiber = merged
    return sorted(fiber, key=lambda item: item[0].sort_key())


def transfer_apply(
    q: RationalMap,
    xi: ScalarField,
    n: int,
    y: SpherePoint,
    weighted: bool = False,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> complex:
    """Sum of xi over q^-n(y): distinct points, or counted with multiplicity when `weighted`."""
    if n < 1:
        raise ValueError("n must be at least 1")
    fiber = iterated_fiber(q, y, n, tolerances, seed)
    return sum((complex(xi(x)) * (m if weighted else 1) for x, m in fiber), 0j)


def inner_product_eval(
    q: RationalMap,
    xi: ScalarField,
    eta: ScalarField,
    y: SpherePoint,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> complex:
    """<xi, eta>(y): sum of conj(xi) eta over the distinct points of the fiber over y."""
    return transfer_apply(
        q, lambda x: complex(xi(x)).conjugate() * complex(eta(x)), 1, y,
        tolerances=tolerances, seed=seed,
    )


# Heuristic dynamics evidence

class _PointIndex:
    """Chordal deduplication of sphere points on a grid of unit vectors."""

    def __init__(self, radius: float):
        self.limit = 2 * radius
        self.cell = 2 * radius
        self.grid: Dict[Tuple[int, int, int], List[int]] = {}
        self.vectors: List[np.ndarray] = []

    def add(self, p: SpherePoint) -> bool:
        v = p.to_r3()
        key = tuple(int(k) for k in np.floor(v / self.cell))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    for i in self.grid.get((key[0] + dx, key[1] + dy, key[2] + dz), ()):
                        if np.linalg.norm(self.vectors[i] - v) <= self.limit:
                            return False
        self.grid.setdefault(key, []).append(len(self.vectors))
        self.vectors.append(v)
        return True

    def __len__(self) -> int:
        return len(self.vectors)

    def array(self) -> np.ndarray:
        return np.array(self.vectors)


@dataclass(frozen=True)
class DensityReport:
    depth: int
    epsilon: float
    achieved_epsilon: float
    point_count: int
    passed: bool
    evidence: str = "heuristic"

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def backward_density_check(
    q: RationalMap,
    start: SpherePoint,
    depth: int,
    epsilon: float,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> DensityReport:
    """Covering radius of the backward tree of `start` against a quasi-uniform sphere sample."""
    if depth < 0 or epsilon <= 0:
        raise ValueError("depth must be non-negative and epsilon positive")
    index = _PointIndex(tolerances.density_dedupe)
    index.add(start)
    frontier = [start]
    for level in range(depth):
        fresh = []
        for p in frontier:
            for x, _ in preimages(q, p, tolerances, seed):
                if index.add(x):
                    fresh.append(x)
                if len(index) > tolerances.explosion_limit:
                    raise ExplosionError(len(index), tolerances.explosion_limit)
        logger.debug(f"backward tree level {level + 1}: {len(fresh)} new points")
        frontier = fresh

    sample = fibonacci_sphere(tolerances.density_sample)
    achieved = covering_radius(sample, index.array())
    return DensityReport(
        depth=depth,
        epsilon=epsilon,
        achieved_epsilon=achieved,
        point_count=len(index),
        passed=achieved <= epsilon,
    )


@dataclass(frozen=True)
class ExpansionReport:
    center: SpherePoint
    radius: float
    max_n: int
    epsilon: float
    n_found: Optional[int]
    covered: bool
    radii: List[float]
    evidence: str = "heuristic"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "center": self.center.to_dict(),
            "radius": self.radius,
            "max_n": self.max_n,
            "epsilon": self.epsilon,
            "n_found": self.n_found,
            "covered": self.covered,
            "radii": self.radii,
            "evidence": self.evidence,
        }


def expansion_check(
    q: RationalMap,
    center: SpherePoint,
    radius: float,
    max_n: int,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
) -> ExpansionReport:
    """First n for which the image of a sampled chordal cap under q^n is epsilon-dense."""
    if radius <= 0:
        raise ValueError("cap radius must be positive")
    epsilon = tolerances.expansion_epsilon
    reference = fibonacci_sphere(tolerances.density_sample)
    a, b = normalize_pairs(*r3_to_projective(cap_sample(center, radius, tolerances.expansion_sample)))
    radii = []
    for n in range(max_n + 1):
        achieved = covering_radius(reference, projective_to_r3(a, b))
        radii.append(achieved)
        if achieved <= epsilon:
            return ExpansionReport(center, radius, max_n, epsilon, n, True, radii)
        a, b = _evaluate_many(q, a, b)
    return ExpansionReport(center, radius, max_n, epsilon, None, False, radii)
