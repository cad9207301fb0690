"""
Points of the Riemann sphere in projective coordinates, chordal geometry and sphere samples.
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Tuple, Union

import numpy as np

from .errors import BranchcovError, ExpressionSyntaxError
from .polynomial import parse_constant

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True)
class SpherePoint:
    """The point a/b; b = 0 is infinity. Stored with max(|a|, |b|) = 1."""
    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        scale = max(abs(a), abs(b))
        if scale == 0 or not np.isfinite(scale):
            raise BranchcovError(f"invalid projective pair ({a}, {b})")
        object.__setattr__(self, "a", a / scale)
        object.__setattr__(self, "b", b / scale)

    @classmethod
    def from_complex(cls, z: complex) -> "SpherePoint":
        return cls(z, 1)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(1, 0)

    @property
    def is_infinity(self) -> bool:
        return self.b == 0

    def to_complex(self) -> complex:
        return complex("inf") if self.is_infinity else self.a / self.b

    def chordal(self, other: "SpherePoint") -> float:
        return chordal_distance(self.a, self.b, other.a, other.b)

    def to_r3(self) -> np.ndarray:
        return projective_to_r3(np.array([self.a]), np.array([self.b]))[0]

    @classmethod
    def from_r3(cls, point: Iterable[float]) -> "SpherePoint":
        a, b = r3_to_projective(np.asarray([list(point)], dtype=float))
        return cls(complex(a[0]), complex(b[0]))

    def negate(self) -> "SpherePoint":
        return SpherePoint(-self.a, self.b)

    def to_dict(self) -> Union[str, Dict[str, float]]:
        if self.is_infinity:
            return "inf"
        z = self.to_complex()
        return {"re": z.real, "im": z.imag}

    @classmethod
    def from_dict(cls, data: Any) -> "SpherePoint":
        if data == "inf":
            return cls.infinity()
        return cls.from_complex(complex(data["re"], data["im"]))

    def sort_key(self) -> Tuple[int, float, float]:
        if self.is_infinity:
            return (1, 0.0, 0.0)
        z = self.to_complex()
        return (0, round(z.real, 9), round(z.imag, 9))

    def __str__(self) -> str:
        if self.is_infinity:
            return "inf"
        z = self.to_complex()
        if z.imag == 0:
            return f"{z.real:.12g}"
        sign = "+" if z.imag >= 0 else "-"
        return f"{z.real:.12g}{sign}{abs(z.imag):.12g}i"


def chordal_distance(a1: complex, b1: complex, a2: complex, b2: complex) -> float:
    """|a1 b2 - a2 b1| / (|(a1, b1)| |(a2, b2)|); antipodal points are at distance 1."""
    norm = np.sqrt((abs(a1) ** 2 + abs(b1) ** 2) * (abs(a2) ** 2 + abs(b2) ** 2))
    return float(abs(a1 * b2 - a2 * b1) / norm)


def parse_point(text: str) -> SpherePoint:
    """Parse 'inf' or a complex literal such as '0.3+0.2i'."""
    cleaned = text.strip().lower()
    if cleaned in ("inf", "infinity", "∞"):
        return SpherePoint.infinity()
    try:
        return SpherePoint.from_complex(parse_constant(cleaned))
    except ExpressionSyntaxError as exc:
        raise ExpressionSyntaxError(f"invalid point {text!r}: {exc}", exc.position) from None


def sort_points(points: Iterable[SpherePoint]) -> List[SpherePoint]:
    """Finite points by rounded (re, im), then infinity."""
    return sorted(points, key=lambda p: p.sort_key())


def merge_points(points: Iterable[SpherePoint], tol: float) -> List[SpherePoint]:
    """Drop points within `tol` of an earlier one; a cluster touching infinity is represented by infinity."""
    kept: List[SpherePoint] = []
    for p in points:
        for i, q in enumerate(kept):
            if p.chordal(q) <= tol:
                if p.is_infinity and not q.is_infinity:
                    kept[i] = p
                break
        else:
            kept.append(p)
    inf = SpherePoint.infinity()
    return [inf if p.chordal(inf) <= tol else p for p in kept]


# Vectorised geometry

def projective_to_r3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit vectors (2 Re(a conj b), 2 Im(a conj b), |a|^2 - |b|^2) / (|a|^2 + |b|^2); infinity is the north pole."""
    cross = a * np.conj(b)
    norm = np.abs(a) ** 2 + np.abs(b) ** 2
    return np.stack([2 * cross.real, 2 * cross.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=-1) / norm[:, None]


def r3_to_projective(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of projective_to_r3, using the chart away from the nearer pole."""
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    upper = z > 0
    a = np.where(upper, 1 + z, x + 1j * y).astype(complex)
    b = np.where(upper, x - 1j * y, 1 - z).astype(complex)
    return a, b


def normalize_pairs(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    scale = np.maximum(np.abs(a), np.abs(b))
    return a / scale, b / scale


def fibonacci_sphere(n: int) -> np.ndarray:
    """Quasi-uniform unit vectors on the sphere."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(np.clip(1 - z * z, 0.0, None))
    phi = GOLDEN_ANGLE * np.arange(n)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def cap_sample(center: SpherePoint, radius: float, n: int) -> np.ndarray:
    """Quasi-uniform unit vectors in the chordal cap of the given radius; radius >= 1 is the whole sphere."""
    if radius >= 1:
        return fibonacci_sphere(n)
    theta = 2 * np.arcsin(radius)
    i = np.arange(n) + 0.5
    z = 1 - (1 - np.cos(theta)) * i / n
    r = np.sqrt(np.clip(1 - z * z, 0.0, None))
    phi = GOLDEN_ANGLE * np.arange(n)
    local = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    return local @ _rotation_from_north(center.to_r3()).T


def _rotation_from_north(target: np.ndarray) -> np.ndarray:
    axis = np.cross([0.0, 0.0, 1.0], target)
    s = np.linalg.norm(axis)
    c = target[2]
    if s < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + k + k @ k * ((1 - c) / s ** 2)


def covering_radius(sample: np.ndarray, points: np.ndarray, chunk: int = 256) -> float:
    """Largest chordal distance from a sample vector to its nearest point (both as unit vectors)."""
    if len(points) == 0:
        return 1.0
    worst = 0.0
    for start in range(0, len(sample), chunk):
        dots = sample[start:start + chunk] @ points.T
        nearest = np.clip(dots.max(axis=1), -1.0, 1.0)
        # |P - Q| / 2 = sqrt((1 - P.Q) / 2)
        worst = max(worst, float(np.sqrt((1 - nearest.min()) / 2)))
    return worst
