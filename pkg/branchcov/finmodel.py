"""
Finite models of partially defined dynamics.

A model is a finite set of labelled points and a partial map T. From it we
enumerate the relations R_N, the groupoid of triples (x, m - n, y) with
T^m x = T^n y, orbits, freeness violations and the Bratteli diagram of the
tower of relations. On a finite discrete set the openness and surjectivity
conditions of the continuous theory are vacuous, so reports carry a caveat
that these models only approximate it.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ModelError

logger = logging.getLogger(__name__)

FINITE_MODEL_CAVEAT = (
    "finite discrete models are approximation devices only: every point is open, "
    "so eventually periodic points always violate essential freeness"
)


class FiniteDynSys(BaseModel):
    """Finite set of points with a partial self-map; dom(T) is the set of keys of `map`."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    points: Tuple[str, ...] = Field(..., description="Point labels, kept in lexicographic order")
    transitions: Dict[str, str] = Field(default_factory=dict, alias="map", description="T on its domain")

    @field_validator("points")
    @classmethod
    def _sort_points(cls, points: Tuple[str, ...]) -> Tuple[str, ...]:
        if len(set(points)) != len(points):
            raise ModelError("point labels must be unique")
        return tuple(sorted(points))

    @model_validator(mode="after")
    def _check_transitions(self) -> "FiniteDynSys":
        known = set(self.points)
        for x, y in self.transitions.items():
            if x not in known or y not in known:
                raise ModelError(f"transition {x} -> {y} uses an unknown point")
        return self

    @property
    def dom(self) -> List[str]:
        return sorted(self.transitions)

    @property
    def ran(self) -> List[str]:
        return sorted(set(self.transitions.values()))

    def apply(self, x: str, n: int) -> Optional[str]:
        """T^n x, or None when x is not in dom(T^n)."""
        for _ in range(n):
            if x not in self.transitions:
                return None
            x = self.transitions[x]
        return x

    def to_json_dict(self) -> Dict[str, Any]:
        return {"points": list(self.points), "map": dict(sorted(self.transitions.items()))}


def load_model(data: Dict[str, Any]) -> FiniteDynSys:
    """Build a model from {"points": [...], "map": {...}}."""
    return FiniteDynSys.model_validate(data)


class _UnionFind:
    def __init__(self, items: List[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: str, y: str) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def classes(self) -> List[List[str]]:
        groups: Dict[str, List[str]] = {}
        for x in sorted(self.parent):
            groups.setdefault(self.find(x), []).append(x)
        return sorted(groups.values())


class Partition(BaseModel):
    level: int = Field(..., description="N in R_N")
    classes: List[List[str]] = Field(..., description="Equivalence classes in lexicographic order")
    closure_applied: bool = Field(False, description="True when the listed pairs were not already transitive")

    def class_of(self, x: str) -> List[str]:
        return next(c for c in self.classes if x in c)


def _related(s: FiniteDynSys, x: str, y: str, level: int) -> bool:
    for n in range(level + 1):
        tx, ty = s.apply(x, n), s.apply(y, n)
        if tx is not None and tx == ty:
            return True
    return False


def rn_classes(s: FiniteDynSys, level: int) -> Partition:
    """Partition generated by pairs with T^n x = T^n y for some n <= level."""
    if level < 0:
        raise ModelError("level must be non-negative")
    uf = _UnionFind(list(s.points))
    for n in range(level + 1):
        fibers: Dict[str, str] = {}
        for x in s.points:
            image = s.apply(x, n)
            if image is None:
                continue
            if image in fibers:
                uf.union(fibers[image], x)
            else:
                fibers[image] = x
    classes = uf.classes()
    closure = any(
        not _related(s, x, y, level)
        for c in classes for i, x in enumerate(c) for y in c[i + 1:]
    )
    if closure:
        logger.warning(f"R_{level} is not transitive on this model; transitive closure applied")
    return Partition(level=level, classes=classes, closure_applied=closure)


class GroupoidElement(BaseModel):
    """(x, k, y) with a witness (m, n): k = m - n and T^m x = T^n y."""
    model_config = ConfigDict(frozen=True)

    x: str
    k: int
    y: str
    witness: Tuple[int, int]

    def is_valid(self, s: FiniteDynSys) -> bool:
        m, n = self.witness
        tx, ty = s.apply(self.x, m), s.apply(self.y, n)
        return m - n == self.k and tx is not None and tx == ty


def groupoid_enumerate(s: FiniteDynSys, max_exponent: int) -> List[GroupoidElement]:
    """All (x, m - n, y) with m, n <= max_exponent, each with its lexicographically least witness."""
    if max_exponent < 0:
        raise ModelError("max_exponent must be non-negative")
    found: Dict[Tuple[str, int, str], GroupoidElement] = {}
    for x in s.points:
        for y in s.points:
            for m in range(max_exponent + 1):
                tx = s.apply(x, m)
                if tx is None:
                    break
                for n in range(max_exponent + 1):
                    ty = s.apply(y, n)
                    if ty is None:
                        break
                    if tx == ty and (x, m - n, y) not in found:
                        found[(x, m - n, y)] = GroupoidElement(x=x, k=m - n, y=y, witness=(m, n))
    return [found[key] for key in sorted(found, key=lambda t: (t[0], t[2], t[1]))]


def compose_elements(s: FiniteDynSys, g: GroupoidElement, h: GroupoidElement) -> GroupoidElement:
    """(x, k, y)(y, l, z) = (x, k + l, z) with a witness built from the two given ones."""
    if g.y != h.x:
        raise ModelError(f"elements are not composable: {g.y} != {h.x}")
    m, n = g.witness
    p, q = h.witness
    witness = (m, q + n - p) if n >= p else (m + p - n, q)
    product = GroupoidElement(x=g.x, k=g.k + h.k, y=h.y, witness=witness)
    if not product.is_valid(s):
        raise ModelError(f"constructed witness {witness} does not validate")
    return product


def inverse_element(g: GroupoidElement) -> GroupoidElement:
    m, n = g.witness
    return GroupoidElement(x=g.y, k=-g.k, y=g.x, witness=(n, m))


def orbit(s: FiniteDynSys, x: str, max_exponent: int) -> List[str]:
    """Points y with T^m x = T^n y for some m, n <= max_exponent."""
    if x not in s.points:
        raise ModelError(f"unknown point {x!r}")
    images = {s.apply(x, m) for m in range(max_exponent + 1)} - {None}
    return [
        y for y in s.points
        if any(s.apply(y, n) in images for n in range(max_exponent + 1))
    ]


class MinimalityReport(BaseModel):
    max_exponent: int
    orbit_sizes: Dict[str, int] = Field(..., description="Orbit size per point")
    minimal: bool = Field(..., description="Every orbit is the whole model")
    caveat: str = FINITE_MODEL_CAVEAT


def minimality_report(s: FiniteDynSys, max_exponent: int) -> MinimalityReport:
    sizes = {x: len(orbit(s, x, max_exponent)) for x in s.points}
    return MinimalityReport(
        max_exponent=max_exponent,
        orbit_sizes=sizes,
        minimal=all(size == len(s.points) for size in sizes.values()),
    )


class FreenessViolation(BaseModel):
    x: str
    m: int
    n: int


class FreenessReport(BaseModel):
    max_exponent: int
    violations: List[FreenessViolation] = Field(default_factory=list)
    caveat: str = FINITE_MODEL_CAVEAT


def essential_freeness_check(s: FiniteDynSys, max_exponent: int) -> FreenessReport:
    """Points with T^m x = T^n x for some n < m <= max_exponent."""
    if max_exponent < 1:
        raise ModelError("max_exponent must be at least 1")
    violations = []
    for x in s.points:
        trajectory = [s.apply(x, k) for k in range(max_exponent + 1)]
        for m in range(1, max_exponent + 1):
            if trajectory[m] is None:
                break
            violations.extend(
                FreenessViolation(x=x, m=m, n=n) for n in range(m) if trajectory[n] == trajectory[m]
            )
    if violations:
        logger.warning(f"{len(violations)} essential-freeness violations up to exponent {max_exponent}")
    return FreenessReport(max_exponent=max_exponent, violations=violations)


class BratteliVertex(BaseModel):
    members: List[str]

    @property
    def size(self) -> int:
        return len(self.members)


class BratteliEdge(BaseModel):
    level: int = Field(..., description="Source level; the target is on level + 1")
    source: int
    target: int
    multiplicity: int = 1


class BratteliDiagram(BaseModel):
    levels: List[List[BratteliVertex]]
    edges: List[BratteliEdge]
    closure_applied: List[bool] = Field(default_factory=list)

    @property
    def total_dimensions(self) -> List[int]:
        """Sum of squared block sizes per level."""
        return [sum(v.size ** 2 for v in level) for level in self.levels]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "levels": [[{"members": v.members, "size": v.size} for v in level] for level in self.levels],
            "edges": [e.model_dump() for e in self.edges],
            "total_dimensions": self.total_dimensions,
            "closure_applied": self.closure_applied,
        }

    def to_dot(self) -> str:
        lines = ["digraph bratteli {", "  rankdir=TB;"]
        for n, level in enumerate(self.levels):
            for i, v in enumerate(level):
                lines.append(f'  "L{n}_{i}" [label="{v.size}\\n{",".join(v.members)}"];')
        for e in self.edges:
            lines.append(f'  "L{e.level}_{e.source}" -> "L{e.level + 1}_{e.target}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def bratteli(s: FiniteDynSys, max_level: int) -> BratteliDiagram:
    """Levels 0..max_level of R_N classes with containment edges."""
    if max_level < 1:
        raise ModelError("max_level must be at least 1")
    partitions = [rn_classes(s, n) for n in range(max_level + 1)]
    levels = [[BratteliVertex(members=c) for c in p.classes] for p in partitions]
    edges = []
    for n in range(max_level):
        for i, vertex in enumerate(levels[n]):
            target = next(j for j, w in enumerate(levels[n + 1]) if vertex.members[0] in w.members)
            edges.append(BratteliEdge(level=n, source=i, target=target))
    diagram = BratteliDiagram(levels=levels, edges=edges, closure_applied=[p.closure_applied for p in partitions])
    logger.debug(f"Bratteli total dimensions: {diagram.total_dimensions}")
    return diagram
