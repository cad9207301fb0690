"""
Piecewise-linear branched self-coverings of [0, 1] in exact rational arithmetic.

T is the map restricted to the complement of its branch set, so dom(T^n)
is [0, 1] minus the preimages of the branch set under the first n - 1
iterates. Everything here uses fractions.Fraction; no floating point.
"""

import logging
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple, Union

from .errors import ExplosionError, PLMapError

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str]

ORBIT_LIMIT = 100_000


def as_rational(value: RationalLike) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise PLMapError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class PLMap:
    """Continuous piecewise-linear surjection of [0, 1] given by its breakpoints and values there."""
    breakpoints: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        bps = tuple(as_rational(b) for b in self.breakpoints)
        vals = tuple(as_rational(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(bps) < 2 or len(bps) != len(vals):
            raise PLMapError("need at least two breakpoints and one value per breakpoint")
        if bps[0] != 0 or bps[-1] != 1:
            raise PLMapError("breakpoints must start at 0 and end at 1")
        if any(b >= c for b, c in zip(bps, bps[1:])):
            raise PLMapError("breakpoints must be strictly increasing")
        if any(v < 0 or v > 1 for v in vals):
            raise PLMapError("values must lie in [0, 1]")
        if any(v == w for v, w in zip(vals, vals[1:])):
            raise PLMapError("every segment must have nonzero slope")
        if min(vals) != 0 or max(vals) != 1:
            raise PLMapError("map is not onto [0, 1]")

    @property
    def segments(self) -> List[Tuple[Fraction, Fraction, Fraction, Fraction]]:
        return [
            (self.breakpoints[i], self.breakpoints[i + 1], self.values[i], self.values[i + 1])
            for i in range(len(self.breakpoints) - 1)
        ]

    @property
    def slopes(self) -> List[Fraction]:
        return [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in self.segments]

    @property
    def branch_set(self) -> List[Fraction]:
        """Interior breakpoints where the slope changes sign."""
        slopes = self.slopes
        return [
            self.breakpoints[i + 1]
            for i in range(len(slopes) - 1)
            if (slopes[i] > 0) != (slopes[i + 1] > 0)
        ]

    def __call__(self, x: RationalLike) -> Fraction:
        return eval_pl(self, x)

    def to_dict(self) -> Dict[str, List[str]]:
        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "values": [str(v) for v in self.values],
        }


def _simplified(breakpoints: List[Fraction], values: List[Fraction]) -> PLMap:
    """Drop interior breakpoints where the slope does not change."""
    keep_b, keep_v = [breakpoints[0]], [values[0]]
    for i in range(1, len(breakpoints) - 1):
        left = (values[i] - keep_v[-1]) / (breakpoints[i] - keep_b[-1])
        right = (values[i + 1] - values[i]) / (breakpoints[i + 1] - breakpoints[i])
        if left != right:
            keep_b.append(breakpoints[i])
            keep_v.append(values[i])
    keep_b.append(breakpoints[-1])
    keep_v.append(values[-1])
    return PLMap(tuple(keep_b), tuple(keep_v))


def identity_map() -> PLMap:
    return PLMap((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))


def folding_map() -> PLMap:
    """The tent map: 2t on [0, 1/2] and 2 - 2t on [1/2, 1]."""
    return PLMap((Fraction(0), Fraction(1, 2), Fraction(1)), (Fraction(0), Fraction(1), Fraction(0)))


NAMED_MAPS = {"fold": folding_map, "identity": identity_map}


def load_pl_map(data: Dict[str, Any]) -> PLMap:
    """Build a map from {"breakpoints": ["0", "1/2", "1"], "values": ["0", "1", "0"]}."""
    if not isinstance(data, dict) or "breakpoints" not in data or "values" not in data:
        raise PLMapError("expected an object with 'breakpoints' and 'values'")
    return PLMap(
        tuple(as_rational(b) for b in data["breakpoints"]),
        tuple(as_rational(v) for v in data["values"]),
    )


def named_map(name: str) -> PLMap:
    try:
        return NAMED_MAPS[name]()
    except KeyError:
        raise PLMapError(f"unknown map {name!r}; known maps: {', '.join(sorted(NAMED_MAPS))}") from None


def _check_unit(x: Fraction) -> None:
    if x < 0 or x > 1:
        raise PLMapError(f"{x} is outside [0, 1]")


def eval_pl(m: PLMap, x: RationalLike) -> Fraction:
    x = as_rational(x)
    _check_unit(x)
    i = min(bisect_right(m.breakpoints, x) - 1, len(m.breakpoints) - 2)
    x0, x1, y0, y1 = m.segments[i]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def preimage(m: PLMap, y: RationalLike) -> List[Fraction]:
    """All x with m(x) = y, solved segment by segment."""
    y = as_rational(y)
    _check_unit(y)
    found: Set[Fraction] = set()
    for x0, x1, y0, y1 in m.segments:
        if min(y0, y1) <= y <= max(y0, y1):
            found.add(x0 + (y - y0) * (x1 - x0) / (y1 - y0))
    return sorted(found)


def compose_pl(outer: PLMap, inner: PLMap) -> PLMap:
    """outer after inner; breakpoints are those of inner plus inner-preimages of outer's breakpoints."""
    points: Set[Fraction] = set(inner.breakpoints)
    for b in outer.breakpoints:
        points.update(preimage(inner, b))
    ordered = sorted(points)
    return _simplified(ordered, [eval_pl(outer, eval_pl(inner, x)) for x in ordered])


@lru_cache(maxsize=256)
def iterate_pl(m: PLMap, n: int) -> PLMap:
    """The n-fold composite; n = 0 is the identity."""
    if n < 0:
        raise PLMapError("iterate count must be non-negative")
    if n == 0:
        return identity_map()
    if n == 1:
        return m
    return compose_pl(m, iterate_pl(m, n - 1))


def branch_values(m: PLMap) -> List[Fraction]:
    """Images of the branch set."""
    return sorted({eval_pl(m, s) for s in m.branch_set})


@lru_cache(maxsize=256)
def _excluded(m: PLMap, n: int) -> frozenset:
    points: Set[Fraction] = set()
    for k in range(n):
        iterate = iterate_pl(m, k)
        for s in m.branch_set:
            points.update(preimage(iterate, s))
    return frozenset(points)


def dom_iterate(m: PLMap, n: int) -> List[Fraction]:
    """Points of [0, 1] outside dom(T^n)."""
    if n < 0:
        raise PLMapError("n must be non-negative")
    return sorted(_excluded(m, n))


def in_domain(m: PLMap, x: Fraction, n: int) -> bool:
    return x not in _excluded(m, n)


def rn_class(m: PLMap, x: RationalLike, level: int) -> List[Fraction]:
    """The class of x for the relation identifying points with T^n x = T^n y for some n <= level."""
    x = as_rational(x)
    _check_unit(x)
    if level < 0:
        raise PLMapError("level must be non-negative")
    members = {x}
    for n in range(1, level + 1):
        if not in_domain(m, x, n):
            continue
        iterate = iterate_pl(m, n)
        members.update(y for y in preimage(iterate, eval_pl(iterate, x)) if in_domain(m, y, n))
    return sorted(members)


def _open_segment_samples(points: Iterable[Fraction]) -> List[Fraction]:
    ordered = sorted(set(points) | {Fraction(0), Fraction(1)})
    return [(a + b) / 2 for a, b in zip(ordered, ordered[1:])]


def generic_class_size(m: PLMap, level: int) -> int:
    """Largest class size over one sample point per open segment of the level-th iterate."""
    if level == 0:
        return 1
    samples = _open_segment_samples(iterate_pl(m, level).breakpoints)
    return max(len(rn_class(m, x, level)) for x in samples)


@dataclass(frozen=True)
class ClassProfile:
    point: Fraction
    class_members: Tuple[Fraction, ...]
    generic_size: int

    @property
    def class_size(self) -> int:
        return len(self.class_members)

    @property
    def multiplicity(self) -> Optional[int]:
        if self.generic_size % self.class_size:
            return None
        return self.generic_size // self.class_size

    @property
    def flagged(self) -> bool:
        return self.multiplicity is None

    def describe(self) -> str:
        """Constraint on f at the point, e.g. 'f(1/2) ∈ C⊗I4' or 'f(0) ∈ M2⊗I2'."""
        block = "C" if self.class_size == 1 else f"M{self.class_size}"
        if self.flagged:
            return f"f({self.point}) ∈ {block} (multiplicity {self.generic_size}/{self.class_size} not integral)"
        return f"f({self.point}) ∈ {block}⊗I{self.multiplicity}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": str(self.point),
            "class_members": [str(x) for x in self.class_members],
            "class_size": self.class_size,
            "generic_size": self.generic_size,
            "multiplicity": self.multiplicity,
            "flagged": self.flagged,
            "constraint": self.describe(),
        }


def _exceptional_candidates(m: PLMap, level: int) -> Set[Fraction]:
    iterate = iterate_pl(m, level)
    excluded = _excluded(m, level)
    targets = {eval_pl(iterate, x) for x in set(iterate.breakpoints) | excluded}
    candidates = set(excluded)
    for t in targets:
        candidates.update(preimage(iterate, t))
    return candidates


def constraint_profile(m: PLMap, level: int) -> List[ClassProfile]:
    """Points whose class is smaller than the generic class, with their constraint data."""
    if level < 0:
        raise PLMapError("level must be non-negative")
    generic = generic_class_size(m, level)
    candidates = _exceptional_candidates(m, level) if level else set()
    profiles = []
    for x in sorted(candidates):
        members = rn_class(m, x, level)
        if len(members) < generic:
            profile = ClassProfile(x, tuple(members), generic)
            if profile.flagged:
                logger.warning(f"non-integral multiplicity at {x}: {generic}/{profile.class_size}")
            profiles.append(profile)

    if level and not check_generic_size(m, level, candidates, generic):
        logger.warning(f"class size is not constant off the exceptional set at level {level}")
    logger.debug(f"level {level}: generic size {generic}, {len(profiles)} exceptional points")
    return profiles


def check_generic_size(m: PLMap, level: int, exceptional: Iterable[Fraction], generic: int) -> bool:
    """True when every open segment between exceptional points and breakpoints has the generic class size."""
    cuts = set(exceptional) | set(iterate_pl(m, level).breakpoints)
    return all(len(rn_class(m, x, level)) == generic for x in _open_segment_samples(cuts))


@dataclass(frozen=True)
class FreenessResult:
    free: bool
    exponents: Optional[Tuple[int, int]] = None
    witness: Optional[Tuple[Fraction, Fraction]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "free": self.free,
            "exponents": list(self.exponents) if self.exponents else None,
            "witness": [str(x) for x in self.witness] if self.witness else None,
        }


def _agreement_interval(f: PLMap, g: PLMap) -> Optional[Tuple[Fraction, Fraction]]:
    cuts = sorted(set(f.breakpoints) | set(g.breakpoints))
    for a, b in zip(cuts, cuts[1:]):
        if eval_pl(f, a) == eval_pl(g, a) and eval_pl(f, b) == eval_pl(g, b):
            return a, b
    return None


def essential_freeness(m: PLMap, max_m: int, max_n: int) -> FreenessResult:
    """Check that no T^a and T^b (b < a <= max_m, b <= max_n) agree on an open interval."""
    if not max_m > max_n >= 0:
        raise PLMapError("need max_m > max_n >= 0")
    for a in range(1, max_m + 1):
        for b in range(0, min(a - 1, max_n) + 1):
            interval = _agreement_interval(iterate_pl(m, a), iterate_pl(m, b))
            if interval:
                logger.warning(f"T^{a} and T^{b} agree on ({interval[0]}, {interval[1]})")
                return FreenessResult(False, (a, b), interval)
    return FreenessResult(True)


def groupoid_orbit(m: PLMap, x: RationalLike, depth: int, limit: int = ORBIT_LIMIT) -> List[Fraction]:
    """Closure of {x} under forward images and T^n-fibers for n <= depth."""
    x = as_rational(x)
    _check_unit(x)
    if depth < 0:
        raise PLMapError("depth must be non-negative")
    seen = {x}
    queue = [x]
    while queue:
        y = queue.pop()
        for n in range(1, depth + 1):
            if not in_domain(m, y, n):
                break
            iterate = iterate_pl(m, n)
            image = eval_pl(iterate, y)
            linked = [image] + [w for w in preimage(iterate, image) if in_domain(m, w, n)]
            for w in linked:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
                    if len(seen) > limit:
                        raise ExplosionError(len(seen), limit)
    return sorted(seen)
