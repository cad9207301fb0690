"""
K-theory of the spaces behind branched coverings and the Pimsner six-term sequence.

The catalog covers the closed set of spaces the covering examples need. The
six-term solver determines unknown K-groups from exactness where it can and
reports the remaining extension data otherwise; it never picks an extension
or an unknown map.

Cyclic index convention, frozen in the JSON schema:
    0 = K0(I), 1 = K0(A), 2 = K0(O), 3 = K1(I), 4 = K1(A), 5 = K1(O),
map i runs from node i to node (i + 1) mod 6.
"""

import logging
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import SequenceError, SpaceError
from .fgab import (
    FgAbelianGroup, GroupHom, cokernel, direct_sum, extension_splits, is_exact_at, kernel,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

NODE_LABELS = ("K0(I)", "K0(A)", "K0(O)", "K1(I)", "K1(A)", "K1(O)")
TENSOR_LABEL = "⊗(ι_I−[E])"
INCLUSION_LABEL = "i_*"
BOUNDARY_LABEL = "δ"
MAP_LABELS = (TENSOR_LABEL, INCLUSION_LABEL, BOUNDARY_LABEL) * 2


class SpaceKind(str, Enum):
    """Closed catalog of locally compact spaces."""
    POINT = "point"
    CLOSED_INTERVAL = "closed-interval"
    HALF_OPEN_INTERVAL = "half-open-interval"
    OPEN_INTERVAL = "open-interval"
    REAL_LINE = "real-line"
    CIRCLE = "circle"
    SPHERE2 = "sphere"
    SPHERE2_MINUS_POINTS = "sphere-minus"
    DISJOINT_UNION = "disjoint-union"


class SpaceDescriptor(BaseModel):
    """A catalog space; punctured spheres carry a puncture count, unions carry parts."""
    model_config = ConfigDict(frozen=True)

    kind: SpaceKind = Field(..., description="Catalog entry")
    punctures: Optional[int] = Field(None, description="Number of removed points for sphere-minus")
    parts: Tuple["SpaceDescriptor", ...] = Field(default=(), description="Components of a disjoint union")

    @model_validator(mode="after")
    def _check(self) -> "SpaceDescriptor":
        if self.kind == SpaceKind.SPHERE2_MINUS_POINTS and (self.punctures is None or self.punctures < 1):
            raise SpaceError(
                f"sphere minus points needs at least one puncture, got {self.punctures}; use 'sphere'"
            )
        if self.kind == SpaceKind.DISJOINT_UNION and not self.parts:
            raise SpaceError("disjoint union needs at least one part")
        return self

    @classmethod
    def of(cls, kind: SpaceKind) -> "SpaceDescriptor":
        return cls(kind=kind)

    @classmethod
    def sphere_minus(cls, n: int) -> "SpaceDescriptor":
        return cls(kind=SpaceKind.SPHERE2_MINUS_POINTS, punctures=n)

    @classmethod
    def union(cls, *parts: "SpaceDescriptor") -> "SpaceDescriptor":
        return cls(kind=SpaceKind.DISJOINT_UNION, parts=parts)

    def __str__(self) -> str:
        if self.kind == SpaceKind.SPHERE2_MINUS_POINTS:
            return f"sphere-minus-{self.punctures}"
        if self.kind == SpaceKind.DISJOINT_UNION:
            return "+".join(str(p) for p in self.parts)
        return self.kind.value


SpaceDescriptor.model_rebuild()


class KPair(BaseModel):
    """K0 and K1 of C0 of a space."""
    model_config = ConfigDict(frozen=True)

    k0: FgAbelianGroup
    k1: FgAbelianGroup

    def __str__(self) -> str:
        return f"K0 = {self.k0}, K1 = {self.k1}"


_CATALOG: Dict[SpaceKind, Tuple[int, int]] = {
    SpaceKind.POINT: (1, 0),
    SpaceKind.CLOSED_INTERVAL: (1, 0),
    # C0([0,1)) is the cone on C, which is contractible.
    SpaceKind.HALF_OPEN_INTERVAL: (0, 0),
    SpaceKind.OPEN_INTERVAL: (0, 1),
    SpaceKind.REAL_LINE: (0, 1),
    SpaceKind.CIRCLE: (1, 1),
    SpaceKind.SPHERE2: (2, 0),
}


def parse_space(text: str) -> SpaceDescriptor:
    """Parse descriptors such as 'circle', 'sphere-minus-9' or 'half-open-interval+open-interval'."""
    tokens = [t.strip().lower() for t in text.split("+")]
    if not tokens or any(not t for t in tokens):
        raise SpaceError(f"empty space descriptor in {text!r}")
    parts = [_parse_token(t) for t in tokens]
    return parts[0] if len(parts) == 1 else SpaceDescriptor.union(*parts)


def _parse_token(token: str) -> SpaceDescriptor:
    prefix = SpaceKind.SPHERE2_MINUS_POINTS.value + "-"
    if token.startswith(prefix):
        count = token[len(prefix):]
        if not count.isdigit():
            raise SpaceError(f"bad puncture count in {token!r}")
        return SpaceDescriptor.sphere_minus(int(count))
    try:
        kind = SpaceKind(token)
    except ValueError:
        raise SpaceError(f"unknown space {token!r}") from None
    if kind in (SpaceKind.SPHERE2_MINUS_POINTS, SpaceKind.DISJOINT_UNION):
        raise SpaceError(f"unknown space {token!r}")
    return SpaceDescriptor.of(kind)


def k_groups(space: SpaceDescriptor) -> KPair:
    """K-groups of C0(space) from the catalog."""
    if space.kind == SpaceKind.SPHERE2_MINUS_POINTS:
        return puncture_sphere_k(space.punctures)
    if space.kind == SpaceKind.DISJOINT_UNION:
        k0, k1 = FgAbelianGroup.trivial(), FgAbelianGroup.trivial()
        for part in space.parts:
            pair = k_groups(part)
            k0, k1 = direct_sum(k0, pair.k0), direct_sum(k1, pair.k1)
        return KPair(k0=k0, k1=k1)
    r0, r1 = _CATALOG[space.kind]
    return KPair(k0=FgAbelianGroup.free(r0), k1=FgAbelianGroup.free(r1))


def puncture_sphere_k(n: int) -> KPair:
    """
    K-groups of C0(S^2 minus n points).

    From 0 -> C0(S^2 minus n points) -> C(S^2) -> C^n -> 0 with K1(C(S^2)) = 0:
    K0 is the kernel and K1 the cokernel of j_*: Z^2 -> Z^n, which sends the
    unit class to (1, ..., 1) and the Bott element to 0.
    """
    if n < 1:
        raise SpaceError(f"puncture count must be at least 1, got {n}; use 'sphere'")
    j = GroupHom(
        domain=FgAbelianGroup.free(2),
        codomain=FgAbelianGroup.free(n),
        matrix=[[1, 0] for _ in range(n)],
    )
    return KPair(k0=kernel(j), k1=cokernel(j))


# Six-term sequences

class SequenceNode(BaseModel):
    """Either a known group or an unknown placeholder label."""
    known: Optional[FgAbelianGroup] = None
    unknown: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "SequenceNode":
        if (self.known is None) == (self.unknown is None):
            raise SequenceError("a node must be either known or unknown")
        return self

    @property
    def is_known(self) -> bool:
        return self.known is not None


class SequenceMap(BaseModel):
    """A map of the cycle: zero, unknown, or an integer matrix in canonical generators."""
    zero: bool = False
    unknown: bool = False
    matrix: Optional[List[List[int]]] = None
    label: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "SequenceMap":
        if sum([self.zero, self.unknown, self.matrix is not None]) != 1:
            raise SequenceError("a map must be exactly one of zero, unknown or matrix")
        return self

    @classmethod
    def zero_map(cls, label: Optional[str] = None) -> "SequenceMap":
        return cls(zero=True, label=label)

    @classmethod
    def unknown_map(cls, label: Optional[str] = None) -> "SequenceMap":
        return cls(unknown=True, label=label)


class SixTermSequence(BaseModel):
    """The cyclic six-term diagram."""
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(SCHEMA_VERSION, alias="schema")
    nodes: List[SequenceNode]
    maps: List[SequenceMap]

    @model_validator(mode="after")
    def _check_shape(self) -> "SixTermSequence":
        if self.schema_version != SCHEMA_VERSION:
            raise SequenceError(f"unsupported schema version {self.schema_version}")
        if len(self.nodes) != 6 or len(self.maps) != 6:
            raise SequenceError(f"expected 6 nodes and 6 maps, got {len(self.nodes)} and {len(self.maps)}")
        return self

    def to_json_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json", by_alias=True, exclude_none=True)
        data["maps"] = [{k: v for k, v in m.items() if v is not False} for m in data["maps"]]
        return data


MapSpec = Union[SequenceMap, str, List[List[int]]]


def _as_map(spec: MapSpec, label: str) -> SequenceMap:
    if isinstance(spec, SequenceMap):
        return spec if spec.label else spec.model_copy(update={"label": label})
    if spec == "zero":
        return SequenceMap.zero_map(label)
    if spec == "unknown":
        return SequenceMap.unknown_map(label)
    if isinstance(spec, list):
        return SequenceMap(matrix=spec, label=label)
    raise SequenceError(f"cannot interpret map specification {spec!r}")


def pimsner_sequence(
    x: SpaceDescriptor,
    i: SpaceDescriptor,
    known_maps: Optional[Dict[int, MapSpec]] = None,
) -> SixTermSequence:
    """
    Six-term sequence for C*(X, sigma) with ideal I = C0(i) and A = C0(x).

    Nodes 2 and 5 (the K-groups of C*(X, sigma)) are unknown; maps not given
    in `known_maps` are unknown.
    """
    known_maps = known_maps or {}
    if any(k not in range(6) for k in known_maps):
        raise SequenceError(f"map indices must lie in 0..5, got {sorted(known_maps)}")
    ideal, algebra = k_groups(i), k_groups(x)
    groups = [ideal.k0, algebra.k0, None, ideal.k1, algebra.k1, None]
    nodes = [
        SequenceNode(known=g) if g is not None else SequenceNode(unknown=NODE_LABELS[k])
        for k, g in enumerate(groups)
    ]
    maps = [
        _as_map(known_maps[k], MAP_LABELS[k]) if k in known_maps else SequenceMap.unknown_map(MAP_LABELS[k])
        for k in range(6)
    ]
    return SixTermSequence(nodes=nodes, maps=maps)


class NodeStatus(str, Enum):
    KNOWN = "known"
    DETERMINED = "determined"
    SPLIT_ASSUMED = "split-assumed"
    AMBIGUOUS = "ambiguous"
    CONSTRAINED = "constrained"
    UNCONSTRAINED = "unconstrained"


class NodeSolution(BaseModel):
    """Outcome for one node; `subgroup`/`quotient` carry 0 -> subgroup -> G -> quotient -> 0."""
    index: int
    label: str
    status: NodeStatus
    group: Optional[FgAbelianGroup] = None
    subgroup: Optional[FgAbelianGroup] = None
    quotient: Optional[FgAbelianGroup] = None
    note: Optional[str] = None


class SequenceSolution(BaseModel):
    nodes: List[NodeSolution]
    forced_zero: List[int] = Field(default_factory=list, description="Unknown maps forced to zero")
    inexact_at: List[int] = Field(default_factory=list, description="Nodes where exactness fails")
    consistent: Optional[bool] = Field(None, description="Exactness verdict; None unless decidable")

    def node(self, index: int) -> NodeSolution:
        return self.nodes[index]

    @property
    def is_determined(self) -> bool:
        return all(n.status in (NodeStatus.KNOWN, NodeStatus.DETERMINED) for n in self.nodes)


class _ResolvedMaps:
    """Per-map zero flags and homomorphisms where both endpoints are known."""

    def __init__(self, seq: SixTermSequence):
        self.seq = seq
        self.zero: List[bool] = []
        self.homs: List[Optional[GroupHom]] = []
        self.forced: List[int] = []
        for k, spec in enumerate(seq.maps):
            source, target = seq.nodes[k], seq.nodes[(k + 1) % 6]
            trivial_end = any(n.is_known and n.known.is_trivial for n in (source, target))
            is_zero = spec.zero or trivial_end
            if trivial_end and spec.unknown:
                self.forced.append(k)
            self.zero.append(is_zero)
            self.homs.append(self._hom(k, spec, source, target, is_zero))

    @staticmethod
    def _hom(k, spec, source, target, is_zero) -> Optional[GroupHom]:
        if not (source.is_known and target.is_known):
            return None
        if is_zero:
            return GroupHom.zero(source.known, target.known)
        if spec.matrix is None:
            return None
        try:
            return GroupHom(domain=source.known, codomain=target.known, matrix=spec.matrix)
        except ValidationError as exc:
            raise SequenceError(f"map {k}: {exc}") from exc

    def describe(self, k: int) -> str:
        source, target = self.seq.nodes[k], self.seq.nodes[(k + 1) % 6]
        label = self.seq.maps[k].label or MAP_LABELS[k]
        ends = " -> ".join(str(n.known) if n.is_known else n.unknown for n in (source, target))
        return f"map {k} ({label}): {ends}"

    def cokernel_of(self, k: int) -> Optional[FgAbelianGroup]:
        target = self.seq.nodes[(k + 1) % 6]
        if self.zero[k] and target.is_known:
            return target.known
        h = self.homs[k]
        return cokernel(h) if h is not None else None

    def kernel_of(self, k: int) -> Optional[FgAbelianGroup]:
        source = self.seq.nodes[k]
        if self.zero[k] and source.is_known:
            return source.known
        h = self.homs[k]
        return kernel(h) if h is not None else None


def solve_six_term(seq: SixTermSequence, assume_split: bool = False) -> SequenceSolution:
    """
    Determine unknown nodes from exactness.

    For an unknown node G at index k, exactness gives
    0 -> coker(map k-2) -> G -> ker(map k+1) -> 0.
    """
    resolved = _ResolvedMaps(seq)
    if resolved.forced:
        logger.debug(f"maps forced to zero by trivial endpoints: {resolved.forced}")

    solutions = []
    for k, node in enumerate(seq.nodes):
        label = node.unknown or NODE_LABELS[k]
        if node.is_known:
            solutions.append(NodeSolution(index=k, label=label, status=NodeStatus.KNOWN, group=node.known))
            continue
        sub = resolved.cokernel_of((k - 2) % 6)
        quot = resolved.kernel_of((k + 1) % 6)
        solutions.append(_solve_node(k, label, sub, quot, resolved, assume_split))

    inexact = _exactness_failures(seq, resolved)
    fully_known = all(n.is_known for n in seq.nodes) and all(h is not None for h in resolved.homs)
    consistent = False if inexact else (True if fully_known else None)
    if inexact:
        logger.warning(f"sequence is not exact at nodes {inexact}")

    return SequenceSolution(
        nodes=solutions,
        forced_zero=resolved.forced,
        inexact_at=inexact,
        consistent=consistent,
    )


def _solve_node(k, label, sub, quot, resolved: _ResolvedMaps, assume_split: bool) -> NodeSolution:
    if sub is not None and quot is not None:
        if extension_splits(sub, quot):
            return NodeSolution(index=k, label=label, status=NodeStatus.DETERMINED,
                                group=direct_sum(sub, quot), subgroup=sub, quotient=quot)
        if assume_split:
            return NodeSolution(
                index=k, label=label, status=NodeStatus.SPLIT_ASSUMED,
                group=direct_sum(sub, quot), subgroup=sub, quotient=quot,
                note=f"assumed split extension of {quot} by {sub}; other extensions are possible",
            )
        return NodeSolution(
            index=k, label=label, status=NodeStatus.AMBIGUOUS, subgroup=sub, quotient=quot,
            note=f"extension 0 -> {sub} -> G -> {quot} -> 0 is not determined",
        )
    if sub is not None:
        missing = resolved.describe((k + 1) % 6)
        return NodeSolution(
            index=k, label=label, status=NodeStatus.CONSTRAINED, subgroup=sub,
            note=f"contains {sub} with quotient the kernel of the unknown {missing}",
        )
    if quot is not None:
        missing = resolved.describe((k - 2) % 6)
        return NodeSolution(
            index=k, label=label, status=NodeStatus.CONSTRAINED, quotient=quot,
            note=f"extension of {quot} by the cokernel of the unknown {missing}",
        )
    return NodeSolution(index=k, label=label, status=NodeStatus.UNCONSTRAINED,
                        note="no exactness data reaches this node")


def _exactness_failures(seq: SixTermSequence, resolved: _ResolvedMaps) -> List[int]:
    failures = []
    for k in range(6):
        incoming, outgoing = resolved.homs[(k - 1) % 6], resolved.homs[k]
        if incoming is None or outgoing is None:
            continue
        if not is_exact_at(incoming, outgoing):
            failures.append(k)
    return failures


# Sequences of the worked covering examples

def folding_sequence() -> SixTermSequence:
    """Folding map of [0,1]: I = C0([0,1/2) + (1/2,1))."""
    return pimsner_sequence(
        SpaceDescriptor.of(SpaceKind.CLOSED_INTERVAL),
        SpaceDescriptor.union(
            SpaceDescriptor.of(SpaceKind.HALF_OPEN_INTERVAL),
            SpaceDescriptor.of(SpaceKind.OPEN_INTERVAL),
        ),
    )


def circle_sequence() -> SixTermSequence:
    """Real line wrapping the circle; the K1(I) map is id - id, hence zero."""
    return pimsner_sequence(
        SpaceDescriptor.of(SpaceKind.CIRCLE),
        SpaceDescriptor.of(SpaceKind.REAL_LINE),
        known_maps={3: "zero"},
    )


def lattes_sequence(punctures: int = 9) -> SixTermSequence:
    """Lattès map on the sphere; the tensor map Z -> Z^2 is left unknown."""
    return pimsner_sequence(
        SpaceDescriptor.of(SpaceKind.SPHERE2),
        SpaceDescriptor.sphere_minus(punctures),
    )


EXAMPLE_SEQUENCES = {
    "folding": folding_sequence,
    "circle": circle_sequence,
    "lattes": lattes_sequence,
}
