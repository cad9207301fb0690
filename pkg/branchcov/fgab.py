"""
Finitely generated abelian groups.

Exact integer linear algebra on Python integers: Smith normal form, group
presentations in invariant-factor form, homomorphisms given by integer
matrices, and kernels, images, cokernels and exactness checks computed on
free covers.

Generators of a group are ordered canonically: the free generators first,
then one generator per invariant factor in increasing order.
"""

import logging
from math import gcd
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from .errors import GeneratorMismatch, IllDefinedHomomorphism

logger = logging.getLogger(__name__)

Vector = List[int]


class IntMatrix(BaseModel):
    """Row-major integer matrix with arbitrary-precision entries."""
    model_config = ConfigDict(frozen=True)

    rows: int = Field(..., ge=0, description="Number of rows")
    cols: int = Field(..., ge=0, description="Number of columns")
    entries: Tuple[int, ...] = Field(default=(), description="Entries in row-major order")

    @model_validator(mode="after")
    def _check_shape(self) -> "IntMatrix":
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries for a {self.rows}x{self.cols} matrix, "
                f"got {len(self.entries)}"
            )
        return self

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        """Build a matrix from a list of rows; `cols` is required when there are no rows."""
        rows = [list(row) for row in rows]
        width = len(rows[0]) if rows else (cols or 0)
        if cols is not None and rows and width != cols:
            raise ValueError(f"rows have {width} columns, expected {cols}")
        if any(len(row) != width for row in rows):
            raise ValueError("ragged matrix rows")
        return cls(rows=len(rows), cols=width, entries=tuple(int(x) for row in rows for x in row))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows(_identity_rows(n), cols=n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows=rows, cols=cols, entries=(0,) * (rows * cols))

    def entry(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def to_rows(self) -> List[List[int]]:
        return [list(self.entries[i * self.cols:(i + 1) * self.cols]) for i in range(self.rows)]

    def column(self, j: int) -> Vector:
        return [self.entry(i, j) for i in range(self.rows)]

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(self.columns(), cols=self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        left = self.to_rows()
        right_cols = other.columns()
        product = [[sum(x * y for x, y in zip(row, col)) for col in right_cols] for row in left]
        return IntMatrix.from_rows(product, cols=other.cols)

    def is_diagonal(self) -> bool:
        return all(
            self.entry(i, j) == 0
            for i in range(self.rows)
            for j in range(self.cols)
            if i != j
        )

    def diagonal(self) -> List[int]:
        return [self.entry(i, i) for i in range(min(self.rows, self.cols))]

    def determinant(self) -> int:
        """Fraction-free (Bareiss) determinant of a square matrix."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = self.to_rows()
        sign = 1
        previous = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
            previous = a[k][k]
        return sign * a[n - 1][n - 1]


class SmithForm(NamedTuple):
    """u * m * v = d with u, v unimodular and d diagonal."""
    u: IntMatrix
    d: IntMatrix
    v: IntMatrix


def _identity_rows(n: int) -> List[List[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _add_row(mat: List[List[int]], target: int, source: int, k: int) -> None:
    mat[target] = [x + k * y for x, y in zip(mat[target], mat[source])]


def _add_col(mat: List[List[int]], target: int, source: int, k: int) -> None:
    for row in mat:
        row[target] += k * row[source]


def _swap_cols(mat: List[List[int]], i: int, j: int) -> None:
    for row in mat:
        row[i], row[j] = row[j], row[i]


def _smallest_entry(a: List[List[int]], t: int, r: int, c: int) -> Optional[Tuple[int, int]]:
    """Position of the smallest nonzero magnitude in a[t:, t:], lowest (row, col) on ties."""
    best = None
    best_size = 0
    for i in range(t, r):
        for j in range(t, c):
            size = abs(a[i][j])
            if size and (best is None or size < best_size):
                best, best_size = (i, j), size
    return best


def _non_divisible_row(a: List[List[int]], t: int, r: int, c: int) -> Optional[int]:
    p = a[t][t]
    for i in range(t + 1, r):
        for j in range(t + 1, c):
            if a[i][j] % p:
                return i
    return None


def _settle_pivot(a, u, v, t: int, r: int, c: int) -> bool:
    """Bring a gcd pivot to (t, t) that divides the remaining block. False if the block is zero."""
    while True:
        position = _smallest_entry(a, t, r, c)
        if position is None:
            return False
        i, j = position
        if i != t:
            a[t], a[i] = a[i], a[t]
            u[t], u[i] = u[i], u[t]
        if j != t:
            _swap_cols(a, t, j)
            _swap_cols(v, t, j)

        p = a[t][t]
        clean = True
        for i in range(t + 1, r):
            q = a[i][t] // p
            if q:
                _add_row(a, i, t, -q)
                _add_row(u, i, t, -q)
            if a[i][t]:
                clean = False
        for j in range(t + 1, c):
            q = a[t][j] // p
            if q:
                _add_col(a, j, t, -q)
                _add_col(v, j, t, -q)
            if a[t][j]:
                clean = False
        if not clean:
            continue

        offender = _non_divisible_row(a, t, r, c)
        if offender is None:
            return True
        _add_row(a, t, offender, 1)
        _add_row(u, t, offender, 1)


def smith_normal_form(m: IntMatrix) -> SmithForm:
    """Compute u, d, v with u*m*v = d, d diagonal, nonnegative, d1 | d2 | ..."""
    r, c = m.rows, m.cols
    a = m.to_rows()
    u = _identity_rows(r)
    v = _identity_rows(c)

    for t in range(min(r, c)):
        if not _settle_pivot(a, u, v, t, r, c):
            break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]

    return SmithForm(
        u=IntMatrix.from_rows(u, cols=r),
        d=IntMatrix.from_rows(a, cols=c),
        v=IntMatrix.from_rows(v, cols=c),
    )


def _invariant_factors(orders: Sequence[int]) -> Tuple[int, ...]:
    """Invariant factors (all >= 2) of the direct sum of cyclic groups Z/order."""
    if not orders:
        return ()
    n = len(orders)
    diagonal = IntMatrix.from_rows([[orders[i] if i == j else 0 for j in range(n)] for i in range(n)], cols=n)
    return tuple(d for d in smith_normal_form(diagonal).d.diagonal() if d > 1)


class FgAbelianGroup(BaseModel):
    """Z^rank + Z/d1 + ... + Z/dk with d1 | d2 | ... | dk, all di >= 2."""
    model_config = ConfigDict(frozen=True)

    rank: int = Field(0, ge=0, description="Number of free Z summands")
    torsion: Tuple[int, ...] = Field(default=(), description="Invariant factors in divisibility order")

    @model_validator(mode="before")
    @classmethod
    def _canonicalize(cls, data: Any) -> Any:
        if isinstance(data, dict) and "torsion" in data:
            orders = [int(d) for d in data["torsion"]]
            if any(d < 1 for d in orders):
                raise ValueError(f"torsion orders must be positive, got {orders}")
            data = {**data, "torsion": _invariant_factors(orders)}
        return data

    @classmethod
    def free(cls, rank: int) -> "FgAbelianGroup":
        return cls(rank=rank)

    @classmethod
    def trivial(cls) -> "FgAbelianGroup":
        return cls()

    @classmethod
    def from_orders(cls, *orders: int) -> "FgAbelianGroup":
        """Direct sum of cyclic groups; an order of 0 stands for Z."""
        return cls(rank=sum(1 for d in orders if d == 0), torsion=[abs(d) for d in orders if d != 0])

    @classmethod
    def from_relations(cls, generators: int, relations: IntMatrix) -> "FgAbelianGroup":
        """Z^generators modulo the span of the columns of `relations`."""
        if relations.rows != generators:
            raise ValueError(f"relation matrix has {relations.rows} rows, expected {generators}")
        return _group_from_relations(generators, relations.columns())

    @property
    def generator_count(self) -> int:
        return self.rank + len(self.torsion)

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    @property
    def is_free(self) -> bool:
        return not self.torsion

    def order(self) -> Optional[int]:
        """Number of elements, or None for infinite groups."""
        if self.rank:
            return None
        total = 1
        for d in self.torsion:
            total *= d
        return total

    def relation_columns(self) -> List[Vector]:
        """Generators of the relation lattice inside Z^generator_count."""
        n = self.generator_count
        columns = []
        for k, d in enumerate(self.torsion):
            col = [0] * n
            col[self.rank + k] = d
            columns.append(col)
        return columns

    def __str__(self) -> str:
        if self.is_trivial:
            return "0"
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts)


def _group_from_relations(generators: int, relations: Sequence[Vector]) -> FgAbelianGroup:
    if generators == 0:
        return FgAbelianGroup.trivial()
    if not relations:
        return FgAbelianGroup.free(generators)
    matrix = IntMatrix.from_rows([[col[i] for col in relations] for i in range(generators)], cols=len(relations))
    diagonal = smith_normal_form(matrix).d.diagonal()
    nonzero = [d for d in diagonal if d != 0]
    return FgAbelianGroup(rank=generators - len(nonzero), torsion=[d for d in nonzero if d > 1])


class GroupHom(BaseModel):
    """Homomorphism given by an integer matrix: column j is the image of domain generator j."""
    model_config = ConfigDict(frozen=True)

    domain: FgAbelianGroup
    codomain: FgAbelianGroup
    matrix: IntMatrix

    @model_validator(mode="before")
    @classmethod
    def _coerce_matrix(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("matrix"), (list, tuple)):
            domain = FgAbelianGroup.model_validate(data["domain"])
            codomain = FgAbelianGroup.model_validate(data["codomain"])
            data = {
                **data,
                "domain": domain,
                "codomain": codomain,
                "matrix": _matrix_for(data["matrix"], codomain.generator_count, domain.generator_count),
            }
        return data

    @model_validator(mode="after")
    def _check(self) -> "GroupHom":
        if self.matrix.rows != self.codomain.generator_count or self.matrix.cols != self.domain.generator_count:
            raise ValueError(
                f"matrix is {self.matrix.rows}x{self.matrix.cols}, expected "
                f"{self.codomain.generator_count}x{self.domain.generator_count}"
            )
        self.check_well_defined()
        return self

    @field_serializer("matrix")
    def _serialize_matrix(self, matrix: IntMatrix) -> List[List[int]]:
        return matrix.to_rows()

    @classmethod
    def zero(cls, domain: FgAbelianGroup, codomain: FgAbelianGroup) -> "GroupHom":
        return cls(
            domain=domain,
            codomain=codomain,
            matrix=IntMatrix.zeros(codomain.generator_count, domain.generator_count),
        )

    @classmethod
    def identity(cls, group: FgAbelianGroup) -> "GroupHom":
        return cls(domain=group, codomain=group, matrix=IntMatrix.identity(group.generator_count))

    def check_well_defined(self) -> None:
        """Every relation of the domain must map into the codomain's relation lattice."""
        for k, d in enumerate(self.domain.torsion):
            j = self.domain.rank + k
            image = [d * x for x in self.matrix.column(j)]
            for i, x in enumerate(image):
                if i < self.codomain.rank:
                    if x:
                        raise IllDefinedHomomorphism(j)
                elif x % self.codomain.torsion[i - self.codomain.rank]:
                    raise IllDefinedHomomorphism(j)

    def is_zero(self) -> bool:
        """True when every generator maps to zero in the codomain."""
        cod = self.codomain
        for col in self.matrix.columns():
            for i, x in enumerate(col):
                if i < cod.rank and x:
                    return False
                if i >= cod.rank and x % cod.torsion[i - cod.rank]:
                    return False
        return True

    def contains(self, element: Sequence[int]) -> bool:
        """Whether `element` (coordinates in the codomain generators) lies in the image."""
        n = self.codomain.generator_count
        if len(element) != n:
            raise GeneratorMismatch(f"element has {len(element)} coordinates, codomain has {n} generators")
        basis = lattice_basis(self.matrix.columns() + self.codomain.relation_columns(), n)
        return in_lattice(basis, element)

    def compose(self, first: "GroupHom") -> "GroupHom":
        """self after first; the middle groups must coincide exactly."""
        if first.codomain != self.domain:
            raise GeneratorMismatch(f"cannot compose through {first.codomain} and {self.domain}")
        return GroupHom(domain=first.domain, codomain=self.codomain, matrix=self.matrix @ first.matrix)


def _matrix_for(rows: Sequence[Sequence[int]], codomain_gens: int, domain_gens: int) -> IntMatrix:
    if codomain_gens == 0 or (domain_gens == 0 and not rows):
        return IntMatrix.zeros(codomain_gens, domain_gens)
    return IntMatrix.from_rows(rows, cols=domain_gens)


# Lattice helpers

def lattice_basis(vectors: Sequence[Sequence[int]], dim: int) -> List[Vector]:
    """Echelon basis of the sublattice of Z^dim spanned by `vectors`."""
    pool = [list(v) for v in vectors if any(v)]
    basis = []
    for col in range(dim):
        active = [row for row in pool if row[col] != 0]
        rest = [row for row in pool if row[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda row: (abs(row[col]), row))
            pivot = active[0]
            survivors = [pivot]
            for row in active[1:]:
                q = row[col] // pivot[col]
                reduced = [x - q * y for x, y in zip(row, pivot)]
                if reduced[col] != 0:
                    survivors.append(reduced)
                elif any(reduced):
                    rest.append(reduced)
            active = survivors
        if active:
            pivot = active[0]
            basis.append(pivot if pivot[col] > 0 else [-x for x in pivot])
        pool = rest
    return basis


def _pivot_column(vector: Sequence[int]) -> int:
    return next(i for i, x in enumerate(vector) if x != 0)


def coordinates_in_basis(basis: Sequence[Sequence[int]], vector: Sequence[int]) -> Optional[Vector]:
    """Integer coordinates of `vector` in an echelon basis, or None if it is not in the lattice."""
    residue = list(vector)
    coords = []
    for b in basis:
        c = _pivot_column(b)
        if residue[c] % b[c]:
            return None
        q = residue[c] // b[c]
        coords.append(q)
        if q:
            residue = [x - q * y for x, y in zip(residue, b)]
    if any(residue):
        return None
    return coords


def in_lattice(basis: Sequence[Sequence[int]], vector: Sequence[int]) -> bool:
    return coordinates_in_basis(basis, vector) is not None


def integer_kernel(matrix: IntMatrix) -> List[Vector]:
    """Basis of {x : matrix * x = 0} as column vectors."""
    _, d, v = smith_normal_form(matrix)
    nonzero = sum(1 for x in d.diagonal() if x != 0)
    return [v.column(j) for j in range(nonzero, matrix.cols)]


def _preimage_lattice(h: GroupHom) -> List[Vector]:
    """Generators of {x in Z^a : h.matrix * x lies in the codomain relation lattice}."""
    a = h.domain.generator_count
    n = h.codomain.generator_count
    if a == 0:
        return []
    if n == 0:
        return _identity_rows(a)
    relations = h.codomain.relation_columns()
    rows = [h.matrix.to_rows()[i] + [col[i] for col in relations] for i in range(n)]
    stacked = IntMatrix.from_rows(rows, cols=a + len(relations))
    return [vec[:a] for vec in integer_kernel(stacked)]


def cokernel(h: GroupHom) -> FgAbelianGroup:
    """codomain / image(h) in canonical form."""
    h.check_well_defined()
    return _group_from_relations(
        h.codomain.generator_count,
        h.codomain.relation_columns() + h.matrix.columns(),
    )


def image(h: GroupHom) -> FgAbelianGroup:
    h.check_well_defined()
    return _group_from_relations(h.domain.generator_count, _preimage_lattice(h))


def kernel(h: GroupHom) -> FgAbelianGroup:
    h.check_well_defined()
    basis = lattice_basis(_preimage_lattice(h), h.domain.generator_count)
    relations = []
    for col in h.domain.relation_columns():
        coords = coordinates_in_basis(basis, col)
        if coords is None:
            raise IllDefinedHomomorphism(_pivot_column(col))
        relations.append(coords)
    return _group_from_relations(len(basis), relations)


def direct_sum(a: FgAbelianGroup, b: FgAbelianGroup) -> FgAbelianGroup:
    return FgAbelianGroup(rank=a.rank + b.rank, torsion=list(a.torsion) + list(b.torsion))


def is_isomorphic(a: FgAbelianGroup, b: FgAbelianGroup) -> bool:
    return a == b


def is_exact_at(f: GroupHom, g: GroupHom) -> bool:
    """image(f) == kernel(g) as subgroups of the middle group."""
    if f.codomain != g.domain:
        raise GeneratorMismatch(f"middle groups differ: {f.codomain} vs {g.domain}")
    f.check_well_defined()
    g.check_well_defined()
    n = f.codomain.generator_count
    relations = f.codomain.relation_columns()
    image_lift = lattice_basis(f.matrix.columns() + relations, n)
    kernel_lift = lattice_basis(_preimage_lattice(g), n)
    exact = (
        all(in_lattice(kernel_lift, b) for b in image_lift)
        and all(in_lattice(image_lift, b) for b in kernel_lift)
    )
    logger.debug(f"exactness at {f.codomain}: {exact}")
    return exact


def extension_splits(sub: FgAbelianGroup, quot: FgAbelianGroup) -> bool:
    """True when every extension 0 -> sub -> G -> quot -> 0 splits."""
    if quot.is_free or sub.is_trivial:
        return True
    if quot.rank == 0 and sub.rank == 0:
        return gcd(quot.order(), sub.order()) == 1
    return False
