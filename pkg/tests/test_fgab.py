"""
Tests for finitely generated abelian groups and Smith normal form.
"""

import itertools
import random
from math import gcd

import pytest
from pydantic import ValidationError

from branchcov.errors import GeneratorMismatch, IllDefinedHomomorphism
from branchcov.fgab import (
    FgAbelianGroup, GroupHom, IntMatrix,
    cokernel, direct_sum, extension_splits, image, in_lattice, is_exact_at,
    is_isomorphic, kernel, lattice_basis, smith_normal_form,
)

Z = FgAbelianGroup.free(1)


def mult(k: int) -> GroupHom:
    return GroupHom(domain=Z, codomain=Z, matrix=[[k]])


def random_unimodular(rng: random.Random, n: int) -> IntMatrix:
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            rows[i] = [-x for x in rows[i]]
            continue
        k = rng.randint(-3, 3)
        rows[i] = [x + k * y for x, y in zip(rows[i], rows[j])]
    return IntMatrix.from_rows(rows, cols=n)


class TestSmithNormalForm:
    """Test the Smith normal form decomposition."""

    def test_zero_matrix(self):
        """A 1x1 zero matrix is already in normal form."""
        u, d, v = smith_normal_form(IntMatrix.from_rows([[0]]))
        assert d.to_rows() == [[0]]
        assert u.to_rows() == [[1]]
        assert v.to_rows() == [[1]]

    def test_coprime_diagonal(self):
        """diag(2, 3) has invariant factors 1 and 6."""
        m = IntMatrix.from_rows([[2, 0], [0, 3]])
        u, d, v = smith_normal_form(m)
        assert d.to_rows() == [[1, 0], [0, 6]]
        assert (u @ m @ v) == d

    def test_symmetric_example(self):
        """[[6,4],[4,6]] reduces to diag(2, 10)."""
        m = IntMatrix.from_rows([[6, 4], [4, 6]])
        u, d, v = smith_normal_form(m)
        assert d.to_rows() == [[2, 0], [0, 10]]
        assert (u @ m @ v) == d
        assert abs(u.determinant()) == 1
        assert abs(v.determinant()) == 1

    def test_empty_shapes(self):
        """0xn and nx0 matrices give identity transforms."""
        u, d, v = smith_normal_form(IntMatrix.zeros(0, 3))
        assert (u.rows, d.rows, d.cols, v.rows) == (0, 0, 3, 3)
        assert v == IntMatrix.identity(3)
        u, d, v = smith_normal_form(IntMatrix.zeros(2, 0))
        assert u == IntMatrix.identity(2)
        assert (d.rows, d.cols, v.rows) == (2, 0, 0)

    def test_random_matrices(self):
        """u*m*v = d, unimodularity and divisibility on random matrices."""
        rng = random.Random(20240517)
        for _ in range(500):
            r, c = rng.randint(1, 8), rng.randint(1, 8)
            m = IntMatrix.from_rows([[rng.randint(-50, 50) for _ in range(c)] for _ in range(r)])
            u, d, v = smith_normal_form(m)
            assert (u @ m @ v) == d
            assert d.is_diagonal()
            assert abs(u.determinant()) == 1
            assert abs(v.determinant()) == 1
            diagonal = d.diagonal()
            assert all(x >= 0 for x in diagonal)
            for a, b in zip(diagonal, diagonal[1:]):
                assert (b == 0) or (a != 0 and b % a == 0)

    def test_deterministic(self):
        """Repeated runs give identical transforms."""
        m = IntMatrix.from_rows([[4, 6, 8], [3, 9, 12], [5, 7, 11]])
        assert smith_normal_form(m) == smith_normal_form(m)

    def test_large_intermediates_stay_exact(self):
        """Entries far beyond machine width are handled exactly."""
        big = 10 ** 40
        m = IntMatrix.from_rows([[big, big + 1], [big - 1, big]])
        u, d, v = smith_normal_form(m)
        assert (u @ m @ v) == d
        assert d.diagonal() == [1, 1]


class TestFgAbelianGroup:
    """Test group presentations and canonical forms."""

    def test_canonical_form_is_eager(self):
        """Z/2 + Z/3 is stored as Z/6."""
        assert FgAbelianGroup(torsion=[2, 3]) == FgAbelianGroup(torsion=[6])
        assert FgAbelianGroup(torsion=[1, 4, 2]).torsion == (2, 4)

    def test_invalid_orders_rejected(self):
        """Zero or negative torsion orders are rejected."""
        with pytest.raises(ValidationError):
            FgAbelianGroup(torsion=[0])
        with pytest.raises(ValidationError):
            FgAbelianGroup(rank=-1)

    def test_from_orders(self):
        """An order of 0 stands for a copy of Z."""
        g = FgAbelianGroup.from_orders(0, 2, 0, 4)
        assert g.rank == 2
        assert g.torsion == (2, 4)
        assert str(g) == "Z^2 + Z/2 + Z/4"
        assert str(FgAbelianGroup.trivial()) == "0"

    def test_order(self):
        """Finite groups report their order, infinite ones None."""
        assert FgAbelianGroup(torsion=[2, 6]).order() == 12
        assert FgAbelianGroup(rank=1).order() is None
        assert FgAbelianGroup.trivial().order() == 1

    def test_presentation_invariance(self):
        """Cokernels of m and p*m*q agree for unimodular p, q."""
        rng = random.Random(7)
        for _ in range(100):
            r, c = rng.randint(1, 5), rng.randint(1, 5)
            m = IntMatrix.from_rows([[rng.randint(-9, 9) for _ in range(c)] for _ in range(r)])
            p, q = random_unimodular(rng, r), random_unimodular(rng, c)
            assert FgAbelianGroup.from_relations(r, m) == FgAbelianGroup.from_relations(r, p @ m @ q)

    def test_json_shape(self):
        """Groups serialize as rank plus torsion list."""
        assert FgAbelianGroup.from_orders(0, 0, 3).model_dump(mode="json") == {"rank": 2, "torsion": [3]}


class TestHomomorphisms:
    """Test kernels, images, cokernels and exactness."""

    def test_cokernel_of_diagonal_inclusion(self):
        """Z^2 -> Z^n with columns (1,...,1) and 0 has cokernel Z^(n-1)."""
        for n in range(1, 8):
            h = GroupHom(domain=FgAbelianGroup.free(2), codomain=FgAbelianGroup.free(n),
                         matrix=[[1, 0] for _ in range(n)])
            assert cokernel(h) == FgAbelianGroup.free(n - 1)
            assert kernel(h) == Z

    def test_cokernel_simple(self):
        """Cokernels of zero and doubling maps on Z."""
        assert cokernel(mult(0)) == Z
        assert cokernel(mult(2)) == FgAbelianGroup(torsion=[2])

    def test_kernel_simple(self):
        """Kernels of identity on Z/4 and zero map Z/6 -> Z."""
        z4 = FgAbelianGroup(torsion=[4])
        assert kernel(GroupHom.identity(z4)).is_trivial
        z6 = FgAbelianGroup(torsion=[6])
        assert kernel(GroupHom.zero(z6, Z)) == z6

    def test_image_and_sums(self):
        """Image, direct sum and isomorphism basics."""
        assert image(mult(3)) == Z
        assert direct_sum(Z, Z).rank == 2
        assert is_isomorphic(direct_sum(FgAbelianGroup(torsion=[2]), FgAbelianGroup(torsion=[3])),
                             FgAbelianGroup(torsion=[6]))
        assert not is_isomorphic(FgAbelianGroup(torsion=[2, 2]), FgAbelianGroup(torsion=[4]))

    def test_torsion_kernel(self):
        """Doubling on Z/4 has kernel and image Z/2."""
        z4 = FgAbelianGroup(torsion=[4])
        h = GroupHom(domain=z4, codomain=z4, matrix=[[2]])
        assert kernel(h) == FgAbelianGroup(torsion=[2])
        assert image(h) == FgAbelianGroup(torsion=[2])
        assert cokernel(h) == FgAbelianGroup(torsion=[2])

    def test_ill_defined_rejected(self):
        """Z/2 -> Z sending the generator to 1 is not a homomorphism."""
        with pytest.raises(IllDefinedHomomorphism) as exc:
            GroupHom(domain=FgAbelianGroup(torsion=[2]), codomain=Z, matrix=[[1]])
        assert exc.value.generator_index == 0
        with pytest.raises(IllDefinedHomomorphism):
            GroupHom(domain=FgAbelianGroup(torsion=[4]), codomain=FgAbelianGroup(torsion=[6]), matrix=[[1]])

    def test_shape_mismatch_rejected(self):
        """Matrix dimensions must match generator counts."""
        with pytest.raises(ValidationError):
            GroupHom(domain=Z, codomain=FgAbelianGroup.free(2), matrix=[[1]])

    def test_empty_matrix_from_trivial_group(self):
        """An empty row list is the n x 0 matrix out of the trivial group."""
        hom = GroupHom(domain=FgAbelianGroup.trivial(), codomain=FgAbelianGroup.free(2), matrix=[])
        assert (hom.matrix.rows, hom.matrix.cols) == (2, 0)
        assert hom.is_zero()
        assert hom.model_dump()["matrix"] == [[], []]
        with pytest.raises(ValidationError):
            GroupHom(domain=Z, codomain=FgAbelianGroup.free(2), matrix=[])

    def test_rank_nullity_free(self):
        """rank(domain) = rank(kernel) + rank(image) between free groups."""
        rng = random.Random(11)
        for _ in range(100):
            a, b = rng.randint(1, 6), rng.randint(1, 6)
            h = GroupHom(domain=FgAbelianGroup.free(a), codomain=FgAbelianGroup.free(b),
                         matrix=[[rng.randint(-4, 4) for _ in range(a)] for _ in range(b)])
            assert kernel(h).rank + image(h).rank == a
            assert kernel(h).is_free

    def test_compose_requires_matching_generators(self):
        """Composition through different groups is rejected."""
        with pytest.raises(GeneratorMismatch):
            mult(2).compose(GroupHom.zero(Z, FgAbelianGroup.free(2)))
        assert mult(2).compose(mult(3)).matrix.to_rows() == [[6]]

    def test_contains(self):
        """Membership in the image respects codomain relations."""
        z4 = FgAbelianGroup(torsion=[4])
        h = GroupHom(domain=z4, codomain=z4, matrix=[[2]])
        assert h.contains([2])
        assert h.contains([6])
        assert not h.contains([1])

    def test_json_round_trip(self):
        """Homomorphisms serialize their matrix as a list of rows."""
        h = GroupHom(domain=FgAbelianGroup.free(2), codomain=FgAbelianGroup.free(3),
                     matrix=[[1, 0], [1, 0], [1, 0]])
        data = h.model_dump(mode="json")
        assert data["matrix"] == [[1, 0], [1, 0], [1, 0]]
        assert GroupHom.model_validate(data) == h


class TestExactness:
    """Test the exactness primitive."""

    def test_identity_is_exact(self):
        """0 -> Z -> Z -> 0 is exact at the middle."""
        f = GroupHom.identity(Z)
        g = GroupHom.zero(Z, FgAbelianGroup.trivial())
        assert is_exact_at(f, g)

    def test_quotient_is_exact(self):
        """Z -(x2)-> Z -> Z/2 is exact at the middle."""
        q = GroupHom(domain=Z, codomain=FgAbelianGroup(torsion=[2]), matrix=[[1]])
        assert is_exact_at(mult(2), q)

    def test_zero_maps_not_exact(self):
        """Z -(0)-> Z -(0)-> Z is not exact."""
        assert not is_exact_at(mult(0), mult(0))

    def test_mismatched_middle(self):
        """The middle groups must coincide."""
        with pytest.raises(GeneratorMismatch):
            is_exact_at(mult(1), GroupHom.zero(FgAbelianGroup.free(2), Z))

    def test_brute_force_finite(self):
        """Agreement with element enumeration on small finite groups."""
        rng = random.Random(3)
        choices = [(), (2,), (3,), (4,), (2, 2), (6,), (2, 4), (3, 3), (2, 6)]
        for _ in range(150):
            a, b, c = (FgAbelianGroup(torsion=list(rng.choice(choices))) for _ in range(3))
            f = _random_hom(rng, a, b)
            g = _random_hom(rng, b, c)
            assert is_exact_at(f, g) == _brute_force_exact(f, g)

    def test_lattice_helpers(self):
        """Echelon bases decide membership."""
        basis = lattice_basis([[2, 4], [0, 6], [4, 2]], 2)
        assert in_lattice(basis, [2, 4])
        assert in_lattice(basis, [0, 6])
        assert not in_lattice(basis, [1, 0])
        assert not in_lattice(basis, [0, 1])


class TestExtensionSplitting:
    """Test the split-extension criterion."""

    def test_cases(self):
        """Free quotients and coprime finite pairs split."""
        z2, z3 = FgAbelianGroup(torsion=[2]), FgAbelianGroup(torsion=[3])
        assert extension_splits(z2, Z)
        assert extension_splits(FgAbelianGroup.trivial(), z2)
        assert extension_splits(z2, z3)
        assert not extension_splits(z2, z2)
        assert not extension_splits(Z, z2)


def _random_hom(rng: random.Random, domain: FgAbelianGroup, codomain: FgAbelianGroup) -> GroupHom:
    rows = []
    for target in codomain.torsion:
        row = []
        for source in domain.torsion:
            step = target // gcd(source, target)
            row.append(step * rng.randint(0, target))
        rows.append(row)
    return GroupHom(domain=domain, codomain=codomain, matrix=rows)


def _elements(group: FgAbelianGroup):
    return itertools.product(*(range(d) for d in group.torsion))


def _apply(h: GroupHom, x) -> tuple:
    rows = h.matrix.to_rows()
    return tuple(sum(r * xi for r, xi in zip(row, x)) % d for row, d in zip(rows, h.codomain.torsion))


def _brute_force_exact(f: GroupHom, g: GroupHom) -> bool:
    zero = tuple(0 for _ in g.codomain.torsion)
    img = {_apply(f, x) for x in _elements(f.domain)}
    ker = {tuple(y) for y in _elements(g.domain) if _apply(g, y) == zero}
    return img == ker
