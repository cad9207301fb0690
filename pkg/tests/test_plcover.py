"""
Tests for exact piecewise-linear coverings of the interval.
"""

import random
from fractions import Fraction as F

import pytest

from branchcov.errors import ExplosionError, PLMapError
from branchcov.plcover import (
    PLMap, branch_values, compose_pl, constraint_profile, dom_iterate, essential_freeness, eval_pl,
    folding_map, generic_class_size, groupoid_orbit, identity_map, iterate_pl, load_pl_map,
    preimage, rn_class,
)

FOLD = folding_map()


def random_unit_rational(rng: random.Random) -> F:
    q = rng.randint(1, 64)
    return F(rng.randint(0, q), q)


def profile_table(profiles):
    return {p.point: (p.class_size, p.multiplicity) for p in profiles}


class TestPLMap:
    """Test construction and evaluation."""

    def test_folding_values(self):
        """The tent map doubles on the left half and folds the right half back."""
        assert eval_pl(FOLD, F(1, 3)) == F(2, 3)
        assert eval_pl(FOLD, F(1, 2)) == 1
        assert FOLD("3/4") == F(1, 2)
        assert FOLD.branch_set == [F(1, 2)]
        assert branch_values(FOLD) == [F(1)]

    def test_out_of_range(self):
        with pytest.raises(PLMapError):
            eval_pl(FOLD, F(3, 2))
        with pytest.raises(PLMapError):
            preimage(FOLD, -1)

    def test_invalid_maps(self):
        """Breakpoints, slopes and surjectivity are validated."""
        with pytest.raises(PLMapError):
            PLMap((F(0), F(1, 2)), (F(0), F(1)))
        with pytest.raises(PLMapError):
            PLMap((F(0), F(1, 2), F(1)), (F(0), F(0), F(1)))
        with pytest.raises(PLMapError):
            PLMap((F(0), F(1)), (F(0), F(1, 2)))
        with pytest.raises(PLMapError):
            PLMap((F(0), F(1, 2), F(1, 2), F(1)), (F(0), F(1), F(1), F(0)))

    def test_load_from_json(self):
        """Maps load from string fractions."""
        m = load_pl_map({"breakpoints": ["0", "1/2", "1"], "values": ["0", "1", "0"]})
        assert m == FOLD
        assert m.to_dict() == {"breakpoints": ["0", "1/2", "1"], "values": ["0", "1", "0"]}
        with pytest.raises(PLMapError):
            load_pl_map({"breakpoints": ["0", "x"], "values": ["0", "1"]})
        with pytest.raises(PLMapError):
            load_pl_map({"values": []})

    def test_second_iterate(self):
        """The tent of the tent has breakpoints at quarters and slopes of modulus 4."""
        second = iterate_pl(FOLD, 2)
        assert second.breakpoints == (F(0), F(1, 4), F(1, 2), F(3, 4), F(1))
        assert [abs(s) for s in second.slopes] == [4, 4, 4, 4]
        for k in range(9):
            x = F(k, 8)
            assert eval_pl(second, x) == eval_pl(FOLD, eval_pl(FOLD, x))

    def test_iterates_match_composition(self):
        """Symbolic iterates agree with repeated evaluation."""
        rng = random.Random(11)
        for _ in range(100):
            x = random_unit_rational(rng)
            n = rng.randint(0, 5)
            y = x
            for _ in range(n):
                y = eval_pl(FOLD, y)
            assert eval_pl(iterate_pl(FOLD, n), x) == y

    def test_compose_with_identity(self):
        assert compose_pl(FOLD, identity_map()) == FOLD
        assert compose_pl(identity_map(), FOLD) == FOLD

    def test_preimage(self):
        """Preimages are solved exactly per segment."""
        assert preimage(FOLD, F(1, 2)) == [F(1, 4), F(3, 4)]
        assert preimage(FOLD, 1) == [F(1, 2)]
        assert preimage(FOLD, 0) == [F(0), F(1)]


class TestDomains:
    """Test domains of iterates and the relations R_N."""

    def test_dom_iterate(self):
        assert dom_iterate(FOLD, 0) == []
        assert dom_iterate(FOLD, 1) == [F(1, 2)]
        assert dom_iterate(FOLD, 2) == [F(1, 4), F(1, 2), F(3, 4)]

    def test_classes(self):
        """Classes at the branch point, at the ends and at a generic point."""
        assert rn_class(FOLD, F(1, 2), 2) == [F(1, 2)]
        assert rn_class(FOLD, 0, 2) == [F(0), F(1)]
        assert rn_class(FOLD, F(1, 3), 1) == [F(1, 3), F(2, 3)]
        assert rn_class(FOLD, F(1, 3), 0) == [F(1, 3)]

    def test_symmetry_and_monotonicity(self):
        """Classes of points in dom(T^N) are equivalence classes and grow with N."""
        rng = random.Random(2024)
        checked = 0
        while checked < 200:
            x = random_unit_rational(rng)
            level = rng.randint(1, 4)
            if x in dom_iterate(FOLD, level + 1):
                continue
            members = rn_class(FOLD, x, level)
            for y in members:
                assert rn_class(FOLD, y, level) == members
            assert set(members) <= set(rn_class(FOLD, x, level + 1))
            checked += 1

    def test_generic_fiber_is_one_class(self):
        """Off the exceptional set a class is a full fiber of T^N."""
        for level in (1, 2, 3):
            fiber = preimage(iterate_pl(FOLD, level), F(1, 3))
            assert len(fiber) == generic_class_size(FOLD, level) == 2 ** level
            assert rn_class(FOLD, fiber[0], level) == fiber


class TestConstraintProfile:
    """Test the exceptional points of C*(R_N)."""

    def test_level_one(self):
        """f(1/2) is a scalar in the 2 x 2 matrices."""
        profiles = constraint_profile(FOLD, 1)
        assert profile_table(profiles) == {F(1, 2): (1, 2)}
        assert profiles[0].generic_size == 2
        assert profiles[0].describe() == "f(1/2) ∈ C⊗I2"

    def test_level_two(self):
        """Five exceptional points at level two."""
        profiles = constraint_profile(FOLD, 2)
        assert profile_table(profiles) == {
            F(0): (2, 2),
            F(1, 4): (2, 2),
            F(1, 2): (1, 4),
            F(3, 4): (2, 2),
            F(1): (2, 2),
        }
        assert all(p.generic_size == 4 for p in profiles)
        assert profiles[0].describe() == "f(0) ∈ M2⊗I2"

    def test_level_zero(self):
        assert constraint_profile(FOLD, 0) == []
        assert generic_class_size(FOLD, 0) == 1

    def test_exceptional_points_are_branch_related(self):
        """Exceptional points are excluded from dom(T^N) or land on the critical-value orbit."""
        orbit = set(branch_values(FOLD))
        for _ in range(4):
            orbit |= {eval_pl(FOLD, v) for v in orbit}
        for level in (1, 2, 3):
            excluded = set(dom_iterate(FOLD, level))
            for p in constraint_profile(FOLD, level):
                assert p.point in excluded or eval_pl(iterate_pl(FOLD, level), p.point) in orbit

    def test_to_dict(self):
        data = constraint_profile(FOLD, 2)[0].to_dict()
        assert data["point"] == "0"
        assert data["class_members"] == ["0", "1"]
        assert data["flagged"] is False


class TestFreenessAndOrbits:
    """Test essential freeness and groupoid orbits."""

    def test_folding_is_free(self):
        assert essential_freeness(FOLD, 4, 3).free

    def test_identity_is_not_free(self):
        result = essential_freeness(identity_map(), 1, 0)
        assert not result.free
        assert result.exponents == (1, 0)
        assert result.witness == (F(0), F(1))

    def test_partial_identity(self):
        """A map that is the identity on [0, 1/2] fails with a witness inside that interval."""
        m = PLMap((F(0), F(1, 2), F(3, 4), F(1)), (F(0), F(1, 2), F(1), F(0)))
        assert m.branch_set == [F(3, 4)]
        result = essential_freeness(m, 2, 1)
        assert not result.free
        low, high = result.witness
        assert 0 <= low < high <= F(1, 2)

    def test_invalid_bounds(self):
        with pytest.raises(PLMapError):
            essential_freeness(FOLD, 2, 2)

    def test_orbit_of_zero(self):
        """The orbit of 0 is {0, 1}."""
        assert groupoid_orbit(FOLD, 0, 3) == [F(0), F(1)]

    def test_orbit_of_one_third(self):
        assert groupoid_orbit(FOLD, F(1, 3), 2) == [F(1, 6), F(1, 3), F(2, 3), F(5, 6)]
        assert groupoid_orbit(FOLD, F(1, 3), 0) == [F(1, 3)]

    def test_orbit_is_a_brute_force_closure(self):
        """Compare against breadth-first search over the explicit relation."""
        depth = 2
        start = F(1, 5)
        seen, frontier = {start}, [start]
        while frontier:
            y = frontier.pop()
            for n in range(1, depth + 1):
                if y in dom_iterate(FOLD, n):
                    break
                image = eval_pl(iterate_pl(FOLD, n), y)
                linked = [image] + [w for w in preimage(iterate_pl(FOLD, n), image) if w not in dom_iterate(FOLD, n)]
                for w in linked:
                    if w not in seen:
                        seen.add(w)
                        frontier.append(w)
        assert groupoid_orbit(FOLD, start, depth) == sorted(seen)

    def test_orbit_guard(self):
        with pytest.raises(ExplosionError):
            groupoid_orbit(FOLD, F(1, 7), 3, limit=3)
