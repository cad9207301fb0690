"""
Tests for rational maps: parsing, fibers, branch data, orbits and the density heuristics.
"""

import math
import random

import numpy as np
import pytest

from branchcov.config import ToleranceConfig
from branchcov.errors import (
    CoprimalityError, DegenerateMapError, ExplosionError, ExpressionSyntaxError, ZeroDenominator,
)
from branchcov.polynomial import Poly
from branchcov.ratmap import (
    RationalMap, backward_density_check, critical_points, cycle_multiplier, evaluate,
    expansion_check, forward_orbit, inner_product_eval, is_postcritically_finite, iterated_fiber,
    parse_rational_map, postcritical_set, preimages, puncture_count, spherical_derivative,
    transfer_apply,
)
from branchcov.sphere import SpherePoint, covering_radius, fibonacci_sphere

LATTES = "(z^2+1)^2 / (4*z*(z^2-1))"
ROOT2 = math.sqrt(2)
INF = SpherePoint.infinity()


def point(z: complex) -> SpherePoint:
    return SpherePoint.from_complex(z)


def assert_points_close(found, expected, tol=1e-9):
    assert len(found) == len(expected)
    for p in expected:
        assert min(p.chordal(f) for f in found) <= tol, f"{p} missing from {[str(f) for f in found]}"


def generic_points(rng: random.Random, count: int):
    """Random finite points at least 1e-3 away from the Lattes critical values."""
    critical_values = [point(-1), point(0), point(1), INF]
    found = []
    while len(found) < count:
        y = point(complex(rng.uniform(-3, 3), rng.uniform(-3, 3)))
        if min(y.chordal(c) for c in critical_values) >= 1e-3:
            found.append(y)
    return found


@pytest.fixture(scope="module")
def lattes():
    return parse_rational_map(LATTES)


@pytest.fixture(scope="module")
def square():
    return parse_rational_map("z^2")


class TestParsing:
    """Test expression parsing and map validation."""

    def test_degree(self, lattes, square):
        """Degree is the larger of the two polynomial degrees."""
        assert lattes.degree == 4
        assert square.degree == 2
        assert parse_rational_map("1/z").degree == 1

    def test_syntax_errors_carry_position(self):
        """Malformed input reports where parsing failed."""
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_rational_map("z^2 + w")
        assert info.value.position == 6
        with pytest.raises(ExpressionSyntaxError):
            parse_rational_map("z^2 /")
        with pytest.raises(ExpressionSyntaxError):
            parse_rational_map("z / z / z")
        with pytest.raises(ExpressionSyntaxError):
            parse_rational_map("z^(1/2)")

    def test_zero_denominator(self):
        """A zero denominator is its own error."""
        with pytest.raises(ZeroDenominator):
            parse_rational_map("z / (z - z)")

    def test_common_factor(self):
        """Numerator and denominator must be coprime."""
        with pytest.raises(CoprimalityError):
            parse_rational_map("(z^2-1)/(z-1)")

    def test_constants_rejected(self):
        """Constant maps have degree 0."""
        with pytest.raises(DegenerateMapError):
            parse_rational_map("3")
        with pytest.raises(DegenerateMapError):
            parse_rational_map("0 / (z + 1)")

    def test_from_polys(self):
        """Maps can be built directly from polynomials."""
        q = RationalMap.from_polys(Poly.variable() ** 3, Poly.constant(2))
        assert q.degree == 3
        assert abs(evaluate(q, point(2)).to_complex() - 4) < 1e-12


class TestEvaluation:
    """Test evaluation on the sphere."""

    def test_poles_and_infinity(self, lattes):
        """Poles map to infinity and infinity is fixed."""
        for z in (0, 1, -1):
            assert evaluate(lattes, point(z)).is_infinity
        assert evaluate(lattes, INF).is_infinity

    def test_critical_values(self, lattes):
        """The Lattes map sends i to 0 and 1 + sqrt 2 to 1."""
        assert evaluate(lattes, point(1j)).chordal(point(0)) < 1e-12
        assert evaluate(lattes, point(1 + ROOT2)).chordal(point(1)) < 1e-12

    def test_odd_symmetry(self, lattes):
        """q(-z) = -q(z)."""
        rng = random.Random(7)
        for _ in range(100):
            z = complex(rng.gauss(0, 1), rng.gauss(0, 1))
            assert evaluate(lattes, point(-z)).chordal(evaluate(lattes, point(z)).negate()) <= 1e-10

    def test_spherical_derivative_at_infinity(self, lattes, square):
        """Infinity is repelling with multiplier 4 for the Lattes map and superattracting for z^2."""
        assert spherical_derivative(lattes, INF) == pytest.approx(4.0)
        assert spherical_derivative(square, INF) == pytest.approx(0.0)
        assert cycle_multiplier(square, [point(1)]) == pytest.approx(2.0)


class TestPreimages:
    """Test fibers of the map."""

    def test_fiber_over_infinity(self, lattes):
        """Poles of the Lattes map are 0, 1, -1 and infinity."""
        fiber = preimages(lattes, INF)
        assert [m for _, m in fiber] == [1, 1, 1, 1]
        assert_points_close([p for p, _ in fiber], [point(-1), point(0), point(1), INF])
        assert fiber[-1][0].is_infinity

    def test_branched_fiber(self, lattes):
        """The fiber over 0 is {i, -i}, each of multiplicity 2."""
        fiber = preimages(lattes, point(0))
        assert [m for _, m in fiber] == [2, 2]
        assert_points_close([p for p, _ in fiber], [point(-1j), point(1j)], tol=1e-6)

    def test_square_fiber_at_infinity(self, square):
        """z^2 is totally ramified over infinity."""
        assert preimages(square, INF) == [(INF, 2)]

    def test_random_maps(self):
        """Over generic targets multiplicities sum to the degree and every preimage maps back."""
        rng = random.Random(20240601)
        checked = 0
        while checked < 100:
            d = rng.randint(2, 5)
            num = [rng.randint(-5, 5) for _ in range(d)] + [rng.choice([-5, -4, -3, -2, -1, 1, 2, 3, 4, 5])]
            den = [rng.randint(-5, 5) for _ in range(rng.randint(0, d))] + [rng.randint(1, 5)]
            try:
                q = RationalMap.from_polys(Poly.from_coeffs(num), Poly.from_coeffs(den))
            except (CoprimalityError, DegenerateMapError):
                continue
            w = point(complex(rng.uniform(-3, 3), rng.uniform(-3, 3)))
            fiber = preimages(q, w, seed=3)
            assert q.degree == d
            assert sum(m for _, m in fiber) == q.degree
            assert max(evaluate(q, x).chordal(w) for x, _ in fiber) <= 1e-8
            checked += 1

    def test_deterministic(self, lattes):
        """The same seed gives the same output."""
        w = point(0.3 + 0.2j)
        assert preimages(lattes, w, seed=5) == preimages(lattes, w, seed=5)


class TestBranchData:
    """Test critical points, critical values and the branch sets."""

    def test_lattes_critical_points(self, lattes):
        """Six simple critical points: +-i and +-1 +- sqrt 2."""
        branch = critical_points(lattes)
        assert branch.riemann_hurwitz == 6
        assert branch.infinity_local_degree == 1
        assert all(c.multiplicity == 2 for c in branch.critical_points)
        expected = [point(z) for z in (1j, -1j, 1 + ROOT2, 1 - ROOT2, -1 + ROOT2, -1 - ROOT2)]
        assert_points_close([c.point for c in branch.critical_points], expected)

    def test_lattes_values_and_punctures(self, lattes):
        """S' = {-1, 0, 1}; S u S' has nine points."""
        branch = critical_points(lattes)
        assert_points_close(branch.critical_values, [point(-1), point(0), point(1)])
        assert len(branch.upstairs_branch) == 6
        assert puncture_count(branch) == 9

    def test_square(self, square):
        """z^2 has critical points 0 and infinity, each of local degree 2."""
        branch = critical_points(square)
        assert branch.infinity_local_degree == 2
        assert [c.multiplicity for c in branch.critical_points] == [2, 2]
        assert branch.critical_points[-1].point.is_infinity
        assert_points_close(branch.critical_values, [point(0), INF])

    def test_polynomial_infinity(self):
        """A cubic polynomial has local degree 3 at infinity."""
        branch = critical_points(parse_rational_map("z^3 - 3*z"))
        assert branch.infinity_local_degree == 3
        assert branch.riemann_hurwitz == 4

    def test_to_dict(self, lattes):
        """Branch data serializes points as re/im pairs or 'inf'."""
        data = postcritical_set(lattes, 20).to_dict()
        assert data["degree"] == 4
        assert "inf" in data["postcritical_set"]
        assert data["postcritically_finite"] is True


class TestOrbits:
    """Test forward orbits and postcritical finiteness."""

    def test_lattes_orbits(self, lattes):
        """0 maps to the fixed point infinity; 1 + sqrt 2 lands there after two steps."""
        orbit = forward_orbit(lattes, point(0), 10)
        assert orbit.finite
        assert orbit.points[1].is_infinity
        assert (orbit.cycle_start, orbit.cycle_length) == (1, 1)
        orbit = forward_orbit(lattes, point(1 + ROOT2), 10)
        assert orbit.finite
        assert orbit.cycle_start == 2

    def test_lattes_orbit_of_i(self, lattes):
        """i -> 0 -> infinity, which is fixed."""
        orbit = forward_orbit(lattes, point(1j), 10)
        assert orbit.finite
        assert len(orbit.points) == 3
        assert orbit.points[1].chordal(point(0)) < 1e-12
        assert orbit.points[2].is_infinity
        assert (orbit.cycle_start, orbit.cycle_length) == (2, 1)

    def test_square_periodic(self, square):
        """i -> -1 -> 1 -> 1."""
        orbit = forward_orbit(square, point(1j), 10)
        assert orbit.finite
        assert (orbit.cycle_start, orbit.cycle_length) == (2, 1)
        assert orbit.points[2].chordal(point(1)) < 1e-12

    def test_attracted_orbits_are_not_finite(self, square):
        """Orbits converging to 0 or infinity without landing are reported as attracted."""
        for z in (0.5, 2):
            orbit = forward_orbit(square, point(z), 10)
            assert not orbit.finite
            assert orbit.attracted

    def test_step_limit(self):
        """Without a return the orbit stops after max_steps."""
        orbit = forward_orbit(parse_rational_map("2*z"), point(1), 5)
        assert not orbit.finite
        assert len(orbit.points) == 6
        assert not orbit.attracted

    def test_postcritical_sets(self, lattes, square):
        """Lattes and z^2 are postcritically finite, z^2 + 1 is not."""
        branch = postcritical_set(lattes, 50)
        assert branch.postcritically_finite
        assert_points_close(branch.postcritical_set, [point(-1), point(0), point(1), INF], tol=1e-8)
        assert is_postcritically_finite(square, 50)
        assert not is_postcritically_finite(parse_rational_map("z^2 + 1"), 50)

    def test_orbit_tolerance(self, lattes):
        """The orbit tolerance comes from the tolerance config by default."""
        loose = ToleranceConfig(orbit_tol=1e-3)
        assert forward_orbit(lattes, point(0), 10, tolerances=loose).finite


class TestTransfer:
    """Test the transfer operator and the fiberwise inner product."""

    def test_counts(self, lattes):
        """Summing 1 over a generic fiber counts its points."""
        y = point(0.3 + 0.2j)
        one = lambda _: 1
        assert transfer_apply(lattes, one, 1, y) == pytest.approx(4)
        assert transfer_apply(lattes, one, 2, y) == pytest.approx(16)
        assert len(iterated_fiber(lattes, y, 2)) == 16

    def test_branched_fiber(self, lattes):
        """Over a critical value distinct points and weighted points differ."""
        one = lambda _: 1
        assert transfer_apply(lattes, one, 1, point(0)) == pytest.approx(2)
        assert transfer_apply(lattes, one, 1, point(0), weighted=True) == pytest.approx(4)

    def test_inner_product(self, square):
        """<z, z>(4) = |2|^2 + |-2|^2 for z^2."""
        z = lambda p: p.to_complex()
        assert inner_product_eval(square, z, z, point(4)) == pytest.approx(8)
        assert inner_product_eval(square, lambda _: 1j, z, point(4)) == pytest.approx(0)

    def test_invalid_power(self, square):
        with pytest.raises(ValueError):
            transfer_apply(square, lambda _: 1, 0, point(1))

    def test_random_generic_fibers(self, lattes):
        """Away from the critical values both sums count the four distinct fiber points."""
        rng = random.Random(5)
        one = lambda _: 1
        for y in generic_points(rng, 20):
            assert transfer_apply(lattes, one, 1, y) == pytest.approx(4)
            assert transfer_apply(lattes, one, 1, y, weighted=True) == pytest.approx(lattes.degree)

    def test_inner_product_is_positive(self, lattes):
        """<xi, xi>(y) is real and non-negative."""
        rng = random.Random(9)
        for y in generic_points(rng, 20):
            c = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(3)]
            xi = lambda p, c=c: c[0] + c[1] * p.to_complex() + c[2] / (1 + abs(p.to_complex()) ** 2)
            value = inner_product_eval(lattes, xi, xi, y)
            assert value.imag == 0
            assert value.real >= 0
            assert transfer_apply(lattes, xi, 1, y, weighted=True) == pytest.approx(transfer_apply(lattes, xi, 1, y))


class TestHeuristics:
    """Test the backward density and expansion checks."""

    def test_lattes_backward_orbit_dense(self, lattes):
        """The depth-5 backward tree of 2 is 0.25-dense."""
        report = backward_density_check(lattes, point(2), 5, 0.25)
        assert report.passed
        assert report.point_count == 1365
        assert report.evidence == "heuristic"

    def test_density_at_depth_zero(self, lattes):
        """With no preimages the covering radius is that of the start point alone."""
        report = backward_density_check(lattes, point(2), 0, 0.25)
        assert report.point_count == 1
        assert not report.passed
        sample = fibonacci_sphere(ToleranceConfig().density_sample)
        assert report.achieved_epsilon == covering_radius(sample, np.array([point(2).to_r3()]))
        assert 0.99 < report.achieved_epsilon <= 1.0

    def test_square_backward_orbit_not_dense(self, square):
        """Backward orbits of z^2 accumulate on the unit circle only."""
        report = backward_density_check(square, point(2), 5, 0.25)
        assert not report.passed
        assert report.achieved_epsilon > 0.5

    def test_explosion_guard(self, lattes):
        """The point count is bounded by the configured limit."""
        with pytest.raises(ExplosionError):
            backward_density_check(lattes, point(0.3), 4, 0.25, tolerances=ToleranceConfig(explosion_limit=50))

    def test_lattes_expansion(self, lattes):
        """A small cap covers the sphere after a few iterations."""
        report = expansion_check(lattes, point(0.3 + 0.2j), 0.1, 12)
        assert report.covered
        assert 1 <= report.n_found <= 12
        assert len(report.radii) == report.n_found + 1
        assert report.radii[-1] <= report.epsilon
        assert all(r > report.epsilon for r in report.radii[:-1])

    def test_heuristics_are_reproducible(self, lattes):
        """Repeated runs at seed 0 report identical values."""
        first = expansion_check(lattes, point(0.3 + 0.2j), 0.1, 12).to_dict()
        assert expansion_check(lattes, point(0.3 + 0.2j), 0.1, 12).to_dict() == first
        density = backward_density_check(lattes, point(2), 5, 0.25, seed=0)
        assert backward_density_check(lattes, point(2), 5, 0.25, seed=0) == density

    def test_whole_sphere_cap_covered_immediately(self, lattes, square):
        """A cap of chordal radius >= 1 is the whole sphere, dense before any iteration."""
        for q in (lattes, square):
            report = expansion_check(q, point(0.3 + 0.2j), 1.0, 3)
            assert report.covered
            assert report.n_found == 0
            assert len(report.radii) == 1

    def test_square_no_expansion(self, square):
        """A cap inside the basin of 0 never spreads."""
        report = expansion_check(square, point(0.3 + 0.2j), 0.1, 6)
        assert not report.covered
        assert report.n_found is None
        assert len(report.radii) == 7
