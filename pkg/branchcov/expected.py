"""
Expected values for the worked examples.

Every value that the examples are checked against lives in this table,
together with the statement it was taken from, so drift in the reference
values shows up in a single file.
"""

from typing import Any, Dict, NamedTuple


class Expected(NamedTuple):
    value: Any
    reference: str


LATTES_EXPRESSION = "(z^2+1)^2 / (4*z*(z^2-1))"
LATTES_DENSITY_START = "2"
LATTES_EXPANSION_CENTER = "0.3+0.2i"

EXPECTED: Dict[str, Dict[str, Expected]] = {
    "folding": {
        "k0": Expected("Z^2", "C*([0,1], folding) has K0 = Z + Z"),
        "k1": Expected("0", "C*([0,1], folding) has K1 = 0"),
        "branch_set": Expected(["1/2"], "S = {1/2}"),
        "branch_values": Expected(["1"], "S' = {1}"),
        "profile_level_1": Expected(
            {"1/2": [1, 2]},
            "C*(R_1) = {f: [0,1] -> M_2 | f(1/2) in C (x) I_2}",
        ),
        "generic_level_1": Expected(2, "C*(R_1) sits in C([0,1], M_2)"),
        "profile_level_2": Expected(
            {"0": [2, 2], "1/4": [2, 2], "1/2": [1, 4], "3/4": [2, 2], "1": [2, 2]},
            "C*(R_2) = {f: [0,1] -> M_4 | f(0), f(1/4), f(3/4), f(1) in M_2 (x) I_2, f(1/2) in C (x) I_4}",
        ),
        "generic_level_2": Expected(4, "C*(R_2) sits in C([0,1], M_4)"),
        "orbit_of_zero": Expected(["0", "1"], "the orbit of 0 is {0, 1}, which is not dense"),
        "essentially_free": Expected(True, "([0,1], folding) is essentially free"),
    },
    "circle": {
        "k0": Expected("Z^2", "K0(C*(S^1, z^2)) = Z^2"),
        "k1": Expected("Z", "K1(C*(S^1, z^2)) = Z"),
        "k1_ideal_map_zero": Expected(True, "the map on K1 of the ideal is id - id = 0"),
    },
    "lattes": {
        "degree": Expected(4, "q is a rational map of degree 4"),
        "riemann_hurwitz": Expected(6, "critical multiplicities add up to 2 * 4 - 2"),
        "critical_points": Expected(
            ["i", "-i", "1+sqrt2", "1-sqrt2", "-1+sqrt2", "-1-sqrt2"],
            "U = S^2 minus {+-i, +-(sqrt2 +- 1)}",
        ),
        "critical_values": Expected([-1, 0, 1], "q(U) = S^2 minus {-1, 0, 1}"),
        "postcritical_set": Expected([-1, 0, 1, "inf"], "forward orbits of the critical values are finite: {0, +-1, inf}"),
        "postcritically_finite": Expected(True, "forward orbits of the critical points are finite"),
        "punctures": Expected(9, "U intersected with q(U) is the sphere minus nine points"),
        "k1_ideal": Expected("Z^8", "K1(C0(S^2 minus 9 points)) = Z^8"),
        "sequence_underdetermined": Expected(True, "the six-term diagram for C*(S^2, q) is left unsolved"),
        "backward_density": Expected(0.25, "every backward orbit is dense"),
        "expansion": Expected(12, "q^N(W) = S^2 for every open W and some N"),
    },
}

CRITICAL_POINT_VALUES = {
    "i": 1j,
    "-i": -1j,
    "1+sqrt2": 1 + 2 ** 0.5,
    "1-sqrt2": 1 - 2 ** 0.5,
    "-1+sqrt2": -1 + 2 ** 0.5,
    "-1-sqrt2": -1 - 2 ** 0.5,
}

LATTES_POINT_TOL = 1e-9
DENSITY_DEPTH = 5
EXPANSION_RADIUS = 0.1
POSTCRITICAL_STEPS = 5


def expected(example: str, key: str) -> Expected:
    return EXPECTED[example][key]
