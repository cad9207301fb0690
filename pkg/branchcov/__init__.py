"""
C*-algebras of branched coverings, computed.

Branch sets and orbits of rational maps, piecewise-linear interval maps and
finite models, the relations and groupoids built from them, and the K-theory
of the resulting algebras through a six-term exact-sequence solver over
finitely generated abelian groups.
"""

__version__ = "0.1.0"
__author__ = "branchcov contributors"
__license__ = "Apache 2.0"

from .errors import BranchcovError
from .fgab import FgAbelianGroup, GroupHom, IntMatrix, smith_normal_form
from .finmodel import FiniteDynSys, bratteli, rn_classes
from .ktheory import SixTermSequence, k_groups, pimsner_sequence, solve_six_term
from .plcover import PLMap, constraint_profile, folding_map
from .ratmap import RationalMap, critical_points, parse_rational_map, postcritical_set
from .worked_examples import run_example

__all__ = [
    "BranchcovError",
    "FgAbelianGroup",
    "GroupHom",
    "IntMatrix",
    "smith_normal_form",
    "FiniteDynSys",
    "bratteli",
    "rn_classes",
    "SixTermSequence",
    "k_groups",
    "pimsner_sequence",
    "solve_six_term",
    "PLMap",
    "constraint_profile",
    "folding_map",
    "RationalMap",
    "critical_points",
    "parse_rational_map",
    "postcritical_set",
    "run_example",
]
