"""
Spectral theory of operators on finite-dimensional semi-Hilbertian spaces.

A positive semidefinite matrix ``A`` induces the semi-inner product
``<x, y>_A = <Ax, y>``.  The package certifies metrics and operators,
evaluates A-norms, A-adjoints, A-spectra and A-spectral radii, and checks
the identities between them on random and hand-built instances.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .harte import check_thm46, harte_radius, joint_eigenvalues, make_tuple
from .metric import SemiMetric, identity_metric, new_metric
from .opspace import (
    AOperator,
    a_norm,
    a_numerical_radius,
    a_op_norm,
    gamma_a,
    is_a_isometry,
    is_a_unitary,
    member_from_blocks,
    try_lift,
)
from .spectrum import a_invertible, a_invertible_oracle, a_spectrum, r_a_exact, r_a_gelfand, thm319
from .truncation import example, trend_report
