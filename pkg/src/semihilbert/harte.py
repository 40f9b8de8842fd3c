"""
A-Harte joint spectrum and spectral radius of commuting tuples.

The radius sequence is ``||Q_n||_A^{1/2n}`` with
``Q_n = sum_{|s|=n} n!/s! (T^)^s T^s``.  For commuting tuples the
diamonds commute as well and ``Q_{n+1} = sum_j T_j^ Q_n T_j``, which is
what :func:`harte_radius` iterates; :func:`q_direct` sums the multinomial
expansion term by term for cross-checking.
"""
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import CostGuard, MetricMismatch, NotCommuting, TooLarge, TriangularizationFailed
from .numkernel import lstsq_min_norm, op_norm
from .opspace import a_norm, t_b_matrix
from .spectrum import _vec

DEFAULT_TOL_COMM = 1e-8
DEFAULT_HARTE_NMAX = 32
DIRECT_SUM_LIMIT = 10**5
RECURRENCE_LIMIT = 10**5
HARTE_ORACLE_MAX_DIM = 10


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    ops: tuple
    commutation_residual: float
    compression_commutation_residual: float

    @property
    def d(self):
        return len(self.ops)

    @property
    def metric(self):
        return self.ops[0].metric

    def permuted(self, order):
        return OperatorTuple(tuple(self.ops[i] for i in order), self.commutation_residual,
                             self.compression_commutation_residual)


@dataclass
class HarteReport:
    radius_estimates: list
    best_upper: float
    joint_points: list = field(default_factory=list)
    sup_l2: float = float("nan")
    triangularization_residual: float = float("nan")


def _max_commutator(mats):
    worst = 0.0
    for X, Y in itertools.combinations(mats, 2):
        worst = max(worst, op_norm(X @ Y - Y @ X))
    return worst


def make_tuple(ops, tol_comm=DEFAULT_TOL_COMM):
    """
    Certify a commuting tuple of AOperators over one metric.

    Raises
    ------
    MetricMismatch
        if the operators were lifted against different metrics.
    NotCommuting
        if ``max ||T_i T_j - T_j T_i|| > tol_comm * max ||T_i||^2``.
    """
    ops = tuple(ops)
    if not ops:
        raise ValueError("an operator tuple needs at least one operator")
    metric = ops[0].metric
    if any(op.metric is not metric for op in ops[1:]):
        raise MetricMismatch("all operators must share the same SemiMetric instance")
    scale = max(max(op_norm(op.T) for op in ops) ** 2, 1e-300)
    residual = _max_commutator([op.T for op in ops])
    if residual > tol_comm * scale:
        raise NotCommuting(f"tuple does not commute: residual {residual:.3e}", residual)
    comp_residual = _max_commutator([op.compression for op in ops])
    return OperatorTuple(ops, residual, comp_residual)


def _multi_indices(d, n):
    for cuts in itertools.combinations(range(n + d - 1), d - 1):
        parts = []
        prev = -1
        for c in cuts + (n + d - 1,):
            parts.append(c - prev - 1)
            prev = c
        yield tuple(parts)


def _multinomial(n, s):
    out = math.factorial(n)
    for k in s:
        out //= math.factorial(k)
    return out


def q_direct(tup, n, left=None, right=None):
    """
    ``sum_{|s|=n} n!/s! L^s R^s`` by explicit multi-index summation.

    ``L`` defaults to the diamonds and ``R`` to the operators of the tuple.

    Raises
    ------
    CostGuard
        if ``d**n`` exceeds the direct-summation limit.
    """
    d = tup.d
    if d**n > DIRECT_SUM_LIMIT:
        raise CostGuard(f"direct summation with d={d}, n={n} exceeds {DIRECT_SUM_LIMIT}")
    left = [op.diamond for op in tup.ops] if left is None else left
    right = [op.T for op in tup.ops] if right is None else right
    size = left[0].shape[0]
    total = np.zeros((size, size), np.complex128)
    for s in _multi_indices(d, n):
        L = np.eye(size, dtype=np.complex128)
        R = np.eye(size, dtype=np.complex128)
        for j, k in enumerate(s):
            if k:
                L = L @ np.linalg.matrix_power(left[j], k)
                R = R @ np.linalg.matrix_power(right[j], k)
        total += _multinomial(n, s) * (L @ R)
    return total


def q_recurrence(tup, n, left=None, right=None):
    """``Q_n`` by ``Q_{k+1} = sum_j L_j Q_k R_j`` without rescaling (for small n)."""
    left = [op.diamond for op in tup.ops] if left is None else left
    right = [op.T for op in tup.ops] if right is None else right
    Q = np.eye(left[0].shape[0], dtype=np.complex128)
    for _ in range(n):
        Q = sum(L @ Q @ R for L, R in zip(left, right))
    return Q


def _radius_sequence(left, right, norm, n_max):
    """Estimates ``norm(Q_k)^{1/2k}`` with the running Q renormalised in log space."""
    size = left[0].shape[0]
    Q = np.eye(size, dtype=np.complex128)
    log_scale = 0.0
    out = []
    dead = False
    for k in range(1, n_max + 1):
        if dead:
            out.append((k, 0.0))
            continue
        Q = sum(L @ Q @ R for L, R in zip(left, right))
        value = norm(Q)
        if value == 0.0:
            dead = True
            out.append((k, 0.0))
            continue
        out.append((k, math.exp((math.log(value) + log_scale) / (2 * k))))
        size_q = float(np.linalg.norm(Q))
        log_scale += math.log(size_q)
        Q = Q / size_q
    return out


def harte_radius(tup, n_max=DEFAULT_HARTE_NMAX):
    """
    A-Harte radius sequence ``[(n, ||Q_n||_A^{1/2n})]`` and its infimum.

    Raises
    ------
    CostGuard
        if ``d * n_max`` exceeds the recurrence budget.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if tup.d * n_max > RECURRENCE_LIMIT:
        raise CostGuard(f"d*n_max = {tup.d * n_max} exceeds {RECURRENCE_LIMIT}")
    m = tup.metric
    estimates = _radius_sequence(
        [op.diamond for op in tup.ops], [op.T for op in tup.ops], lambda Q: a_norm(m, Q), n_max
    )
    return HarteReport(estimates, min(e for _, e in estimates))


def harte_radius_tb(tup, n_max=DEFAULT_HARTE_NMAX):
    """Classical Harte sequence of the tuple of ``T_b`` representations on the range space of A^{1/2}."""
    mats = [t_b_matrix(op) for op in tup.ops]
    return _radius_sequence([X.conj().T for X in mats], mats, op_norm, n_max)


class JointSpectrum(NamedTuple):
    points: list
    triangularization_residual: float
    oracle_residuals: list
    coefficients: np.ndarray


def joint_eigenvalues(tup, tol=1e-8, seed=0, max_retries=8, verify_oracle=True):
    """
    Joint eigenvalues of the commuting compressions.

    A Schur form of a random combination ``sum_j c_j T11_j`` (``|c_j| = 1``)
    triangularises every compression; the diagonals pair up into
    d-tuples.  Up to ``max_retries`` fresh combinations are tried before
    giving up.  For ``n <= 10`` each point is checked against the A-Harte
    resolvent equations with :func:`harte_resolvent_oracle`.

    Raises
    ------
    TriangularizationFailed
    """
    mats = [op.compression for op in tup.ops]
    scale = max(max(op_norm(X) for X in mats), 1e-300)
    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(max_retries):
        coeffs = np.exp(2j * np.pi * rng.random(tup.d))
        combo = sum(c * X for c, X in zip(coeffs, mats))
        _, Z = scipy.linalg.schur(combo, output="complex")
        tri = [Z.conj().T @ X @ Z for X in mats]
        residual = max(op_norm(np.tril(Y, -1)) for Y in tri) / scale
        best = min(best, residual)
        if residual <= tol:
            break
    else:
        raise TriangularizationFailed(f"off-triangular residual {best:.3e} > {tol:.1e} after {max_retries} tries")
    diags = np.stack([np.diag(Y) for Y in tri], axis=1)
    points = [tuple(complex(z) for z in row) for row in diags]
    oracle = []
    if verify_oracle and tup.metric.n <= HARTE_ORACLE_MAX_DIM:
        oracle = [harte_resolvent_oracle(tup, lam).residual for lam in points]
    return JointSpectrum(points, residual, oracle, coeffs)


class HarteOracleVerdict(NamedTuple):
    feasible: bool
    residual: float
    left_residual: float
    right_residual: float


def harte_resolvent_oracle(tup, lam, tol=1e-8, max_dim=HARTE_ORACLE_MAX_DIM):
    """
    Least-squares test of the A-Harte resolvent condition at ``lam``.

    Searches members ``U_j``, ``V_j`` with ``P sum_j U_j (lam_j - T_j) = P``
    and ``P sum_j (lam_j - T_j) V_j = P``.  ``lam`` is in the resolvent set
    iff both residuals are at most ``tol``.
    """
    m = tup.metric
    n = m.n
    if n > max_dim:
        raise TooLarge(f"Harte oracle limited to n <= {max_dim}")
    lam = np.asarray(lam, dtype=np.complex128).reshape(-1)
    if lam.shape[0] != tup.d:
        raise ValueError(f"point has {lam.shape[0]} coordinates, tuple has {tup.d}")
    P = m.proj
    eye = np.eye(n)
    shifts = [lam[j] * eye - op.T for j, op in enumerate(tup.ops)]
    member = np.kron((eye - P).T, P)
    zero = np.zeros_like(member)

    def membership_rows():
        rows = []
        for j in range(tup.d):
            rows.append(np.hstack([member if i == j else zero for i in range(tup.d)]))
        return np.vstack(rows)

    rhs = np.concatenate([_vec(P), np.zeros(tup.d * n * n)])
    K_left = np.vstack([np.hstack([np.kron(M.T, P) for M in shifts]), membership_rows()])
    K_right = np.vstack([np.hstack([np.kron(eye, P @ M) for M in shifts]), membership_rows()])
    _, res_left = lstsq_min_norm(K_left, rhs, rcond=tol)
    _, res_right = lstsq_min_norm(K_right, rhs, rcond=tol)
    residual = max(res_left, res_right)
    return HarteOracleVerdict(residual <= tol * op_norm(P), residual, res_left, res_right)


class HarteRadiusCheck(NamedTuple):
    holds: bool
    margin: float
    best_upper: float
    sup_l2: float
    extrapolated: float
    extrapolated_margin: float


def check_thm46(tup, n_max=DEFAULT_HARTE_NMAX, slack=1e-6, seed=0):
    """
    Compare the A-Harte radius with ``sup ||mu||_2`` over the joint spectrum.

    Every finite-n estimate bounds the limit from above, so the check is
    conclusive when ``best_upper <= sup_l2 + slack``; ``margin`` is
    ``sup_l2 - best_upper``.  A first-order extrapolation of the last two
    even-indexed estimates (error ~ 1/n) is reported alongside for
    slowly converging non-normal tuples but does not decide ``holds``.
    """
    report = harte_radius(tup, n_max)
    joint = joint_eigenvalues(tup, seed=seed)
    sup_l2 = max(float(np.linalg.norm(p)) for p in joint.points)
    best = report.best_upper
    est = dict(report.radius_estimates)
    extrapolated = best
    if n_max >= 2:
        a, b = n_max // 2, n_max
        extrapolated = min(best, max(0.0, (b * est[b] - a * est[a]) / (b - a)))
    margin = sup_l2 - best
    return HarteRadiusCheck(bool(margin >= -slack), margin, best, sup_l2, extrapolated, sup_l2 - extrapolated)


def harte_report(tup, n_max=DEFAULT_HARTE_NMAX, seed=0):
    report = harte_radius(tup, n_max)
    joint = joint_eigenvalues(tup, seed=seed)
    report.joint_points = joint.points
    report.sup_l2 = max(float(np.linalg.norm(p)) for p in joint.points)
    report.triangularization_residual = joint.triangularization_residual
    return report, joint
