"""
A-invertibility, the A-spectrum and A-spectral radii.

In finite dimensions both ``T - lambda`` and any admissible A-inverse are
block lower triangular with respect to ``R(A) + N(A)``, so
``P(lambda - T)S = PS(lambda - T) = P`` reduces to invertibility of the
compression ``lambda I_r - T11``.  :func:`a_invertible` uses that
reduction; :func:`a_invertible_oracle` solves the defining linear
equations for S directly and never looks at the range basis.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import NotInvertible, Overflow, TooLarge
from .numkernel import general_eig, lstsq_min_norm, op_norm, spectral_radius
from .opspace import a_norm, a_op_norm, t_a_matrix, try_lift

DEFAULT_TOL_INV = 1e-8
ORACLE_MAX_DIM = 12
DEFAULT_GELFAND_NMAX = 32


class InvertibilityCertificate(NamedTuple):
    invertible: bool
    sigma_min: float
    scale: float
    inverse: Optional[np.ndarray]
    residuals: dict


class OracleVerdict(NamedTuple):
    feasible: bool
    residual: float


@dataclass
class SpectrumPoint:
    value: complex
    multiplicity: int
    sigma_min: float
    oracle_residual: Optional[float] = None

    @property
    def modulus(self):
        return abs(self.value)


@dataclass
class SpectrumReport:
    sigma_a: list
    sup_sigma: float
    norm_bound: float
    r_a_exact: Optional[float] = None
    r_a_diamond_exact: Optional[float] = None
    gelfand: list = field(default_factory=list)
    thm319_value: Optional[float] = None
    attaining_radius: Optional[str] = None
    certificates: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def points(self):
        return np.array([p.value for p in self.sigma_a], dtype=np.complex128)


def _shifted_compression(op, lam):
    return lam * np.eye(op.metric.rank) - op.compression


def a_invertible(op, lam, tol=DEFAULT_TOL_INV):
    """
    Decide whether ``lam - T`` is A-invertible in ``B_{A^{1/2}}(H)``.

    Criterion: ``sigma_min(lam I_r - T11) > tol * max(1, ||lam I_r - T11||)``.
    On success the certificate carries an explicit A-inverse
    ``S = V (lam I_r - T11)^{-1} V*`` and the residuals of
    ``A(lam - T)S = A`` and ``AS(lam - T) = A`` relative to ``||A||``.
    """
    m = op.metric
    M11 = _shifted_compression(op, lam)
    s = np.linalg.svd(M11, compute_uv=False)
    scale = max(1.0, float(s[0]))
    sigma_min = float(s[-1])
    if sigma_min <= tol * scale:
        return InvertibilityCertificate(False, sigma_min, scale, None, {})
    S = m.from_range(np.linalg.inv(M11))
    M = lam * np.eye(m.n) - op.T
    residuals = {
        "right": op_norm(m.A @ M @ S - m.A) / m.norm,
        "left": op_norm(m.A @ S @ M - m.A) / m.norm,
    }
    return InvertibilityCertificate(True, sigma_min, scale, S, residuals)


def _vec(M):
    return np.asarray(M).reshape(-1, order="F")


def _unvec(v, n):
    return np.asarray(v).reshape(n, n, order="F")


def a_invertible_oracle(op, lam, tol=DEFAULT_TOL_INV, max_dim=ORACLE_MAX_DIM):
    """
    Least-squares feasibility oracle for A-invertibility of ``lam - T``.

    Solves for the unknown n x n matrix S under
    ``P(lam - T)S = P``, ``PS(lam - T) = P`` and ``PS(I - P) = 0`` by
    minimum-norm least squares, discarding singular values of the
    vectorised system below ``tol`` (relative).  Feasible iff the residual
    is at most ``tol * ||P||``.

    Raises
    ------
    TooLarge
        for ``n > max_dim``; the system has ``3 n^2`` rows and ``n^2`` columns.
    """
    m = op.metric
    n = m.n
    if n > max_dim:
        raise TooLarge(f"oracle limited to n <= {max_dim}, got n = {n}")
    P = m.proj
    eye = np.eye(n)
    M = lam * eye - op.T
    K = np.vstack([
        np.kron(eye, P @ M),
        np.kron(M.T, P),
        np.kron((eye - P).T, P),
    ])
    rhs = np.concatenate([_vec(P), _vec(P), np.zeros(n * n)])
    _, residual = lstsq_min_norm(K, rhs, rcond=tol)
    return OracleVerdict(residual <= tol * op_norm(P), residual)


def _cluster(values, tol_cluster):
    clusters = []
    for lam in sorted(values, key=lambda z: (round(z.real, 12), round(z.imag, 12))):
        for c in clusters:
            if abs(c[0] - lam) <= tol_cluster * (1.0 + abs(lam)):
                c[1].append(lam)
                break
        else:
            clusters.append([lam, [lam]])
    return [(complex(np.mean(members)), len(members)) for _, members in clusters]


def a_spectrum(op, tol=DEFAULT_TOL_INV, tol_cluster=1e-8, verify_oracle=True):
    """
    The A-spectrum ``sigma_A(T)`` as the deduplicated spectrum of the compression.

    Every point is re-checked with :func:`a_invertible` (it must fail) and,
    for ``n <= 12`` and ``verify_oracle``, with :func:`a_invertible_oracle`.
    Failed re-checks are reported in ``warnings``, never dropped.
    """
    eig = general_eig(op.compression).values
    points = []
    warns = []
    for lam, mult in _cluster(eig, tol_cluster):
        cert = a_invertible(op, lam, tol)
        point = SpectrumPoint(lam, mult, cert.sigma_min)
        if cert.invertible:
            warns.append(f"eigenvalue {lam:.6g} of the compression passed the invertibility test")
        if verify_oracle and op.metric.n <= ORACLE_MAX_DIM:
            verdict = a_invertible_oracle(op, lam, tol)
            point.oracle_residual = verdict.residual
            if verdict.feasible:
                warns.append(f"eigenvalue {lam:.6g} is feasible for the least-squares oracle")
        points.append(point)
    norm_T = a_op_norm(op)
    norm_diamond = a_norm(op.metric, op.diamond)
    sup_sigma = max((p.modulus for p in points), default=0.0)
    if not points:
        warns.append("empty A-spectrum")
    return SpectrumReport(
        sigma_a=points,
        sup_sigma=sup_sigma,
        norm_bound=max(norm_T, norm_diamond),
        certificates={"norm_a": norm_T, "norm_a_diamond": norm_diamond},
        warnings=warns,
    )


def r_a_exact(op):
    """``r_A(T)`` as the spectral radius of ``T_a = (A^{1/2})^+ T* A^{1/2}`` on R(A)."""
    return spectral_radius(t_a_matrix(op))


def r_a_gelfand(op, n_max=DEFAULT_GELFAND_NMAX, scaling=True, full=False):
    """
    Gelfand sequence ``[(k, ||T^k||_A^{1/k}) for k = 1..n_max]``.

    By default the powers are taken of ``C = D^{1/2} T11 D^{-1/2}``, the
    matrix of T in A-orthonormal coordinates of R(A); block triangularity
    gives ``||T^k||_A = ||C^k||`` exactly, and the N(A) block of T (which
    may grow faster than the R(A) block) cannot pollute the result with
    rounding.  ``full=True`` evaluates ``||A^{1/2} T^k (A^{1/2})^+||`` on
    the n x n powers instead.

    With ``scaling`` the powers are formed from ``M / ||M||`` and the
    running product is renormalised every step, keeping its logarithmic
    scale separately; the k-th root is rescaled exactly afterwards.

    Raises
    ------
    Overflow
        if ``scaling=False`` and a power is no longer finite.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    m = op.metric
    if full:
        base = op.T
        norm = lambda M: a_norm(m, M)  # noqa: E731
    else:
        base = op.scaled_compression
        norm = op_norm
    size = base.shape[0]
    out = []
    if not scaling:
        power = np.eye(size, dtype=np.complex128)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, n_max + 1):
                power = power @ base
                if not np.all(np.isfinite(power)):
                    raise Overflow(f"T^{k} overflowed; enable scaling")
                value = norm(power)
                if not math.isfinite(value):
                    raise Overflow(f"||T^{k}||_A overflowed; enable scaling")
                out.append((k, value ** (1.0 / k)))
        return out

    s = norm(base)
    if s == 0.0:
        return [(k, 0.0) for k in range(1, n_max + 1)]
    step = base / s
    power = np.eye(size, dtype=np.complex128)
    log_scale = 0.0
    dead = False
    for k in range(1, n_max + 1):
        if dead:
            out.append((k, 0.0))
            continue
        power = power @ step
        value = norm(power)
        if value == 0.0:
            dead = True
            out.append((k, 0.0))
            continue
        out.append((k, s * math.exp((math.log(value) + log_scale) / k)))
        size_p = float(np.linalg.norm(power))
        log_scale += math.log(size_p)
        power = power / size_p
    return out


def thm319(op, tol=DEFAULT_TOL_INV, n_max=DEFAULT_GELFAND_NMAX, verify_oracle=True):
    """
    Full spectral report including the max-formula for ``sup |sigma_A(T)|``.

    ``thm319_value = (r + r_d + |r_d - r|) / 2`` with ``r = r_A(T)`` and
    ``r_d = r_A(T^)``; the report also names which of the two radii attains
    ``sup |sigma_A(T)|`` (``"r_A(T)"``, ``"r_A(T_diamond)"`` or ``"both"``).
    """
    report = a_spectrum(op, tol, verify_oracle=verify_oracle)
    r = r_a_exact(op)
    r_d = r_a_exact(op.lift_diamond())
    value = (r + r_d + abs(r_d - r)) / 2.0
    report.r_a_exact = r
    report.r_a_diamond_exact = r_d
    report.thm319_value = value
    report.gelfand = r_a_gelfand(op, n_max) if n_max else []
    slack = 1e-7 * max(1.0, value)
    hit_r = abs(r - report.sup_sigma) <= slack
    hit_d = abs(r_d - report.sup_sigma) <= slack
    report.attaining_radius = "both" if hit_r and hit_d else "r_A(T)" if hit_r else "r_A(T_diamond)" if hit_d else "neither"
    report.certificates["max_formula_residual"] = abs(value - report.sup_sigma)
    report.certificates["closed_range_residual"] = abs(r - report.sup_sigma)
    if report.gelfand:
        report.certificates["gelfand_last"] = report.gelfand[-1][1]
    return report


def find_a_inverse(op, tol=DEFAULT_TOL_INV):
    """A-inverse ``S`` of T (compression inverse on R(A), zero on N(A)), or ``None``."""
    cert = a_invertible(op, 0.0, tol)
    if not cert.invertible:
        return None
    # a_invertible inverts (0 - T11); flip the sign
    return -cert.inverse


def inverse_residuals(op, S):
    m = op.metric
    return {
        "ATS": op_norm(m.A @ op.T @ S - m.A) / m.norm,
        "AST": op_norm(m.A @ S @ op.T - m.A) / m.norm,
    }


class OneSidedResult(NamedTuple):
    right: Optional[np.ndarray]
    left: Optional[np.ndarray]
    right_residual: float
    left_residual: float


def one_sided_inverses(op, tol=DEFAULT_TOL_INV, max_dim=ORACLE_MAX_DIM):
    """
    Least-squares search for members ``S1``, ``S2`` with ``A T S1 = A`` and ``A S2 T = A``.

    Each side is returned only when its residual is at most ``tol * ||A||``.
    """
    m = op.metric
    n = m.n
    if n > max_dim:
        raise TooLarge(f"one-sided search limited to n <= {max_dim}")
    eye = np.eye(n)
    P = m.proj
    member = np.kron((eye - P).T, P)
    target = np.concatenate([_vec(m.A), np.zeros(n * n)])
    K_right = np.vstack([np.kron(eye, m.A @ op.T), member])
    K_left = np.vstack([np.kron(op.T.T, m.A), member])
    s1, res1 = lstsq_min_norm(K_right, target, rcond=tol)
    s2, res2 = lstsq_min_norm(K_left, target, rcond=tol)
    bound = tol * m.norm
    return OneSidedResult(
        _unvec(s1, n) if res1 <= bound else None,
        _unvec(s2, n) if res2 <= bound else None,
        res1,
        res2,
    )


class PerturbationResult(NamedTuple):
    hypothesis: bool
    conclusion: Optional[bool]
    norm_a: float
    norm_a_diamond: float


def perturbation_check(op, op_prime, tol=DEFAULT_TOL_INV):
    """
    Stability of A-invertibility under small perturbations.

    With ``S`` the A-inverse of T, the hypothesis is ``||T'S||_A < 1`` and
    ``||(T'S)^||_A < 1``; if it holds, A-invertibility of ``T + T'`` is
    tested.  ``conclusion`` is ``None`` when the hypothesis fails.

    Raises
    ------
    NotInvertible
        if T has no A-inverse.
    """
    S = find_a_inverse(op, tol)
    if S is None:
        raise NotInvertible("T is not A-invertible")
    m = op.metric
    prod = try_lift(m, op_prime.T @ S, op.tol_member)
    norm_a = a_op_norm(prod)
    norm_d = a_norm(m, prod.diamond)
    hypothesis = norm_a < 1.0 and norm_d < 1.0
    if not hypothesis:
        return PerturbationResult(False, None, norm_a, norm_d)
    total = try_lift(m, op.T + op_prime.T, op.tol_member)
    return PerturbationResult(True, a_invertible(total, 0.0, tol).invertible, norm_a, norm_d)
