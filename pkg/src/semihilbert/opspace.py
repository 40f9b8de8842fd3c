"""
Operators on a semi-Hilbertian space.

An operator ``T`` belongs to ``B_{A^{1/2}}(H)`` exactly when it maps
``N(A)`` into ``N(A)``.  In the adapted basis ``[V | W]`` of
``R(A) + N(A)`` such an operator is block lower triangular::

    [V|W]* T [V|W] = [[T11,   0],
                      [T21, T22]]

and every A-quantity is a function of ``T11`` (the *compression*) and
the positive eigenvalues ``D`` of ``A``.  The functions below still
evaluate the defining formulas on full n x n matrices wherever that is
cheap, so the block picture is checked rather than assumed.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import check_same_shape
from .errors import NotAMember, ZeroOperatorWarning
from .metric import SemiMetric
from .numkernel import DEFAULT_TOL_RANK, null_space, numerical_rank, op_norm, svd

DEFAULT_TOL_MEMBER = 1e-8
DEFAULT_TOL_ISOMETRY = 1e-8
DEFAULT_ANGLE_SAMPLES = 64
#: multiple of eps * n * (operand norms) below which a singular value counts as rounding noise
NOISE_FACTOR = 64.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class AOperator:
    """An operator certified to lie in ``B_{A^{1/2}}(H)`` for ``metric``."""

    T: np.ndarray
    metric: SemiMetric
    diamond: np.ndarray
    sharp: np.ndarray
    compression: np.ndarray
    membership_residual: float
    tol_member: float
    certificates: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.T.shape[0]

    @property
    def scaled_compression(self):
        """``D^{1/2} T11 D^{-1/2}``: the matrix of T in A-orthonormal coordinates of R(A)."""
        root = np.sqrt(self.metric.pos_eigs)
        return (root[:, None] * self.compression) / root[None, :]

    def lift_diamond(self):
        return try_lift(self.metric, self.diamond, self.tol_member)

    def lift_sharp(self):
        return try_lift(self.metric, self.sharp, self.tol_member)

    def __matmul__(self, other):
        return try_lift(self.metric, self.T @ other.T, self.tol_member)


def membership_residual(m, T):
    """Raw ``||P T (I - P)||`` without normalisation."""
    T = check_same_shape(T, m.n, "operator")
    return op_norm(m.proj @ T - m.proj @ T @ m.proj)


def a_norm(m, M):
    """``||M||_A = ||A^{1/2} M (A^{1/2})^+||`` for any n x n matrix M."""
    return op_norm(m.sqrt @ M @ m.sqrt_pinv)


def try_lift(m, T, tol_member=DEFAULT_TOL_MEMBER):
    """
    Certify ``T`` as a member of ``B_{A^{1/2}}(H)`` and cache its adjoints.

    Parameters
    ----------
    m : SemiMetric
    T : (n, n) array
    tol_member : float
        Relative bound on ``||P T (I - P)||`` against ``max(||T||, 1)``.

    Raises
    ------
    DimensionMismatch
    NotAMember
        when T moves part of ``N(A)`` out of ``N(A)``; the offending
        residual is attached as ``exc.residual``.
    """
    T = check_same_shape(T, m.n, "operator").copy()
    scale = max(op_norm(T), 1.0)
    residual = membership_residual(m, T)
    if residual > tol_member * scale:
        raise NotAMember(
            f"T does not map N(A) into N(A): ||PT(I-P)|| = {residual:.3e} > {tol_member:.1e}*{scale:.3g}",
            residual,
        )
    Th = T.conj().T
    diamond = m.sqrt_pinv @ Th @ m.sqrt
    sharp = m.pinv @ Th @ m.A
    compression = m.to_range(T)

    norm_root = op_norm(m.sqrt)
    norm_T = op_norm(T)
    certificates = {
        "diamond_equation": op_norm(Th @ m.sqrt - m.sqrt @ diamond) / max(norm_T * norm_root, 1e-300),
        "diamond_range": op_norm(diamond - m.proj @ diamond) / max(op_norm(diamond), 1e-300),
        "sharp_equation": op_norm(Th @ m.A - m.A @ sharp) / max(norm_T * m.norm, 1e-300),
    }
    for arr in (T, diamond, sharp, compression):
        arr.setflags(write=False)
    return AOperator(
        T=T,
        metric=m,
        diamond=diamond,
        sharp=sharp,
        compression=compression,
        membership_residual=residual,
        tol_member=float(tol_member),
        certificates=certificates,
    )


def member_from_blocks(m, T11, T21=None, T22=None):
    """
    Assemble ``[V|W] [[T11, 0], [T21, T22]] [V|W]*``.

    Missing blocks default to zero.  The result is a member of
    ``B_{A^{1/2}}(H)`` by construction.
    """
    r, k = m.rank, m.n - m.rank
    T11 = np.asarray(T11, dtype=np.complex128).reshape(r, r)
    T21 = np.zeros((k, r), np.complex128) if T21 is None else np.asarray(T21, np.complex128).reshape(k, r)
    T22 = np.zeros((k, k), np.complex128) if T22 is None else np.asarray(T22, np.complex128).reshape(k, k)
    block = np.zeros((m.n, m.n), np.complex128)
    block[:r, :r] = T11
    block[r:, :r] = T21
    block[r:, r:] = T22
    Q = m.basis
    return Q @ block @ Q.conj().T


def a_op_norm(op):
    return a_norm(op.metric, op.T)


def diamond(op):
    """``T^ = (A^{1/2})^+ T* A^{1/2}``, the reduced solution of ``T* A^{1/2} = A^{1/2} X``."""
    return op.diamond


def sharp(op):
    """``T# = A^+ T* A``, the reduced solution of ``T* A = A X``."""
    return op.sharp


def t_a_matrix(op):
    """``(A^{1/2})^+ T* A^{1/2}`` on R(A), in the range basis: ``D^{-1/2} T11* D^{1/2}``."""
    root = np.sqrt(op.metric.pos_eigs)
    return (op.compression.conj().T / root[:, None]) * root[None, :]


def t_eff_matrix(op):
    """``PTP`` restricted to R(A), in the range basis (the compression ``T11``)."""
    return op.compression.copy()


def t_b_matrix(op):
    """
    ``T_b(A^{1/2} x) = A^{1/2} T x`` on the range space of ``A^{1/2}``.

    ``R(A^{1/2})`` carries the norm ``||A^{1/2} x|| = ||P x||``, so
    ``A^{1/2} x -> V* x`` is an isometry onto C^r.  In those coordinates
    ``T_b`` acts by ``V* A^{1/2} T x = D^{1/2} V* T x``, pulled back through
    ``D^{1/2}``; evaluated from the full matrices rather than from the
    cached compression.
    """
    m = op.metric
    root = np.sqrt(m.pos_eigs)
    # coordinates of A^{1/2} T V y are D^{1/2} (V* T V) y; undo D^{1/2}
    image = m.V.conj().T @ m.sqrt @ op.T @ m.V
    return image / root[:, None]


def _hermitian_part_max(C, theta):
    H = np.exp(1j * theta) * C
    H = 0.5 * (H + H.conj().T)
    return float(np.linalg.eigvalsh(H)[-1])


def a_numerical_radius(op, angle_samples=DEFAULT_ANGLE_SAMPLES, theta_tol=1e-8, refine=3):
    """
    A-numerical radius ``w_A(T)``.

    Computed as ``max_theta lambda_max(Re(e^{i theta} C))`` with ``C`` the
    matrix of T in A-orthonormal coordinates.  The angle grid is refined by
    golden-section search around the ``refine`` best samples.
    """
    if angle_samples < 8:
        raise ValueError("angle_samples must be at least 8")
    C = op.scaled_compression
    if not np.any(C):
        return 0.0
    thetas = np.linspace(0.0, 2.0 * np.pi, angle_samples, endpoint=False)
    values = np.array([_hermitian_part_max(C, t) for t in thetas])
    best = float(values.max())
    step = thetas[1] - thetas[0]
    for idx in np.argsort(values)[::-1][:refine]:
        a, b = thetas[idx] - step, thetas[idx] + step
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = _hermitian_part_max(C, c), _hermitian_part_max(C, d)
        while b - a > theta_tol:
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = _hermitian_part_max(C, c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = _hermitian_part_max(C, d)
        best = max(best, fc, fd)
    return best


def gamma_a(op, tol_rank=DEFAULT_TOL_RANK):
    """
    A-reduced minimum modulus, as the smallest nonzero singular value of T-diamond.

    Returns 0.0 and emits :class:`ZeroOperatorWarning` when ``T^`` vanishes.
    """
    s = np.linalg.svd(op.diamond, compute_uv=False)
    k = numerical_rank(s, tol_rank)
    if k == 0:
        warnings.warn("T-diamond is zero; reduced minimum modulus set to 0", ZeroOperatorWarning, stacklevel=2)
        return 0.0
    return float(s[k - 1])


def gamma_a_direct(op, tol_rank=DEFAULT_TOL_RANK):
    """
    ``inf ||T x||_A`` over A-unit ``x`` in the A-orthogonal complement of ``N(A^{1/2} T)``.

    Works in the original coordinates without using the range basis: the
    constraint subspace is found by two null-space computations, then the
    infimum is the smallest singular value of a Rayleigh-quotient pencil.
    """
    m = op.metric
    root_norm = op_norm(m.sqrt)
    noise = NOISE_FACTOR * np.finfo(float).eps * m.n
    K = null_space(m.sqrt @ op.T, tol_rank, noise * root_norm * op_norm(op.T))
    if K.shape[1] == 0:
        B = np.eye(m.n, dtype=np.complex128)
    else:
        # K*A vanishes in exact arithmetic when K = N(A)
        B = null_space(K.conj().T @ m.A, tol_rank, noise * m.norm)
    G = m.sqrt @ B
    H = m.sqrt @ op.T @ B
    U, s, Vg = svd(G)
    k = numerical_rank(s, tol_rank, noise * root_norm)
    if k == 0:
        return 0.0
    R = H @ (Vg[:, :k] / s[:k])
    sv = np.linalg.svd(R, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0.0
    return float(sv[-1])


class Verdict(NamedTuple):
    holds: bool
    residual: float
    details: dict


def is_a_isometry(op, tol=DEFAULT_TOL_ISOMETRY, samples=8, seed=0):
    """
    Check ``T# T = P``.

    ``residual`` is the absolute ``||T# T - P||``; the verdict compares it
    with ``tol * max(1, ||T#|| ||T||)`` since the computed product carries
    rounding of that size.  When it holds, ``||T x||_A = ||x||_A`` is also
    sampled on random x and the worst relative deviation is reported in
    ``details``.
    """
    m = op.metric
    residual = op_norm(op.sharp @ op.T - m.proj)
    holds = residual <= tol * max(1.0, op_norm(op.sharp) * op_norm(op.T))
    details = {}
    if holds:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            x = rng.standard_normal(m.n) + 1j * rng.standard_normal(m.n)
            nx = m.seminorm(x)
            if nx > 0:
                worst = max(worst, abs(m.seminorm(op.T @ x) - nx) / nx)
        details["sampled_norm_deviation"] = worst
        holds = worst <= 10 * tol
    return Verdict(bool(holds), float(residual), details)


def is_a_unitary(op, tol=DEFAULT_TOL_ISOMETRY, probes=None, seed=0):
    """
    ``U`` is A-unitary when both ``U`` and ``U#`` are A-isometries.

    On success the norm identities ``||U||_A = 1`` and
    ``||U T U#||_A = ||T||_A`` are evaluated for the ``probes`` (random
    members when not given) and recorded in ``details``.
    """
    m = op.metric
    iso = is_a_isometry(op, tol, seed=seed)
    iso_sharp = is_a_isometry(op.lift_sharp(), tol, seed=seed + 1)
    residual = max(iso.residual, iso_sharp.residual)
    details = {"isometry_residual": iso.residual, "sharp_isometry_residual": iso_sharp.residual}
    holds = iso.holds and iso_sharp.holds
    if holds:
        details["norm_deviation"] = abs(a_op_norm(op) - 1.0)
        if probes is None:
            rng = np.random.default_rng(seed)
            probes = []
            for _ in range(3):
                blocks = [rng.standard_normal(s) + 1j * rng.standard_normal(s)
                          for s in [(m.rank, m.rank), (m.n - m.rank, m.rank), (m.n - m.rank, m.n - m.rank)]]
                probes.append(member_from_blocks(m, *blocks))
        worst = 0.0
        for S in probes:
            norm_S = a_norm(m, S)
            if norm_S > 0:
                worst = max(worst, abs(a_norm(m, op.T @ S @ op.sharp) - norm_S) / norm_S)
        details["invariance_deviation"] = worst
        holds = details["norm_deviation"] <= 1e-8 and worst <= 1e-8
    return Verdict(bool(holds), float(residual), details)
