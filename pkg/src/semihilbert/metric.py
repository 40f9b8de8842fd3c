"""The positive semidefinite metric A and everything derived from it."""
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_square_matrix, as_vector
from .errors import NotPSD, ZeroMetric
from .numkernel import DEFAULT_TOL_PSD, DEFAULT_TOL_RANK, DEFAULT_TOL_SYM, herm_eig


@dataclass(frozen=True, eq=False)
class SemiMetric:
    """
    A validated nonzero PSD matrix ``A`` with cached derived operators.

    All caches come from a single Hermitian eigendecomposition of ``A``.
    ``range_basis`` (``V``) holds eigenvectors of the ``rank`` positive
    eigenvalues ``pos_eigs`` (descending); ``null_basis`` (``W``) completes
    it to a unitary ``[V | W]``.

    Use :func:`new_metric` to construct one.
    """

    A: np.ndarray
    tol_rank: float
    rank: int
    range_basis: np.ndarray
    null_basis: np.ndarray
    pos_eigs: np.ndarray
    sqrt: np.ndarray
    sqrt_pinv: np.ndarray
    pinv: np.ndarray
    proj: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def V(self):
        return self.range_basis

    @property
    def W(self):
        return self.null_basis

    @property
    def D(self):
        return self.pos_eigs

    @property
    def basis(self):
        """Unitary ``[V | W]`` adapted to ``R(A) + N(A)``."""
        return np.hstack([self.range_basis, self.null_basis])

    @property
    def condition(self):
        """Ratio of the largest to the smallest positive eigenvalue."""
        return float(self.pos_eigs[0] / self.pos_eigs[-1])

    @property
    def norm(self):
        return float(self.pos_eigs[0])

    def inner(self, x, y):
        return a_inner(self, x, y)

    def seminorm(self, x):
        return a_seminorm(self, x)

    def to_range(self, M):
        """Compression ``V* M V`` of an n x n matrix to R(A)."""
        return self.range_basis.conj().T @ M @ self.range_basis

    def from_range(self, X):
        """Embed an r x r matrix as ``V X V*`` (zero on N(A))."""
        return self.range_basis @ X @ self.range_basis.conj().T


def new_metric(A, tol_rank=DEFAULT_TOL_RANK, tol_psd=DEFAULT_TOL_PSD, tol_sym=DEFAULT_TOL_SYM):
    """
    Validate ``A`` and build a :class:`SemiMetric`.

    Eigenvalues at most ``tol_rank * lambda_max`` count as zero.

    Raises
    ------
    NotSquare, NotHermitian
    ZeroMetric
        if ``A`` is the zero matrix.
    NotPSD
        if an eigenvalue is below ``-tol_psd * ||A||``.
    """
    A = as_square_matrix(A, "metric")
    if not np.any(A):
        raise ZeroMetric("the metric A must be nonzero")
    eig = herm_eig(A, tol_sym)
    scale = float(np.max(np.abs(eig.values)))
    if eig.values[0] < -tol_psd * scale:
        raise NotPSD(f"metric has eigenvalue {eig.values[0]:.3e} below -{tol_psd:.1e}*||A||")
    lam_max = eig.values[-1]
    if lam_max <= 0.0:
        raise ZeroMetric("the metric A has no positive eigenvalue")

    order = np.argsort(eig.values)[::-1]
    values = eig.values[order]
    vectors = eig.vectors[:, order]
    rank = int(np.count_nonzero(values > tol_rank * lam_max))

    V = vectors[:, :rank]
    W = vectors[:, rank:]
    D = values[:rank].copy()
    Vh = V.conj().T
    root = np.sqrt(D)
    sqrt = (V * root) @ Vh
    sqrt_pinv = (V / root) @ Vh
    pinv = (V / D) @ Vh
    proj = V @ Vh
    Ah = 0.5 * (A + A.conj().T)

    eye = np.eye(A.shape[0])
    residuals = {
        "reconstruction": float(np.linalg.norm(Ah - (V * D) @ Vh, 2) / scale),
        "projector_idempotent": float(np.linalg.norm(proj @ proj - proj, 2)),
        "sqrt_sqrt_pinv_vs_P": float(np.linalg.norm(sqrt @ sqrt_pinv - proj, 2)),
        "pinv_A_vs_P": float(np.linalg.norm(pinv @ Ah - proj, 2)),
        "basis_unitary": float(np.linalg.norm(vectors.conj().T @ vectors - eye, 2)),
    }
    for arr in (Ah, V, W, D, sqrt, sqrt_pinv, pinv, proj):
        arr.setflags(write=False)
    return SemiMetric(
        A=Ah,
        tol_rank=float(tol_rank),
        rank=rank,
        range_basis=V,
        null_basis=W,
        pos_eigs=D,
        sqrt=sqrt,
        sqrt_pinv=sqrt_pinv,
        pinv=pinv,
        proj=proj,
        residuals=residuals,
    )


def a_inner(m, x, y):
    """The semi-inner product ``<x, y>_A = <Ax, y> = y* A x``."""
    x = as_vector(x, m.n, "x")
    y = as_vector(y, m.n, "y")
    return complex(np.vdot(y, m.A @ x))


def a_seminorm(m, x):
    """``||x||_A``, computed as ``||A^{1/2} x||`` so it is never a square root of a negative."""
    x = as_vector(x, m.n, "x")
    return float(np.linalg.norm(m.sqrt @ x))


def identity_metric(n):
    return new_metric(np.eye(n))
