"""
Dense complex linear-algebra kernels.

Everything downstream (metrics, adjoints, spectra) goes through these
functions so that rank decisions and tolerances live in one place.  The
heavy lifting is delegated to LAPACK through :mod:`numpy.linalg`; the
functions here add input validation, explicit rank thresholds and the
error types used by the rest of the package.
"""
from typing import NamedTuple

import numpy as np

from ._validation import as_complex_matrix, as_square_matrix
from .errors import DimensionMismatch, NoConvergence, NotHermitian, NotPSD

#: relative singular-value / eigenvalue threshold below which a value counts as zero
DEFAULT_TOL_RANK = 1e-10
#: negative eigenvalues down to ``-TOL_PSD * ||A||`` are rounding noise and clamped
DEFAULT_TOL_PSD = 1e-10
DEFAULT_TOL_SYM = 1e-10
#: LAPACK's reconstruction constant is O(n); this is documented slack, not a fit
RECONSTRUCTION_KAPPA = 64.0


class HermitianEigen(NamedTuple):
    values: np.ndarray  # real, ascending
    vectors: np.ndarray  # unitary, columns are eigenvectors

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


class GeneralEigenvalues(NamedTuple):
    values: np.ndarray  # complex, unordered, with multiplicity

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def residuals(self, M):
        """sigma_min(lambda I - M) for every eigenvalue lambda."""
        M = as_square_matrix(M)
        eye = np.eye(M.shape[0])
        return np.array([smallest_singular_value(lam * eye - M) for lam in self.values])


def op_norm(M):
    """Spectral norm (largest singular value); 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def smallest_singular_value(M):
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def hermitian_defect(M):
    """Return ``||M - M*||`` relative to ``||M||`` (0 for the zero matrix)."""
    scale = op_norm(M)
    if scale == 0.0:
        return 0.0
    return op_norm(M - M.conj().T) / scale


def herm_eig(M, tol_sym=DEFAULT_TOL_SYM):
    """
    Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as ``(M + M*) / 2`` after the asymmetry check,
    so tiny rounding asymmetries do not leak into the eigenvectors.

    Raises
    ------
    NotSquare
    NotHermitian
        if ``||M - M*|| > tol_sym * ||M||``.
    """
    M = as_square_matrix(M)
    defect = hermitian_defect(M)
    if defect > tol_sym:
        raise NotHermitian(f"matrix is not Hermitian: relative asymmetry {defect:.3e} > {tol_sym:.1e}")
    H = 0.5 * (M + M.conj().T)
    try:
        values, vectors = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return HermitianEigen(values.astype(float), vectors)


def general_eig(M):
    """
    All eigenvalues of a square complex matrix, with multiplicity.

    LAPACK ``zgeev`` reduces to Hessenberg form and runs shifted QR; a
    failure to converge is re-raised as :class:`NoConvergence`.
    """
    M = as_square_matrix(M)
    try:
        values = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return GeneralEigenvalues(values.astype(np.complex128))


def spectral_radius(M):
    return general_eig(M).spectral_radius


def svd(M):
    """
    Thin SVD ``M = U diag(s) V*`` with ``s`` descending.

    Returns ``(U, s, V)``; note ``V`` is returned, not ``V*``.
    """
    M = as_complex_matrix(M)
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return U, s, Vh.conj().T


def numerical_rank(s, tol_rank=DEFAULT_TOL_RANK, floor=0.0):
    """
    Count of entries of the descending array ``s`` above ``max(tol_rank * s[0], floor)``.

    ``floor`` is an absolute rounding-noise level for products that may
    vanish in exact arithmetic, where ``s[0]`` itself can be noise.
    """
    if tol_rank <= 0:
        raise ValueError("tol_rank must be positive")
    if len(s) == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > max(tol_rank * s[0], floor)))


def pinv(M, tol_rank=DEFAULT_TOL_RANK):
    """Moore-Penrose pseudoinverse; singular values below ``tol_rank * s_max`` are dropped."""
    U, s, V = svd(M)
    k = numerical_rank(s, tol_rank)
    return (V[:, :k] / s[:k]) @ U[:, :k].conj().T


def psd_sqrt(A, tol_psd=DEFAULT_TOL_PSD, tol_sym=DEFAULT_TOL_SYM):
    """
    Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-tol_psd * ||A||, 0)`` are clamped to zero.

    Raises
    ------
    NotPSD
        if an eigenvalue is more negative than the clamping band.
    """
    eig = herm_eig(A, tol_sym)
    scale = float(np.max(np.abs(eig.values)))
    lo = eig.values[0]
    if lo < -tol_psd * scale:
        raise NotPSD(f"matrix has eigenvalue {lo:.3e} below -{tol_psd:.1e}*||A||")
    root = np.sqrt(np.clip(eig.values, 0.0, None))
    return (eig.vectors * root) @ eig.vectors.conj().T


def lstsq_min_norm(coefficient, rhs, rcond=None):
    """
    Minimum-norm least-squares solution of ``coefficient @ x = rhs``.

    Parameters
    ----------
    coefficient : (m, k) array
    rhs : (m,) or (m, p) array
    rcond : float, optional
        Relative cutoff for small singular values of ``coefficient``;
        ``None`` uses the LAPACK default ``eps * max(m, k)``.

    Returns
    -------
    solution : ndarray
    residual : float
        Frobenius norm of ``coefficient @ solution - rhs``.
    """
    C = as_complex_matrix(coefficient, "coefficient")
    b = np.asarray(rhs, dtype=np.complex128)
    if b.shape[0] != C.shape[0]:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, coefficient has {C.shape[0]}")
    try:
        x = np.linalg.lstsq(C, b, rcond=rcond)[0]
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc
    residual = float(np.linalg.norm(C @ x - b))
    return x, residual


def orth_range(M, tol_rank=DEFAULT_TOL_RANK):
    """Orthonormal basis (as columns) of the numerical range of ``M``; may have zero columns."""
    U, s, _ = svd(M)
    k = numerical_rank(s, tol_rank)
    return U[:, :k]


def null_space(M, tol_rank=DEFAULT_TOL_RANK, floor=0.0):
    """Orthonormal basis of the numerical null space of ``M`` (see :func:`numerical_rank` for ``floor``)."""
    M = as_complex_matrix(M)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    k = numerical_rank(s, tol_rank, floor)
    return Vh[k:].conj().T
