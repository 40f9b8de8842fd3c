"""Input coercion helpers used at every public entry point."""
import numpy as np

from .errors import DimensionMismatch, NotSquare


def as_complex_matrix(M, name="matrix"):
    """Return ``M`` as a 2-D ``complex128`` array, rejecting empty or non-finite input."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def as_square_matrix(M, name="matrix"):
    arr = as_complex_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise NotSquare(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_vector(x, n, name="vector"):
    v = np.asarray(x, dtype=np.complex128).reshape(-1)
    if v.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return v


def check_same_shape(M, n, name="matrix"):
    arr = as_square_matrix(M, name)
    if arr.shape[0] != n:
        raise DimensionMismatch(f"{name} is {arr.shape[0]}x{arr.shape[0]}, expected {n}x{n}")
    return arr
