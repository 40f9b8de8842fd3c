import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semihilbert.errors import DimensionMismatch, NotHermitian, NotPSD, NotSquare, ZeroMetric
from semihilbert.metric import a_inner, a_seminorm, identity_metric, new_metric
from conftest import cgauss


def random_psd(rng, n, r):
    G = cgauss(rng, (n, r))
    return G @ G.conj().T


def test_identity():
    m = new_metric(np.eye(3))
    assert m.rank == 3
    assert np.allclose(m.proj, np.eye(3))


def test_diagonal_rank_two(diag3):
    assert diag3.rank == 2
    assert np.allclose(diag3.proj, np.diag([1, 1, 0]))
    assert np.allclose(diag3.pos_eigs, [1.0, 0.25])
    assert np.allclose(diag3.sqrt, np.diag([1, 0.5, 0]))
    assert np.allclose(diag3.sqrt_pinv, np.diag([1, 2, 0]))
    assert np.allclose(diag3.pinv, np.diag([1, 4, 0]))


def test_weighted_shift_metric_full_rank():
    m = new_metric(np.diag(4.0 ** -np.arange(8)))
    assert m.rank == 8


def test_invariants_random(rng):
    for _ in range(100):
        n = int(rng.integers(2, 8))
        m = new_metric(random_psd(rng, n, int(rng.integers(1, n))))
        P = m.proj
        assert np.linalg.norm(P - m.V @ m.V.conj().T, 2) <= 1e-10
        assert np.linalg.norm(P @ P - P, 2) <= 1e-10
        assert np.linalg.norm(P - P.conj().T, 2) <= 1e-12
        assert np.linalg.norm(m.sqrt @ m.sqrt_pinv - P, 2) <= 1e-10
        assert np.linalg.norm(m.A - (m.V * m.D) @ m.V.conj().T, 2) <= 1e-10 * m.norm
        assert np.linalg.norm(m.pinv @ m.A - P, 2) <= 1e-9
        assert np.linalg.norm(m.A @ m.pinv - P, 2) <= 1e-9
        assert np.all(np.diff(m.pos_eigs) <= 0)
        Q = m.basis
        assert np.linalg.norm(Q.conj().T @ Q - np.eye(n), 2) <= 1e-12


def test_errors():
    with pytest.raises(ZeroMetric):
        new_metric(np.zeros((2, 2)))
    with pytest.raises(NotHermitian):
        new_metric(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(NotPSD):
        new_metric(np.diag([1.0, -0.5]))
    with pytest.raises(NotSquare):
        new_metric(np.ones((2, 3)))


def test_cached_arrays_read_only(diag3):
    with pytest.raises(ValueError):
        diag3.proj[0, 0] = 2.0


def test_inner_examples(diag3):
    assert a_inner(diag3, [1, 1, 1], [1, 1, 1]) == pytest.approx(1.25)
    assert a_inner(identity_metric(2), [1, 2j], [3, 1]) == pytest.approx(3 + 2j)
    # null vector is A-orthogonal to everything
    assert a_inner(diag3, [0, 0, 1], [5, -2, 3]) == 0
    with pytest.raises(DimensionMismatch):
        a_inner(diag3, [1, 1], [1, 1, 1])


def test_seminorm_examples(diag3):
    assert a_seminorm(identity_metric(2), [3, 4]) == pytest.approx(5)
    assert a_seminorm(new_metric(np.diag([1.0, 0.0])), [0, 7]) == 0
    assert a_seminorm(diag3, [1, 2, 9]) == pytest.approx(np.sqrt(2))
    with pytest.raises(DimensionMismatch):
        a_seminorm(diag3, [1, 2])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_property_inner_products(n, seed):
    rng = np.random.default_rng(seed)
    m = new_metric(random_psd(rng, n, int(rng.integers(1, n + 1))))
    x, y = cgauss(rng, n), cgauss(rng, n)
    ixy, iyx = a_inner(m, x, y), a_inner(m, y, x)
    assert abs(ixy - np.conj(iyx)) <= 1e-12 * max(1, abs(ixy))
    nx, ny = a_seminorm(m, x), a_seminorm(m, y)
    assert abs(ixy) <= nx * ny * (1 + 1e-10) + 1e-300
    assert abs(nx - np.sqrt(max(a_inner(m, x, x).real, 0))) <= 1e-10 * max(1, nx)
    # vectors in N(A) have zero seminorm
    if m.W.shape[1]:
        assert a_seminorm(m, m.W[:, 0]) <= 1e-7 * np.sqrt(m.norm)
