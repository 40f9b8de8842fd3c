import numpy as np
import pytest

from semihilbert.opspace import a_norm, a_op_norm, is_a_unitary
from semihilbert.propcheck import (
    CHECKS,
    DEFAULT_TOLERANCES,
    KAPPA_WIDEN,
    SuiteConfig,
    random_a_operator,
    random_a_unitary,
    random_commuting_pair,
    random_commuting_with_a,
    random_semimetric,
    run_trial,
    verify_suite,
)
from semihilbert.spectrum import r_a_exact


def test_random_semimetric_ranks():
    m = random_semimetric(5, 5, 0)
    assert m.rank == 5
    m = random_semimetric(5, 1, 0)
    assert m.rank == 1
    assert np.allclose(m.proj @ m.proj, m.proj)
    assert np.linalg.matrix_rank(m.proj) == 1
    with pytest.raises(ValueError):
        random_semimetric(3, 4, 0)


def test_random_semimetric_deterministic():
    a = random_semimetric(6, 3, 123).A
    b = random_semimetric(6, 3, 123).A
    assert a.tobytes() == b.tobytes()
    assert random_semimetric(6, 3, 124).A.tobytes() != a.tobytes()


def test_random_a_operator_membership():
    for seed in range(10):
        m = random_semimetric(6, 3, seed)
        op = random_a_operator(m, seed)
        assert op.membership_residual <= 1e-12 * max(1, np.linalg.norm(op.T, 2))
    full = random_semimetric(4, 4, 1)
    op = random_a_operator(full, 1)
    # full rank: P = I, so every matrix is a member
    assert full.rank == 4 and op.membership_residual <= 1e-12


def test_random_a_operator_zero_scale():
    m = random_semimetric(6, 3, 5)
    op = random_a_operator(m, 5, spectrum_scale=0.0)
    assert r_a_exact(op) == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(m.proj @ op.T @ m.proj) <= 1e-12


def test_generators_certified():
    m = random_semimetric(6, 3, 3)
    rng = np.random.default_rng(3)
    assert is_a_unitary(random_a_unitary(m, rng)).holds
    C = random_commuting_with_a(m, rng)
    assert np.linalg.norm(C.T @ m.A - m.A @ C.T) <= 1e-12
    T1, T2 = random_commuting_pair(m, rng)
    assert np.linalg.norm(T1.T @ T2.T - T2.T @ T1.T) <= 1e-10 * np.linalg.norm(T1.T, 2) ** 3


def test_run_trial_replayable():
    cfg = SuiteConfig(trials=5)
    a, ka = run_trial(cfg, 3)
    b, kb = run_trial(cfg, 3)
    assert a == b and ka == kb
    assert set(a) == set(CHECKS)


def test_suite_counts_and_determinism():
    cfg = SuiteConfig(seed=11, trials=12)
    rep = verify_suite(cfg)
    again = verify_suite(cfg)
    assert rep.as_dict() == again.as_dict()
    for c in rep.checks.values():
        assert c.passed + c.failed == 12
    assert rep.ok


def test_scalar_case():
    rep = verify_suite(SuiteConfig(trials=1, dim=1, rank=1))
    assert rep.ok


def test_identity_metric_collapse():
    rep = verify_suite(SuiteConfig(trials=3, dim=4, rank=4, identity_metric=True))
    assert rep.ok
    assert rep.kappas == [1.0] * 3


def test_forced_failure_reported():
    cfg = SuiteConfig(trials=2, tolerances={name: 0.0 for name in CHECKS})
    rep = verify_suite(cfg)
    assert not rep.ok
    failing = [n for n, c in rep.as_dict().items() if c["failed"]]
    assert failing
    for n in failing:
        assert rep.as_dict()[n]["failing_trials"]


def test_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(trials=0)
    with pytest.raises(ValueError):
        SuiteConfig(dim=3, rank=4)
    with pytest.raises(ValueError):
        SuiteConfig(dim=3, rank=2, metric_spectrum=(1.0, 0.0))
    assert SuiteConfig(tolerances={"dual_oracle": 1e-3}).tolerances["sup_sigma_norm_bound"] == DEFAULT_TOLERANCES["sup_sigma_norm_bound"]


def test_near_rank_boundary_metric_flags_conditioning():
    # smallest positive eigenvalue 1e-8: kappa = 1e8 > KAPPA_WIDEN
    cfg = SuiteConfig(seed=3, trials=6, metric_spectrum=(1.0, 1e-4, 1e-8, 0.0, 0.0, 0.0))
    rep = verify_suite(cfg)
    assert all(k > KAPPA_WIDEN for k in rep.kappas)
    assert rep.flagged_trials == list(range(6))
    assert rep.ok or rep.failures_flagged
    info = rep.conditioning()
    assert info["kappa_max"] > KAPPA_WIDEN
    # quantities that never pass through A^+ stay accurate
    d = rep.as_dict()
    for name in ("sup_sigma_equals_r_a", "max_formula", "sup_sigma_norm_bound", "commuting_with_a", "dual_oracle"):
        assert d[name]["failed"] == 0


def test_well_conditioned_metric_spectrum_passes():
    rep = verify_suite(SuiteConfig(seed=5, trials=10, metric_spectrum=(1.0, 0.5, 0.1, 0.0, 0.0, 0.0)))
    assert rep.ok and not rep.flagged_trials


def test_a_unitary_invariance_direct():
    m = random_semimetric(6, 3, 8)
    rng = np.random.default_rng(8)
    op = random_a_operator(m, rng)
    U, V = random_a_unitary(m, rng), random_a_unitary(m, rng)
    assert a_norm(m, U.T @ op.T @ V.sharp) == pytest.approx(a_op_norm(op), rel=1e-7)
