"""
Randomised instance generation and the theorem-verification suite.

Every trial draws its own generator from ``SeedSequence(seed, spawn_key=(trial,))``
so a failing trial can be replayed in isolation with :func:`run_trial`.
"""
from dataclasses import dataclass, field

import numpy as np

from .harte import check_thm46, joint_eigenvalues, make_tuple
from .metric import new_metric
from .numkernel import spectral_radius
from .opspace import (
    a_norm,
    a_numerical_radius,
    a_op_norm,
    gamma_a,
    gamma_a_direct,
    is_a_unitary,
    member_from_blocks,
    try_lift,
)
from .spectrum import (
    a_invertible,
    a_invertible_oracle,
    a_spectrum,
    find_a_inverse,
    one_sided_inverses,
    r_a_exact,
    r_a_gelfand,
)

DEFAULT_TOLERANCES = {
    "sup_sigma_equals_r_a": 1e-7,
    "max_formula": 1e-7,
    "r_a_sharp": 1e-7,
    "sharp_norm_identities": 1e-7,
    "gamma_identity": 1e-7,
    "numerical_radius_sandwich": 1e-6,
    "exterior_invertible": 1e-8,
    "sup_sigma_norm_bound": 1e-8,
    "inverse_pair_product": 1e-7,
    "one_sided_inverse": 1e-8,
    "a_unitary_invariance": 1e-7,
    "commuting_with_a": 1e-7,
    "harte_d1_consistency": 1e-8,
    "harte_margin": 1e-6,
    "dual_oracle": 1e-7,
}
CHECKS = tuple(DEFAULT_TOLERANCES)
#: condition number of the positive eigenvalues of A above which tolerances widen
KAPPA_WIDEN = 1e6
DUAL_ORACLE_MAX_DIM = 8


def _rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_semimetric(n, r, seed):
    """``A = G G*`` with ``G`` an n x r complex Gaussian matrix (rank r almost surely)."""
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got n={n}, r={r}")
    G = _complex_gaussian(_rng(seed, 0), (n, r))
    return new_metric(G @ G.conj().T)


def random_a_operator(metric, seed, spectrum_scale=1.0):
    """
    Random member of ``B_{A^{1/2}}(H)``: block lower triangular in ``[V | W]``.

    ``spectrum_scale`` multiplies the compression block, so 0 yields an
    operator with ``r_A(T) = 0``.
    """
    rng = _rng(seed, 1) if isinstance(seed, (int, np.integer)) else seed
    r, k = metric.rank, metric.n - metric.rank
    T = member_from_blocks(
        metric,
        spectrum_scale * _complex_gaussian(rng, (r, r)),
        _complex_gaussian(rng, (k, r)),
        _complex_gaussian(rng, (k, k)),
    )
    return try_lift(metric, T)


def _random_unitary(rng, r):
    Q, R = np.linalg.qr(_complex_gaussian(rng, (r, r)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_a_unitary(metric, rng):
    """
    ``U = V D^{-1/2} Q D^{1/2} V* + (I - P) R`` with Q a random r x r unitary.

    The compression must be unitary in A-orthonormal coordinates, hence
    the ``D^{-1/2} . D^{1/2}`` similarity; R is arbitrary.
    """
    Q = _random_unitary(rng, metric.rank)
    root = np.sqrt(metric.pos_eigs)
    block = (Q / root[:, None]) * root[None, :]
    R = _complex_gaussian(rng, (metric.n, metric.n))
    U = metric.from_range(block) + (np.eye(metric.n) - metric.proj) @ R
    return try_lift(metric, U)


def random_commuting_with_a(metric, rng):
    """Member commuting with A: diagonal on R(A) in the eigenbasis, arbitrary on N(A)."""
    k = metric.n - metric.rank
    return try_lift(metric, member_from_blocks(
        metric, np.diag(_complex_gaussian(rng, metric.rank)), None, _complex_gaussian(rng, (k, k))))


def random_commuting_pair(metric, rng):
    """
    Commuting pair with diagonal compressions.

    ``T1`` has a diagonal compression and random N(A) blocks; ``T2`` is a
    random quadratic polynomial in ``T1``, so the pair commutes exactly.
    """
    r, k = metric.rank, metric.n - metric.rank
    T1 = member_from_blocks(metric, np.diag(_complex_gaussian(rng, r)),
                            _complex_gaussian(rng, (k, r)), _complex_gaussian(rng, (k, k)))
    a, b, c = _complex_gaussian(rng, 3)
    T2 = a * T1 @ T1 + b * T1 + c * np.eye(metric.n)
    return try_lift(metric, T1), try_lift(metric, T2)


@dataclass
class SuiteConfig:
    seed: int = 42
    trials: int = 200
    dim: int = 6
    rank: int = 3
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    identity_metric: bool = False
    #: fixed eigenvalues of A (length dim, zeros allowed); eigenvectors are drawn per trial
    metric_spectrum: tuple = None
    gelfand_n: int = 32
    harte_n: int = 16

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 1 <= self.rank <= self.dim:
            raise ValueError("need 1 <= rank <= dim")
        if self.metric_spectrum is not None and len(self.metric_spectrum) != self.dim:
            raise ValueError("metric_spectrum must hold dim eigenvalues")
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances)
        self.tolerances = merged


@dataclass
class CheckStats:
    passed: int = 0
    failed: int = 0
    worst_residual: float = 0.0
    failing_seeds: list = field(default_factory=list)

    def record(self, ok, residual, trial):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failing_seeds.append(trial)
        if residual > self.worst_residual or not np.isfinite(residual):
            self.worst_residual = float(residual)


@dataclass
class SuiteReport:
    config: SuiteConfig
    checks: dict
    kappas: list

    @property
    def ok(self):
        return all(c.failed == 0 for c in self.checks.values())

    @property
    def flagged_trials(self):
        """Trials whose metric condition number exceeds :data:`KAPPA_WIDEN`."""
        return [t for t, k in enumerate(self.kappas) if k > KAPPA_WIDEN]

    @property
    def failures_flagged(self):
        """True when every failing trial is a conditioning-flagged one."""
        flagged = set(self.flagged_trials)
        return all(set(c.failing_seeds) <= flagged for c in self.checks.values())

    def conditioning(self):
        return {
            "kappa_widen": KAPPA_WIDEN,
            "kappa_max": float(max(self.kappas)),
            "flagged_trials": self.flagged_trials,
            "failures_flagged": self.failures_flagged,
        }

    def as_dict(self):
        return {
            name: {
                "passed": c.passed,
                "failed": c.failed,
                "worst_residual": c.worst_residual,
                "failing_trials": c.failing_seeds,
            }
            for name, c in self.checks.items()
        }


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def run_trial(config, trial):
    """
    Evaluate every check on one instance.

    Returns ``{check: (residual, tolerance)}`` plus the metric condition
    number; a check passes when ``residual <= tolerance``.  Tolerances are
    widened by ``kappa / 1e6`` for metrics with ``kappa > 1e6``.
    """
    tol = config.tolerances
    rng = _rng(config.seed, trial, 2)
    if config.identity_metric:
        metric = new_metric(np.eye(config.dim))
    elif config.metric_spectrum is not None:
        U = _random_unitary(_rng(config.seed, trial, 0), config.dim)
        metric = new_metric((U * np.asarray(config.metric_spectrum, float)) @ U.conj().T)
    else:
        metric = new_metric(_random_gram(config.seed, trial, config.dim, config.rank))
    kappa = metric.condition
    widen = max(1.0, kappa / KAPPA_WIDEN)
    op = random_a_operator(metric, rng)
    out = {}

    sp = a_spectrum(op, tol["dual_oracle"], verify_oracle=False)
    r = r_a_exact(op)
    sup = sp.sup_sigma
    out["sup_sigma_equals_r_a"] = _rel(sup, r)

    r_d = r_a_exact(op.lift_diamond())
    formula = (r + r_d + abs(r_d - r)) / 2.0
    out["max_formula"] = _rel(formula, sup)

    sharp_op = op.lift_sharp()
    out["r_a_sharp"] = _rel(r, r_a_exact(sharp_op))

    norm = a_op_norm(op)
    norm_sharp = a_op_norm(sharp_op)
    norm_ss = a_norm(metric, op.sharp @ op.T) ** 0.5
    out["sharp_norm_identities"] = max(_rel(norm, norm_sharp), _rel(norm, norm_ss))

    g = gamma_a(op)
    out["gamma_identity"] = max(_rel(gamma_a_direct(op), g), _rel(gamma_a_direct(sharp_op), g))

    w = a_numerical_radius(op)
    out["numerical_radius_sandwich"] = max(0.0, r - w, w - norm) / max(1.0, norm)

    worst = 0.0
    for _ in range(4):
        lam = (1.0 + rng.uniform(0.01, 0.5)) * norm * np.exp(2j * np.pi * rng.random())
        cert = a_invertible(op, lam, tol["dual_oracle"])
        worst = max(worst, 0.0 if cert.invertible else 1.0, *cert.residuals.values())
    out["exterior_invertible"] = worst

    out["sup_sigma_norm_bound"] = max(0.0, sup - sp.norm_bound)

    S = find_a_inverse(op)
    if S is None:
        out["inverse_pair_product"] = 0.0
    else:
        product = r * r_a_exact(try_lift(metric, S))
        out["inverse_pair_product"] = max(0.0, 1.0 - product)

    if metric.n <= 12:
        found = one_sided_inverses(op)
        both = found.right is not None and found.left is not None
        invertible = a_invertible(op, 0.0).invertible
        out["one_sided_inverse"] = 0.0 if both == invertible else 1.0
    else:
        out["one_sided_inverse"] = 0.0

    U = random_a_unitary(metric, rng)
    V = random_a_unitary(metric, rng)
    verdict = is_a_unitary(U)
    dev = abs(a_norm(metric, U.T @ op.T @ V.sharp) - norm) / max(norm, 1e-300)
    out["a_unitary_invariance"] = dev if verdict.holds else 1.0

    C = random_commuting_with_a(metric, rng)
    sup_c = a_spectrum(C, verify_oracle=False).sup_sigma
    k = config.gelfand_n
    gel = r_a_gelfand(C, k)[-1][1]
    gel_d = r_a_gelfand(C.lift_diamond(), k)[-1][1]
    out["commuting_with_a"] = max(_rel(gel, sup_c), _rel(gel, gel_d), _rel(r_a_exact(C), r_a_exact(C.lift_diamond())))

    single = make_tuple([op])
    joint = joint_eigenvalues(single, verify_oracle=False)
    jp = np.sort_complex(np.array([p[0] for p in joint.points]))
    ev = np.sort_complex(np.linalg.eigvals(op.compression))
    out["harte_d1_consistency"] = max(
        float(np.max(np.abs(jp - ev))) / max(1.0, sup),
        _rel(max(abs(p[0]) for p in joint.points), sup),
    )

    pair = make_tuple(random_commuting_pair(metric, rng))
    check = check_thm46(pair, config.harte_n)
    out["harte_margin"] = max(0.0, -check.margin) / max(1.0, check.sup_l2)

    if metric.n <= DUAL_ORACLE_MAX_DIM:
        mismatches = 0
        candidates = [p.value for p in sp.sigma_a]
        radius = 1.5 * max(norm, 1e-3)
        candidates += list(radius * np.sqrt(rng.random(4)) * np.exp(2j * np.pi * rng.random(4)))
        for lam in candidates:
            primal = a_invertible(op, lam, tol["dual_oracle"]).invertible
            dual = a_invertible_oracle(op, lam, tol["dual_oracle"]).feasible
            mismatches += primal != dual
        out["dual_oracle"] = float(mismatches)
    else:
        out["dual_oracle"] = 0.0

    return {name: (out[name], tol[name] * widen) for name in CHECKS}, kappa


def _random_gram(seed, trial, n, r):
    G = _complex_gaussian(_rng(seed, trial, 0), (n, r))
    return G @ G.conj().T


def verify_suite(config):
    checks = {name: CheckStats() for name in CHECKS}
    kappas = []
    for trial in range(config.trials):
        results, kappa = run_trial(config, trial)
        kappas.append(kappa)
        for name, (residual, bound) in results.items():
            checks[name].record(bool(residual <= bound), residual, trial)
    return SuiteReport(config, checks, kappas)
