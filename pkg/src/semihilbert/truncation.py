"""
Finite truncations of three l^2 operator families.

``ex1`` and ``ex2`` live on l^2(Z) truncated to indices ``-N..N`` with the
coordinate order ``(e_{-N}, ..., e_{-1}, e_0, e_1, ..., e_N)``; the metric
is ``A e_{-n} = e_{-n}/n``, ``A e_n = e_n/n^2`` for ``n >= 2`` and zero on
``e_{-1}, e_0, e_1``.  ``ex3`` is the left shift on l^2 truncated to
``1..N`` with ``A = diag(4^{-(k-1)})``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CostGuard, TooSmall, UnknownExample
from .metric import SemiMetric, new_metric
from .numkernel import DEFAULT_TOL_RANK
from .opspace import AOperator, a_norm, try_lift
from .spectrum import a_spectrum, r_a_exact, r_a_gelfand

EXAMPLES = ("ex1", "ex2", "ex3")
MAX_TRUNCATION = 200
TREND_BUDGET = 200 * 200

EX1_NORM_NOTE = (
    "ex1: computed ||T^k||_A = sqrt(2) for every k >= 1 (T^2 = T on each truncation); "
    "this disagrees with the claimed value ||T^k||_A = 1, while the limit r_A(T) = 1 is unaffected"
)
EX1_ZERO_NOTE = (
    "ex1: 0 lies in sigma_A(T_N) for every truncation (each 2x2 block [[1, n^-1/2], [0, 0]] is singular); "
    "it is a persistent truncation point and is not claimed for the infinite-dimensional A-spectrum, "
    "which is stated to be {1}"
)
EX2_INDEX_NOTE = (
    "ex2: A-spectrum points are +-n^(-1/4) for 2 <= n <= N only; indices +-1 lie in N(A), "
    "so the stated set {lambda^2 = 1/sqrt(n), n in N} must start at n = 2 (n = 1 would give |lambda| = 1)"
)
EX3_NILPOTENT_NOTE = (
    "ex3: the truncated shift is nilpotent, so sup|sigma_A(T_N)| = r_A(T_N) = 0; "
    "Gelfand prefixes ||T^n||_A^(1/n) = 2 for n < N reproduce the infinite-dimensional r_A(T) = 2, "
    "and drop to 0 for n >= N"
)


@dataclass(frozen=True, eq=False)
class ExampleInstance:
    name: str
    N: int
    metric: SemiMetric
    op: AOperator
    index_map: tuple

    def coordinate(self, index):
        """Coordinate position of the basis vector with l^2 index ``index``."""
        return self.index_map.index(index)


def _zn_index_map(N):
    return tuple(range(-N, 0)) + (0,) + tuple(range(1, N + 1))


def _zn_metric_diag(N):
    idx = _zn_index_map(N)
    diag = np.zeros(len(idx))
    for pos, k in enumerate(idx):
        n = abs(k)
        if n >= 2:
            diag[pos] = 1.0 / n if k < 0 else 1.0 / n**2
    return idx, diag


def _ex1_ex2(name, N):
    idx, diag = _zn_metric_diag(N)
    pos = {k: i for i, k in enumerate(idx)}
    T = np.zeros((len(idx), len(idx)), np.complex128)
    for n in range(1, N + 1):
        # column = image of e_n / e_{-n}
        T[pos[-n], pos[n]] = 1.0 / math.sqrt(n)
        if name == "ex1":
            T[pos[-n], pos[-n]] = 1.0
        else:
            T[pos[n], pos[-n]] = 1.0
    return idx, np.diag(diag), T


def _ex3(N):
    diag = 4.0 ** -np.arange(N)
    T = np.diag(np.ones(N - 1), 1).astype(np.complex128)
    return tuple(range(1, N + 1)), np.diag(diag), T


def example(name, N):
    """
    Build the truncation of size ``N`` of example ``name``.

    ``ex3`` needs a rank tolerance below its smallest metric eigenvalue
    ``4^{-(N-1)}``, which the generator picks automatically.

    Raises
    ------
    UnknownExample
    TooSmall
        for ``N < 3`` (ex1, ex2) or ``N < 2`` (ex3).
    """
    if name not in EXAMPLES:
        raise UnknownExample(f"unknown example {name!r}; choose from {EXAMPLES}")
    N = int(N)
    minimum = 2 if name == "ex3" else 3
    if N < minimum:
        raise TooSmall(f"{name} needs N >= {minimum}, got {N}")
    if N > MAX_TRUNCATION:
        raise CostGuard(f"N = {N} exceeds the truncation limit {MAX_TRUNCATION}")
    if name == "ex3":
        idx, A, T = _ex3(N)
        tol_rank = min(DEFAULT_TOL_RANK, 0.5 * 4.0 ** -(N - 1))
    else:
        idx, A, T = _ex1_ex2(name, N)
        tol_rank = DEFAULT_TOL_RANK
    metric = new_metric(A, tol_rank=tol_rank)
    return ExampleInstance(name, N, metric, try_lift(metric, T), idx)


@dataclass
class TrendRow:
    N: int
    n: int
    gelfand: float
    sup_sigma: float
    thm319: float


@dataclass
class TrendReport:
    name: str
    rows: list
    annotations: list = field(default_factory=list)
    summaries: dict = field(default_factory=dict)

    def column(self, key, N=None):
        return [getattr(r, key) for r in self.rows if N is None or r.N == N]


def notes_for(name):
    if name == "ex1":
        return [EX1_NORM_NOTE, EX1_ZERO_NOTE]
    if name == "ex2":
        return [EX2_INDEX_NOTE]
    return [EX3_NILPOTENT_NOTE]


def trend_report(name, N_list, n_max):
    """
    Rows ``(N, n, ||T_N^n||_A^(1/n), sup|sigma_A(T_N)|, max-formula value)``.

    One row per truncation size and power; each truncation additionally
    gets a summary with its exact radii and the power norms that the
    annotations refer to.
    """
    N_list = [int(N) for N in N_list]
    if max(N_list) * n_max * len(N_list) > TREND_BUDGET:
        raise CostGuard("trend report exceeds the N * n_max budget")
    rows = []
    summaries = {}
    for N in N_list:
        inst = example(name, N)
        sp = a_spectrum(inst.op, verify_oracle=False)
        r = r_a_exact(inst.op)
        r_d = r_a_exact(inst.op.lift_diamond())
        value = (r + r_d + abs(r_d - r)) / 2.0
        seq = r_a_gelfand(inst.op, n_max)
        for n, est in seq:
            rows.append(TrendRow(N, n, est, sp.sup_sigma, value))
        power = np.eye(inst.metric.n, dtype=np.complex128)
        diamond_power = np.eye(inst.metric.n, dtype=np.complex128)
        power_norms, diamond_norms = [], []
        for _ in range(min(n_max, 4)):
            power = power @ inst.op.T
            diamond_power = diamond_power @ inst.op.diamond
            power_norms.append(a_norm(inst.metric, power))
            diamond_norms.append(a_norm(inst.metric, diamond_power))
        estimates = [e for _, e in seq]
        diamond_seq = r_a_gelfand(inst.op.lift_diamond(), n_max)
        summaries[N] = {
            "r_a": r,
            "r_a_diamond": r_d,
            "sup_sigma": sp.sup_sigma,
            "sigma_a": [p.value for p in sp.sigma_a],
            "power_norms": power_norms,
            "diamond_power_norms": diamond_norms,
            "diamond_gelfand": [e for _, e in diamond_seq],
            "gelfand_monotone_nonincreasing": bool(all(b <= a + 1e-12 for a, b in zip(estimates, estimates[1:]))),
        }
    return TrendReport(name, rows, notes_for(name), summaries)
