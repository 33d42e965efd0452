"""Monte-Carlo recovery sweeps.

Each trial draws a fresh multitone multiband signal, a measurement operator
and (optionally) noise from seeds derived from ``(base_seed, point, trial)``,
runs the configured solver and records the recovery SNR.  For the
architecture axis the signal seed ignores the point index, so every operator
kind sees the same signals.
"""

from __future__ import annotations

import dataclasses
import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .._rng import derive_seed
from ..dictionary import build_dft_dictionary, build_dictionary
from ..errors import MbdpssError
from ..recovery import RecoverySettings, bbcosamp, block_iht, cosamp
from ..sensing import KINDS, make_operator
from ..signals import MultibandSpec, add_noise_for_msnr, synth_multiband
from .metrics import measurements_for_rho, percentile_p5, rule_of_thumb_k, snr_db

__all__ = [
    "AXES",
    "ALGORITHMS",
    "ExperimentConfig",
    "TrialRecord",
    "SweepResult",
    "resolve_point",
    "run_trial",
    "run_sweep",
    "oracle_dft_baseline",
    "default_s_grid",
]

AXES = ("k", "M", "rho", "msnr", "architecture")
ALGORITHMS = ("bbcosamp", "block-iht", "dft-cosamp")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved description of one experiment series.

    ``k`` is an integer or ``"rule-of-thumb"``; ``M`` may be left unset when
    ``rho`` (oversampling over the Landau rate ``2NWK``) is given.  ``grid``
    lists the values swept along the chosen axis.
    """

    N: int = 1024
    J: int = 64
    K: int = 5
    k: int | str = "rule-of-thumb"
    M: int | None = None
    rho: float | None = None
    operator_kind: str = "dense-gaussian"
    algorithm: str = "bbcosamp"
    mode: str = "signal"
    msnr_db: float | None = None
    trials: int = 50
    base_seed: int = 0
    grid: tuple = ()
    tones_per_band: int = 50
    k_floor: int | None = None
    k_ceiling: int | None = None
    max_iterations: int = 100
    residual_tol: float = 1e-6
    gamma_factor: float = 1.1
    s_grid: tuple = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.mode not in ("signal", "coefficient"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.operator_kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.operator_kind!r}")
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "s_grid", tuple(self.s_grid))

    @property
    def W(self) -> float:
        return 0.5 / self.J

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial.  ``best_s`` is the oracle sparsity of a DFT baseline trial."""

    point: int
    trial: int
    seed: int
    snr: float
    iterations: int
    converged: bool
    x: object = None
    M: int = 0
    k: int = 0
    support_correct: bool = False
    best_s: int = 0


@dataclass
class SweepResult:
    """Per-point aggregates (5th percentile and median SNR) plus raw records."""

    axis: str
    grid: list
    snr_p5: np.ndarray
    snr_median: np.ndarray
    raw: list = field(default_factory=list)

    def snrs(self, point: int) -> np.ndarray:
        return np.array([r.snr for r in self.raw if r.point == point])


@dataclass(frozen=True)
class _Point:
    M: int
    k: int
    msnr_db: float | None
    kind: str


def resolve_point(config: ExperimentConfig, axis: str, value) -> _Point:
    """Concrete ``(M, k, msnr, kind)`` for one grid value."""
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")
    M, msnr, kind = config.M, config.msnr_db, config.operator_kind
    if axis == "M":
        M = int(value)
    elif axis == "rho":
        M = measurements_for_rho(float(value), config.N, config.W, config.K)
    elif axis == "msnr":
        msnr = float(value)
    elif axis == "architecture":
        kind = str(value)
    if M is None:
        if config.rho is None:
            raise ValueError("config needs M or rho unless the axis sets M")
        M = measurements_for_rho(config.rho, config.N, config.W, config.K)
    if axis == "k":
        k = int(value)
    elif config.k == "rule-of-thumb":
        k = rule_of_thumb_k(M, config.N, config.W, config.K, config.k_floor, config.k_ceiling)
    else:
        k = int(config.k)
    return _Point(int(M), k, msnr, kind)


def default_s_grid(M: int) -> tuple[int, ...]:
    top = M // 3
    grid = [s for s in (10, 20, 40, 60, 85, 110, 135) if s <= top]
    return tuple(sorted(set(grid + [top])))


@functools.lru_cache(maxsize=4)
def _dft(N: int) -> np.ndarray:
    d = build_dft_dictionary(N)
    d.setflags(write=False)
    return d


def oracle_dft_baseline(A, y, truth, S_grid: Sequence[int], settings: RecoverySettings | None = None):
    """Best CoSaMP recovery with the DFT basis over sparsity levels ``S_grid``.

    Returns
    -------
    best_S : int
    best_snr : float
        Recovery SNR of the best sparsity level, judged against ``truth``.
    """
    S_grid = list(S_grid)
    if not S_grid:
        raise ValueError("S_grid must be non-empty")
    settings = settings or RecoverySettings(max_iterations=50)
    basis = _dft(len(truth))
    best_S, best_snr = S_grid[0], -np.inf
    for S in S_grid:
        try:
            est = cosamp(A, basis, y, S, "signal", settings).estimate_x
            value = snr_db(truth, est)
        except (MbdpssError, np.linalg.LinAlgError):
            value = 0.0
        if value > best_snr:
            best_S, best_snr = S, value
    return best_S, float(best_snr)


def _seeds(config: ExperimentConfig, axis: str, point: int, trial: int) -> tuple[int, int, int, int]:
    root = derive_seed(config.base_seed, point, trial)
    signal_root = derive_seed(config.base_seed, 0, trial) if axis == "architecture" else root
    return root, derive_seed(signal_root, 0), derive_seed(root, 1), derive_seed(root, 2)


def run_trial(config: ExperimentConfig, axis: str, point: int, trial: int, value) -> TrialRecord:
    """One independent recovery trial at grid point ``point``."""
    p = resolve_point(config, axis, value)
    root, s_sig, s_op, s_noise = _seeds(config, axis, point, trial)
    x, support = synth_multiband(config.N, MultibandSpec(config.J, config.K, config.tones_per_band, s_sig))
    kind = p.kind
    A = make_operator(kind, p.M, config.N, s_op, fractional=kind == "random-demodulator" and config.N % p.M != 0)
    y = A.apply(x)
    if p.msnr_db is not None:
        y = add_noise_for_msnr(y, p.msnr_db, s_noise)
    settings = RecoverySettings(
        max_iterations=config.max_iterations,
        residual_tol=config.residual_tol,
        gamma=config.gamma_factor * float(np.linalg.norm(x)),
    )
    try:
        if config.algorithm == "dft-cosamp":
            S_grid = config.s_grid or default_s_grid(p.M)
            best_S, snr = oracle_dft_baseline(A, y, x, S_grid)
            return TrialRecord(point, trial, root, snr, 0, True, value, p.M, 0, False, best_S)
        d = build_dictionary(config.N, config.J, p.k)
        if config.algorithm == "block-iht":
            report = block_iht(A, d, y, config.K, settings)
        else:
            report = bbcosamp(A, d, y, config.K, config.mode, settings)
        snr = snr_db(x, report.estimate_x)
        return TrialRecord(
            point, trial, root, snr, report.iterations, report.converged, value, p.M, p.k, report.support == support
        )
    except (MbdpssError, np.linalg.LinAlgError):
        return TrialRecord(point, trial, root, 0.0, 0, False, value, p.M, p.k, False)


def run_sweep(config: ExperimentConfig, grid_axis: str, grid: Sequence | None = None) -> SweepResult:
    """Run ``config.trials`` trials at every grid value and aggregate.

    ``grid`` defaults to ``config.grid``.  Trials run sequentially in
    (point, trial) order, so results are bit-reproducible for a given
    ``base_seed``.
    """
    values = list(config.grid if grid is None else grid)
    if not values:
        raise ValueError("empty sweep grid")
    if grid_axis not in AXES:
        raise ValueError(f"unknown axis {grid_axis!r}; expected one of {AXES}")
    raw = []
    p5, med = [], []
    for point, value in enumerate(values):
        recs = [run_trial(config, grid_axis, point, t, value) for t in range(config.trials)]
        raw.extend(recs)
        snrs = [r.snr for r in recs]
        p5.append(percentile_p5(snrs))
        med.append(float(np.median(snrs)))
    return SweepResult(grid_axis, values, np.array(p5), np.array(med), raw)
