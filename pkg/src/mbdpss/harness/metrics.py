"""Scalar metrics and the measurement-dependent choice of ``k``."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterOutOfRange, ZeroTruth
from ..slepian import ProlateParams, build_dpss

__all__ = [
    "SNR_CAP_DB",
    "snr_db",
    "percentile_p5",
    "rule_of_thumb_k",
    "machine_floor_k",
    "default_k_ceiling",
    "measurements_for_rho",
]

SNR_CAP_DB = 300.0
_FULL_SCALE_CEILING = {(4096, 256): 38}


def snr_db(truth: np.ndarray, estimate: np.ndarray) -> float:
    """``20 log10(||x|| / ||x - x_hat||)``, capped at 300 dB.

    Examples
    --------
    >>> snr_db(np.ones(4), np.zeros(4))
    0.0
    """
    truth = np.asarray(truth)
    ref = float(np.linalg.norm(truth))
    if ref == 0:
        raise ZeroTruth("SNR undefined for a zero reference signal")
    err = float(np.linalg.norm(truth - np.asarray(estimate)))
    if err == 0:
        return SNR_CAP_DB
    return min(SNR_CAP_DB, 20.0 * math.log10(ref / err))


def percentile_p5(values) -> float:
    """Order statistic at index ``floor(0.05 n)`` of the sorted values.

    This is the level met or exceeded by at least 95% of the values.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ParameterOutOfRange("no values to aggregate")
    return float(v[int(math.floor(0.05 * v.size))])


def rule_of_thumb_k(M: int, N: int, W: float, K: int, k_floor: int | None = None, k_ceiling: int | None = None) -> int:
    """Columns per band as a function of the oversampling ratio.

    With ``rho = M / (2NW K)``: ``k_floor`` for ``rho <= 2``, ``k_ceiling``
    for ``rho >= 6`` and linear interpolation (rounded) in between.

    Examples
    --------
    >>> rule_of_thumb_k(4 * 80, 4096, 1 / 512, 5, k_ceiling=38)
    27
    """
    if min(M, N, W, K) <= 0:
        raise ParameterOutOfRange("M, N, W and K must be positive")
    two_nw = 2.0 * N * W
    lo = int(round(two_nw)) if k_floor is None else int(k_floor)
    hi = default_k_ceiling(N, W) if k_ceiling is None else int(k_ceiling)
    rho = M / (two_nw * K)
    if rho <= 2:
        return lo
    if rho >= 6:
        return hi
    # round half up so the 16 -> 38 schedule gives 27 at rho = 4
    return int(math.floor(lo + (hi - lo) * (rho - 2.0) / 4.0 + 0.5))


def machine_floor_k(N: int, W: float, level: float = 1e-14) -> int:
    """Smallest ``k`` whose first omitted eigenvalue ``lambda_k`` is below ``level``."""
    lam = build_dpss(ProlateParams(N, W), min(N, int(4 * N * W) + 64)).eigenvalues
    below = np.flatnonzero(lam < level)
    return int(below[0]) if below.size else lam.size


def default_k_ceiling(N: int, W: float) -> int:
    """Ceiling of the ``k`` schedule.

    The 4096-sample, 256-band configuration uses a fixed ceiling of 38;
    any other size takes the first index where the omitted eigenvalue drops
    below ``1e-14``.
    """
    J = round(0.5 / W)
    if abs(0.5 / J - W) < 1e-15 and (N, J) in _FULL_SCALE_CEILING:
        return _FULL_SCALE_CEILING[(N, J)]
    return machine_floor_k(N, W)


def measurements_for_rho(rho: float, N: int, W: float, K: int) -> int:
    """``M = round(rho 2NW K)``."""
    return int(round(rho * 2.0 * N * W * K))
