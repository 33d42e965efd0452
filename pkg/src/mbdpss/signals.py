"""Test-signal generators and a DTFT grid evaluator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import complex_normal, stream
from .dictionary import BandGrid, BlockSupport
from .errors import EmptySupport, ParameterOutOfRange, ZeroSignal
from .slepian import ProlateParams, build_dpss

__all__ = [
    "MultibandSpec",
    "sampled_exponential",
    "synth_multiband",
    "bandpass_process_sample",
    "multiband_process_sample",
    "add_noise_for_msnr",
    "dtft_grid",
]


@dataclass(frozen=True)
class MultibandSpec:
    """Multitone multiband signal description.

    ``K`` of the ``J`` bands are occupied, each by ``tones_per_band`` complex
    exponentials at uniformly random (off-grid) frequencies inside the band,
    with standard complex Gaussian amplitudes.  ``support`` fixes the occupied
    bands; when omitted they are drawn uniformly from the seed.
    """

    J: int
    K: int
    tones_per_band: int = 50
    seed: int = 0
    support: BlockSupport | None = None

    def __post_init__(self):
        if self.J < 1 or not 0 <= self.K <= self.J:
            raise ParameterOutOfRange(f"need 0 <= K <= J and J >= 1, got J={self.J}, K={self.K}")
        if self.tones_per_band < 1:
            raise ParameterOutOfRange("tones_per_band must be at least 1")
        if self.support is not None:
            if len(self.support) != self.K or any(i >= self.J for i in self.support):
                raise ParameterOutOfRange("support must hold K band indices below J")


def sampled_exponential(N: int, f: float) -> np.ndarray:
    """``exp(j 2 pi f n)`` for ``n = 0..N-1``."""
    if not -0.5 <= f < 0.5:
        raise ParameterOutOfRange(f"f must lie in [-1/2, 1/2), got {f}")
    n = np.arange(N)
    return np.exp(2j * np.pi * np.mod(f * n, 1.0))


def synth_multiband(N: int, spec: MultibandSpec) -> tuple[np.ndarray, BlockSupport]:
    """Draw a multitone multiband signal and its occupied-band support."""
    rng = stream(spec.seed, 0)
    if spec.support is not None:
        support = spec.support
    else:
        support = BlockSupport.of(rng.choice(spec.J, size=spec.K, replace=False)) if spec.K else BlockSupport()
    x = np.zeros(N, dtype=complex)
    n = np.arange(N)
    for band in support:
        lo = -0.5 + band / spec.J
        freqs = lo + rng.uniform(0.0, 1.0, spec.tones_per_band) / spec.J
        amps = complex_normal(rng, spec.tones_per_band)
        x += np.exp(2j * np.pi * np.mod(np.outer(n, freqs), 1.0)) @ amps
    return x, support


def _check_band(f_c: float, W: float) -> None:
    if not 0.0 < W <= 0.5:
        raise ParameterOutOfRange(f"W must lie in (0, 1/2], got {W}")
    eps = 1e-12
    if f_c - W < -0.5 - eps or f_c + W > 0.5 + eps:
        raise ParameterOutOfRange(f"band [{f_c - W}, {f_c + W}] leaves [-1/2, 1/2]")


def _process_draws(rng, N: int, f_c: float, W: float, count: int) -> np.ndarray:
    # covariance (1/2W) E B E^H = E S diag(lambda/2W) S^T E^H
    basis = build_dpss(ProlateParams(N, W), N)
    # real and imaginary parts drawn per row so row 0 does not depend on count
    z = rng.standard_normal((count, 2, N))
    g = (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    coef = g * np.sqrt(basis.eigenvalues / (2.0 * W))
    phase = np.exp(2j * np.pi * np.mod(f_c * np.arange(N), 1.0))
    return phase * (coef @ basis.vectors.T)


def bandpass_process_sample(N: int, f_c: float, W: float, seed: int = 0, draws: int | None = None) -> np.ndarray:
    """Zero-mean Gaussian vector with flat spectrum on ``[f_c - W, f_c + W]``.

    The covariance is ``(1/2W) E_{f_c} B E_{f_c}^H`` so that
    ``E ||x||^2 = N``.  With ``draws`` set, returns a ``(draws, N)`` batch
    whose first row equals the single-draw output for the same seed.
    """
    _check_band(f_c, W)
    rng = stream(seed, 2)
    out = _process_draws(rng, N, f_c, W, 1 if draws is None else int(draws))
    return out[0] if draws is None else out


def multiband_process_sample(
    N: int, grid: BandGrid, support: BlockSupport, seed: int = 0, draws: int | None = None
) -> np.ndarray:
    """Sum of independent band processes on ``support``, each scaled by ``1/sqrt(K)``.

    Bands are drawn in ascending order from one stream, so a single-band
    support reproduces ``bandpass_process_sample`` at that band's centre.
    """
    if len(support) == 0:
        raise EmptySupport("multiband process needs at least one band")
    rng = stream(seed, 2)
    count = 1 if draws is None else int(draws)
    K = len(support)
    out = np.zeros((count, N), dtype=complex)
    for band in support:
        out += _process_draws(rng, N, grid.centers[band], grid.half_width, count)
    out /= np.sqrt(K)
    return out[0] if draws is None else out


def add_noise_for_msnr(y: np.ndarray, msnr_db: float, seed: int = 0) -> np.ndarray:
    """Add white complex Gaussian noise rescaled so ``20 log10(||y||/||e||)`` is exact."""
    y = np.asarray(y)
    if np.isinf(msnr_db) and msnr_db > 0:
        return y.copy()
    norm_y = np.linalg.norm(y)
    if norm_y == 0:
        raise ZeroSignal("cannot set a measurement SNR for a zero signal")
    e = complex_normal(stream(seed, 3), y.shape)
    e *= norm_y * 10.0 ** (-msnr_db / 20.0) / np.linalg.norm(e)
    return y + e


def dtft_grid(x: np.ndarray, grid_points: int) -> np.ndarray:
    """DTFT of a finite window on ``f_m = -1/2 + m/G``, ``m = 0..G-1``."""
    x = np.asarray(x)
    N = x.shape[-1]
    if grid_points < N:
        raise ParameterOutOfRange("grid_points must be at least the signal length")
    # X(-1/2 + m/G) = sum_n x[n] (-1)^n exp(-j 2 pi m n / G)
    alt = np.where(np.arange(N) % 2, -1.0, 1.0)
    return np.fft.fft(x * alt, grid_points)
