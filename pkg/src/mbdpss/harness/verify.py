"""Measured checks of the DPSS approximation identities and block-RIP estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from .._rng import complex_normal, stream
from ..dictionary import BandGrid, BlockSupport, MultibandDictionary, build_dictionary, reduced_basis
from ..errors import ParameterOutOfRange
from ..sensing import MeasurementOperator
from ..signals import bandpass_process_sample, dtft_grid, multiband_process_sample
from ..slepian import ProlateParams, build_dpss, eigenvalue_tail_sum

__all__ = [
    "RipEstimate",
    "estimate_block_rip",
    "CheckResult",
    "KLScale",
    "KLReport",
    "quadrature_check",
    "process_mse_check",
    "multiband_mse_check",
    "leakage_check",
    "kl_verification_suite",
]


@dataclass(frozen=True)
class RipEstimate:
    """Largest observed ``| ||A Psi_I a||^2 / ||Psi_I a||^2 - 1 |`` (a lower bound on delta)."""

    delta_lower: float
    supports_tested: int
    history: tuple = ()


def estimate_block_rip(A, d: MultibandDictionary, K: int, trials: int, seed: int = 0) -> RipEstimate:
    """Monte-Carlo lower bound on the block-RIP constant of ``A`` over ``Psi``.

    Each trial draws ``K`` distinct bands uniformly and standard complex
    Gaussian coefficients on them.  ``history[t]`` is the running maximum
    after ``t + 1`` trials, so it never decreases.
    """
    if trials < 1:
        raise ParameterOutOfRange("trials must be at least 1")
    if not 1 <= K <= d.J:
        raise ParameterOutOfRange(f"K must lie in [1, {d.J}]")
    if not isinstance(A, MeasurementOperator):
        A = MeasurementOperator.from_matrix(A)
    rng = stream(seed, 5)
    worst = 0.0
    hist = []
    for _ in range(trials):
        bands = np.sort(rng.choice(d.J, size=K, replace=False))
        v = d.submatrix(bands) @ complex_normal(rng, K * d.k)
        ratio = float(np.linalg.norm(A.apply(v)) ** 2 / np.linalg.norm(v) ** 2)
        worst = max(worst, abs(ratio - 1.0))
        hist.append(worst)
    return RipEstimate(worst, trials, tuple(hist))


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    reference: float
    passed: bool
    detail: str = ""

    def __post_init__(self):
        # keep numpy scalars out of CSV/JSON output
        object.__setattr__(self, "measured", float(self.measured))
        object.__setattr__(self, "reference", float(self.reference))
        object.__setattr__(self, "passed", bool(self.passed))


@dataclass
class KLReport:
    checks: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_rows(self) -> list[dict]:
        return [dict(name=c.name, measured=c.measured, reference=c.reference, passed=c.passed, detail=c.detail) for c in self.checks]


@dataclass(frozen=True)
class KLScale:
    """Sizes used by ``kl_verification_suite``."""

    N: int = 128
    quadrature_k: tuple = (8, 16, 32)
    quadrature_points: int = 2048
    draws: int = 2000
    process_fc: float = 0.1
    process_W: float = 1.0 / 16
    multiband_J: int = 4
    multiband_support: tuple = (0, 2)
    leakage_eps: float = 0.25
    seed: int = 0


def _phase(f_c: float, N: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.mod(f_c * np.arange(N), 1.0))


def quadrature_check(N: int, W: float, k: int, f_c: float = 0.0, points: int = 2048) -> CheckResult:
    """Band average of ``||e_f - P_Q e_f||^2`` against ``tail_sum / 2W``.

    ``Q`` holds the first ``k`` DPSS vectors modulated to ``f_c``; the average
    over ``f in [f_c - W, f_c + W]`` uses the composite trapezoid rule.
    """
    points = max(points, 16 * N)
    params = ProlateParams(N, W)
    basis = build_dpss(params, k)
    f = np.linspace(-W, W, points)
    n = np.arange(N)
    # ||Q^H e_{f_c + f}||^2 = ||S^T e_f||^2 because the modulation cancels
    E = np.exp(2j * np.pi * np.outer(n, f))
    inside = np.sum(np.abs(basis.vectors.T @ E) ** 2, axis=0)
    integrand = N - inside
    measured = float(scipy.integrate.trapezoid(integrand, f)) / (2 * W)
    reference = eigenvalue_tail_sum(params, basis.eigenvalues) / (2 * W)
    rel = abs(measured - reference) / max(reference, 1e-300)
    return CheckResult(
        f"quadrature N={N} W={W:g} k={k}", measured, reference, rel < 1e-3, f"relative error {rel:.2e}"
    )


def process_mse_check(N: int, f_c: float, W: float, k: int, draws: int = 2000, seed: int = 0) -> list[CheckResult]:
    """Monte-Carlo MSE of projecting the band process onto ``k`` modulated DPSS vectors."""
    params = ProlateParams(N, W)
    basis = build_dpss(params, k)
    x = bandpass_process_sample(N, f_c, W, seed, draws=draws)
    Q = _phase(f_c, N)[:, None] * basis.vectors
    energy = np.sum(np.abs(x) ** 2, axis=1)
    resid = energy - np.sum(np.abs(x @ Q.conj()) ** 2, axis=1)
    mse = float(resid.mean())
    reference = eigenvalue_tail_sum(params, basis.eigenvalues) / (2 * W)
    rel = abs(mse - reference) / reference
    norm_ratio = float(energy.mean()) / N
    return [
        CheckResult(
            f"process MSE N={N} fc={f_c:g} W={W:g} k={k}",
            mse,
            reference,
            rel < 0.05,
            f"relative error {rel:.3f} over {draws} draws",
        ),
        CheckResult(f"process energy N={N} fc={f_c:g} W={W:g}", norm_ratio, 1.0, abs(norm_ratio - 1) < 0.05, "E||x||^2/N"),
    ]


def multiband_mse_check(
    N: int, J: int, support: tuple, k: int, draws: int = 2000, seed: int = 0
) -> CheckResult:
    """Monte-Carlo MSE of projecting the multiband process onto ``R(Psi_I)``.

    Passes when the mean is at most ``(K/2W) tail_sum`` plus three standard
    errors.
    """
    grid = BandGrid(J)
    supp = BlockSupport.of(support)
    d = build_dictionary(N, J, k)
    U = reduced_basis(d, supp)
    x = multiband_process_sample(N, grid, supp, seed, draws=draws)
    resid = np.sum(np.abs(x) ** 2, axis=1) - np.sum(np.abs(x @ U.conj()) ** 2, axis=1)
    mean = float(resid.mean())
    se = float(resid.std(ddof=1)) / math.sqrt(draws)
    params = ProlateParams(N, grid.half_width)
    bound = len(supp) / (2 * grid.half_width) * eigenvalue_tail_sum(params, d.dpss.eigenvalues)
    return CheckResult(
        f"multiband MSE bound N={N} J={J} K={len(supp)} k={k}",
        mean,
        bound,
        mean <= bound + 3 * se,
        f"standard error {se:.3g}",
    )


def leakage_check(N: int, J: int, band: int, k_signal: int, eps: float = 0.25, seed: int = 0) -> CheckResult:
    """Projection error of a leaky in-band signal against ``(delta + N lambda_k) ||x||^2``.

    ``x`` is a random combination of ``k_signal`` modulated DPSS vectors of
    one band, ``delta`` its out-of-band energy fraction measured on a fine
    DTFT grid, and ``Q`` the first ``k = ceil(2NW(1 + eps))`` vectors.
    """
    grid = BandGrid(J)
    W = grid.half_width
    params = ProlateParams(N, W)
    k = math.ceil(params.two_nw * (1 + eps))
    full = build_dpss(params, max(k + 1, k_signal))
    f_c = grid.centers[band]
    alpha = complex_normal(stream(seed, 6), k_signal)
    x = _phase(f_c, N) * (full.vectors[:, :k_signal] @ alpha)
    G = 64 * N
    X = dtft_grid(x, G)
    f = -0.5 + np.arange(G) / G
    lo, hi = grid.edges(band)
    in_band = (f >= lo) & (f < hi)
    energy = float(np.sum(np.abs(X) ** 2))
    delta = 1.0 - float(np.sum(np.abs(X[in_band]) ** 2)) / energy
    Q = _phase(f_c, N)[:, None] * full.vectors[:, :k]
    x_norm2 = float(np.vdot(x, x).real)
    err = x_norm2 - float(np.linalg.norm(Q.conj().T @ x) ** 2)
    bound = (delta + N * full.eigenvalues[k]) * x_norm2
    return CheckResult(
        f"bandpass leakage N={N} J={J} band={band} k_signal={k_signal} k={k}",
        err,
        bound,
        err <= bound,
        f"delta {delta:.3g}, lambda_k {full.eigenvalues[k]:.3g}",
    )


def kl_verification_suite(scale: KLScale | None = None) -> KLReport:
    """Run every approximation check at the given scale and collect the results."""
    s = scale or KLScale()
    report = KLReport()
    # single band covering the whole spectrum, then a narrow baseband band
    for W in (0.5, 1.0 / 8):
        for k in s.quadrature_k:
            report.checks.append(quadrature_check(s.N, W, k, 0.0, s.quadrature_points))
    k_proc = int(round(2 * s.N * s.process_W))
    report.checks.extend(process_mse_check(s.N, s.process_fc, s.process_W, k_proc, s.draws, s.seed))
    report.checks.extend(process_mse_check(s.N, 0.0, 1.0 / 8, int(round(2 * s.N / 8)), s.draws, s.seed + 1))
    W_mb = 0.5 / s.multiband_J
    report.checks.append(
        multiband_mse_check(s.N, s.multiband_J, s.multiband_support, int(round(2 * s.N * W_mb)), s.draws, s.seed)
    )
    two_nw = 2 * s.N * W_mb
    for extra in (8, 24):
        k_sig = int(math.ceil(two_nw * (1 + s.leakage_eps))) + extra
        report.checks.append(leakage_check(s.N, s.multiband_J, 1, k_sig, s.leakage_eps, s.seed))
    return report
