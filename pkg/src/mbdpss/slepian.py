"""Discrete prolate spheroidal sequences (DPSS) and their eigenvalues.

The DPSS vectors for a window of ``N`` samples and half-bandwidth ``W`` are the
eigenvectors of the prolate matrix ``B[m, n] = 2W sinc(2W (m - n))``.  They are
computed here from the symmetric tridiagonal matrix that commutes with ``B``;
its eigenvalues are well separated, so the eigenvectors come out orthonormal to
machine precision even where the eigenvalues of ``B`` itself cluster at 0 or 1.
The concentration eigenvalues are then recovered as Rayleigh quotients
``s^T B s`` using an FFT Toeplitz product.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigensolverFailure, ParameterOutOfRange

__all__ = [
    "ProlateParams",
    "DpssBasis",
    "prolate_matrix",
    "build_dpss",
    "eigenvalue_tail_sum",
    "concentration_report",
    "normalize_signs",
]

_LAMBDA_MIN = 1e-18
_LAMBDA_MAX = float(np.nextafter(1.0, 0.0))
_SIGN_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class ProlateParams:
    """Window length ``N`` and digital half-bandwidth ``W`` (cycles/sample).

    ``W`` must lie in (0, 1/2]; ``W = 1/2`` is the degenerate full-band case
    in which the prolate matrix is the identity.
    """

    N: int
    W: float

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ParameterOutOfRange(f"N must be a positive integer, got {self.N!r}")
        if not np.isfinite(self.W) or not 0.0 < self.W <= 0.5:
            raise ParameterOutOfRange(f"W must lie in (0, 1/2], got {self.W!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "W", float(self.W))

    @property
    def two_nw(self) -> float:
        """Time-bandwidth product ``2NW`` (the trace of the prolate matrix)."""
        return 2.0 * self.N * self.W


@dataclass(frozen=True)
class DpssBasis:
    """First ``k`` DPSS vectors (columns of ``vectors``) and their eigenvalues.

    Arrays are read-only so a basis can be shared freely.
    """

    params: ProlateParams
    k: int
    vectors: np.ndarray
    eigenvalues: np.ndarray

    def truncate(self, k: int) -> "DpssBasis":
        """Return the basis restricted to its first ``k`` vectors."""
        if not 1 <= k <= self.k:
            raise ParameterOutOfRange(f"k must lie in [1, {self.k}], got {k}")
        return DpssBasis(self.params, k, _frozen(self.vectors[:, :k]), _frozen(self.eigenvalues[:k]))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _as_params(params) -> ProlateParams:
    if isinstance(params, ProlateParams):
        return params
    N, W = params
    return ProlateParams(N, W)


def prolate_matrix(params: ProlateParams) -> np.ndarray:
    """Dense prolate matrix ``2W sinc(2W (m - n))``.

    Examples
    --------
    >>> prolate_matrix(ProlateParams(1, 0.25))
    array([[0.5]])
    """
    params = _as_params(params)
    lags = np.arange(params.N)
    return scipy.linalg.toeplitz(2.0 * params.W * np.sinc(2.0 * params.W * lags))


def _prolate_times(params: ProlateParams, v: np.ndarray) -> np.ndarray:
    """Compute ``B @ v`` for the columns of ``v`` by FFT convolution."""
    N, W = params.N, params.W
    lags = np.arange(-(N - 1), N)
    kernel = 2.0 * W * np.sinc(2.0 * W * lags)
    nfft = 1 << int(3 * N - 2).bit_length()
    spec = np.fft.rfft(kernel, nfft)
    conv = np.fft.irfft(np.fft.rfft(v, nfft, axis=0) * spec[:, None], nfft, axis=0)
    return conv[N - 1 : 2 * N - 1]


def normalize_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive.

    Entries within a relative ``1e-9`` of the column maximum count as ties and
    the lowest index among them decides the sign.
    """
    v = np.array(vectors, dtype=float, copy=True)
    mag = np.abs(v)
    peak = mag.max(axis=0)
    first = np.argmax(mag >= peak * (1.0 - _SIGN_TIE_RTOL), axis=0)
    signs = np.sign(v[first, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def _tridiagonal_eigvecs(params: ProlateParams, k: int) -> np.ndarray:
    N, W = params.N, params.W
    n = np.arange(N)
    diag = ((N - 1 - 2 * n) / 2.0) ** 2 * np.cos(2.0 * np.pi * W)
    off = n[1:] * (N - n[1:]) / 2.0
    if 4 * k >= N:
        # MRRR on the whole spectrum is far cheaper than bisection plus
        # inverse iteration once a sizeable fraction of vectors is wanted.
        _, vecs = scipy.linalg.eigh_tridiagonal(diag, off, lapack_driver="stemr")
        return vecs[:, : N - k - 1 : -1] if k < N else vecs[:, ::-1]
    _, vecs = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(N - k, N - 1), lapack_driver="stebz"
    )
    return vecs[:, ::-1]


def _dense_eigvecs(params: ProlateParams, k: int) -> np.ndarray:
    B = prolate_matrix(params)
    _, vecs = scipy.linalg.eigh(B, subset_by_index=(params.N - k, params.N - 1))
    return vecs[:, ::-1]


@functools.lru_cache(maxsize=32)
def _dpss_cached(N: int, W: float, k: int) -> DpssBasis:
    params = ProlateParams(N, W)
    if N == 1:
        vecs = np.ones((1, 1))
    else:
        try:
            vecs = _tridiagonal_eigvecs(params, k)
        except (np.linalg.LinAlgError, ValueError) as exc:
            try:
                vecs = _dense_eigvecs(params, k)
            except np.linalg.LinAlgError as exc2:
                raise EigensolverFailure(f"DPSS eigensolve failed for N={N}, W={W}") from exc2
            del exc
        if not np.all(np.isfinite(vecs)):
            raise EigensolverFailure(f"non-finite DPSS eigenvectors for N={N}, W={W}")
    vecs = normalize_signs(vecs)
    lam = np.einsum("ij,ij->j", vecs, _prolate_times(params, vecs))
    lam = np.clip(lam, _LAMBDA_MIN, _LAMBDA_MAX)
    return DpssBasis(params, k, _frozen(vecs), _frozen(lam))


def build_dpss(params: ProlateParams, k: int) -> DpssBasis:
    """Top-``k`` DPSS vectors and eigenvalues, eigenvalues descending.

    Parameters
    ----------
    params : ProlateParams or (N, W) tuple
    k : int
        Number of vectors, ``1 <= k <= N``.

    Returns
    -------
    DpssBasis
        Columns orthonormal, each with its largest entry positive.

    Examples
    --------
    >>> b = build_dpss(ProlateParams(1, 0.25), 1)
    >>> b.vectors, b.eigenvalues
    (array([[1.]]), array([0.5]))
    """
    params = _as_params(params)
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= params.N:
        raise ParameterOutOfRange(f"k must lie in [1, {params.N}], got {k!r}")
    return _dpss_cached(params.N, params.W, int(k))


def eigenvalue_tail_sum(params: ProlateParams, eigenvalues_prefix) -> float:
    """Sum of the omitted eigenvalues, ``2NW - sum(prefix)``, clamped at 0."""
    params = _as_params(params)
    prefix = np.asarray(eigenvalues_prefix, dtype=float)
    if prefix.size > params.N:
        raise ParameterOutOfRange("prefix longer than N")
    if prefix.size == params.N:
        return 0.0
    return max(0.0, params.two_nw - float(np.sum(prefix)))


def concentration_report(params: ProlateParams, threshold: float) -> tuple[int, int, int]:
    """Count eigenvalues near 1 and near 0 over the full spectrum.

    Returns
    -------
    count_near_one, count_near_zero, transition_width : int
        Eigenvalues ``>= 1 - threshold``, eigenvalues ``<= threshold`` and
        the number left in between.
    """
    params = _as_params(params)
    if not 0.0 < threshold < 0.5:
        raise ParameterOutOfRange("threshold must lie in (0, 1/2)")
    lam = build_dpss(params, params.N).eigenvalues
    near_one = int(np.count_nonzero(lam >= 1.0 - threshold))
    near_zero = int(np.count_nonzero(lam <= threshold))
    return near_one, near_zero, params.N - near_one - near_zero
