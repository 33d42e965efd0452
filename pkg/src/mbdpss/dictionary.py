"""Multiband dictionaries built from modulated DPSS vectors.

The band ``[-1/2, 1/2)`` is split into ``J`` equal bands of width ``1/J``.
Block ``i`` of the dictionary holds the first ``k`` DPSS vectors for
``W = 1/(2J)`` modulated to the centre of band ``i``; the dictionary is the
band-major concatenation of the ``J`` blocks (``D = kJ`` columns).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, EmptySupport, ParameterOutOfRange
from .slepian import DpssBasis, ProlateParams, build_dpss

__all__ = [
    "BandGrid",
    "BlockSupport",
    "MultibandDictionary",
    "modulation_phase",
    "build_dictionary",
    "dict_apply",
    "dict_adjoint",
    "max_cross_band_coherence",
    "gram_singular_extremes",
    "reduced_basis",
    "build_dft_dictionary",
    "robust_svd",
]

DEFAULT_SVD_TOL = 1e-10


def robust_svd(a: np.ndarray, full_matrices: bool = False):
    """SVD that retries with the QR-iteration driver if divide-and-conquer fails."""
    try:
        return np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(a, full_matrices=full_matrices, lapack_driver="gesvd")


@dataclass(frozen=True)
class BandGrid:
    """``J`` equal bands covering ``[-1/2, 1/2)``."""

    J: int

    def __post_init__(self):
        if isinstance(self.J, bool) or int(self.J) != self.J or self.J < 1:
            raise ParameterOutOfRange(f"J must be a positive integer, got {self.J!r}")
        object.__setattr__(self, "J", int(self.J))

    @property
    def centers(self) -> np.ndarray:
        return -0.5 + (np.arange(self.J) + 0.5) / self.J

    @property
    def half_width(self) -> float:
        return 0.5 / self.J

    def edges(self, i: int) -> tuple[float, float]:
        lo = -0.5 + i / self.J
        return lo, lo + 1.0 / self.J


@dataclass(frozen=True)
class BlockSupport:
    """Sorted set of distinct band indices."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ParameterOutOfRange(f"duplicate band indices in {idx}")
        if any(i < 0 for i in idx):
            raise ParameterOutOfRange(f"negative band index in {idx}")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    @classmethod
    def of(cls, indices: Iterable[int]) -> "BlockSupport":
        """Build a support from any iterable, dropping repeats."""
        return cls(tuple(sorted(set(int(i) for i in indices))))

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, i) -> bool:
        return i in self.indices

    def union(self, other: Iterable[int]) -> "BlockSupport":
        return BlockSupport.of(self.indices + tuple(other))


def modulation_phase(f_c: float, N: int) -> np.ndarray:
    """Samples ``exp(j 2 pi f_c m)`` for ``m = 0..N-1``.

    Examples
    --------
    >>> np.round(modulation_phase(0.25, 4), 12)
    array([ 1.+0.j,  0.+1.j, -1.+0.j, -0.-1.j])
    """
    if not -0.5 <= f_c < 0.5:
        raise ParameterOutOfRange(f"f_c must lie in [-1/2, 1/2), got {f_c}")
    m = np.arange(N)
    # reduce f_c*m modulo 1 before scaling so large m keeps full phase accuracy
    return np.exp(2j * np.pi * np.mod(f_c * m, 1.0))


@dataclass(frozen=True, eq=False)
class MultibandDictionary:
    """Block dictionary ``[E_{f_0} S, ..., E_{f_{J-1}} S]``.

    Only the shared real DPSS matrix ``S`` (``N x k``) and the ``J``
    modulation vectors are stored; blocks and the dense matrix are formed on
    request.  Columns are addressed by ``(band, column)`` and flattened
    band-major (``band * k + column``).
    """

    N: int
    grid: BandGrid
    k: int
    dpss: DpssBasis
    phases: np.ndarray

    @property
    def J(self) -> int:
        return self.grid.J

    @property
    def W(self) -> float:
        return self.grid.half_width

    @property
    def D(self) -> int:
        return self.k * self.grid.J

    @property
    def S(self) -> np.ndarray:
        return self.dpss.vectors

    def block(self, i: int) -> np.ndarray:
        """Block ``i`` as an ``N x k`` complex matrix."""
        return self.phases[i][:, None] * self.S

    def column(self, band: int, col: int) -> np.ndarray:
        return self.phases[band] * self.S[:, col]

    def submatrix(self, support: Iterable[int]) -> np.ndarray:
        """Horizontal concatenation of the blocks in ``support``."""
        idx = list(support)
        if not idx:
            return np.zeros((self.N, 0), dtype=complex)
        return (self.phases[idx][:, :, None] * self.S[None]).transpose(1, 0, 2).reshape(self.N, -1)

    @functools.cached_property
    def dense(self) -> np.ndarray:
        """The full ``N x kJ`` matrix (materialized once, for diagnostics)."""
        m = self.submatrix(range(self.J))
        m.setflags(write=False)
        return m

    @functools.cached_property
    def _fold(self):
        J, N = self.J, self.N
        n = np.arange(N)
        # conj(phase_i[n]) = base[n] * exp(-j 2 pi i n / J)
        base = np.exp(1j * np.pi * np.mod(n * (1.0 - 1.0 / J), 2.0))
        pad = (-N) % J
        return base, pad

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """``Psi @ coeffs`` via a length-``J`` FFT across bands."""
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (self.D,):
            raise DimensionMismatch(f"expected {self.D} coefficients, got shape {coeffs.shape}")
        J, N, k = self.J, self.N, self.k
        base, pad = self._fold
        # T[m, l] = sum_i alpha[i, l] exp(j 2 pi i m / J)
        T = np.fft.ifft(coeffs.reshape(J, k), axis=0) * J
        rows = np.arange(N) % J
        return np.conj(base) * np.einsum("nl,nl->n", self.S, T[rows])

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        """``Psi^H @ x`` via folding modulo ``J`` and a length-``J`` FFT."""
        x = np.asarray(x)
        if x.shape != (self.N,):
            raise DimensionMismatch(f"expected length {self.N}, got shape {x.shape}")
        J, k = self.J, self.k
        base, pad = self._fold
        g = (base * x)[:, None] * self.S
        if pad:
            g = np.concatenate([g, np.zeros((pad, k), dtype=g.dtype)])
        folded = g.reshape(-1, J, k).sum(axis=0)
        return np.fft.fft(folded, axis=0).reshape(-1)

    def block_energies(self, x: np.ndarray) -> np.ndarray:
        """``||Psi_i^H x||^2`` for every band ``i``."""
        c = self.adjoint(x).reshape(self.J, self.k)
        return np.einsum("ij,ij->i", c.real, c.real) + np.einsum("ij,ij->i", c.imag, c.imag)


@functools.lru_cache(maxsize=16)
def _build_dictionary_cached(N: int, J: int, k: int) -> MultibandDictionary:
    grid = BandGrid(J)
    basis = build_dpss(ProlateParams(N, grid.half_width), k)
    phases = np.stack([modulation_phase(f, N) for f in grid.centers])
    phases.setflags(write=False)
    return MultibandDictionary(N, grid, k, basis, phases)


def build_dictionary(N: int, J: int, k: int) -> MultibandDictionary:
    """Multiband DPSS dictionary with ``J`` bands and ``k`` vectors per band.

    Examples
    --------
    >>> d = build_dictionary(256, 4, 24)
    >>> d.D, d.W
    (96, 0.125)
    """
    for name, v in (("N", N), ("J", J), ("k", k)):
        if isinstance(v, bool) or int(v) != v or v < 1:
            raise ParameterOutOfRange(f"{name} must be a positive integer, got {v!r}")
    if k > N:
        raise ParameterOutOfRange(f"k must not exceed N={N}, got {k}")
    return _build_dictionary_cached(int(N), int(J), int(k))


def dict_apply(d: MultibandDictionary, coeffs: np.ndarray) -> np.ndarray:
    return d.apply(coeffs)


def dict_adjoint(d: MultibandDictionary, x: np.ndarray) -> np.ndarray:
    return d.adjoint(x)


def max_cross_band_coherence(d: MultibandDictionary) -> float:
    """Largest ``|<q1, q2>|`` over column pairs from different bands.

    On a uniform grid ``Psi_i^H Psi_j = S^T diag(exp(j 2 pi (j-i) n / J)) S``
    depends only on ``j - i``, so ``J - 1`` Gram blocks cover every pair.
    """
    J = d.J
    if J < 2:
        return 0.0
    n = np.arange(d.N)
    S = d.S
    best = 0.0
    for shift in range(1, J):
        mod = np.exp(2j * np.pi * np.mod(shift * n / J, 1.0))
        G = S.T @ (mod[:, None] * S)
        best = max(best, float(np.abs(G).max()))
    return best


def gram_singular_extremes(d: MultibandDictionary, max_columns: int = 8192) -> tuple[float, float]:
    """Smallest and largest singular values of the dense dictionary.

    When ``D > N`` the dictionary has a null space and ``sigma_min`` is 0.
    """
    if d.D > max_columns:
        raise ParameterOutOfRange(f"dictionary has {d.D} columns, above the budget of {max_columns}")
    s = robust_svd(d.dense)[1]
    smin = 0.0 if d.D > d.N else float(s[-1])
    return smin, float(s[0])


def reduced_basis(d: MultibandDictionary, support: Iterable[int], svd_tol: float = DEFAULT_SVD_TOL) -> np.ndarray:
    """Orthonormal basis ``U`` for the numerical range of ``Psi_I``.

    Keeps left singular vectors whose singular value exceeds
    ``svd_tol * sigma_max``.
    """
    if not svd_tol > 0:
        raise ParameterOutOfRange("svd_tol must be positive")
    idx = list(support)
    if not idx:
        raise EmptySupport("reduced basis requested for an empty support")
    return orth_basis(d.submatrix(idx), svd_tol)


def orth_basis(a: np.ndarray, svd_tol: float = DEFAULT_SVD_TOL) -> np.ndarray:
    """Left singular vectors of ``a`` above the relative tolerance."""
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=a.dtype)
    U, s, _ = robust_svd(a)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    r = int(np.count_nonzero(s > svd_tol * s[0]))
    return U[:, :r]


def build_dft_dictionary(N: int) -> np.ndarray:
    """Unitary DFT dictionary with columns ordered by frequency.

    Column ``n`` is ``exp(j 2 pi (n - N/2 + 1) m / N) / sqrt(N)``, so column
    ``N/2 - 1`` is the zero-frequency atom.
    """
    if N < 1:
        raise ParameterOutOfRange("N must be positive")
    m = np.arange(N)[:, None]
    freq = np.arange(N)[None, :] - N / 2.0 + 1.0
    return np.exp(2j * np.pi * np.mod(freq * m / N, 1.0)) / np.sqrt(N)
