"""Random measurement operators and a norm-concentration probe.

All operators have real realized data and act on complex vectors
componentwise.  Each kind is normalized so that ``E ||A x||^2 = ||x||^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._rng import derive_seed, stream
from .errors import DimensionMismatch, DivisibilityViolation, ParameterOutOfRange

__all__ = [
    "KINDS",
    "MeasurementOperator",
    "make_operator",
    "op_apply",
    "op_adjoint",
    "concentration_probe",
]

KINDS = ("dense-gaussian", "dense-rademacher", "random-demodulator", "random-sampler")


def _real_matmul(mat: np.ndarray, x: np.ndarray) -> np.ndarray:
    # avoids numpy promoting a real matrix to complex for a complex operand
    if np.iscomplexobj(x):
        # strided .real/.imag views would push matmul off the BLAS path
        return mat @ np.ascontiguousarray(x.real) + 1j * (mat @ np.ascontiguousarray(x.imag))
    return mat @ x


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """An ``M x N`` real linear map with forward and adjoint application.

    Attributes
    ----------
    kind : str
        One of ``KINDS`` or ``"explicit"`` for a user-supplied matrix.
    matrix : ndarray or None
        Realized entries for dense kinds.
    chips : ndarray or None
        Per-sample chip values for the random demodulator.
    indices : ndarray or None
        Selected sample indices for the random sampler.
    """

    M: int
    N: int
    kind: str
    seed: int | None = None
    matrix: np.ndarray | None = None
    chips: np.ndarray | None = None
    indices: np.ndarray | None = None
    scale: float = 1.0
    _overlap: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "MeasurementOperator":
        """Wrap an explicit real matrix."""
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2:
            raise DimensionMismatch("operator matrix must be 2-D")
        matrix.setflags(write=False)
        return cls(matrix.shape[0], matrix.shape[1], "explicit", matrix=matrix)

    @property
    def shape(self) -> tuple[int, int]:
        return self.M, self.N

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[:1] != (self.N,):
            raise DimensionMismatch(f"operator expects {self.N} rows, got shape {x.shape}")
        if self.matrix is not None:
            return _real_matmul(self.matrix, x)
        if self.kind == "random-sampler":
            return self.scale * x[self.indices]
        cx = (self.chips.reshape((-1,) + (1,) * (x.ndim - 1))) * x
        if self._overlap is None:
            return cx.reshape((self.M, self.N // self.M) + x.shape[1:]).sum(axis=1)
        first, w0, w1 = self._overlap
        shape = (self.M + 1,) + x.shape[1:]
        out = np.zeros(shape, dtype=cx.dtype)
        wshape = (-1,) + (1,) * (x.ndim - 1)
        np.add.at(out, first, w0.reshape(wshape) * cx)
        np.add.at(out, first + 1, w1.reshape(wshape) * cx)
        return out[: self.M]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y)
        if y.shape[:1] != (self.M,):
            raise DimensionMismatch(f"adjoint expects {self.M} rows, got shape {y.shape}")
        if self.matrix is not None:
            return _real_matmul(self.matrix.T, y)
        if self.kind == "random-sampler":
            out = np.zeros((self.N,) + y.shape[1:], dtype=np.result_type(y, float))
            out[self.indices] = self.scale * y
            return out
        cshape = (-1,) + (1,) * (y.ndim - 1)
        if self._overlap is None:
            return self.chips.reshape(cshape) * np.repeat(y, self.N // self.M, axis=0)
        first, w0, w1 = self._overlap
        ypad = np.concatenate([y, np.zeros((1,) + y.shape[1:], dtype=y.dtype)])
        return self.chips.reshape(cshape) * (w0.reshape(cshape) * ypad[first] + w1.reshape(cshape) * ypad[first + 1])

    def apply_matrix(self, X: np.ndarray) -> np.ndarray:
        """Apply the operator to every column of ``X``."""
        return self.apply(X)

    def to_dense(self) -> np.ndarray:
        if self.matrix is not None:
            return np.array(self.matrix)
        return self.apply(np.eye(self.N))


def op_apply(op: MeasurementOperator, x: np.ndarray) -> np.ndarray:
    return op.apply(x)


def op_adjoint(op: MeasurementOperator, y: np.ndarray) -> np.ndarray:
    return op.adjoint(y)


def _fractional_overlap(M: int, N: int):
    """Split each sample between the one or two integration windows it meets.

    Row ``r`` integrates over ``[r N/M, (r+1) N/M)``.  Sample ``n`` covers
    ``[n, n+1)``; its overlap with its first window is ``w0`` and the rest
    ``w1`` falls in the next one.  Samples are rescaled by
    ``1/sqrt(w0^2 + w1^2)`` so every sample keeps unit expected energy.
    """
    n = np.arange(N)
    first = (n * M) // N
    boundary = (first + 1) * N / M
    w0 = np.minimum(1.0, boundary - n)
    w1 = 1.0 - w0
    norm = np.sqrt(w0**2 + w1**2)
    return first, w0 / norm, w1 / norm


def make_operator(kind: str, M: int, N: int, seed: int = 0, *, fractional: bool = False) -> MeasurementOperator:
    """Draw a measurement operator.

    Parameters
    ----------
    kind : {'dense-gaussian', 'dense-rademacher', 'random-demodulator', 'random-sampler'}
    M, N : int
        Rows and columns, ``1 <= M <= N``.
    seed : int
        Root seed; identical arguments give bit-identical operators.
    fractional : bool
        Random demodulator only.  When ``M`` does not divide ``N``, let
        integration windows straddle sample boundaries instead of raising
        ``DivisibilityViolation``.

    Notes
    -----
    Gaussian entries have variance ``1/M`` and Rademacher entries are
    ``+-1/sqrt(M)``.  The demodulator multiplies samples by random ``+-1``
    chips and sums each run of ``N/M`` consecutive products.  The sampler
    keeps ``M`` distinct sorted indices scaled by ``sqrt(N/M)``.
    """
    if kind not in KINDS:
        raise ParameterOutOfRange(f"unknown operator kind {kind!r}; expected one of {KINDS}")
    if not (1 <= M <= N):
        raise ParameterOutOfRange(f"need 1 <= M <= N, got M={M}, N={N}")
    M, N = int(M), int(N)
    rng = stream(seed, 1)
    if kind == "dense-gaussian":
        mat = rng.standard_normal((M, N)) / np.sqrt(M)
        mat.setflags(write=False)
        return MeasurementOperator(M, N, kind, seed, matrix=mat)
    if kind == "dense-rademacher":
        mat = rng.choice(np.array([-1.0, 1.0]), size=(M, N)) / np.sqrt(M)
        mat.setflags(write=False)
        return MeasurementOperator(M, N, kind, seed, matrix=mat)
    if kind == "random-sampler":
        idx = np.sort(rng.choice(N, size=M, replace=False))
        idx.setflags(write=False)
        return MeasurementOperator(M, N, kind, seed, indices=idx, scale=float(np.sqrt(N / M)))
    chips = rng.choice(np.array([-1.0, 1.0]), size=N)
    chips.setflags(write=False)
    if N % M == 0:
        return MeasurementOperator(M, N, kind, seed, chips=chips)
    if not fractional:
        raise DivisibilityViolation(f"random demodulator needs M | N, got M={M}, N={N}")
    return MeasurementOperator(M, N, kind, seed, chips=chips, _overlap=_fractional_overlap(M, N))


def concentration_probe(
    op_factory: Callable[[int], MeasurementOperator],
    x: np.ndarray,
    trials: int,
    eta: float,
    seed: int = 0,
) -> float:
    """Fraction of fresh operators with ``| ||Ax||^2 - ||x||^2 | >= eta ||x||^2``.

    ``op_factory`` maps an integer seed to an operator; trial ``t`` uses the
    seed derived from ``(seed, t)``.
    """
    if trials < 100:
        raise ParameterOutOfRange("concentration probe needs at least 100 trials")
    if not eta > 0:
        raise ParameterOutOfRange("eta must be positive")
    x = np.asarray(x)
    energy = float(np.vdot(x, x).real)
    failures = 0
    for t in range(trials):
        y = op_factory(derive_seed(seed, t)).apply(x)
        if abs(float(np.vdot(y, y).real) - energy) >= eta * energy:
            failures += 1
    return failures / trials
