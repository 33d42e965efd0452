"""Greedy recovery algorithms for sparse and block-sparse models.

All solvers share one stopping rule: stop when the relative residual
``||y - A x|| / ||y||`` drops below ``residual_tol``, when it changes by less
than a relative ``1e-8`` between iterations, or after ``max_iterations``.
With ``halt_on_residual_increase`` the solver also stops as soon as the
residual grows and returns the best iterate seen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.optimize

from ._rng import stream
from .dictionary import DEFAULT_SVD_TOL, BlockSupport, MultibandDictionary, orth_basis, robust_svd
from .errors import DimensionMismatch, EmptySupport, ParameterOutOfRange, ParameterViolation, RootFindFailure
from .sensing import MeasurementOperator

__all__ = [
    "RecoverySettings",
    "RecoveryReport",
    "hard_threshold",
    "block_threshold",
    "iht",
    "block_project",
    "tikhonov_ls",
    "constrained_ls",
    "estimate_gamma",
    "bbcosamp",
    "cosamp",
    "block_iht",
]


@dataclass(frozen=True)
class RecoverySettings:
    max_iterations: int = 100
    residual_tol: float = 1e-6
    mu: float = 1.0
    gamma: float | None = None
    svd_tol: float = DEFAULT_SVD_TOL
    halt_on_residual_increase: bool = True
    stagnation_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterOutOfRange("max_iterations must be at least 1")
        if not (self.residual_tol > 0 and self.svd_tol > 0 and self.stagnation_tol > 0):
            raise ParameterOutOfRange("tolerances must be positive")
        if not self.mu > 0:
            raise ParameterOutOfRange("mu must be positive")
        if self.gamma is not None and not self.gamma > 0:
            raise ParameterOutOfRange("gamma must be positive")


@dataclass
class RecoveryReport:
    """Solver output.

    ``support`` is a ``BlockSupport`` for block solvers and a sorted tuple of
    column indices otherwise.  ``residual_history[0]`` is the relative
    residual of the zero initial guess.
    """

    estimate_x: np.ndarray
    estimate_coeffs: np.ndarray | None
    support: BlockSupport | tuple
    iterations: int
    residual_history: np.ndarray
    converged: bool
    stop_reason: str = ""


# ---------------------------------------------------------------- helpers


def _as_operator(A) -> MeasurementOperator:
    if isinstance(A, MeasurementOperator):
        return A
    return MeasurementOperator.from_matrix(np.asarray(A))


class _Basis:
    """Uniform view of an identity, dense-matrix or multiband dictionary basis."""

    def __init__(self, basis, N: int):
        self.obj = basis
        if basis is None:
            self.D = N
        elif isinstance(basis, MultibandDictionary):
            if basis.N != N:
                raise DimensionMismatch(f"dictionary has {basis.N} rows, operator has {N} columns")
            self.D = basis.D
        else:
            basis = np.asarray(basis)
            if basis.ndim != 2 or basis.shape[0] != N:
                raise DimensionMismatch(f"basis must have {N} rows")
            self.obj = basis
            self.D = basis.shape[1]

    def apply(self, a):
        if self.obj is None:
            return a
        if isinstance(self.obj, MultibandDictionary):
            return self.obj.apply(a)
        return self.obj @ a

    def adjoint(self, x):
        if self.obj is None:
            return x
        if isinstance(self.obj, MultibandDictionary):
            return self.obj.adjoint(x)
        return self.obj.conj().T @ x

    def columns(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        if self.obj is None:
            m = np.zeros((self.D, idx.size), dtype=complex)
            m[idx, np.arange(idx.size)] = 1.0
            return m
        if isinstance(self.obj, MultibandDictionary):
            return self.obj.dense[:, idx]
        return self.obj[:, idx]

    def dense(self) -> np.ndarray:
        if self.obj is None:
            return np.eye(self.D, dtype=complex)
        if isinstance(self.obj, MultibandDictionary):
            return self.obj.dense
        return self.obj


class _Progress:
    """Residual bookkeeping and the shared stopping rule."""

    def __init__(self, y: np.ndarray, settings: RecoverySettings):
        self.settings = settings
        self.y_norm = float(np.linalg.norm(y))
        self.history = [1.0 if self.y_norm > 0 else 0.0]
        self.iterations = 0
        self.best_state = None
        self.best_res = np.inf
        self.reason = ""
        self.converged = False

    def relative(self, r: np.ndarray) -> float:
        return float(np.linalg.norm(r)) / self.y_norm if self.y_norm > 0 else float(np.linalg.norm(r))

    def update(self, state, res: float) -> bool:
        """Record an iterate; return True when the solver should stop."""
        s = self.settings
        self.iterations += 1
        prev = self.history[-1]
        if s.halt_on_residual_increase and self.iterations > 1 and res > prev:
            self.reason, self.converged = "residual-increase", True
            return True
        self.history.append(res)
        if res <= self.best_res or not s.halt_on_residual_increase:
            self.best_state, self.best_res = state, res
        if res < s.residual_tol:
            self.reason, self.converged = "residual-tol", True
        elif abs(prev - res) <= s.stagnation_tol * max(prev, res):
            self.reason, self.converged = "stagnation", True
        elif self.iterations >= s.max_iterations:
            self.reason, self.converged = "max-iterations", False
        else:
            return False
        return True

    def final_state(self):
        if self.settings.halt_on_residual_increase:
            return self.best_state
        return self.last_state

    def history_array(self) -> np.ndarray:
        return np.asarray(self.history, dtype=float)


def _stable_top(values: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` largest values, lowest index first on ties."""
    order = np.argsort(-values, kind="stable")
    return order[:count]


def hard_threshold(v: np.ndarray, S: int) -> np.ndarray:
    """Keep the ``S`` largest-magnitude entries of ``v`` and zero the rest.

    Examples
    --------
    >>> hard_threshold(np.array([3.0, 1.0, 2.0]), 2)
    array([3., 0., 2.])
    >>> hard_threshold(np.array([1.0, 1.0, 1.0]), 1)
    array([1., 0., 0.])
    """
    v = np.asarray(v)
    if not 0 <= S <= v.size:
        raise ParameterOutOfRange(f"S must lie in [0, {v.size}], got {S}")
    out = np.zeros_like(v)
    keep = _stable_top(np.abs(v), S)
    out[keep] = v[keep]
    return out


def block_threshold(coeffs: np.ndarray, block_size: int, K: int) -> tuple[BlockSupport, np.ndarray]:
    """Keep the ``K`` blocks of largest energy (exact block projection in coefficient space)."""
    blocks = np.asarray(coeffs).reshape(-1, block_size)
    energy = np.einsum("ij,ij->i", blocks.conj(), blocks).real
    support = BlockSupport.of(_stable_top(energy, K))
    out = np.zeros_like(blocks)
    idx = list(support)
    out[idx] = blocks[idx]
    return support, out.reshape(-1)


def _block_columns(support, block_size: int) -> np.ndarray:
    idx = np.asarray(list(support), dtype=int)
    return (idx[:, None] * block_size + np.arange(block_size)[None, :]).reshape(-1)


# ---------------------------------------------------------------- least squares


def tikhonov_ls(G: np.ndarray, y: np.ndarray, gamma: float | None = None, rcond: float = 1e-12) -> np.ndarray:
    """Minimize ``||y - G c||`` subject to ``||c|| <= gamma``.

    The unconstrained minimum-norm solution is returned when it fits the
    budget (or ``gamma`` is ``None``/``inf``).  Otherwise the constraint is
    active and ``c = (G^H G + lam I)^{-1} G^H y`` with the multiplier ``lam``
    found by a bracketing root search on ``||c(lam)|| = gamma``.
    """
    if G.shape[1] == 0:
        return np.zeros(0, dtype=complex)
    P, s, Qh = robust_svd(G)
    b = P.conj().T @ y
    keep = s > rcond * s[0] if s.size and s[0] > 0 else np.zeros(s.shape, dtype=bool)
    c0 = np.zeros_like(b)
    c0[keep] = b[keep] / s[keep]
    if gamma is None or not np.isfinite(gamma) or np.linalg.norm(c0) <= gamma:
        return Qh.conj().T @ c0
    pos = s > 0
    sb = s[pos] * np.abs(b[pos])

    def excess(lam):
        return float(np.linalg.norm(sb / (s[pos] ** 2 + lam))) - gamma

    hi = float(np.linalg.norm(sb)) / gamma
    try:
        lam = scipy.optimize.brentq(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise RootFindFailure(f"multiplier search failed: {exc}") from exc
    c = np.zeros_like(b)
    c[pos] = s[pos] * b[pos] / (s[pos] ** 2 + lam)
    return Qh.conj().T @ c


def constrained_ls(
    A,
    d: MultibandDictionary,
    support,
    y: np.ndarray,
    gamma: float | None,
    svd_tol: float = DEFAULT_SVD_TOL,
) -> np.ndarray:
    """Best fit ``z`` in the range of ``Psi_I`` with ``||z|| <= gamma``.

    Works in the coordinates of an orthonormal reduced basis ``U`` of
    ``range(Psi_I)``, where ``||z|| = ||c||``.
    """
    if gamma is not None and not gamma > 0:
        raise ParameterOutOfRange("gamma must be positive")
    from .dictionary import reduced_basis

    idx = list(support)
    if not idx:
        raise EmptySupport("least squares over an empty support")
    A = _as_operator(A)
    U = reduced_basis(d, idx, svd_tol)
    c = tikhonov_ls(A.apply(U), np.asarray(y), gamma)
    return U @ c


def estimate_gamma(A, y: np.ndarray, iterations: int = 20) -> float:
    """Norm budget ``1.1 ||y|| / sigma_min(A)`` with ``sigma_min`` from power iterations.

    A wide operator (``M < N``) has ``sigma_min = 0`` and the budget is
    infinite.  Otherwise ``sigma_max^2`` comes from power iteration on
    ``A^H A`` and ``sigma_min^2`` from power iteration on the shifted operator
    ``sigma_max^2 I - A^H A``.
    """
    A = _as_operator(A)
    if A.M < A.N:
        return np.inf
    rng = stream(0, 9)
    AAh = lambda v: A.adjoint(A.apply(v))  # noqa: E731
    v = rng.standard_normal(A.N)
    top = 0.0
    for _ in range(iterations):
        w = AAh(v)
        top = float(np.linalg.norm(w))
        v = w / top
    v = rng.standard_normal(A.N)
    shifted = 0.0
    for _ in range(iterations):
        w = top * v - AAh(v)
        shifted = float(np.vdot(v, w).real)
        v = w / np.linalg.norm(w)
    smin2 = top - shifted
    if not smin2 > 0:
        return np.inf
    return 1.1 * float(np.linalg.norm(y)) / np.sqrt(smin2)


# ---------------------------------------------------------------- projections


def block_project(
    x: np.ndarray, d: MultibandDictionary, K: int, settings: RecoverySettings | None = None
) -> tuple[BlockSupport, np.ndarray]:
    """Greedy (block-OMP) approximation of the best ``K``-block projection.

    Each round picks the block whose coefficients ``Psi_i^H r`` carry the most
    energy, appends an orthonormal basis of its part orthogonal to the blocks
    already chosen, and re-projects ``x``.  Exactly ``K`` blocks are returned;
    once the residual vanishes the remaining rounds take the next-best blocks
    of the first-round ranking.
    """
    svd_tol = (settings or RecoverySettings()).svd_tol
    if not 0 <= K <= d.J:
        raise ParameterOutOfRange(f"K must lie in [0, {d.J}], got {K}")
    x = np.asarray(x, dtype=complex)
    if x.shape != (d.N,):
        raise DimensionMismatch(f"expected length {d.N}, got shape {x.shape}")
    if K == 0:
        return BlockSupport(), np.zeros_like(x)
    x_norm = float(np.linalg.norm(x))
    U = np.zeros((d.N, 0), dtype=complex)
    chosen: list[int] = []
    r = x
    first_rank = None
    for _ in range(K):
        energy = d.block_energies(r)
        if first_rank is None:
            first_rank = np.argsort(-energy, kind="stable")
        if float(np.linalg.norm(r)) <= 1e-14 * x_norm or x_norm == 0:
            b = next(int(i) for i in first_rank if i not in chosen)
        else:
            energy[chosen] = -np.inf
            b = int(np.argmax(energy))
        chosen.append(b)
        B = d.block(b)
        if U.shape[1]:
            B = B - U @ (U.conj().T @ B)
            B = B - U @ (U.conj().T @ B)
        Ub, sb, _ = robust_svd(B)
        U = np.hstack([U, Ub[:, sb > svd_tol]])
        r = x - U @ (U.conj().T @ x)
    return BlockSupport.of(chosen), x - r


# ---------------------------------------------------------------- solvers


def _check_y(A: MeasurementOperator, y) -> np.ndarray:
    y = np.asarray(y, dtype=complex)
    if y.shape != (A.M,):
        raise DimensionMismatch(f"y must have length {A.M}, got shape {y.shape}")
    return y


def _zero_report(N: int, D: int | None, support) -> RecoveryReport:
    return RecoveryReport(
        np.zeros(N, dtype=complex),
        None if D is None else np.zeros(D, dtype=complex),
        support,
        1,
        np.zeros(2),
        True,
        "zero-measurements",
    )


def _run(progress: _Progress, step: Callable, state0):
    """Drive ``step(state) -> (state, residual_vector)`` until the stop rule fires."""
    state = state0
    while True:
        state, r = step(state)
        progress.last_state = state
        if progress.update(state, progress.relative(r)):
            return progress.final_state()


def iht(A, basis, y, S: int, mode: str = "signal", settings: RecoverySettings | None = None) -> RecoveryReport:
    """Iterative hard thresholding.

    Coefficient mode iterates ``a <- H(a + mu (A Psi)^H (y - A Psi a), S)``;
    signal mode iterates ``x <- Psi H(Psi^H (x + mu A^H (y - A x)), S)``.
    """
    settings = settings or RecoverySettings()
    A = _as_operator(A)
    y = _check_y(A, y)
    B = _Basis(basis, A.N)
    if not 0 <= S <= B.D:
        raise ParameterOutOfRange(f"S must lie in [0, {B.D}]")
    if mode not in ("signal", "coefficient"):
        raise ParameterOutOfRange(f"unknown mode {mode!r}")
    if not np.any(y):
        return _zero_report(A.N, B.D if mode == "coefficient" else None, ())
    mu = settings.mu
    progress = _Progress(y, settings)
    if mode == "coefficient":
        At = A.apply(B.dense())

        def step(a):
            a = hard_threshold(a + mu * (At.conj().T @ (y - At @ a)), S)
            return a, y - At @ a

        a = _run(progress, step, np.zeros(B.D, dtype=complex))
        x = B.apply(a)
        support = tuple(int(i) for i in np.flatnonzero(a))
    else:

        def step(state):
            x, _ = state
            a = hard_threshold(B.adjoint(x + mu * A.adjoint(y - A.apply(x))), S)
            x = B.apply(a)
            return (x, a), y - A.apply(x)

        x, a = _run(progress, step, (np.zeros(A.N, dtype=complex), np.zeros(B.D, dtype=complex)))
        support = tuple(int(i) for i in np.flatnonzero(a))
        a = None
    return RecoveryReport(x, a, support, progress.iterations, progress.history_array(), progress.converged, progress.reason)


def _lstsq(G: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(G, y, rcond=None)[0]


def cosamp(A, basis, y, S: int, mode: str = "signal", settings: RecoverySettings | None = None) -> RecoveryReport:
    """Compressive sampling matching pursuit.

    Each iteration identifies the ``2S`` largest proxy coefficients, merges
    them with the current support, fits by least squares, prunes to ``S``
    and re-fits on the pruned support.  Signal mode works with ``x`` and the
    basis ``Psi`` (proxy and pruning through ``Psi^H``); coefficient mode runs
    the same steps on ``A Psi`` with an identity basis.
    """
    settings = settings or RecoverySettings()
    A = _as_operator(A)
    y = _check_y(A, y)
    B = _Basis(basis, A.N)
    if S < 1:
        raise ParameterOutOfRange("S must be at least 1")
    if A.M < 3 * S:
        raise ParameterViolation(f"CoSaMP needs M >= 3S, got M={A.M}, S={S}")
    if mode not in ("signal", "coefficient"):
        raise ParameterOutOfRange(f"unknown mode {mode!r}")
    if not np.any(y):
        return _zero_report(A.N, B.D if mode == "coefficient" else None, ())
    progress = _Progress(y, settings)
    two_s = min(2 * S, B.D)

    if mode == "coefficient":
        At = A.apply(B.dense())

        def step(state):
            a, supp = state
            proxy = At.conj().T @ (y - At @ a)
            merged = np.union1d(_stable_top(np.abs(proxy), two_s), supp)
            b = np.zeros(B.D, dtype=complex)
            b[merged] = _lstsq(At[:, merged], y)
            keep = np.sort(_stable_top(np.abs(b), S))
            a = np.zeros(B.D, dtype=complex)
            a[keep] = _lstsq(At[:, keep], y)
            return (a, keep), y - At @ a

        a, supp = _run(progress, step, (np.zeros(B.D, dtype=complex), np.zeros(0, dtype=int)))
        x = B.apply(a)
    else:

        def step(state):
            x, supp = state
            proxy = B.adjoint(A.adjoint(y - A.apply(x)))
            current = _stable_top(np.abs(B.adjoint(x)), S) if supp.size else supp
            merged = np.union1d(_stable_top(np.abs(proxy), two_s), current)
            z = B.columns(merged) @ _lstsq(A.apply(B.columns(merged)), y)
            keep = np.sort(_stable_top(np.abs(B.adjoint(z)), S))
            cols = B.columns(keep)
            x = cols @ _lstsq(A.apply(cols), y)
            return (x, keep), y - A.apply(x)

        x, supp = _run(progress, step, (np.zeros(A.N, dtype=complex), np.zeros(0, dtype=int)))
        a = None
    support = tuple(int(i) for i in np.sort(supp))
    return RecoveryReport(x, a, support, progress.iterations, progress.history_array(), progress.converged, progress.reason)


def bbcosamp(
    A,
    d: MultibandDictionary | None,
    y,
    K: int,
    mode: str = "signal",
    settings: RecoverySettings | None = None,
    *,
    block_size: int | None = None,
) -> RecoveryReport:
    """Block-based CoSaMP.

    Signal mode: proxy ``h = A^H r``; identify ``2K`` blocks with
    ``block_project(h, 2K)``; merge with the current support; fit with
    ``constrained_ls``; prune with ``block_project(., K)`` and re-fit on the
    pruned support.

    Coefficient mode runs the same iteration on ``A Psi`` with an identity
    basis, where identification and pruning are exact block-energy
    thresholding of the coefficient vector.  Passing ``d=None`` with
    ``block_size`` recovers block-sparse vectors in the canonical basis.

    ``settings.gamma`` bounds ``||x||`` (``||alpha||`` in coefficient mode);
    when unset it is estimated from ``y`` with ``estimate_gamma``.
    """
    settings = settings or RecoverySettings()
    A = _as_operator(A)
    y = _check_y(A, y)
    if K < 1:
        raise ParameterOutOfRange("K must be at least 1")
    if mode not in ("signal", "coefficient"):
        raise ParameterOutOfRange(f"unknown mode {mode!r}")
    if d is None:
        if block_size is None or A.N % block_size:
            raise ParameterOutOfRange("identity basis needs a block_size dividing N")
        J, k = A.N // block_size, block_size
        mode = "coefficient"
    else:
        if d.N != A.N:
            raise DimensionMismatch(f"dictionary has {d.N} rows, operator has {A.N} columns")
        J, k = d.J, d.k
    if K > J:
        raise ParameterOutOfRange(f"K must not exceed J={J}")
    D = J * k
    if not np.any(y):
        return _zero_report(A.N, D if mode == "coefficient" else None, BlockSupport())
    gamma = settings.gamma if settings.gamma is not None else estimate_gamma(A, y)
    progress = _Progress(y, settings)
    two_k = min(2 * K, J)

    if mode == "coefficient":
        At = A.to_dense() if d is None else A.apply(d.dense)

        def step(state):
            a, supp = state
            proxy = At.conj().T @ (y - At @ a)
            omega, _ = block_threshold(proxy, k, two_k)
            cols = _block_columns(omega.union(supp), k)
            b = np.zeros(D, dtype=complex)
            b[cols] = tikhonov_ls(At[:, cols], y, gamma)
            supp, _ = block_threshold(b, k, K)
            cols = _block_columns(supp, k)
            a = np.zeros(D, dtype=complex)
            a[cols] = tikhonov_ls(At[:, cols], y, gamma)
            return (a, supp), y - At @ a

        a, supp = _run(progress, step, (np.zeros(D, dtype=complex), BlockSupport()))
        x = a if d is None else d.apply(a)
    else:

        def step(state):
            x, supp = state
            omega, _ = block_project(A.adjoint(y - A.apply(x)), d, two_k, settings)
            z = constrained_ls(A, d, omega.union(supp), y, gamma, settings.svd_tol)
            supp, _ = block_project(z, d, K, settings)
            x = constrained_ls(A, d, supp, y, gamma, settings.svd_tol)
            return (x, supp), y - A.apply(x)

        x, supp = _run(progress, step, (np.zeros(A.N, dtype=complex), BlockSupport()))
        a = None
    return RecoveryReport(x, a, supp, progress.iterations, progress.history_array(), progress.converged, progress.reason)


def block_iht(A, d: MultibandDictionary, y, K: int, settings: RecoverySettings | None = None) -> RecoveryReport:
    """Block iterative hard thresholding ``x <- P(x + mu A^H (y - A x), K)``."""
    settings = settings or RecoverySettings()
    A = _as_operator(A)
    y = _check_y(A, y)
    if d.N != A.N:
        raise DimensionMismatch(f"dictionary has {d.N} rows, operator has {A.N} columns")
    if not 1 <= K <= d.J:
        raise ParameterOutOfRange(f"K must lie in [1, {d.J}]")
    if not np.any(y):
        return _zero_report(A.N, None, BlockSupport())
    mu = settings.mu
    progress = _Progress(y, settings)

    def step(state):
        x, _ = state
        supp, x = block_project(x + mu * A.adjoint(y - A.apply(x)), d, K, settings)
        return (x, supp), y - A.apply(x)

    x, supp = _run(progress, step, (np.zeros(A.N, dtype=complex), BlockSupport()))
    return RecoveryReport(x, None, supp, progress.iterations, progress.history_array(), progress.converged, progress.reason)
