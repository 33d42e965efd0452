"""Experiment presets and their CSV/JSON outputs.

Each figure is a list of named series; a series is an ``ExperimentConfig``
swept along one axis.  ``run_figure`` stores ``sweep.csv``/``trials.csv``
for the first series, ``sweep_<name>.csv``/``trials_<name>.csv`` for every
series, and ``config.json`` with the resolved configurations.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dictionary import build_dictionary
from ..sensing import make_operator
from ..slepian import ProlateParams, build_dpss
from .metrics import default_k_ceiling
from .sweep import ExperimentConfig, SweepResult, run_sweep
from .verify import KLScale, estimate_block_rip, kl_verification_suite

__all__ = ["FIGURES", "SCALES", "Series", "figure_series", "run_figure", "write_sweep", "write_trials"]

FIGURES = ("exp1", "exp2", "exp4", "exp5", "exp6", "kl", "rip")
SCALES = {"desk": (1024, 64), "paper": (4096, 256)}

_K_GRID = (4, 8, 12, 16, 20, 24, 28, 32, 36, 40, 44, 48)
_RHO_GRID = tuple(float(r) for r in np.arange(1.0, 7.01, 0.5))


@dataclass(frozen=True)
class Series:
    name: str
    config: ExperimentConfig
    axis: str


def figure_series(fig: str, scale: str = "desk", trials: int = 50, seed: int = 0, k_ceiling: int | None = None) -> list[Series]:
    """Series that make up figure ``fig`` at the requested scale."""
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}")
    N, J = SCALES[scale]
    base = dict(N=N, J=J, K=5, trials=trials, base_seed=seed, k_ceiling=k_ceiling)
    two_nw = int(round(N / J))
    if fig == "exp1":
        return [
            Series(mode, ExperimentConfig(**base, M=512, mode=mode, grid=_K_GRID), "k")
            for mode in ("signal", "coefficient")
        ]
    if fig == "exp2":
        grid = tuple(k for k in _K_GRID if k >= two_nw // 2)
        return [
            Series(f"msnr{db}", ExperimentConfig(**base, M=512, msnr_db=float(db), grid=grid), "k")
            for db in (20, 40, 60)
        ]
    if fig == "exp4":
        out = []
        for K in (5, 10, 15):
            cfg = dict(base, K=K)
            out.append(Series(f"K{K}", ExperimentConfig(**cfg, grid=_RHO_GRID), "rho"))
        return out
    if fig == "exp5":
        return [
            Series(kind, ExperimentConfig(**base, operator_kind=kind, grid=_RHO_GRID), "rho")
            for kind in ("dense-gaussian", "random-demodulator", "random-sampler")
        ]
    if fig == "exp6":
        common = dict(base, operator_kind="random-demodulator", grid=_RHO_GRID)
        return [
            Series("dpss", ExperimentConfig(**common), "rho"),
            Series("dft", ExperimentConfig(**common, algorithm="dft-cosamp"), "rho"),
        ]
    raise ValueError(f"figure {fig!r} is not a recovery sweep")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_sweep(path: Path, result: SweepResult) -> None:
    with open(path, "w") as fh:
        fh.write("x,snr_p5,snr_median\n")
        for x, p5, med in zip(result.grid, result.snr_p5, result.snr_median):
            fh.write(f"{_fmt(x)},{_fmt(p5)},{_fmt(med)}\n")


def write_trials(path: Path, result: SweepResult) -> None:
    with open(path, "w") as fh:
        fh.write("point,trial,seed,snr,iterations,converged\n")
        for r in result.raw:
            fh.write(f"{r.point},{r.trial},{r.seed},{_fmt(r.snr)},{r.iterations},{str(r.converged).lower()}\n")


def _exp1_extras(out: Path, series: dict[str, SweepResult], N: int, J: int) -> None:
    sig, coef = series["signal"], series["coefficient"]
    W = 0.5 / J
    lam = build_dpss(ProlateParams(N, W), min(N, max(sig.grid) + 1)).eigenvalues
    with open(out / "exp1_extras.csv", "w") as fh:
        fh.write("x,prob_within_3db,first_omitted_eigenvalue\n")
        for point, k in enumerate(sig.grid):
            a, b = sig.snrs(point), coef.snrs(point)
            prob = float(np.mean(np.abs(a - b) <= 3.0))
            fh.write(f"{k},{_fmt(prob)},{_fmt(lam[int(k)])}\n")


def _run_kl(out: Path, scale: str, trials: int, seed: int) -> dict:
    s = KLScale(seed=seed) if scale == "desk" else KLScale(N=256, draws=4000, seed=seed)
    report = kl_verification_suite(s)
    with open(out / "kl.csv", "w") as fh:
        fh.write("name,measured,reference,passed,detail\n")
        for c in report.checks:
            fh.write(f"\"{c.name}\",{_fmt(c.measured)},{_fmt(c.reference)},{str(c.passed).lower()},\"{c.detail}\"\n")
    return {"figure": "kl", "scale": dataclasses.asdict(s), "all_passed": report.all_passed}


def _run_rip(out: Path, scale: str, trials: int, seed: int) -> dict:
    N, J = SCALES[scale]
    K = 5
    k = int(round(N / J))
    d = build_dictionary(N, J, k)
    fractions = (0.125, 0.25, 0.375, 0.5, 0.75, 1.0)
    n_supports = max(trials, 1) * 4
    rows = []
    for point, frac in enumerate(fractions):
        M = int(N * frac)
        A = make_operator("dense-gaussian", M, N, seed + point)
        est = estimate_block_rip(A, d, K, n_supports, seed + point)
        rows.append((M, est.delta_lower, est.supports_tested))
    with open(out / "rip.csv", "w") as fh:
        fh.write("x,delta_lower,supports_tested\n")
        for M, delta, n in rows:
            fh.write(f"{M},{_fmt(delta)},{n}\n")
    return {"figure": "rip", "N": N, "J": J, "K": K, "k": k, "operator_kind": "dense-gaussian", "supports_per_point": n_supports, "base_seed": seed}


def run_figure(
    fig: str,
    out_dir: str | Path,
    scale: str = "desk",
    trials: int = 50,
    seed: int = 0,
    k_ceiling: int | None = None,
    progress=None,
) -> dict[str, SweepResult]:
    """Run figure ``fig`` and write its outputs into ``out_dir``."""
    if fig not in FIGURES:
        raise ValueError(f"unknown figure {fig!r}; expected one of {FIGURES}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fig in ("kl", "rip"):
        cfg = (_run_kl if fig == "kl" else _run_rip)(out, scale, trials, seed)
        (out / "config.json").write_text(json.dumps(cfg, indent=2, default=_json_default))
        return {}
    series = figure_series(fig, scale, trials, seed, k_ceiling)
    results: dict[str, SweepResult] = {}
    for i, s in enumerate(series):
        if progress:
            progress(f"{fig}: series {s.name} ({len(s.config.grid)} points x {s.config.trials} trials)")
        res = run_sweep(s.config, s.axis)
        results[s.name] = res
        write_sweep(out / f"sweep_{s.name}.csv", res)
        write_trials(out / f"trials_{s.name}.csv", res)
        if i == 0:
            write_sweep(out / "sweep.csv", res)
            write_trials(out / "trials.csv", res)
    N, J = SCALES[scale]
    if fig == "exp1":
        _exp1_extras(out, results, N, J)
    resolved = {
        "figure": fig,
        "scale": scale,
        "primary_series": series[0].name,
        "k_ceiling": k_ceiling if k_ceiling is not None else default_k_ceiling(N, 0.5 / J),
        "series": [dict(name=s.name, axis=s.axis, config=s.config.to_dict()) for s in series],
    }
    (out / "config.json").write_text(json.dumps(resolved, indent=2, default=_json_default))
    return results


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        v = float(o)
        return v if math.isfinite(v) else str(v)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")
