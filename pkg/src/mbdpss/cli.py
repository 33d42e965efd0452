"""Command-line entry point (``mbdpss``)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._rng import complex_normal, stream
from .dictionary import build_dft_dictionary, build_dictionary, gram_singular_extremes, max_cross_band_coherence
from .harness.figures import FIGURES, SCALES, run_figure
from .harness.metrics import snr_db
from .io import (
    read_complex_csv,
    read_operator_spec,
    write_complex_csv,
    write_operator_spec,
    write_slep,
)
from .recovery import RecoverySettings, bbcosamp, block_iht, cosamp, iht
from .sensing import KINDS, concentration_probe, make_operator
from .signals import MultibandSpec, synth_multiband
from .slepian import ProlateParams, build_dpss


def _parse_fraction(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _cmd_dpss(args) -> int:
    basis = build_dpss(ProlateParams(args.n, _parse_fraction(args.w)), args.k)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out.with_suffix(".csv"), "w") as fh:
        fh.write("index,lambda\n")
        for i, lam in enumerate(basis.eigenvalues):
            fh.write(f"{i},{float(lam)!r}\n")
    write_slep(out.with_suffix(".slep"), basis.vectors)
    print(json.dumps({"eigenvalues": str(out.with_suffix(".csv")), "vectors": str(out.with_suffix(".slep"))}))
    return 0


def _cmd_dict(args) -> int:
    d = build_dictionary(args.n, args.j, args.k)
    info = {"N": d.N, "J": d.J, "k": d.k, "D": d.D, "W": d.W}
    if args.diagnostics:
        norms = np.linalg.norm(d.dense, axis=0)
        smin, smax = gram_singular_extremes(d)
        info.update(
            unit_norm_max_dev=float(np.abs(norms - 1).max()),
            cross_band_coherence=max_cross_band_coherence(d),
            sigma_min=smin,
            sigma_max=smax,
        )
    print(json.dumps(info))
    return 0


def _cmd_sense(args) -> int:
    fractional = args.kind == "random-demodulator" and args.n % args.m != 0 and args.fractional
    op = make_operator(args.kind, args.m, args.n, args.seed, fractional=fractional)
    info = {"kind": op.kind, "M": op.M, "N": op.N, "seed": args.seed}
    if args.save:
        write_operator_spec(args.save, op, fractional)
        info["saved"] = args.save
    if args.probe:
        eta_text, trials_text = args.probe.split(",")
        eta, trials = float(eta_text), int(trials_text)
        x = complex_normal(stream(args.seed, 7), args.n)

        def factory(s):
            return make_operator(args.kind, args.m, args.n, s, fractional=fractional)

        info.update(eta=eta, trials=trials, failure_rate=concentration_probe(factory, x, trials, eta, args.seed))
    print(json.dumps(info))
    return 0


def _cmd_synth(args) -> int:
    x, support = synth_multiband(args.n, MultibandSpec(args.j, args.k_bands, args.tones, args.seed))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_complex_csv(out.with_suffix(".csv"), x)
    support_path = out.with_suffix(".support.json")
    support_path.write_text(json.dumps({"J": args.j, "K": args.k_bands, "support": list(support.indices)}))
    print(json.dumps({"samples": str(out.with_suffix(".csv")), "support": str(support_path)}))
    return 0


def _cmd_recover(args) -> int:
    A = read_operator_spec(args.op)
    y = read_complex_csv(args.input)
    truth = read_complex_csv(args.truth) if args.truth else None
    gamma = args.gamma
    if gamma is None and truth is not None:
        gamma = 1.1 * float(np.linalg.norm(truth))
    settings = RecoverySettings(max_iterations=args.max_iterations, residual_tol=args.residual_tol, mu=args.mu, gamma=gamma)
    mode = "coefficient" if args.mode == "coeff" else "signal"
    if args.basis == "dft":
        basis = build_dft_dictionary(A.N)
    elif args.basis == "identity":
        basis = None
    else:
        basis = build_dictionary(A.N, args.j, args.k_per_band)
    if args.algo in ("bbcosamp", "block-iht") and args.basis != "dpss":
        raise SystemExit("block solvers need the dpss basis")
    S = args.sparsity or args.blocks * args.k_per_band
    if args.algo == "bbcosamp":
        report = bbcosamp(A, basis, y, args.blocks, mode, settings)
    elif args.algo == "block-iht":
        report = block_iht(A, basis, y, args.blocks, settings)
    elif args.algo == "cosamp":
        report = cosamp(A, basis, y, S, mode, settings)
    else:
        report = iht(A, basis, y, S, mode, settings)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    est_path = out.with_suffix(".estimate.csv")
    write_complex_csv(est_path, report.estimate_x)
    support = report.support.indices if hasattr(report.support, "indices") else report.support
    payload = {
        "algorithm": args.algo,
        "mode": mode,
        "estimate": str(est_path),
        "support": [int(i) for i in support],
        "iterations": report.iterations,
        "residual_history": [float(r) for r in report.residual_history],
        "converged": report.converged,
        "stop_reason": report.stop_reason,
    }
    if truth is not None:
        payload["snr_db"] = snr_db(truth, report.estimate_x)
    out.write_text(json.dumps(payload, indent=2))
    summary = {"iterations": report.iterations, "converged": report.converged}
    if "snr_db" in payload:
        summary["snr_db"] = payload["snr_db"]
    print(json.dumps(summary))
    return 0


def _cmd_experiment(args) -> int:
    def progress(msg):
        print(msg, file=sys.stderr, flush=True)

    run_figure(args.fig, args.out, args.scale, args.trials, args.seed, args.k_ceiling, progress)
    print(json.dumps({"figure": args.fig, "out": args.out}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mbdpss", description="Multiband DPSS dictionaries and block-sparse recovery.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dpss", help="compute DPSS vectors and eigenvalues")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--w", required=True, help="half-bandwidth, e.g. 0.25 or 1/128")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", required=True, help="output path; writes <out>.csv and <out>.slep")
    s.set_defaults(func=_cmd_dpss)

    s = sub.add_parser("dict", help="build a multiband dictionary")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--diagnostics", action="store_true")
    s.set_defaults(func=_cmd_dict)

    s = sub.add_parser("sense", help="draw a measurement operator")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--probe", help="eta,trials for the concentration probe")
    s.add_argument("--save", help="write the operator description (JSON) for use with recover --op")
    s.add_argument("--fractional", action="store_true", help="allow demodulator windows when M does not divide N")
    s.set_defaults(func=_cmd_sense)

    s = sub.add_parser("synth", help="draw a multitone multiband signal")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--k-bands", type=int, required=True)
    s.add_argument("--tones", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="writes <out>.csv and <out>.support.json")
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("recover", help="recover a signal from measurements")
    s.add_argument("--algo", choices=("cosamp", "bbcosamp", "iht", "block-iht"), required=True)
    s.add_argument("--mode", choices=("signal", "coeff"), default="signal")
    s.add_argument("--basis", choices=("dpss", "dft", "identity"), default="dpss")
    s.add_argument("--j", type=int, default=64, help="number of bands of the dpss basis")
    s.add_argument("--k-per-band", type=int, default=16)
    s.add_argument("--blocks", type=int, default=5, help="number of occupied bands K")
    s.add_argument("--sparsity", type=int, help="S for cosamp/iht (default K * k)")
    s.add_argument("--input", required=True, help="measurements CSV (index,re,im)")
    s.add_argument("--op", required=True, help="operator description JSON from sense --save")
    s.add_argument("--truth", help="optional ground-truth CSV for SNR and the norm budget")
    s.add_argument("--gamma", type=float)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--max-iterations", type=int, default=100)
    s.add_argument("--residual-tol", type=float, default=1e-6)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_recover)

    s = sub.add_parser("experiment", help="rerun a recovery experiment")
    s.add_argument("--fig", choices=FIGURES, required=True)
    s.add_argument("--scale", choices=tuple(SCALES), default="desk")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--k-ceiling", type=int, help="override the ceiling of the k schedule")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
