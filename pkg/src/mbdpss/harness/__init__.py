"""Experiment harness: metrics, recovery sweeps, approximation checks and presets."""

from .metrics import (
    SNR_CAP_DB,
    default_k_ceiling,
    machine_floor_k,
    measurements_for_rho,
    percentile_p5,
    rule_of_thumb_k,
    snr_db,
)
from .sweep import (
    ALGORITHMS,
    AXES,
    ExperimentConfig,
    SweepResult,
    TrialRecord,
    oracle_dft_baseline,
    run_sweep,
    run_trial,
)
from .verify import (
    CheckResult,
    KLReport,
    KLScale,
    RipEstimate,
    estimate_block_rip,
    kl_verification_suite,
)

__all__ = [
    "SNR_CAP_DB",
    "default_k_ceiling",
    "machine_floor_k",
    "measurements_for_rho",
    "percentile_p5",
    "rule_of_thumb_k",
    "snr_db",
    "ALGORITHMS",
    "AXES",
    "ExperimentConfig",
    "SweepResult",
    "TrialRecord",
    "oracle_dft_baseline",
    "run_sweep",
    "run_trial",
    "CheckResult",
    "KLReport",
    "KLScale",
    "RipEstimate",
    "estimate_block_rip",
    "kl_verification_suite",
]
