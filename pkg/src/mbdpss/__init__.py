"""Multiband modulated DPSS dictionaries and block-sparse recovery.

Submodules
----------
slepian     DPSS vectors and eigenvalues.
dictionary  Multiband dictionaries, coherence and Gram diagnostics.
sensing     Random measurement operators.
signals     Test signals and DTFT utilities.
recovery    Thresholding, IHT, CoSaMP, block-OMP projection, block IHT, BBCoSaMP.
harness     Metrics, sweeps, approximation checks and experiment presets.
"""

from .dictionary import (
    BandGrid,
    BlockSupport,
    MultibandDictionary,
    build_dft_dictionary,
    build_dictionary,
    dict_adjoint,
    dict_apply,
    gram_singular_extremes,
    max_cross_band_coherence,
    modulation_phase,
    reduced_basis,
)
from .errors import (
    DimensionMismatch,
    DivisibilityViolation,
    EigensolverFailure,
    EmptySupport,
    MbdpssError,
    ParameterOutOfRange,
    ParameterViolation,
    RootFindFailure,
    ZeroSignal,
    ZeroTruth,
)
from .recovery import (
    RecoveryReport,
    RecoverySettings,
    bbcosamp,
    block_iht,
    block_project,
    constrained_ls,
    cosamp,
    hard_threshold,
    iht,
)
from .sensing import MeasurementOperator, concentration_probe, make_operator, op_adjoint, op_apply
from .signals import (
    MultibandSpec,
    add_noise_for_msnr,
    bandpass_process_sample,
    dtft_grid,
    multiband_process_sample,
    sampled_exponential,
    synth_multiband,
)
from .slepian import DpssBasis, ProlateParams, build_dpss, concentration_report, eigenvalue_tail_sum, prolate_matrix

__version__ = "0.1.0"
