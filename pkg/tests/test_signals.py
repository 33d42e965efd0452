import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbdpss.dictionary import BandGrid, BlockSupport, build_dictionary, reduced_basis
from mbdpss.errors import EmptySupport, ParameterOutOfRange, ZeroSignal
from mbdpss.signals import (
    MultibandSpec,
    add_noise_for_msnr,
    bandpass_process_sample,
    dtft_grid,
    multiband_process_sample,
    sampled_exponential,
    synth_multiband,
)


# ------------------------------------------------------------------ exponentials


def test_exponential_zero_frequency():
    np.testing.assert_array_equal(sampled_exponential(5, 0.0), np.ones(5))


def test_exponential_quarter():
    np.testing.assert_allclose(sampled_exponential(4, 0.25), [1, 1j, -1, -1j], atol=1e-15)


@given(st.integers(1, 3000), st.floats(-0.5, 0.4999999))
def test_exponential_energy(N, f):
    assert np.vdot(*(2 * [sampled_exponential(N, f)])).real == pytest.approx(N, rel=1e-12)


def test_exponential_rejects_half():
    with pytest.raises(ParameterOutOfRange):
        sampled_exponential(4, 0.5)


# ------------------------------------------------------------------ multitone synthesis


def test_synth_empty_support():
    x, supp = synth_multiband(64, MultibandSpec(8, 0))
    np.testing.assert_array_equal(x, 0)
    assert len(supp) == 0


def test_synth_reproducible():
    a, sa = synth_multiband(256, MultibandSpec(16, 16, 1, seed=42))
    b, sb = synth_multiband(256, MultibandSpec(16, 16, 1, seed=42))
    assert np.array_equal(a, b) and sa == sb
    assert sa.indices == tuple(range(16))
    c, _ = synth_multiband(256, MultibandSpec(16, 16, 1, seed=43))
    assert not np.array_equal(a, c)


def test_synth_single_tone_per_band_occupies_every_band():
    N, J = 1024, 8
    x, _ = synth_multiband(N, MultibandSpec(J, J, 1, seed=5))
    G = 16 * N
    X = np.abs(dtft_grid(x, G)) ** 2
    f = -0.5 + np.arange(G) / G
    band = np.floor((f + 0.5) * J).astype(int)
    shares = np.array([X[band == i].sum() for i in range(J)]) / X.sum()
    assert np.all(shares > 1e-4)
    # one tone per band: the in-band DTFT is a single narrow peak
    for i in range(J):
        Xi = X[band == i]
        assert np.count_nonzero(Xi > 0.5 * Xi.max()) <= 16


def test_synth_supplied_support():
    supp = BlockSupport.of([1, 4])
    x, s = synth_multiband(128, MultibandSpec(8, 2, 3, seed=0, support=supp))
    assert s == supp
    X = np.abs(dtft_grid(x, 8 * 128)) ** 2
    f = -0.5 + np.arange(8 * 128) / (8 * 128)
    band = np.floor((f + 0.5) * 8).astype(int)
    share = X[np.isin(band, [0, 1, 2, 3, 4, 5])].sum() / X.sum()
    assert share > 0.95


def test_synth_energy_containment_full_scale():
    N, J, K = 4096, 256, 5
    x, supp = synth_multiband(N, MultibandSpec(J, K, 50, seed=2024))
    G = 8 * N
    X = np.abs(dtft_grid(x, G)) ** 2
    f = -0.5 + np.arange(G) / G
    band = np.minimum(np.floor((f + 0.5) * J).astype(int), J - 1)
    allowed = set()
    for b in supp:
        allowed |= {(b - 1) % J, b, (b + 1) % J}
    share = X[np.isin(band, sorted(allowed))].sum() / X.sum()
    assert share >= 0.99


def test_spec_validation():
    with pytest.raises(ParameterOutOfRange):
        MultibandSpec(4, 5)
    with pytest.raises(ParameterOutOfRange):
        MultibandSpec(4, 1, tones_per_band=0)
    with pytest.raises(ParameterOutOfRange):
        MultibandSpec(4, 2, support=BlockSupport.of([1]))


# ------------------------------------------------------------------ processes


def test_bandpass_process_energy():
    x = bandpass_process_sample(128, 0.1, 1 / 16, seed=0, draws=2000)
    ratio = np.mean(np.sum(np.abs(x) ** 2, axis=1)) / 128
    assert 0.95 <= ratio <= 1.05


def test_bandpass_process_autocorrelation():
    N, fc, W = 64, 0.1, 1 / 16
    x = bandpass_process_sample(N, fc, W, seed=1, draws=4000)
    for lag in range(5):
        prod = x[:, lag] * x[:, 0].conj()
        expected = np.exp(2j * np.pi * lag * fc) * np.sinc(2 * W * lag)
        se = np.sqrt(np.var(prod.real, ddof=1) + np.var(prod.imag, ddof=1)) / np.sqrt(prod.size)
        assert abs(prod.mean() - expected) <= 4 * se


def test_bandpass_white_limit():
    x = bandpass_process_sample(32, 0.0, 0.5, seed=2, draws=4000)
    C = x.T @ x.conj() / x.shape[0]
    off = C - np.diag(np.diag(C))
    assert np.abs(off).max() < 0.1
    np.testing.assert_allclose(np.diag(C).real, 1.0, atol=0.1)


def test_bandpass_first_row_matches_single_draw():
    single = bandpass_process_sample(64, 0.2, 0.05, seed=7)
    batch = bandpass_process_sample(64, 0.2, 0.05, seed=7, draws=10)
    # gemv and gemm paths may differ in the last bit
    np.testing.assert_allclose(single, batch[0], rtol=0, atol=1e-13)


def test_bandpass_rejects_band_outside():
    with pytest.raises(ParameterOutOfRange):
        bandpass_process_sample(64, 0.45, 0.1)


def test_multiband_single_band_reduces():
    grid = BandGrid(8)
    a = multiband_process_sample(64, grid, BlockSupport.of([3]), seed=9)
    b = bandpass_process_sample(64, grid.centers[3], grid.half_width, seed=9)
    np.testing.assert_array_equal(a, b)


def test_multiband_energy_three_bands():
    x = multiband_process_sample(128, BandGrid(8), BlockSupport.of([0, 3, 6]), seed=3, draws=2000)
    ratio = np.mean(np.sum(np.abs(x) ** 2, axis=1)) / 128
    assert 0.95 <= ratio <= 1.05


def test_multiband_band_components_uncorrelated():
    N, J = 128, 4
    d = build_dictionary(N, J, 32)
    x = multiband_process_sample(N, BandGrid(J), BlockSupport.of([0, 2]), seed=4, draws=3000)
    U0, U2 = reduced_basis(d, [0]), reduced_basis(d, [2])
    c0, c2 = x @ U0.conj(), x @ U2.conj()
    cross = np.einsum("ti,tj->ij", c0, c2.conj()) / x.shape[0]
    se = np.sqrt(np.mean(np.abs(c0) ** 2) * np.mean(np.abs(c2) ** 2) / x.shape[0])
    assert np.abs(cross).max() < 5 * se


def test_multiband_empty_support():
    with pytest.raises(EmptySupport):
        multiband_process_sample(32, BandGrid(4), BlockSupport())


# ------------------------------------------------------------------ noise


def test_noise_infinite_msnr_is_copy():
    y = np.arange(4) + 1j
    out = add_noise_for_msnr(y, np.inf)
    np.testing.assert_array_equal(out, y)
    assert out is not y


@pytest.mark.parametrize("db, ratio", [(0.0, 1.0), (60.0, 1e-3), (20.0, 0.1), (-6.0, 10 ** 0.3)])
def test_noise_exact_msnr(db, ratio):
    y = np.random.default_rng(0).standard_normal(50) + 0j
    e = add_noise_for_msnr(y, db, seed=1) - y
    assert np.linalg.norm(e) / np.linalg.norm(y) == pytest.approx(ratio, rel=1e-12)


def test_noise_zero_signal():
    with pytest.raises(ZeroSignal):
        add_noise_for_msnr(np.zeros(4), 20.0)


# ------------------------------------------------------------------ DTFT


def test_dtft_on_grid_exponential():
    N, G = 32, 128
    x = sampled_exponential(N, 0.125)
    X = np.abs(dtft_grid(x, N))
    assert np.count_nonzero(X > 1e-9) == 1
    assert X.max() == pytest.approx(N)
    assert np.argmax(X) == int((0.125 + 0.5) * N)
    # finer grid: peak lands at the same frequency
    assert np.argmax(np.abs(dtft_grid(x, G))) == int((0.125 + 0.5) * G)


def test_dtft_delta_is_flat():
    x = np.zeros(16)
    x[0] = 1
    np.testing.assert_allclose(np.abs(dtft_grid(x, 64)), 1.0)


def test_dtft_matches_direct_sum():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    G = 50
    f = -0.5 + np.arange(G) / G
    direct = np.exp(-2j * np.pi * np.outer(f, np.arange(20))) @ x
    np.testing.assert_allclose(dtft_grid(x, G), direct, atol=1e-10)


@given(st.integers(1, 200), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_property_parseval(N, mult, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    X = dtft_grid(x, mult * N)
    assert np.mean(np.abs(X) ** 2) == pytest.approx(np.vdot(x, x).real, rel=1e-10)


def test_dtft_rejects_short_grid():
    with pytest.raises(ParameterOutOfRange):
        dtft_grid(np.ones(8), 4)
