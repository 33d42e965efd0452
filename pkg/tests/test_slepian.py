import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbdpss.errors import ParameterOutOfRange
from mbdpss.slepian import (
    ProlateParams,
    build_dpss,
    concentration_report,
    eigenvalue_tail_sum,
    normalize_signs,
    prolate_matrix,
)


def dense_oracle(N, W):
    """Full eigendecomposition of the prolate matrix built entry by entry."""
    B = np.empty((N, N))
    for m in range(N):
        for n in range(N):
            t = 2 * W * (m - n)
            B[m, n] = 2 * W * (1.0 if t == 0 else math.sin(math.pi * t) / (math.pi * t))
    w, v = np.linalg.eigh(B)
    return B, w[::-1], normalize_signs(v[:, ::-1])


# ------------------------------------------------------------------ params


@pytest.mark.parametrize("N, W", [(0, 0.1), (-3, 0.1), (8, 0.0), (8, -0.1), (8, 0.51), (8, float("nan"))])
def test_params_reject_out_of_range(N, W):
    with pytest.raises(ParameterOutOfRange):
        ProlateParams(N, W)


def test_params_two_nw():
    assert ProlateParams(4096, 1 / 512).two_nw == 16.0


# ------------------------------------------------------------------ prolate_matrix


def test_prolate_matrix_single_entry():
    np.testing.assert_array_equal(prolate_matrix(ProlateParams(1, 0.25)), [[0.5]])


def test_prolate_matrix_two_by_two():
    expected = np.array([[0.5, 1 / math.pi], [1 / math.pi, 0.5]])
    np.testing.assert_allclose(prolate_matrix(ProlateParams(2, 0.25)), expected, rtol=0, atol=1e-15)


def test_prolate_matrix_trace_equals_two_nw():
    assert np.trace(prolate_matrix(ProlateParams(1024, 0.25))) == pytest.approx(512.0, rel=1e-14)


def test_prolate_matrix_symmetric_positive_semidefinite():
    B = prolate_matrix(ProlateParams(40, 0.2))
    np.testing.assert_array_equal(B, B.T)
    np.testing.assert_allclose(np.diag(B), 0.4)
    # the tail eigenvalues sit at roundoff level
    assert np.linalg.eigvalsh(B).min() > -1e-12


def test_prolate_matrix_rejects_bad_params():
    with pytest.raises(ParameterOutOfRange):
        prolate_matrix((4, 0.7))


# ------------------------------------------------------------------ build_dpss


def test_build_dpss_one_by_one():
    b = build_dpss(ProlateParams(1, 0.25), 1)
    np.testing.assert_array_equal(b.vectors, [[1.0]])
    np.testing.assert_allclose(b.eigenvalues, [0.5])


def test_build_dpss_matches_dense_oracle_n8():
    _, w, v = dense_oracle(8, 0.25)
    b = build_dpss(ProlateParams(8, 0.25), 8)
    np.testing.assert_allclose(b.eigenvalues, w, atol=1e-10)
    np.testing.assert_allclose(b.vectors, v, atol=1e-10)


@pytest.mark.parametrize("N, W", [(16, 0.1), (33, 0.23), (64, 0.05), (64, 0.4)])
def test_oracle_equivalence_small_n(N, W):
    """Agreement with a dense eigensolve wherever that solve is well posed.

    Eigenvectors are compared only where the eigenvalue gap to both
    neighbours exceeds 1e-4 (the dense solver's vectors are otherwise
    arbitrary rotations within a near-degenerate cluster).
    """
    B, w, v = dense_oracle(N, W)
    b = build_dpss(ProlateParams(N, W), N)
    np.testing.assert_allclose(b.eigenvalues, np.clip(w, 1e-18, 1), atol=1e-10)
    gaps = np.minimum(np.r_[np.inf, -np.diff(w)], np.r_[-np.diff(w), np.inf])
    sep = gaps > 1e-4
    assert sep.sum() >= 3
    np.testing.assert_allclose(b.vectors[:, sep], v[:, sep], atol=1e-10)


def test_concentration_counts_match_dense_oracle_n1024():
    p = ProlateParams(1024, 0.25)
    lam = build_dpss(p, 1024).eigenvalues
    w = np.linalg.eigvalsh(prolate_matrix(p))
    for t in (1e-9, 1e-6, 1e-3):
        assert np.count_nonzero(lam > 1 - t) == np.count_nonzero(w > 1 - t)
        assert np.count_nonzero(lam < t) == np.count_nonzero(w < t)


def test_half_band_spectrum_is_symmetric():
    # at W = 1/4 the eigenvalues pair up as lambda and 1 - lambda
    lam = build_dpss(ProlateParams(256, 0.25), 256).eigenvalues
    np.testing.assert_allclose(lam + lam[::-1], 1.0, atol=1e-12)


@pytest.mark.parametrize("k", [0, 9, 2.5])
def test_build_dpss_rejects_bad_k(k):
    with pytest.raises(ParameterOutOfRange):
        build_dpss(ProlateParams(8, 0.25), k)


def test_build_dpss_prefix_consistency():
    full = build_dpss(ProlateParams(300, 0.05), 300)
    part = build_dpss(ProlateParams(300, 0.05), 20)
    np.testing.assert_allclose(part.vectors, full.vectors[:, :20], atol=1e-10)
    np.testing.assert_allclose(part.eigenvalues, full.eigenvalues[:20], atol=1e-13)


def test_basis_is_read_only():
    b = build_dpss(ProlateParams(32, 0.1), 4)
    with pytest.raises(ValueError):
        b.vectors[0, 0] = 1.0


def test_full_band_degenerate_case():
    b = build_dpss(ProlateParams(16, 0.5), 16)
    np.testing.assert_allclose(b.vectors.T @ b.vectors, np.eye(16), atol=1e-12)
    np.testing.assert_allclose(b.eigenvalues, 1.0, atol=1e-15)
    assert np.all(b.eigenvalues < 1.0)


def test_sign_convention_first_tie_positive():
    v = np.array([[-1.0, 0.5], [1.0, -0.5], [0.2, -0.1]])
    out = normalize_signs(v)
    assert out[0, 0] == 1.0 and out[0, 1] == 0.5


def test_sign_convention_applied():
    V = build_dpss(ProlateParams(200, 0.07), 30).vectors
    peak = np.abs(V).max(axis=0)
    first = np.argmax(np.abs(V) >= peak * (1 - 1e-9), axis=0)
    assert np.all(V[first, np.arange(30)] > 0)


# ------------------------------------------------------------------ properties


param_strategy = st.tuples(
    st.integers(min_value=2, max_value=400),
    st.floats(min_value=0.005, max_value=0.495),
)


@given(param_strategy)
def test_property_orthonormal_columns(p):
    N, W = p
    V = build_dpss(ProlateParams(N, W), N).vectors
    np.testing.assert_allclose(V.T @ V, np.eye(N), atol=1e-10)


@given(param_strategy)
def test_property_trace_identity(p):
    N, W = p
    lam = build_dpss(ProlateParams(N, W), N).eigenvalues
    assert abs(lam.sum() - 2 * N * W) <= 1e-8 * 2 * N * W


@given(param_strategy, st.integers(min_value=1, max_value=40))
def test_property_eigen_residual(p, k):
    N, W = p
    k = min(k, N)
    b = build_dpss(ProlateParams(N, W), k)
    B = prolate_matrix(ProlateParams(N, W))
    resid = np.linalg.norm(B @ b.vectors - b.vectors * b.eigenvalues, axis=0)
    assert resid.max() <= 1e-8


@given(param_strategy)
def test_property_eigenvalues_in_open_interval_and_decreasing(p):
    N, W = p
    lam = build_dpss(ProlateParams(N, W), N).eigenvalues
    assert np.all((lam > 0) & (lam < 1))
    # strict ordering is resolvable only away from the roundoff floors at 0 and 1
    resolvable = (lam > 1e-13) & (lam < 1 - 1e-13)
    assert np.all(np.diff(lam[resolvable]) < 0)


# ------------------------------------------------------------------ tail sums and concentration


def test_tail_sum_full_prefix_is_zero():
    p = ProlateParams(64, 0.1)
    assert eigenvalue_tail_sum(p, build_dpss(p, 64).eigenvalues) == 0.0


def test_tail_sum_empty_prefix_is_trace():
    p = ProlateParams(64, 0.1)
    assert eigenvalue_tail_sum(p, []) == pytest.approx(12.8)


def test_tail_sum_matches_full_spectrum_oracle():
    N, W, k = 256, 1 / 16, 40
    _, w, _ = dense_oracle(N, W)
    p = ProlateParams(N, W)
    got = eigenvalue_tail_sum(p, build_dpss(p, k).eigenvalues)
    assert got == pytest.approx(np.sum(w[k:]), abs=1e-8)


def test_tail_sum_nonnegative():
    p = ProlateParams(128, 0.25)
    lam = build_dpss(p, 128).eigenvalues
    assert eigenvalue_tail_sum(p, lam[:127]) >= 0.0


def test_concentration_report_n1024():
    near_one, near_zero, width = concentration_report(ProlateParams(1024, 0.25), 1e-9)
    assert near_one >= 0.9 * 512 and near_zero >= 0.9 * 512
    assert near_one + near_zero + width == 1024


def test_concentration_report_single_sample():
    assert concentration_report(ProlateParams(1, 0.25), 0.4) == (0, 0, 1)


def test_concentration_report_transition_width_oracle():
    _, w, _ = dense_oracle(128, 1 / 8)
    t = 1e-6
    expected = 128 - np.count_nonzero(w >= 1 - t) - np.count_nonzero(w <= t)
    assert concentration_report(ProlateParams(128, 1 / 8), t)[2] == expected
    assert expected == 16


def test_concentration_transition_grows_slowly():
    widths = [concentration_report(ProlateParams(N, 1 / 8), 1e-6)[2] for N in (128, 256, 512, 1024)]
    assert widths == sorted(widths)
    # logarithmic growth: doubling N adds a roughly constant number of eigenvalues
    steps = np.diff(widths)
    assert steps.max() <= 6


@pytest.mark.parametrize("t", [0.0, 0.5, -1.0])
def test_concentration_report_rejects_threshold(t):
    with pytest.raises(ParameterOutOfRange):
        concentration_report(ProlateParams(8, 0.1), t)
