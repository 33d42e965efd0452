import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbdpss.errors import DimensionMismatch, DivisibilityViolation, ParameterOutOfRange
from mbdpss.sensing import KINDS, MeasurementOperator, concentration_probe, make_operator, op_adjoint, op_apply


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ------------------------------------------------------------------ construction


def test_gaussian_column_norms():
    A = make_operator("dense-gaussian", 512, 4096, seed=1)
    norms2 = np.sum(A.matrix**2, axis=0)
    assert abs(norms2.mean() - 1) < 0.05


def test_gaussian_entry_variance():
    A = make_operator("dense-gaussian", 200, 1000, seed=2)
    assert abs(A.matrix.mean()) < 4 / np.sqrt(200 * 1000 * 200)
    assert A.matrix.var() * 200 == pytest.approx(1.0, rel=0.02)


def test_rademacher_values():
    A = make_operator("dense-rademacher", 16, 64, seed=3)
    np.testing.assert_allclose(np.abs(A.matrix), 1 / 4)


def test_full_sampler_is_identity_permutation():
    A = make_operator("random-sampler", 32, 32, seed=4).to_dense()
    np.testing.assert_array_equal(np.sort(A, axis=0)[-1], np.ones(32))
    assert np.count_nonzero(A) == 32
    np.testing.assert_array_equal(A.sum(axis=0), 1)
    np.testing.assert_array_equal(A.sum(axis=1), 1)


def test_sampler_distinct_indices_and_scale():
    A = make_operator("random-sampler", 30, 120, seed=5)
    assert len(set(A.indices.tolist())) == 30
    D = A.to_dense()
    np.testing.assert_allclose(D[D != 0], 2.0)


def test_demodulator_row_structure():
    A = make_operator("random-demodulator", 4, 8, seed=7)
    D = A.to_dense()
    for r in range(4):
        nz = np.flatnonzero(D[r])
        np.testing.assert_array_equal(nz, [2 * r, 2 * r + 1])
        np.testing.assert_allclose(np.abs(D[r, nz]), 1.0)


def test_demodulator_is_block_sum_of_chips():
    A = make_operator("random-demodulator", 8, 64, seed=9)
    D = A.to_dense()
    blocksum = np.kron(np.eye(8), np.ones((1, 8)))
    np.testing.assert_array_equal(D, blocksum @ np.diag(A.chips))
    assert set(np.unique(A.chips)) <= {-1.0, 1.0}


def test_demodulator_divisibility():
    with pytest.raises(DivisibilityViolation):
        make_operator("random-demodulator", 3, 8)
    A = make_operator("random-demodulator", 3, 8, fractional=True)
    assert A.to_dense().shape == (3, 8)


@pytest.mark.parametrize("M, N", [(0, 8), (9, 8), (-1, 8)])
def test_make_operator_range(M, N):
    with pytest.raises(ParameterOutOfRange):
        make_operator("dense-gaussian", M, N)


def test_make_operator_unknown_kind():
    with pytest.raises(ParameterOutOfRange):
        make_operator("random-filter", 4, 8)


@pytest.mark.parametrize("kind", KINDS)
def test_determinism(kind):
    a = make_operator(kind, 16, 64, seed=123).to_dense()
    b = make_operator(kind, 16, 64, seed=123).to_dense()
    c = make_operator(kind, 16, 64, seed=124).to_dense()
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# ------------------------------------------------------------------ apply / adjoint


@pytest.mark.parametrize("kind", KINDS)
def test_zero_maps_to_zero(kind):
    A = make_operator(kind, 16, 64, seed=0)
    np.testing.assert_array_equal(op_apply(A, np.zeros(64, dtype=complex)), 0)


@pytest.mark.parametrize("kind, M, N, frac", [(k, 16, 64, False) for k in KINDS] + [("random-demodulator", 24, 100, True)])
def test_adjoint_identity(kind, M, N, frac):
    rng = np.random.default_rng(0)
    A = make_operator(kind, M, N, seed=11, fractional=frac)
    x, y = crandn(rng, N), crandn(rng, M)
    lhs = np.vdot(y, op_apply(A, x))
    rhs = np.vdot(op_adjoint(A, y), x)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


@given(st.sampled_from(KINDS), st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_property_adjoint_identity(kind, M, seed):
    N = 2 * M if kind != "random-sampler" else M + seed % 17
    A = make_operator(kind, M, N, seed=seed)
    rng = np.random.default_rng(seed)
    x, y = crandn(rng, N), crandn(rng, M)
    lhs = np.vdot(y, A.apply(x))
    rhs = np.vdot(A.adjoint(y), x)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


@pytest.mark.parametrize("kind", KINDS)
def test_apply_matches_dense(kind):
    rng = np.random.default_rng(1)
    A = make_operator(kind, 16, 64, seed=3)
    D = A.to_dense()
    x = crandn(rng, 64)
    np.testing.assert_allclose(A.apply(x), D @ x, atol=1e-12)
    y = crandn(rng, 16)
    np.testing.assert_allclose(A.adjoint(y), D.T @ y, atol=1e-12)


def test_apply_batched_columns():
    rng = np.random.default_rng(2)
    for kind in KINDS:
        A = make_operator(kind, 8, 32, seed=1)
        X = crandn(rng, 32, 5)
        np.testing.assert_allclose(A.apply_matrix(X), A.to_dense() @ X, atol=1e-12)


def test_dimension_mismatch():
    A = make_operator("random-sampler", 8, 32)
    with pytest.raises(DimensionMismatch):
        A.apply(np.zeros(31))
    with pytest.raises(DimensionMismatch):
        A.adjoint(np.zeros(9))


def test_from_matrix():
    m = np.arange(6.0).reshape(2, 3)
    A = MeasurementOperator.from_matrix(m)
    np.testing.assert_array_equal(A.apply(np.ones(3)), [3.0, 12.0])


# ------------------------------------------------------------------ energy and concentration


@pytest.mark.parametrize(
    "kind, M, N, frac",
    [(k, 32, 128, False) for k in KINDS] + [("random-demodulator", 48, 128, True)],
)
def test_energy_normalization(kind, M, N, frac):
    rng = np.random.default_rng(5)
    x = crandn(rng, N)
    x2 = float(np.vdot(x, x).real)
    ratios = np.array(
        [np.linalg.norm(make_operator(kind, M, N, seed=s, fractional=frac).apply(x)) ** 2 / x2 for s in range(1000)]
    )
    se = ratios.std(ddof=1) / np.sqrt(ratios.size)
    assert abs(ratios.mean() - 1) <= 3 * se + 1e-12


def test_probe_vacuous_threshold():
    x = np.ones(32)
    assert concentration_probe(lambda s: make_operator("dense-gaussian", 4, 32, s), x, 100, 1e9) == 0.0


@pytest.mark.slow
def test_probe_concentrated_for_many_measurements():
    x = crandn(np.random.default_rng(0), 4096)
    rate = concentration_probe(lambda s: make_operator("dense-gaussian", 512, 4096, s), x, 1000, 0.5)
    assert rate < 0.01


def test_probe_single_measurement_fails_often():
    x = crandn(np.random.default_rng(0), 64)
    rate = concentration_probe(lambda s: make_operator("dense-gaussian", 1, 64, s), x, 400, 0.1)
    # |chi2_2 / 2 - 1| >= 0.1 has probability exp(-0.9) + 1 - exp(-1.1) ~ 0.74 for complex x
    assert rate > 0.5


def test_probe_monotone_in_m():
    x = crandn(np.random.default_rng(1), 256)
    rates = [concentration_probe(lambda s, M=M: make_operator("dense-gaussian", M, 256, s), x, 300, 0.3) for M in (4, 16, 64)]
    assert rates[0] >= rates[1] >= rates[2]


@pytest.mark.parametrize("trials, eta", [(99, 0.5), (100, 0.0), (100, -1.0)])
def test_probe_preconditions(trials, eta):
    with pytest.raises(ParameterOutOfRange):
        concentration_probe(lambda s: make_operator("dense-gaussian", 2, 8, s), np.ones(8), trials, eta)
