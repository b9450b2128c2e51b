import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from swipt import oracles
from swipt.ofdm import (
    DimensionError,
    NonDiagonalError,
    RankDeficiencyError,
    an_precoder_stack,
    build_an_precoder,
    build_operators,
    build_toeplitz_channel,
    frequency_channel,
    subchannel_gains,
)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_cp_remove_undoes_insert_small():
    ops = build_operators(4, 2, 0)
    np.testing.assert_array_equal(ops.cp_remove @ ops.cp_insert, np.eye(4))


def test_cp_insert_copies_tail():
    ops = build_operators(5, 2)
    x = np.arange(5.0)
    np.testing.assert_array_equal(ops.cp_insert @ x, [3, 4, 0, 1, 2, 3, 4])


def test_reference_dimensions():
    ops = build_operators(64, 16, 10)
    assert ops.ps_extract.shape == (10, 64)
    assert ops.cp_extract.shape == (16, 80)
    np.testing.assert_array_equal(ops.cp_extract, np.hstack([np.eye(16), np.zeros((16, 64))]))
    np.testing.assert_array_equal(ops.ps_extract, np.hstack([np.eye(10), np.zeros((10, 54))]))


def test_fft_matrix_matches_direct_dft():
    ops = build_operators(8, 3, 8)
    f = ops.fft_matrix
    np.testing.assert_allclose(f, oracles.dft_matrix(8), atol=1e-12)
    np.testing.assert_allclose(f @ f.conj().T, np.eye(8), atol=1e-12)


@pytest.mark.parametrize("n, ncp, gamma", [(4, 0, 0), (4, 5, 0), (4, 2, 5), (4, 2, -1), (0, 1, 0)])
def test_bad_dimensions_raise(n, ncp, gamma):
    with pytest.raises(DimensionError):
        build_operators(n, ncp, gamma)


@given(n=st.integers(1, 40), data=st.data())
def test_remove_insert_identity_property(n, data):
    ncp = data.draw(st.integers(1, n))
    ops = build_operators(n, ncp)
    assert np.array_equal(ops.cp_remove @ ops.cp_insert, np.eye(n))


def test_toeplitz_single_tap_is_identity():
    np.testing.assert_array_equal(build_toeplitz_channel([1], 3, 3), np.eye(3))


def test_toeplitz_two_taps():
    expected = [[1, 0, 0], [0.5, 1, 0], [0, 0.5, 1]]
    np.testing.assert_array_equal(build_toeplitz_channel([1, 0.5], 3, 3), expected)


def test_toeplitz_matches_truncated_convolution(rng):
    taps = crandn(rng, 16)
    x = crandn(rng, 80)
    np.testing.assert_allclose(
        build_toeplitz_channel(taps, 80, 80) @ x, np.convolve(taps, x)[:80], atol=1e-12
    )
    np.testing.assert_array_equal(build_toeplitz_channel(taps, 80, 80), oracles.toeplitz_loop(taps, 80))


def test_toeplitz_empty_taps():
    with pytest.raises(DimensionError):
        build_toeplitz_channel([], 3, 3)


def _residual(h, ops):
    nt = ops.block_length
    return ops.cp_remove @ build_toeplitz_channel(h, nt, nt) @ build_an_precoder(h, ops).q_matrix


def test_precoder_single_tap_lives_in_cp_rows():
    ops = build_operators(8, 3)
    q = build_an_precoder([1.0], ops).q_matrix
    assert q.shape == (11, 3)
    np.testing.assert_allclose(q[3:], 0, atol=1e-12)
    np.testing.assert_allclose(q.conj().T @ q, np.eye(3), atol=1e-12)


def test_precoder_cancels_small(rng):
    ops = build_operators(8, 3)
    h = crandn(rng, 3)
    assert np.linalg.norm(_residual(h, ops)) / np.sqrt(3) <= 1e-10


def test_precoder_spans_svd_null_space(rng):
    # independent oracle: scipy's null space of the same matrix
    ops = build_operators(8, 3)
    h = crandn(rng, 4)
    q = build_an_precoder(h, ops).q_matrix
    eff = ops.cp_remove @ oracles.toeplitz_loop(h, 11)
    basis = scipy.linalg.null_space(eff)
    assert basis.shape[1] == 3
    # equal subspaces have equal orthogonal projectors
    np.testing.assert_allclose(q @ q.conj().T, basis @ basis.conj().T, atol=1e-10)


def test_precoder_reference_dimensions(rng):
    ops = build_operators(64, 16)
    h = crandn(rng, 16)
    q = build_an_precoder(h, ops).q_matrix
    np.testing.assert_allclose(q.conj().T @ q, np.eye(16), atol=1e-10)
    res = _residual(h, ops)
    assert np.abs(res).max() <= 1e-10 * np.abs(h).max()
    assert np.trace(q @ q.conj().T).real == pytest.approx(16)


def test_precoder_rank_deficient_zero_channel():
    ops = build_operators(8, 3)
    with pytest.raises(RankDeficiencyError):
        build_an_precoder(np.zeros(3), ops)
    _, ok = an_precoder_stack(np.zeros((2, 3)), 8, 3)
    assert not ok.any()


@given(
    n=st.integers(2, 24),
    data=st.data(),
    seed=st.integers(0, 2**32 - 1),
)
def test_cancellation_property(n, data, seed):
    ncp = data.draw(st.integers(1, n))
    n_taps = data.draw(st.integers(1, ncp + 1))
    h = crandn(np.random.default_rng(seed), n_taps)
    ops = build_operators(n, ncp)
    res = _residual(h, ops)
    assert np.abs(res).max() <= 1e-10 * np.abs(h).max()


def test_frequency_channel_flat():
    np.testing.assert_allclose(frequency_channel([1.0], build_operators(4, 1)), np.ones(4), atol=1e-12)


def test_frequency_channel_shift():
    ops = build_operators(4, 1)
    k = np.arange(4)
    np.testing.assert_allclose(frequency_channel([0, 1], ops), np.exp(-2j * np.pi * k / 4), atol=1e-12)


def test_frequency_channel_matches_dft_sum(rng):
    ops = build_operators(64, 16)
    h = crandn(rng, 16)
    k = np.arange(64)
    expected = np.array([np.sum(h * np.exp(-2j * np.pi * kk * np.arange(16) / 64)) for kk in k])
    np.testing.assert_allclose(frequency_channel(h, ops), expected, atol=1e-10)


def test_frequency_channel_detects_short_cp(rng):
    ops = build_operators(16, 2)
    with pytest.raises(NonDiagonalError):
        frequency_channel(crandn(rng, 6), ops)


def test_subchannel_gains_fold_long_channels():
    # Eve may have N_cp + 1 taps, which exceeds N when N_cp = N
    taps = np.array([1.0, 2.0, 3.0, 4.0 + 1j])
    n = 3
    folded = np.array([5.0 + 1j, 2.0, 3.0])
    np.testing.assert_allclose(subchannel_gains(taps, n), np.fft.fft(folded), atol=1e-12)
    ops = build_operators(n, 3)
    np.testing.assert_allclose(frequency_channel(taps, ops), subchannel_gains(taps, n), atol=1e-12)
