"""OFDM operator matrices, Toeplitz channels and the artificial-noise precoder.

All matrices follow the block layout ``[CP | data]`` of length
``N_T = N + N_cp``. The DFT is unitary, ``F[j, k] = exp(-2j*pi*j*k/N)/sqrt(N)``,
so ``F @ x == np.fft.fft(x, norm="ortho")``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionError",
    "RankDeficiencyError",
    "NonDiagonalError",
    "OfdmOperators",
    "AnPrecoder",
    "NULL_SPACE_RTOL",
    "build_operators",
    "build_toeplitz_channel",
    "toeplitz_stack",
    "build_an_precoder",
    "an_precoder_stack",
    "frequency_channel",
    "subchannel_gains",
]

# singular values below this fraction of the largest count as zero
NULL_SPACE_RTOL = 1e-9
DIAGONAL_RTOL = 1e-10


class DimensionError(ValueError):
    pass


class RankDeficiencyError(np.linalg.LinAlgError):
    """The post-CP-removal channel lost rank; the draw is degenerate."""


class NonDiagonalError(ValueError):
    """The CP does not cover the channel memory, so ``F R H A F*`` is not diagonal."""


@dataclass(frozen=True, eq=False)
class OfdmOperators:
    fft_matrix: np.ndarray
    cp_insert: np.ndarray
    cp_remove: np.ndarray
    cp_extract: np.ndarray
    ps_extract: np.ndarray

    @property
    def n_subchannels(self) -> int:
        return self.fft_matrix.shape[0]

    @property
    def cp_length(self) -> int:
        return self.cp_extract.shape[0]

    @property
    def block_length(self) -> int:
        return self.cp_insert.shape[0]

    @property
    def gamma(self) -> int:
        return self.ps_extract.shape[0]


@dataclass(frozen=True, eq=False)
class AnPrecoder:
    """Orthonormal basis of the null space of ``R_cp @ H_time`` (shape ``N_T x N_cp``)."""

    q_matrix: np.ndarray

    @property
    def n_streams(self) -> int:
        return self.q_matrix.shape[1]


def build_operators(n_subchannels: int, cp_length: int, gamma: int = 0) -> OfdmOperators:
    """Build ``F``, ``A_cp``, ``R_cp``, ``E_cp`` and ``E_gamma``.

    Parameters
    ----------
    n_subchannels : int
        FFT size ``N``.
    cp_length : int
        Cyclic prefix length ``N_cp``, ``1 <= N_cp <= N``.
    gamma : int
        Number of power-split samples, ``0 <= gamma <= N``.
    """
    n, ncp = int(n_subchannels), int(cp_length)
    if n < 1 or not 1 <= ncp <= n:
        raise DimensionError(f"need 1 <= N_cp <= N, got N={n}, N_cp={ncp}")
    if not 0 <= gamma <= n:
        raise DimensionError(f"need 0 <= gamma <= N, got gamma={gamma}, N={n}")
    nt = n + ncp
    eye = np.eye(n)
    fft_matrix = np.fft.fft(eye, axis=0, norm="ortho")
    cp_insert = np.vstack([eye[n - ncp:], eye])
    cp_remove = np.hstack([np.zeros((n, ncp)), eye])
    cp_extract = np.eye(ncp, nt)
    ps_extract = np.eye(int(gamma), n)
    return OfdmOperators(fft_matrix, cp_insert, cp_remove, cp_extract, ps_extract)


def toeplitz_stack(taps: np.ndarray, size: int) -> np.ndarray:
    """Lower-triangular banded Toeplitz matrices for a stack of tap vectors.

    ``taps`` has shape ``(..., L)``; the result has shape ``(..., size, size)``
    with ``out[..., r, c] = taps[..., r - c]`` for ``0 <= r - c < L``.
    """
    taps = np.asarray(taps)
    n_taps = taps.shape[-1]
    lag = np.arange(size)[:, None] - np.arange(size)[None, :]
    inside = (lag >= 0) & (lag < n_taps)
    padded = np.concatenate(
        [taps, np.zeros(taps.shape[:-1] + (1,), dtype=taps.dtype)], axis=-1
    )
    # out-of-band lags read the appended zero
    return padded[..., np.where(inside, lag, n_taps)]


def build_toeplitz_channel(taps, n_rows: int, n_cols: int) -> np.ndarray:
    """Toeplitz convolution matrix with ``taps`` as its first column."""
    taps = np.asarray(taps, dtype=complex).ravel()
    if taps.size == 0:
        raise DimensionError("channel needs at least one tap")
    size = max(n_rows, n_cols)
    return toeplitz_stack(taps, size)[:n_rows, :n_cols]


def _check_taps(taps: np.ndarray, block_length: int) -> np.ndarray:
    taps = np.asarray(taps, dtype=complex)
    if taps.shape[-1] == 0:
        raise DimensionError("channel needs at least one tap")
    if taps.shape[-1] > block_length:
        raise DimensionError(
            f"{taps.shape[-1]} taps do not fit in a block of {block_length} samples"
        )
    return taps


def an_precoder_stack(taps: np.ndarray, n_subchannels: int, cp_length: int):
    """Null-space precoders for a stack of Bob channels.

    Returns ``(q, ok)``: ``q`` has shape ``(n_draws, N_T, N_cp)`` and ``ok``
    flags the draws whose null space had exactly ``N_cp`` dimensions. Rows
    with ``ok == False`` hold garbage.
    """
    taps = _check_taps(np.atleast_2d(taps), n_subchannels + cp_length)
    nt = n_subchannels + cp_length
    effective = toeplitz_stack(taps, nt)[..., cp_length:, :]
    _, sv, vh = np.linalg.svd(effective, full_matrices=True)
    rank = np.sum(sv > NULL_SPACE_RTOL * sv[..., :1], axis=-1)
    ok = (nt - rank) == cp_length
    q = np.conj(np.swapaxes(vh[..., n_subchannels:, :], -1, -2))
    return q, ok


def build_an_precoder(h_taps, ops: OfdmOperators) -> AnPrecoder:
    """Precoder whose output is cancelled at Bob after CP removal.

    Raises
    ------
    RankDeficiencyError
        If ``R_cp @ H_time`` does not have a null space of dimension ``N_cp``.
    """
    q, ok = an_precoder_stack(
        np.asarray(h_taps, dtype=complex)[None, :], ops.n_subchannels, ops.cp_length
    )
    if not ok[0]:
        raise RankDeficiencyError("null space dimension differs from N_cp")
    return AnPrecoder(q[0])


def subchannel_gains(taps: np.ndarray, n_subchannels: int) -> np.ndarray:
    """N-point (non-normalised) DFT of the taps along the last axis.

    Taps beyond ``N`` wrap around (circular convolution), so a channel longer
    than the block is folded rather than truncated.
    """
    taps = np.asarray(taps, dtype=complex)
    length = taps.shape[-1]
    if length > n_subchannels:
        pad = -length % n_subchannels
        taps = np.concatenate([taps, np.zeros(taps.shape[:-1] + (pad,), dtype=complex)], axis=-1)
        taps = taps.reshape(taps.shape[:-1] + (-1, n_subchannels)).sum(axis=-2)
    return np.fft.fft(taps, n=n_subchannels, axis=-1)


def frequency_channel(h_taps, ops: OfdmOperators) -> np.ndarray:
    """Diagonal of ``F R_cp H_time A_cp F*``, after checking it is diagonal."""
    h_taps = _check_taps(np.ravel(h_taps), ops.block_length)
    nt = ops.block_length
    h_time = build_toeplitz_channel(h_taps, nt, nt)
    f = ops.fft_matrix
    full = f @ ops.cp_remove @ h_time @ ops.cp_insert @ f.conj().T
    diag = np.diag(full).copy()
    off = full - np.diag(diag)
    if np.linalg.norm(off) > DIAGONAL_RTOL * np.linalg.norm(diag):
        raise NonDiagonalError(
            f"{h_taps.size} taps exceed the memory covered by N_cp={ops.cp_length}"
        )
    return diag
