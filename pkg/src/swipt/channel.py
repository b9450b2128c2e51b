"""Block-fading Rayleigh channel draws keyed by ``(seed, index)``.

Every trial gets its own generator derived from ``SeedSequence(seed)`` with
spawn key ``(index, attempt, link)``; trial ``i`` is therefore reproducible
without generating trials ``0..i-1`` and the Bob/Eve streams never overlap.
``attempt`` is bumped only when a draw has to be replaced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

BOB, EVE = 0, 1


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    taps_bob: np.ndarray
    taps_eve: np.ndarray
    seed: int
    index: int
    attempt: int = 0


def _link_rng(seed: int, index: int, attempt: int, link: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index), int(attempt), link))
    return np.random.Generator(np.random.PCG64(ss))


def rayleigh_taps(rng: np.random.Generator, n_taps: int) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian taps."""
    z = rng.standard_normal((n_taps, 2))
    return (z[:, 0] + 1j * z[:, 1]) * np.sqrt(0.5)


def draw_channel(
    seed: int, index: int, n_taps_bob: int, n_taps_eve: int, attempt: int = 0
) -> ChannelRealization:
    """Draw the Alice-Bob and Alice-Eve tap vectors of trial ``index``."""
    if n_taps_bob < 1 or n_taps_eve < 1:
        raise ValueError("tap counts must be >= 1")
    if index < 0 or attempt < 0:
        raise ValueError("index and attempt must be non-negative")
    h = rayleigh_taps(_link_rng(seed, index, attempt, BOB), n_taps_bob)
    g = rayleigh_taps(_link_rng(seed, index, attempt, EVE), n_taps_eve)
    return ChannelRealization(h, g, int(seed), int(index), int(attempt))


def draw_channels(
    seed: int, indices: Iterable[int], n_taps_bob: int, n_taps_eve: int
) -> list[ChannelRealization]:
    return [draw_channel(seed, i, n_taps_bob, n_taps_eve) for i in indices]


def _interleave(taps: np.ndarray) -> list[float]:
    return np.column_stack([taps.real, taps.imag]).ravel().tolist()


def _deinterleave(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


def write_channel_dump(path, realizations: Iterable[ChannelRealization]) -> None:
    """Write one JSON record per realization, taps as interleaved re/im pairs."""
    with open(path, "w", encoding="utf-8") as fh:
        for ch in realizations:
            record = {
                "seed": ch.seed,
                "index": ch.index,
                "attempt": ch.attempt,
                "taps_bob": _interleave(ch.taps_bob),
                "taps_eve": _interleave(ch.taps_eve),
            }
            fh.write(json.dumps(record) + "\n")


def read_channel_dump(path) -> Iterator[ChannelRealization]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            yield ChannelRealization(
                _deinterleave(rec["taps_bob"]),
                _deinterleave(rec["taps_eve"]),
                rec["seed"],
                rec["index"],
                rec.get("attempt", 0),
            )
