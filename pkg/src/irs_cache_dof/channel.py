"""Per-block fading channels, the IRS-composed equivalent channel, and the
binary topology matrix derived from it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SystemParams

#: zero-classification threshold, relative to the largest direct-channel entry
DEFAULT_ZERO_TOL = 1e-9


class SingularChannelError(RuntimeError):
    """A sampled channel produced a numerically singular solve (a
    probability-zero event for continuous fading); resample and retry."""


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for one (seed, block) pair.

    Separate ``stream`` values isolate channel draws from symbol/noise draws
    so sampling one never perturbs the other. Streams are splittable: blocks
    can be generated concurrently with identical results.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, block, stream)))


@dataclass(frozen=True)
class ChannelRealization:
    """Sampled complex channels of one communication block.

    ``direct[j-1, i-1]`` is the transmitter-``i`` to receiver-``j`` link,
    ``tx_to_irs[u-1, i-1]`` the link into IRS element ``u``, and
    ``irs_to_rx[j-1, u-1]`` the link out of it.
    """

    direct: np.ndarray
    tx_to_irs: np.ndarray
    irs_to_rx: np.ndarray
    block_index: int
    seed: int

    @property
    def scale(self) -> float:
        """Largest direct-channel magnitude; reference for relative tolerances."""
        return float(np.abs(self.direct).max())


@dataclass(frozen=True)
class IrsConfig:
    """Complex coefficient per IRS element (amplitude times phase factor).

    The surface is active, so magnitudes are unconstrained; only the product
    of amplitude and phase shift enters the received signal.
    """

    q: np.ndarray

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.q.view(float))):
            raise ValueError("IRS coefficients must be finite")


def zero_irs(q_elements: int) -> IrsConfig:
    return IrsConfig(q=np.zeros(q_elements, dtype=complex))


def sample_block_channels(params: SystemParams, block: int, seed: int) -> ChannelRealization:
    """Draw i.i.d. unit-variance circularly-symmetric complex Gaussian
    coefficients for one block.

    Deterministic given ``(seed, block)``; different blocks use independent
    streams (time-selective fading).
    """
    rng = block_rng(seed, block)

    def cgauss(rows: int, cols: int) -> np.ndarray:
        z = rng.standard_normal((rows, 2 * cols))
        h = (z[:, ::2] + 1j * z[:, 1::2]) / np.sqrt(2.0)
        h.setflags(write=False)
        return h

    return ChannelRealization(
        direct=cgauss(params.k_r, params.k_t),
        tx_to_irs=cgauss(params.q_elements, params.k_t),
        irs_to_rx=cgauss(params.k_r, params.q_elements),
        block_index=block,
        seed=seed,
    )


def equivalent_channel(ch: ChannelRealization, irs: IrsConfig) -> np.ndarray:
    """Effective receiver-by-transmitter channel after the surface acts.

    Entry ``(j, i)`` is the direct link plus the sum over elements of
    (tx->element) * coefficient * (element->rx); linear in the coefficients.
    """
    q_count = irs.q.shape[0]
    if ch.tx_to_irs.shape[0] != q_count or ch.irs_to_rx.shape[1] != q_count:
        raise ValueError(
            f"IRS size mismatch: {q_count} coefficients vs channels for "
            f"{ch.tx_to_irs.shape[0]}/{ch.irs_to_rx.shape[1]} elements"
        )
    if q_count == 0:
        return ch.direct.copy()
    return ch.direct + (ch.irs_to_rx * irs.q[np.newaxis, :]) @ ch.tx_to_irs


@dataclass(frozen=True)
class NetworkMatrix:
    """Binary topology matrix: ``n[i-1, j-1] = 1`` iff the transmitter-``i``
    to receiver-``j`` link survives (its equivalent gain exceeds ``tol``)."""

    n: np.ndarray
    tol: float


def network_indicator(h_eq: np.ndarray, tol: float | None = None) -> NetworkMatrix:
    """Classify equivalent-channel entries as present/eliminated links.

    Without an explicit ``tol``, zero is classified relative to the largest
    entry so the matrix is invariant to overall channel scale.
    """
    if tol is None:
        tol = DEFAULT_ZERO_TOL * float(np.abs(h_eq).max())
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return NetworkMatrix(n=(np.abs(h_eq.T) > tol).astype(np.uint8), tol=tol)


def realization_to_jsonable(ch: ChannelRealization) -> dict:
    """Plain-text form of a realization ([re, im] pairs) for fixture files."""

    def encode(a: np.ndarray) -> list:
        return [[[float(v.real), float(v.imag)] for v in row] for row in a]

    return {
        "block_index": ch.block_index,
        "seed": ch.seed,
        "direct": encode(ch.direct),
        "tx_to_irs": encode(ch.tx_to_irs),
        "irs_to_rx": encode(ch.irs_to_rx),
    }


def dump_realization(ch: ChannelRealization, path) -> None:
    """Write a realization as JSON for cross-language fixture tests."""
    import json

    with open(path, "w") as fh:
        json.dump(realization_to_jsonable(ch), fh, indent=2, sort_keys=True)
        fh.write("\n")
