"""Beamforming coefficient solves.

With disjoint transmitter caches (mu_t = 1) the coefficients are a binary
subfile selection. With overlapping caches a serving group of ``mu_t``
transmitters solves small complex linear systems: unit aggregate gain at
each intended receiver and zero aggregate gain at each constrained
unintended one. Each block carries one representative symbol per subfile;
the per-symbol systems are identical and decouple, so one solve is enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import SingularChannelError
from .combinatorics import Subset
from .placement import SubfileId
from .scheduler import BlockPlan


@dataclass(frozen=True)
class BeamformerSet:
    """Complex coefficient per (subfile, transmitter); transmitters absent
    from a subfile's serving group send nothing of it (coefficient zero,
    left implicit)."""

    coefficients: dict[tuple[SubfileId, int], complex]

    def weight(self, subfile: SubfileId, tx: int) -> complex:
        return self.coefficients.get((subfile, tx), 0.0 + 0.0j)


def select_binary_beamformers(plan: BlockPlan) -> BeamformerSet:
    """Unit coefficient for every scheduled (subfile, serving transmitter);
    a transmitter serving several subfiles sends their sum."""
    coeffs: dict[tuple[SubfileId, int], complex] = {}
    for dl in plan.deliveries:
        if len(dl.serving_txs) != 1:
            raise ValueError("binary selection applies to single-transmitter serving groups")
        coeffs[(dl.subfile, dl.serving_txs[0])] = 1.0 + 0.0j
    return BeamformerSet(coefficients=coeffs)


def _solve(a: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    # backward-stable LAPACK happily "solves" singular systems with huge
    # garbage, so check the constraints actually hold (they are O(1)-scaled)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError(f"{what} system is singular; resample the block") from exc
    if not np.all(np.isfinite(x)) or np.abs(a @ x - b).max() > 1e-8:
        raise SingularChannelError(f"{what} system is singular; resample the block")
    return x


def solve_single_subfile_zf(
    h_eq: np.ndarray, serving: Subset, intended: int, zf_targets: Subset
) -> np.ndarray:
    """Coefficients (one per serving transmitter) giving aggregate gain 1 at
    the intended receiver and 0 at each zero-forcing target.

    Square system of size ``len(serving)``; requires exactly
    ``len(serving) - 1`` targets, none of them the intended receiver.
    """
    mu_t = len(serving)
    if len(zf_targets) != mu_t - 1:
        raise ValueError(f"need {mu_t - 1} zero-forcing targets, got {len(zf_targets)}")
    if intended in zf_targets:
        raise ValueError("intended receiver cannot be a zero-forcing target")
    rows = (intended, *sorted(zf_targets))
    a = np.array([[h_eq[r - 1, t - 1] for t in serving] for r in rows])
    b = np.zeros(mu_t, dtype=complex)
    b[0] = 1.0
    return _solve(a, b, "zero-forcing")


def solve_joint_block_zf(
    h_eq: np.ndarray,
    serving: Subset,
    receivers: Sequence[int],
    subfiles: Sequence[SubfileId],
) -> BeamformerSet:
    """Joint coefficients for one serving group delivering a subfile to each
    of ``mu_t + mu_r`` receivers simultaneously.

    ``receivers`` lists the lead first, then the ``mu_r`` receivers whose
    caches cover the other lead-family subfiles, then the ``mu_t - 1``
    zero-forcing targets; ``subfiles[s]`` is what ``receivers[s]`` decodes.
    The constraints are: unit gain at every receiver for its own subfile;
    zero gain at the lead and at each target for every subfile the
    receiver's cache does not cover. Cache-covered cross terms stay
    unconstrained (the receiver subtracts them).
    """
    mu_t = len(serving)
    n_slots = len(receivers)
    mu_r = n_slots - mu_t
    if mu_r < 0:
        raise ValueError("receiver list shorter than the serving group")
    if len(subfiles) != n_slots:
        raise ValueError("need one subfile per receiver slot")

    dim = n_slots * mu_t
    a = np.zeros((dim, dim), dtype=complex)
    b = np.zeros(dim, dtype=complex)

    def gain_row(row: int, rx: int, slot: int) -> None:
        for p, tx in enumerate(serving):
            a[row, slot * mu_t + p] = h_eq[rx - 1, tx - 1]

    row = 0
    # lead receiver: decode slot 0; cut the zero-forcing-family slots
    gain_row(row, receivers[0], 0)
    b[row] = 1.0
    row += 1
    for slot in range(mu_r + 1, n_slots):
        gain_row(row, receivers[0], slot)
        row += 1
    # cache-covered receivers: decode their own slot, everything else cached
    for slot in range(1, mu_r + 1):
        gain_row(row, receivers[slot], slot)
        b[row] = 1.0
        row += 1
    # zero-forcing targets: decode their own slot, cut every uncovered one
    for slot in range(mu_r + 1, n_slots):
        rx = receivers[slot]
        gain_row(row, rx, slot)
        b[row] = 1.0
        row += 1
        for other in range(0, mu_r + 1):
            gain_row(row, rx, other)
            row += 1
        for other in range(mu_r + 1, n_slots):
            if other != slot:
                gain_row(row, rx, other)
                row += 1
    assert row == dim

    x = _solve(a, b, "joint zero-forcing")
    coeffs: dict[tuple[SubfileId, int], complex] = {}
    for slot in range(n_slots):
        for p, tx in enumerate(serving):
            coeffs[(subfiles[slot], tx)] = complex(x[slot * mu_t + p])
    return BeamformerSet(coefficients=coeffs)


def beamformers_for_block(plan: BlockPlan, h_eq: np.ndarray, mu_t: int) -> BeamformerSet:
    """Coefficients for every delivery of a block: binary selection when
    serving groups are single transmitters, otherwise a joint solve for the
    lead group plus one small solve per idle-receiver group."""
    if mu_t == 1:
        return select_binary_beamformers(plan)
    group_size = 1 + len(plan.cached_rxs) + len(plan.zf_rxs)
    lead_deliveries = plan.deliveries[:group_size]
    joint = solve_joint_block_zf(
        h_eq,
        lead_deliveries[0].serving_txs,
        [dl.intended_rx for dl in lead_deliveries],
        [dl.subfile for dl in lead_deliveries],
    )
    coeffs = dict(joint.coefficients)
    for dl in plan.deliveries[group_size:]:
        v = solve_single_subfile_zf(h_eq, dl.serving_txs, dl.intended_rx, plan.zf_rxs)
        for p, tx in enumerate(dl.serving_txs):
            coeffs[(dl.subfile, tx)] = complex(v[p])
    return BeamformerSet(coefficients=coeffs)
