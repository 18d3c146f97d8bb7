"""Active-surface null steering: which cross-links each block must cut, and
the complex coefficient solve that cuts them.

Cutting the link from transmitter ``i`` to receiver ``j`` means choosing
coefficients ``q`` with ``sum_u tx_to_irs[u,i] * irs_to_rx[j,u] * q[u] =
-direct[j,i]``, one linear equation per link. With at most as many links as
elements the system is solvable almost surely for continuous fading; with
more links than elements it is generically unsolvable, which the solver
reports rather than hides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .channel import ChannelRealization, IrsConfig, SingularChannelError, equivalent_channel

if TYPE_CHECKING:
    from .scheduler import BlockPlan

STATUS_EXACT = "exact"
STATUS_INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class NullSet:
    """Transmitter-receiver pairs whose links the surface must cut."""

    links: frozenset[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.links)

    def sorted_links(self) -> list[tuple[int, int]]:
        return sorted(self.links)


def required_nulls(plan: "BlockPlan") -> NullSet:
    """Cross-links a block's topology eliminates.

    Every serving group keeps its links only to the receivers it is allowed
    to reach (its own receiver plus the cached and zero-forcing groups);
    its links to the remaining active receivers are cut. Transmitters not
    serving this block stay fully connected and contribute no pairs.
    """
    links: set[tuple[int, int]] = set()
    for serving, allowed in plan.serving_groups():
        for i in serving:
            links.update((i, r) for r in plan.active_rxs if r not in allowed)
    return NullSet(links=frozenset(links))


@dataclass(frozen=True)
class IrsSolveInfo:
    status: str
    residual: float
    n_links: int
    q_elements: int


def solve_irs(ch: ChannelRealization, nulls: NullSet) -> tuple[IrsConfig, IrsSolveInfo]:
    """Solve for surface coefficients that cut every link in ``nulls``.

    Returns the minimum-norm exact solution when the element budget covers
    the links (status ``exact``), otherwise the least-squares compromise
    with its residual (status ``infeasible``). An exactly singular system
    with enough elements is a probability-zero channel event and raises.
    """
    q_count = ch.tx_to_irs.shape[0]
    if not nulls.links:
        q = np.zeros(q_count, dtype=complex)
        return IrsConfig(q=q), IrsSolveInfo(STATUS_EXACT, 0.0, 0, q_count)

    links = nulls.sorted_links()
    rows = np.array([ch.tx_to_irs[:, i - 1] * ch.irs_to_rx[j - 1, :] for i, j in links])
    rhs = np.array([-ch.direct[j - 1, i - 1] for i, j in links])
    n_links = len(links)

    if n_links == q_count:
        try:
            q = np.linalg.solve(rows, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularChannelError(
                f"square null-steering system of size {n_links} is singular; resample the block"
            ) from exc
    else:
        q, _, rank, _ = np.linalg.lstsq(rows, rhs, rcond=None)
        if n_links <= q_count and rank < n_links:
            raise SingularChannelError(
                f"null-steering system rank {rank} < {n_links} equations; resample the block"
            )
    residual = float(np.abs(rows @ q - rhs).max())
    if n_links <= q_count and (not np.all(np.isfinite(q.view(float))) or residual > 1e-6 * ch.scale):
        raise SingularChannelError(
            f"null-steering solve left residual {residual:.3e}; resample the block"
        )
    status = STATUS_EXACT if n_links <= q_count else STATUS_INFEASIBLE
    return IrsConfig(q=q), IrsSolveInfo(status, residual, n_links, q_count)


def residuals(irs: IrsConfig, ch: ChannelRealization, nulls: NullSet) -> float:
    """Largest surviving equivalent-channel magnitude over the null set."""
    if not nulls.links:
        return 0.0
    h_eq = equivalent_channel(ch, irs)
    return max(abs(h_eq[j - 1, i - 1]) for i, j in nulls.links)
