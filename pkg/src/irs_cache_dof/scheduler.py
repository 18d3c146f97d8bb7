"""Block-by-block delivery schedules for both cache regimes.

A schedule assigns every demanded subfile to exactly one communication
block. Within a block, one serving transmitter group carries the subfiles
of a lead receiver, of the receivers whose caches cover them (``r_set``),
and of the zero-forcing targets (``zf_rxs``); each remaining active
receiver is served by its own disjoint group, with the surface cutting the
cross-links those groups would otherwise create. Serving groups rotate
across blocks by cyclic index shifts so that, over the whole horizon,
every demanded subfile appears exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator

from .combinatorics import OrderedPartitionSystem, Subset, SubsetPartitionSystem, cyclic_shift, verify_subset_partition
from .params import SystemParams
from .placement import ORDERED_MODE, SUBSET_MODE, SubfileId, SubfileUniverse, refine_subfiles

REGIME_T1_CASE1 = "T1-I"
REGIME_T1_CASE2 = "T1-II"
REGIME_T2_SUBSET_CASE1 = "T2-IA"
REGIME_T2_ORDERED_CASE1 = "T2-IB"
REGIME_T2_CASE2 = "T2-II"


class SchedulingError(ValueError):
    """The requested schedule violates a structural precondition."""


@dataclass(frozen=True)
class DemandVector:
    """Requested file per receiver, ``d[j-1]`` for receiver ``j``."""

    d: tuple[int, ...]

    def file_for(self, rx: int) -> int:
        return self.d[rx - 1]


def worst_case_demand(params: SystemParams) -> DemandVector:
    """All receivers request distinct files (receiver ``j`` asks for file ``j``)."""
    return DemandVector(d=tuple(range(1, params.k_r + 1)))


@dataclass(frozen=True)
class Delivery:
    subfile: SubfileId
    intended_rx: int
    serving_txs: Subset


@dataclass(frozen=True)
class BlockPlan:
    """One communication block: who sends what to whom, and which
    cross-links the surface must cut.

    ``cached_rxs``/``zf_rxs`` are the block's common receiver groups (side
    information and zero-forcing targets); ``idle_rxs`` are the active
    receivers outside them, each served by its own transmitter group.
    Receivers not in ``active_rxs`` are untouched this block.
    """

    block_index: int
    deliveries: tuple[Delivery, ...]
    active_rxs: Subset
    lead_rx: int
    cached_rxs: Subset
    zf_rxs: Subset
    idle_rxs: Subset

    @property
    def null_links(self) -> frozenset[tuple[int, int]]:
        from .irs import required_nulls

        return required_nulls(self).links

    def serving_groups(self) -> list[tuple[Subset, frozenset[int]]]:
        """Each distinct serving group with the receivers it may reach.

        The lead group may reach the lead, cached, and zero-forcing
        receivers; the group serving idle receiver ``j`` may reach
        ``{j}``, the cached, and the zero-forcing receivers. Everything
        else among the active receivers must be cut by the surface.
        """
        base = set(self.cached_rxs) | set(self.zf_rxs)
        groups: list[tuple[Subset, frozenset[int]]] = []
        lead_serving = self.deliveries[0].serving_txs
        groups.append((lead_serving, frozenset(base | {self.lead_rx})))
        for dl in self.deliveries:
            if dl.intended_rx in self.idle_rxs:
                groups.append((dl.serving_txs, frozenset(base | {dl.intended_rx})))
        return groups


@dataclass(frozen=True)
class Schedule:
    regime: str
    tx_mode: str
    params: SystemParams
    demand: DemandVector
    l_size: int
    blocks: tuple[BlockPlan, ...]

    @property
    def h_blocks(self) -> int:
        return len(self.blocks)

    @property
    def deliveries_per_block(self) -> int:
        return len(self.blocks[0].deliveries) if self.blocks else 0


def demanded_subfiles(universe: SubfileUniverse, demand: DemandVector) -> frozenset[tuple[SubfileId, int]]:
    """Every (subfile, intended receiver) pair the transmitters must deliver:
    receiver ``j`` needs each subfile of its file whose caching receivers
    exclude ``j``."""
    by_file: dict[int, list[SubfileId]] = {}
    for sub in universe.subfiles:
        by_file.setdefault(sub.file, []).append(sub)
    pairs = []
    for j, file in enumerate(demand.d, start=1):
        pairs.extend((sub, j) for sub in by_file[file] if j not in sub.rx_set)
    return frozenset(pairs)


def demanded_for_schedule(universe: SubfileUniverse, schedule: Schedule) -> frozenset[tuple[SubfileId, int]]:
    """The refined demanded set matching a schedule's regime (zero-forcing
    split for cooperative transmission, surface split for partial-activity
    blocks)."""
    base = demanded_subfiles(universe, schedule.demand)
    t_split = universe.params.mu_t >= 2
    l_size = schedule.l_size if schedule.regime in (REGIME_T1_CASE2, REGIME_T2_CASE2) else 0
    if not t_split and l_size == 0:
        return base
    refined, _ = refine_subfiles(sorted(base), universe.params, t_split, l_size)
    return frozenset(refined)


class _ServingRotator:
    """Maps a slot number (1 = lead group, 2.. = idle-receiver groups) and a
    rotation coordinate tuple to a transmitter-side index and its group."""

    def coords(self) -> Iterator[tuple[int, ...]]:
        raise NotImplementedError

    def serving(self, slot: int, coords: tuple[int, ...]) -> tuple[object, Subset]:
        raise NotImplementedError

    def max_slots(self) -> int:
        raise NotImplementedError


class _SingleTxRotator(_ServingRotator):
    """mu_t = 1: slots are single transmitters, rotated cyclically."""

    def __init__(self, k_t: int):
        self.k_t = k_t

    def coords(self):
        for k2 in range(1, self.k_t + 1):
            yield (k2,)

    def serving(self, slot, coords):
        (k2,) = coords
        tx = cyclic_shift(slot, k2 - 1, self.k_t)
        return (tx,), (tx,)

    def max_slots(self):
        return self.k_t


class _ParallelClassRotator(_ServingRotator):
    """mu_t >= 2 with a parallel-class design: slot ``s`` starts at position
    ``s`` of class 1; the position rotates cyclically and the class advances,
    so each slot visits every subset exactly once while the groups inside a
    block always come from one class (hence stay disjoint)."""

    def __init__(self, system: SubsetPartitionSystem):
        self.system = system

    def coords(self):
        for k3 in range(1, len(self.system.classes) + 1):
            for k2 in range(1, self.system.m + 1):
                yield (k2, k3)

    def serving(self, slot, coords):
        k2, k3 = coords
        kappa = cyclic_shift(slot, k2 - 1, self.system.m) + (k3 - 1) * self.system.m
        subset = self.system.subset_by_number(kappa)
        return subset, subset

    def max_slots(self):
        return self.system.m


class _OrderedPartitionRotator(_ServingRotator):
    """mu_t >= 2 without a parallel-class design: slots are ordered
    arrangements whose first group serves. The lead-group coordinate rotates
    cyclically (keeping the block's groups disjoint), while the arrangement
    remainder and the unordered-partition window advance independently."""

    def __init__(self, system: OrderedPartitionSystem):
        self.system = system
        self.m = system.m
        self.sub_count = math.factorial(self.m - 1)

    def coords(self):
        for k4 in range(1, self.system.num_windows + 1):
            for k3 in range(1, self.sub_count + 1):
                for k2 in range(1, self.m + 1):
                    yield (k2, k3, k4)

    def serving(self, slot, coords):
        k2, k3, k4 = coords
        lead = cyclic_shift(slot, k2 - 1, self.m)
        kappa = self.system.number_from_coords(window=k4, lead=lead, remainder=k3)
        return kappa, self.system.partition_by_number(kappa)[0]

    def max_slots(self):
        return self.m


def _rt_pairs(active: Subset, lead: int, mu_r: int, mu_t: int) -> list[tuple[Subset, Subset]]:
    """All (cached receivers, zero-forcing receivers) pairs drawn from the
    active set minus the lead, in lexicographic order."""
    others = [j for j in active if j != lead]
    pairs = []
    for r_set in combinations(others, mu_r):
        rest = [j for j in others if j not in r_set]
        for t_set in combinations(rest, mu_t - 1):
            pairs.append((r_set, t_set))
    return pairs


def _case1_blocks(
    params: SystemParams,
    demand: DemandVector,
    active: Subset,
    rotator: _ServingRotator,
    include_lset: bool,
    start_index: int,
) -> list[BlockPlan]:
    """Blocks delivering one subfile to every receiver in ``active``.

    ``include_lset`` marks partial-activity schedules whose subfiles carry
    the surface-split index (the active receivers outside each subfile's
    own groups).
    """
    mu_r, mu_t = params.mu_r, params.mu_t
    lead = active[0]
    n_idle = len(active) - mu_r - mu_t
    if n_idle < 0:
        raise SchedulingError(
            f"active set of {len(active)} receivers cannot host mu_r={mu_r} plus mu_t={mu_t} groups"
        )
    if n_idle + 1 > rotator.max_slots():
        raise SchedulingError(
            f"{n_idle + 1} disjoint serving groups needed per block but only "
            f"{rotator.max_slots()} are available"
        )
    blocks = []
    index = start_index
    for coords in rotator.coords():
        for r_set, t_set in _rt_pairs(active, lead, mu_r, mu_t):
            in_groups = {lead, *r_set, *t_set}
            idle = tuple(j for j in active if j not in in_groups)
            lead_lset = idle if include_lset else ()
            lead_index, lead_serving = rotator.serving(1, coords)
            deliveries = [
                Delivery(
                    subfile=SubfileId(
                        file=demand.file_for(lead),
                        tx_index=lead_index,
                        rx_set=r_set,
                        zf_set=t_set,
                        irs_set=lead_lset,
                    ),
                    intended_rx=lead,
                    serving_txs=lead_serving,
                )
            ]
            for j in r_set:
                cache = tuple(sorted({lead, *r_set} - {j}))
                deliveries.append(
                    Delivery(
                        subfile=SubfileId(
                            file=demand.file_for(j),
                            tx_index=lead_index,
                            rx_set=cache,
                            zf_set=t_set,
                            irs_set=lead_lset,
                        ),
                        intended_rx=j,
                        serving_txs=lead_serving,
                    )
                )
            for j in t_set:
                zf = tuple(sorted({lead, *t_set} - {j}))
                deliveries.append(
                    Delivery(
                        subfile=SubfileId(
                            file=demand.file_for(j),
                            tx_index=lead_index,
                            rx_set=r_set,
                            zf_set=zf,
                            irs_set=lead_lset,
                        ),
                        intended_rx=j,
                        serving_txs=lead_serving,
                    )
                )
            for slot_offset, j in enumerate(idle):
                slot_index, slot_serving = rotator.serving(slot_offset + 2, coords)
                lset = tuple(sorted(({lead, *idle} - {j}))) if include_lset else ()
                deliveries.append(
                    Delivery(
                        subfile=SubfileId(
                            file=demand.file_for(j),
                            tx_index=slot_index,
                            rx_set=r_set,
                            zf_set=t_set,
                            irs_set=lset,
                        ),
                        intended_rx=j,
                        serving_txs=slot_serving,
                    )
                )
            blocks.append(
                BlockPlan(
                    block_index=index,
                    deliveries=tuple(deliveries),
                    active_rxs=active,
                    lead_rx=lead,
                    cached_rxs=r_set,
                    zf_rxs=t_set,
                    idle_rxs=idle,
                )
            )
            index += 1
    return blocks


def _check_zf_slots(params: SystemParams) -> None:
    if params.mu_r + params.mu_t > params.k_r:
        raise SchedulingError(
            f"mu_r + mu_t = {params.mu_r + params.mu_t} exceeds k_r = {params.k_r}; "
            "the joint decoding group does not fit"
        )


def schedule_theorem1(params: SystemParams, demand: DemandVector) -> Schedule:
    """Full-activity schedule for the disjoint-cache regime (mu_t = 1).

    Serves all receivers every block; the surface covers the
    ``K_R - mu_r - 1`` receivers that neither caching nor the serving
    transmitter selection can protect.
    """
    if params.mu_t != 1:
        raise SchedulingError("this schedule requires mu_t = 1")
    l_size = params.k_r - params.mu_r - 1
    if l_size + 1 > params.k_t:
        raise SchedulingError(
            f"needs {l_size + 1} distinct serving transmitters per block, have {params.k_t}"
        )
    active = tuple(params.receivers)
    blocks = _case1_blocks(
        params, demand, active, _SingleTxRotator(params.k_t), include_lset=False, start_index=1
    )
    return Schedule(
        regime=REGIME_T1_CASE1,
        tx_mode=SUBSET_MODE,
        params=params,
        demand=demand,
        l_size=l_size,
        blocks=tuple(blocks),
    )


def schedule_theorem2_partition(
    params: SystemParams, demand: DemandVector, system: SubsetPartitionSystem
) -> Schedule:
    """Full-activity schedule for overlapping caches (mu_t >= 2) driven by a
    parallel-class design on the transmitter set."""
    _require_t2(params, system.m, system.mu_t)
    check = verify_subset_partition(system)
    if not check.ok:
        raise SchedulingError(f"invalid subset-partition system: {check.violation}")
    l_size = params.k_r - params.mu_r - params.mu_t
    active = tuple(params.receivers)
    blocks = _case1_blocks(
        params, demand, active, _ParallelClassRotator(system), include_lset=False, start_index=1
    )
    return Schedule(
        regime=REGIME_T2_SUBSET_CASE1,
        tx_mode=SUBSET_MODE,
        params=params,
        demand=demand,
        l_size=l_size,
        blocks=tuple(blocks),
    )


def schedule_theorem2_ordered(
    params: SystemParams, demand: DemandVector, system: OrderedPartitionSystem
) -> Schedule:
    """Full-activity schedule for overlapping caches using the ordered
    arrangement index instead of a parallel-class design."""
    _require_t2(params, system.m, system.mu_t)
    l_size = params.k_r - params.mu_r - params.mu_t
    active = tuple(params.receivers)
    blocks = _case1_blocks(
        params, demand, active, _OrderedPartitionRotator(system), include_lset=False, start_index=1
    )
    return Schedule(
        regime=REGIME_T2_ORDERED_CASE1,
        tx_mode=ORDERED_MODE,
        params=params,
        demand=demand,
        l_size=l_size,
        blocks=tuple(blocks),
    )


def _require_t2(params: SystemParams, m: int, mu_t: int) -> None:
    if params.mu_t < 2:
        raise SchedulingError("this schedule requires mu_t >= 2")
    if (m, mu_t) != (params.m_groups, params.mu_t):
        raise SchedulingError(
            f"design is for (m={m}, mu_t={mu_t}) but parameters need "
            f"(m={params.m_groups}, mu_t={params.mu_t})"
        )
    _check_zf_slots(params)


def schedule_caseII(
    params: SystemParams,
    demand: DemandVector,
    l_size: int,
    mode: str = "thm1",
    system: SubsetPartitionSystem | OrderedPartitionSystem | None = None,
) -> Schedule:
    """Partial-activity schedule: too few surface elements to protect every
    receiver at once, so activity rotates over all receiver subsets of size
    ``mu_r + mu_t + l_size``, each handled as a full-activity sub-schedule.

    Receivers outside the active subset get nothing in those blocks (their
    share of the horizon is what lowers the per-user rate below 1).
    """
    mu_sum = params.mu_r + params.mu_t
    if l_size < 0:
        raise SchedulingError("l_size must be nonnegative")
    if mu_sum + l_size >= params.k_r:
        raise SchedulingError(
            f"partial-activity scheduling needs mu_r + mu_t + l_size < k_r; "
            f"got {mu_sum + l_size} >= {params.k_r}"
        )
    if mode == "thm1":
        if params.mu_t != 1:
            raise SchedulingError("mode 'thm1' requires mu_t = 1")
        rotator: _ServingRotator = _SingleTxRotator(params.k_t)
        regime, tx_mode = REGIME_T1_CASE2, SUBSET_MODE
    elif mode == "thm2-partition":
        if not isinstance(system, SubsetPartitionSystem):
            raise SchedulingError("mode 'thm2-partition' needs a SubsetPartitionSystem")
        _require_t2(params, system.m, system.mu_t)
        rotator = _ParallelClassRotator(system)
        regime, tx_mode = REGIME_T2_CASE2, SUBSET_MODE
    elif mode == "thm2-ordered":
        if not isinstance(system, OrderedPartitionSystem):
            raise SchedulingError("mode 'thm2-ordered' needs an OrderedPartitionSystem")
        _require_t2(params, system.m, system.mu_t)
        rotator = _OrderedPartitionRotator(system)
        regime, tx_mode = REGIME_T2_CASE2, ORDERED_MODE
    else:
        raise SchedulingError(f"unknown partial-activity mode {mode!r}")

    blocks: list[BlockPlan] = []
    for active in combinations(params.receivers, mu_sum + l_size):
        blocks.extend(
            _case1_blocks(
                params,
                demand,
                active,
                rotator,
                include_lset=True,
                start_index=len(blocks) + 1,
            )
        )
    return Schedule(
        regime=regime,
        tx_mode=tx_mode,
        params=params,
        demand=demand,
        l_size=l_size,
        blocks=tuple(blocks),
    )


@dataclass(frozen=True)
class PartitionReport:
    ok: bool
    missing: tuple[tuple[SubfileId, int], ...]
    extra: tuple[tuple[SubfileId, int], ...]
    duplicates: tuple[tuple[SubfileId, int], ...]

    def summary(self) -> str:
        if self.ok:
            return "schedule partitions the demanded subfiles exactly"
        parts = []
        if self.missing:
            parts.append(f"{len(self.missing)} demanded subfiles never delivered, e.g. {self.missing[0]}")
        if self.extra:
            parts.append(f"{len(self.extra)} undemanded deliveries, e.g. {self.extra[0]}")
        if self.duplicates:
            parts.append(f"duplicate delivery of {len(self.duplicates)} subfiles, e.g. {self.duplicates[0]}")
        return "; ".join(parts)


def verify_schedule_partition(
    schedule: Schedule, demanded: frozenset[tuple[SubfileId, int]]
) -> PartitionReport:
    """Check the exact-cover property: every demanded (subfile, receiver)
    pair is delivered exactly once and nothing else is delivered."""
    counts: dict[tuple[SubfileId, int], int] = {}
    for block in schedule.blocks:
        for dl in block.deliveries:
            key = (dl.subfile, dl.intended_rx)
            counts[key] = counts.get(key, 0) + 1
    delivered = set(counts)
    missing = tuple(sorted(demanded - delivered))
    extra = tuple(sorted(delivered - demanded))
    duplicates = tuple(sorted(k for k, c in counts.items() if c > 1))
    return PartitionReport(
        ok=not (missing or extra or duplicates),
        missing=missing,
        extra=extra,
        duplicates=duplicates,
    )


def achieved_dof(schedule: Schedule, delivered: int | None = None) -> Fraction:
    """Delivered subfiles per block, as an exact rational. With the default
    ``delivered`` (every scheduled subfile), this is the schedule's nominal
    rate; the simulator passes the count that actually decoded."""
    if delivered is None:
        delivered = sum(len(b.deliveries) for b in schedule.blocks)
    return Fraction(delivered, schedule.h_blocks)


def schedule_to_jsonable(schedule: Schedule) -> dict:
    """Structured-text form of a schedule, one record per block."""
    from .placement import subfile_to_jsonable as subfile_record

    return {
        "regime": schedule.regime,
        "tx_mode": schedule.tx_mode,
        "l_size": schedule.l_size,
        "h_blocks": schedule.h_blocks,
        "demand": list(schedule.demand.d),
        "blocks": [
            {
                "block": b.block_index,
                "active_rxs": list(b.active_rxs),
                "deliveries": [
                    {
                        "subfile": subfile_record(d.subfile),
                        "intended_rx": d.intended_rx,
                        "serving_txs": list(d.serving_txs),
                    }
                    for d in b.deliveries
                ],
                "null_links": sorted([list(p) for p in b.null_links]),
            }
            for b in schedule.blocks
        ],
    }
