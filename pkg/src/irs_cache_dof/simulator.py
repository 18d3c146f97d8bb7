"""End-to-end block verification: synthesize transmit signals, propagate
through the equivalent channel, cancel with receiver caches, and check that
every intended symbol comes out clean. Episodes aggregate block outcomes
into an exact delivered-per-block rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import block_rng, equivalent_channel, sample_block_channels, zero_irs
from .combinatorics import DEFAULT_SEARCH_BUDGET, enumerate_ordered_partitions, find_subset_partition
from .irs import STATUS_INFEASIBLE, IrsSolveInfo, required_nulls, solve_irs
from .params import SystemParams
from .placement import SubfileId
from .scheduler import (
    BlockPlan,
    DemandVector,
    Schedule,
    SchedulingError,
    achieved_dof,
    schedule_caseII,
    schedule_theorem1,
    schedule_theorem2_ordered,
    schedule_theorem2_partition,
    worst_case_demand,
)
from .zf import BeamformerSet, beamformers_for_block

REGIME_THM1 = "thm1"
REGIME_THM2_PARTITION = "thm2-partition"
REGIME_THM2_ORDERED = "thm2-ordered"
REGIMES = (REGIME_THM1, REGIME_THM2_PARTITION, REGIME_THM2_ORDERED)

STRICT_Q = "strict"
SUFFICIENT_Q = "sufficient"

IRS_DISABLED = "disabled"


class ScheduleConsistencyError(RuntimeError):
    """A transmit signal referenced a subfile the transmitter does not cache."""


@dataclass(frozen=True)
class SimOptions:
    """Episode knobs. ``strictness`` selects how many surface elements a
    given null count is assumed to need when deriving the per-episode null
    budget from ``q_elements``; ``l_size`` overrides that derivation."""

    noise_variance: float = 0.0
    strictness: str = STRICT_Q
    success_threshold: float = 1e-8
    disable_irs: bool = False
    l_size: int | None = None
    demand: DemandVector | None = None
    design_budget: int = DEFAULT_SEARCH_BUDGET


def _symbols_for(plan: BlockPlan, seed: int) -> dict[SubfileId, complex]:
    """One unit-power symbol per scheduled subfile, deterministic per block."""
    rng = block_rng(seed, plan.block_index, stream=1)
    phases = rng.uniform(0.0, 2.0 * math.pi, len(plan.deliveries))
    return {
        dl.subfile: complex(np.exp(1j * phases[n]))
        for n, dl in enumerate(plan.deliveries)
    }


def transmit_block(
    plan: BlockPlan, beams: BeamformerSet, symbols: dict[SubfileId, complex], k_t: int
) -> np.ndarray:
    """Per-transmitter signals: each transmitter sends the weighted sum of
    the scheduled symbols it carries; everyone else stays silent."""
    serving_of = {dl.subfile: frozenset(dl.serving_txs) for dl in plan.deliveries}
    for dl in plan.deliveries:
        if dl.subfile not in symbols:
            raise ScheduleConsistencyError(f"no symbol for scheduled subfile {dl.subfile}")
    x = np.zeros(k_t, dtype=complex)
    for (sub, tx), v in beams.coefficients.items():
        group = serving_of.get(sub)
        if group is None or tx not in group:
            raise ScheduleConsistencyError(
                f"transmitter {tx} asked to send subfile {sub} it does not cache"
            )
        x[tx - 1] += v * symbols[sub]
    return x


def _delivery_gain(dl, rx: int, h_eq: np.ndarray, beams: BeamformerSet) -> complex:
    return sum(
        h_eq[rx - 1, tx - 1] * beams.weight(dl.subfile, tx) for tx in dl.serving_txs
    )


def receiver_decode(
    y: complex,
    rx: int,
    plan: BlockPlan,
    h_eq: np.ndarray,
    beams: BeamformerSet,
    symbols: dict[SubfileId, complex],
) -> tuple[complex, float]:
    """Cache-subtract and normalize to estimate the intended symbol.

    The receiver knows channels, coefficients, and every cached scheduled
    subfile (those whose caching receivers include it), so it subtracts
    their exact contributions, divides by its own aggregate gain, and is
    left with its symbol plus whatever interference survived.
    """
    own = next(dl for dl in plan.deliveries if dl.intended_rx == rx)
    cached_sum = 0.0 + 0.0j
    for dl in plan.deliveries:
        if dl is own or rx not in dl.subfile.rx_set:
            continue
        cached_sum += _delivery_gain(dl, rx, h_eq, beams) * symbols[dl.subfile]
    own_gain = _delivery_gain(own, rx, h_eq, beams)
    if abs(own_gain) < 1e-300:
        return complex("nan"), float("inf")
    estimate = (y - cached_sum) / own_gain
    return estimate, abs(estimate - symbols[own.subfile])


@dataclass(frozen=True)
class BlockRecord:
    block_index: int
    n_nulls: int
    q_elements: int
    irs_status: str
    irs_residual: float
    channel_scale: float
    decode_errors: tuple[tuple[int, float], ...]
    delivered: int


@dataclass(frozen=True)
class EpisodeReport:
    params: SystemParams
    regime: str
    schedule_regime: str
    seed: int
    strictness: str
    l_size: int
    noise_variance: float
    success_threshold: float
    blocks: tuple[BlockRecord, ...]
    total_deliveries: int
    total_delivered: int
    sum_dof: Fraction
    per_user_dof: Fraction
    all_passed: bool
    infeasible_blocks: int
    max_decode_error: float
    max_irs_residual: float

    @property
    def h_blocks(self) -> int:
        return len(self.blocks)


def _derive_l(params: SystemParams, options: SimOptions) -> int:
    from .analytics import max_feasible_L

    if options.l_size is not None:
        return options.l_size
    return max_feasible_L(params.q_elements, params, options.strictness)


def build_schedule(params: SystemParams, regime: str, options: SimOptions) -> Schedule:
    """Construct the schedule an episode will run: full activity when the
    null budget covers all receivers at once, partial activity otherwise."""
    if regime not in REGIMES:
        raise SchedulingError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    if regime == REGIME_THM1 and params.mu_t != 1:
        raise SchedulingError("regime 'thm1' requires mu_t = 1")
    if regime != REGIME_THM1 and params.mu_t < 2:
        raise SchedulingError(f"regime {regime!r} requires mu_t >= 2")
    demand = options.demand if options.demand is not None else worst_case_demand(params)
    l_size = _derive_l(params, options)
    full_activity = params.mu_r + params.mu_t + l_size >= params.k_r

    if regime == REGIME_THM1:
        if full_activity:
            return schedule_theorem1(params, demand)
        return schedule_caseII(params, demand, l_size, mode="thm1")
    if regime == REGIME_THM2_PARTITION:
        system = find_subset_partition(params.m_groups, params.mu_t, options.design_budget)
        if system is None:
            raise SchedulingError(
                f"no ({params.m_groups}, {params.mu_t}) parallel-class design found within "
                "budget; use the ordered regime instead"
            )
        if full_activity:
            return schedule_theorem2_partition(params, demand, system)
        return schedule_caseII(params, demand, l_size, mode="thm2-partition", system=system)
    system = enumerate_ordered_partitions(params.m_groups, params.mu_t)
    if full_activity:
        return schedule_theorem2_ordered(params, demand, system)
    return schedule_caseII(params, demand, l_size, mode="thm2-ordered", system=system)


def simulate_block(
    plan: BlockPlan, params: SystemParams, seed: int, options: SimOptions
) -> BlockRecord:
    """Run one block end to end and measure every intended residual."""
    ch = sample_block_channels(params, plan.block_index, seed)
    nulls = required_nulls(plan)
    if options.disable_irs:
        irs_cfg = zero_irs(params.q_elements)
        info = IrsSolveInfo(IRS_DISABLED, 0.0, len(nulls), params.q_elements)
    else:
        irs_cfg, info = solve_irs(ch, nulls)
    h_eq = equivalent_channel(ch, irs_cfg)
    beams = beamformers_for_block(plan, h_eq, params.mu_t)
    symbols = _symbols_for(plan, seed)
    x = transmit_block(plan, beams, symbols, params.k_t)
    y = h_eq @ x
    if options.noise_variance > 0.0:
        rng = block_rng(seed, plan.block_index, stream=2)
        noise = rng.standard_normal(params.k_r) + 1j * rng.standard_normal(params.k_r)
        y = y + noise * math.sqrt(options.noise_variance / 2.0)
    errors = []
    delivered = 0
    for dl in plan.deliveries:
        _, residual = receiver_decode(y[dl.intended_rx - 1], dl.intended_rx, plan, h_eq, beams, symbols)
        errors.append((dl.intended_rx, residual))
        if residual < options.success_threshold:
            delivered += 1
    return BlockRecord(
        block_index=plan.block_index,
        n_nulls=len(nulls),
        q_elements=params.q_elements,
        irs_status=info.status,
        irs_residual=info.residual,
        channel_scale=ch.scale,
        decode_errors=tuple(errors),
        delivered=delivered,
    )


def run_episode(
    params: SystemParams,
    regime: str,
    seed: int,
    options: SimOptions = SimOptions(),
    schedule: Schedule | None = None,
) -> EpisodeReport:
    """Place, schedule, and simulate a whole delivery horizon.

    A prebuilt ``schedule`` (from :func:`build_schedule` with the same
    parameters) skips reconstruction so many seeds can share one schedule.
    The achieved rate counts only deliveries whose residual beat the
    threshold, as an exact rational over the block count.
    """
    if schedule is None:
        schedule = build_schedule(params, regime, options)
    records = [simulate_block(plan, params, seed, options) for plan in schedule.blocks]
    total_deliveries = sum(len(b.deliveries) for b in schedule.blocks)
    total_delivered = sum(r.delivered for r in records)
    infeasible = sum(1 for r in records if r.irs_status == STATUS_INFEASIBLE)
    sum_dof = achieved_dof(schedule, total_delivered)
    return EpisodeReport(
        params=params,
        regime=regime,
        schedule_regime=schedule.regime,
        seed=seed,
        strictness=options.strictness,
        l_size=schedule.l_size,
        noise_variance=options.noise_variance,
        success_threshold=options.success_threshold,
        blocks=tuple(records),
        total_deliveries=total_deliveries,
        total_delivered=total_delivered,
        sum_dof=sum_dof,
        per_user_dof=sum_dof / params.k_r,
        all_passed=total_delivered == total_deliveries,
        infeasible_blocks=infeasible,
        max_decode_error=max(
            (e for r in records for _, e in r.decode_errors), default=0.0
        ),
        max_irs_residual=max((r.irs_residual for r in records), default=0.0),
    )


@dataclass(frozen=True)
class SlopeEstimate:
    """Finite-power rate-growth estimate of the per-user rate exponent."""

    per_receiver: tuple[float, ...]
    mean: float
    powers: tuple[float, ...]


def estimate_dof_slope(
    params: SystemParams,
    regime: str,
    seed: int,
    powers: tuple[float, ...],
    options: SimOptions = SimOptions(),
    schedule: Schedule | None = None,
) -> SlopeEstimate:
    """Fit the growth of per-receiver achievable rate against log2(power).

    Transmit signals are rescaled per block so the strongest transmitter
    spends the power budget; rates use the exact surviving interference at
    each receiver under unit noise. Interference-free receivers slope to 1,
    interference-limited ones saturate and slope to 0.
    """
    if len(powers) < 2 or any(p < 1e3 for p in powers) or list(powers) != sorted(set(powers)):
        raise ValueError("powers must be >= 1e3, strictly increasing, and at least two")
    if schedule is None:
        schedule = build_schedule(params, regime, options)
    h = schedule.h_blocks
    rates = np.zeros((len(powers), params.k_r))
    for plan in schedule.blocks:
        ch = sample_block_channels(params, plan.block_index, seed)
        nulls = required_nulls(plan)
        if options.disable_irs:
            irs_cfg = zero_irs(params.q_elements)
        else:
            irs_cfg, _ = solve_irs(ch, nulls)
        h_eq = equivalent_channel(ch, irs_cfg)
        beams = beamformers_for_block(plan, h_eq, params.mu_t)
        symbols = _symbols_for(plan, seed)
        x = transmit_block(plan, beams, symbols, params.k_t)
        peak = float(np.abs(x).max())
        if peak == 0.0:
            continue
        y_clean = h_eq @ x
        for dl in plan.deliveries:
            rx = dl.intended_rx
            own_gain = _delivery_gain(dl, rx, h_eq, beams)
            cached = sum(
                _delivery_gain(other, rx, h_eq, beams) * symbols[other.subfile]
                for other in plan.deliveries
                if other is not dl and rx in other.subfile.rx_set
            )
            leak = y_clean[rx - 1] - cached - own_gain * symbols[dl.subfile]
            for n, p in enumerate(powers):
                alpha2 = p / peak**2
                sinr = alpha2 * abs(own_gain) ** 2 / (1.0 + alpha2 * abs(leak) ** 2)
                rates[n, rx - 1] += math.log2(1.0 + sinr) / h
    logp = np.log2(np.asarray(powers, dtype=float))
    slopes = tuple(float(np.polyfit(logp, rates[:, j], 1)[0]) for j in range(params.k_r))
    return SlopeEstimate(per_receiver=slopes, mean=float(np.mean(slopes)), powers=tuple(powers))


def episode_to_jsonable(report: EpisodeReport) -> dict:
    """Summary plus one record per block, for the structured-text report."""
    return {
        "regime": report.regime,
        "schedule_regime": report.schedule_regime,
        "seed": report.seed,
        "strictness": report.strictness,
        "l_size": report.l_size,
        "noise_variance": report.noise_variance,
        "success_threshold": report.success_threshold,
        "h_blocks": report.h_blocks,
        "total_deliveries": report.total_deliveries,
        "total_delivered": report.total_delivered,
        "sum_dof": [report.sum_dof.numerator, report.sum_dof.denominator],
        "per_user_dof": [report.per_user_dof.numerator, report.per_user_dof.denominator],
        "all_passed": report.all_passed,
        "infeasible_blocks": report.infeasible_blocks,
        "max_decode_error": report.max_decode_error,
        "max_irs_residual": report.max_irs_residual,
        "params": {
            "k_t": report.params.k_t,
            "k_r": report.params.k_r,
            "n_files": report.params.n_files,
            "f_packets": report.params.f_packets,
            "mu_t": report.params.mu_t,
            "mu_r": report.params.mu_r,
            "q_elements": report.params.q_elements,
        },
        "blocks": [
            {
                "block": r.block_index,
                "n_nulls": r.n_nulls,
                "q_elements": r.q_elements,
                "irs_status": r.irs_status,
                "irs_residual": r.irs_residual,
                "max_decode_error": max((e for _, e in r.decode_errors), default=0.0),
                "delivered": r.delivered,
            }
            for r in report.blocks
        ],
    }
