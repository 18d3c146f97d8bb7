"""Delivery-schedule construction and exact-cover verification."""

import math
from collections import Counter
from fractions import Fraction

import pytest

from irs_cache_dof.combinatorics import enumerate_ordered_partitions, find_subset_partition
from irs_cache_dof.params import SystemParams
from irs_cache_dof.placement import split_library
from irs_cache_dof.scheduler import (
    DemandVector,
    SchedulingError,
    demanded_for_schedule,
    demanded_subfiles,
    schedule_caseII,
    schedule_theorem1,
    schedule_theorem2_ordered,
    schedule_theorem2_partition,
    verify_schedule_partition,
    worst_case_demand,
)

EX = SystemParams(k_t=3, k_r=4, n_files=12, f_packets=12, mu_t=1, mu_r=1, q_elements=6)


def test_demanded_subfiles_of_example_network():
    uni = split_library(EX)
    demanded = demanded_subfiles(uni, worst_case_demand(EX))
    # 9 per receiver, 36 total: K_R * K_T * C(K_R-1, mu_r)
    per_rx = Counter(rx for _, rx in demanded)
    assert all(per_rx[j] == 9 for j in range(1, 5))
    assert len(demanded) == 36


def test_demanded_subfiles_with_full_receiver_cache():
    p = SystemParams(k_t=2, k_r=3, n_files=3, f_packets=1, mu_t=1, mu_r=2)
    uni = split_library(p)
    demanded = demanded_subfiles(uni, worst_case_demand(p))
    # mu_r = K_R - 1 leaves one cache set per (file, transmitter) pair
    per_rx = Counter(rx for _, rx in demanded)
    assert all(per_rx[j] == p.k_t for j in p.receivers)


def test_theorem1_worked_example_layout():
    sched = schedule_theorem1(EX, worst_case_demand(EX))
    assert sched.regime == "T1-I"
    assert sched.h_blocks == 9
    assert all(len(b.deliveries) == 4 for b in sched.blocks)
    assert sum(len(b.deliveries) for b in sched.blocks) == 36
    # distinct intended receivers per block
    for b in sched.blocks:
        assert len({d.intended_rx for d in b.deliveries}) == 4
    # per-block topology cut count: L + L*L with L = 2
    assert all(len(b.null_links) == 6 for b in sched.blocks)


def test_theorem1_cover_is_exact():
    uni = split_library(EX)
    sched = schedule_theorem1(EX, worst_case_demand(EX))
    report = verify_schedule_partition(sched, demanded_for_schedule(uni, sched))
    assert report.ok


def test_theorem1_pascal_split_per_super_block():
    # within one super-block, each receiver j != 1 takes C(K_R-2, mu_r-1)
    # cache-covered deliveries and C(K_R-2, mu_r) surface-covered ones
    p = SystemParams(k_t=4, k_r=5, n_files=5, f_packets=1, mu_t=1, mu_r=2)
    sched = schedule_theorem1(p, worst_case_demand(p))
    per_super = math.comb(p.k_r - 1, p.mu_r)
    for s in range(p.k_t):
        blocks = sched.blocks[s * per_super : (s + 1) * per_super]
        for j in range(2, p.k_r + 1):
            from_lead = sum(
                1
                for b in blocks
                for d in b.deliveries
                if d.intended_rx == j and 1 in d.subfile.rx_set
            )
            from_own = sum(
                1
                for b in blocks
                for d in b.deliveries
                if d.intended_rx == j and 1 not in d.subfile.rx_set
            )
            assert from_lead == math.comb(p.k_r - 2, p.mu_r - 1)
            assert from_own == math.comb(p.k_r - 2, p.mu_r)
            assert from_lead + from_own == per_super


def test_theorem1_requires_enough_transmitters():
    p = SystemParams(k_t=2, k_r=4, n_files=4, f_packets=1, mu_t=1, mu_r=1)
    with pytest.raises(SchedulingError):
        schedule_theorem1(p, worst_case_demand(p))


def test_dropped_block_reported_missing():
    uni = split_library(EX)
    sched = schedule_theorem1(EX, worst_case_demand(EX))
    truncated = sched.__class__(
        regime=sched.regime,
        tx_mode=sched.tx_mode,
        params=sched.params,
        demand=sched.demand,
        l_size=sched.l_size,
        blocks=sched.blocks[1:],
    )
    report = verify_schedule_partition(truncated, demanded_for_schedule(uni, sched))
    assert not report.ok
    assert len(report.missing) == 4
    assert "never delivered" in report.summary()


def test_corrupted_delivery_reported_as_extra_and_missing():
    # swapping one delivery's cache set produces one undemanded delivery and
    # one missing demanded subfile
    from dataclasses import replace

    uni = split_library(EX)
    sched = schedule_theorem1(EX, worst_case_demand(EX))
    block = sched.blocks[0]
    bad_delivery = replace(
        block.deliveries[0],
        subfile=replace(block.deliveries[0].subfile, rx_set=(block.deliveries[0].intended_rx,)),
    )
    bad_block = replace(block, deliveries=(bad_delivery,) + block.deliveries[1:])
    corrupted = replace(sched, blocks=(bad_block,) + sched.blocks[1:])
    report = verify_schedule_partition(corrupted, demanded_for_schedule(uni, sched))
    assert not report.ok
    assert len(report.missing) == 1 and len(report.extra) == 1


def test_duplicated_block_reported():
    uni = split_library(EX)
    sched = schedule_theorem1(EX, worst_case_demand(EX))
    doubled = sched.__class__(
        regime=sched.regime,
        tx_mode=sched.tx_mode,
        params=sched.params,
        demand=sched.demand,
        l_size=sched.l_size,
        blocks=sched.blocks + sched.blocks[:1],
    )
    report = verify_schedule_partition(doubled, demanded_for_schedule(uni, sched))
    assert not report.ok
    assert len(report.duplicates) == 4
    assert "duplicate" in report.summary()


T2 = SystemParams(k_t=4, k_r=4, n_files=4, f_packets=1, mu_t=2, mu_r=1, q_elements=4)


def test_theorem2_partition_block_structure():
    system = find_subset_partition(2, 2)
    sched = schedule_theorem2_partition(T2, worst_case_demand(T2), system)
    assert sched.regime == "T2-IA"
    assert sched.h_blocks == 6 * 3 * 2  # C(4,2) * C(3,1) * C(2,1)
    assert all(len(b.deliveries) == 4 for b in sched.blocks)
    # serving groups inside one block are disjoint
    for b in sched.blocks:
        groups = {d.serving_txs for d in b.deliveries}
        members = [t for g in groups for t in g]
        assert len(members) == len(set(members))
    # per-block cut count: mu_t * L * (L+1) with L = 1
    assert all(len(b.null_links) == 4 for b in sched.blocks)


def test_theorem2_partition_cover_is_exact():
    uni = split_library(T2)
    system = find_subset_partition(2, 2)
    sched = schedule_theorem2_partition(T2, worst_case_demand(T2), system)
    assert verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok


def test_theorem2_super_block_rotation_covers_windows():
    # across one hyper-block, each slot's serving subsets are exactly the
    # M subsets of one class, each hit once per (R, T) pair
    system = find_subset_partition(2, 2)
    sched = schedule_theorem2_partition(T2, worst_case_demand(T2), system)
    per_super = 3 * 2  # C(K_R-1, mu_r) * C(K_R-mu_r-1, mu_t-1)
    m = 2
    for hyper in range(3):  # C(M*mu_t - 1, mu_t - 1) hyper-blocks
        blocks = sched.blocks[hyper * per_super * m : (hyper + 1) * per_super * m]
        lead_counts = Counter(b.deliveries[0].serving_txs for b in blocks)
        window = set(system.classes[hyper])
        assert set(lead_counts) == window
        assert all(c == per_super for c in lead_counts.values())


def test_theorem2_serving_set_fresh_per_r_t_pair():
    # no serving group repeats under the same (R, T) pair across blocks
    system = find_subset_partition(2, 2)
    sched = schedule_theorem2_partition(T2, worst_case_demand(T2), system)
    seen = set()
    for b in sched.blocks:
        key = (b.cached_rxs, b.zf_rxs, b.deliveries[0].serving_txs)
        assert key not in seen
        seen.add(key)


def test_theorem2_zero_l_no_nulls():
    p = SystemParams(k_t=4, k_r=3, n_files=3, f_packets=1, mu_t=2, mu_r=1)
    system = find_subset_partition(2, 2)
    sched = schedule_theorem2_partition(p, worst_case_demand(p), system)
    assert sched.l_size == 0
    assert all(len(b.null_links) == 0 for b in sched.blocks)
    assert all(len({d.serving_txs for d in b.deliveries}) == 1 for b in sched.blocks)
    uni = split_library(p)
    assert verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok


def test_theorem2_ordered_block_counts():
    system = enumerate_ordered_partitions(2, 2)
    sched = schedule_theorem2_ordered(T2, worst_case_demand(T2), system)
    assert sched.regime == "T2-IB"
    assert sched.h_blocks == 6 * 3 * 2
    assert system.num_windows == 3  # (1/M!) * (M mu_t)!/(mu_t!)^M
    uni = split_library(T2, mode="ordered")
    assert verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok


def test_caseII_theorem1_fraction():
    # K_T=3, K_R=4, mu_r=1, L=1: per-user share (L + mu_r + 1)/K_R = 3/4
    p = SystemParams(k_t=3, k_r=4, n_files=12, f_packets=12, mu_t=1, mu_r=1, q_elements=2)
    sched = schedule_caseII(p, worst_case_demand(p), l_size=1, mode="thm1")
    assert sched.regime == "T1-II"
    assert sched.h_blocks == 3 * math.comb(4, 3) * math.comb(2, 1)
    active_per_rx = Counter()
    for b in sched.blocks:
        assert len(b.deliveries) == 3
        for j in b.active_rxs:
            active_per_rx[j] += 1
    # every receiver is served in exactly (L + mu_r + 1)/K_R of the blocks
    for j in p.receivers:
        assert Fraction(active_per_rx[j], sched.h_blocks) == Fraction(3, 4)
    uni = split_library(p)
    assert verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok


def test_caseII_theorem2_fraction():
    p = SystemParams(k_t=4, k_r=5, n_files=5, f_packets=1, mu_t=2, mu_r=1, q_elements=4)
    system = find_subset_partition(2, 2)
    sched = schedule_caseII(p, worst_case_demand(p), l_size=1, mode="thm2-partition", system=system)
    assert sched.regime == "T2-II"
    for b in sched.blocks:
        assert len(b.deliveries) == 4  # mu_r + mu_t + L
    share = Counter()
    for b in sched.blocks:
        for j in b.active_rxs:
            share[j] += 1
    for j in p.receivers:
        assert Fraction(share[j], sched.h_blocks) == Fraction(4, 5)
    uni = split_library(p)
    assert verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok


def test_caseII_zero_l_active_subsets():
    # L=0: active sets are all K_R subsets of size mu_r + 1; each receiver
    # active in K_R - 1 of them
    p = SystemParams(k_t=3, k_r=3, n_files=3, f_packets=1, mu_t=1, mu_r=1)
    sched = schedule_caseII(p, worst_case_demand(p), l_size=0, mode="thm1")
    actives = {b.active_rxs for b in sched.blocks}
    assert len(actives) == math.comb(3, 2)
    for j in p.receivers:
        assert sum(1 for a in actives if j in a) == 2
    uni = split_library(p)
    assert verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok


def test_caseII_rejects_full_activity_parameters():
    with pytest.raises(SchedulingError):
        schedule_caseII(EX, worst_case_demand(EX), l_size=2, mode="thm1")


def test_repeated_demands_are_distinct_deliveries():
    p = SystemParams(k_t=3, k_r=4, n_files=12, f_packets=12, mu_t=1, mu_r=1)
    demand = DemandVector(d=(5, 5, 7, 7))
    uni = split_library(p)
    sched = schedule_theorem1(p, demand)
    assert verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok


def test_serving_groups_cache_their_subfiles():
    # every delivery's serving group is exactly the set of transmitters
    # caching the subfile, in both transmitter-index modes
    cases = []
    sched1 = schedule_theorem1(EX, worst_case_demand(EX))
    cases.append((split_library(EX), sched1))
    system = find_subset_partition(2, 2)
    sched2 = schedule_theorem2_partition(T2, worst_case_demand(T2), system)
    cases.append((split_library(T2), sched2))
    osys = enumerate_ordered_partitions(2, 2)
    sched3 = schedule_theorem2_ordered(T2, worst_case_demand(T2), osys)
    cases.append((split_library(T2, mode="ordered"), sched3))
    for uni, sched in cases:
        for b in sched.blocks:
            for d in b.deliveries:
                assert tuple(sorted(d.serving_txs)) == tuple(
                    sorted(uni.tx_members(d.subfile))
                )


def test_exhaustive_cover_theorem1_desk_scale():
    for k_t in range(1, 7):
        for k_r in range(2, 7):
            for mu_r in range(1, k_r):
                if k_r - mu_r > k_t:  # needs L+1 <= K_T serving slots
                    continue
                p = SystemParams(k_t=k_t, k_r=k_r, n_files=k_r, f_packets=1, mu_t=1, mu_r=mu_r)
                uni = split_library(p)
                sched = schedule_theorem1(p, worst_case_demand(p))
                report = verify_schedule_partition(sched, demanded_for_schedule(uni, sched))
                assert report.ok, (k_t, k_r, mu_r, report.summary())


def test_exhaustive_cover_theorem2_desk_scale():
    for mu_t in (2, 3):
        for m in (1, 2, 3):
            k_t = m * mu_t
            if k_t > 6:
                continue
            for k_r in range(2, 7):
                for mu_r in range(1, k_r):
                    l_size = k_r - mu_r - mu_t
                    if l_size < 0 or l_size > m - 1:
                        continue
                    p = SystemParams(k_t=k_t, k_r=k_r, n_files=k_r, f_packets=1, mu_t=mu_t, mu_r=mu_r)
                    system = find_subset_partition(m, mu_t)
                    sched = schedule_theorem2_partition(p, worst_case_demand(p), system)
                    uni = split_library(p)
                    ok = verify_schedule_partition(sched, demanded_for_schedule(uni, sched)).ok
                    assert ok, (mu_t, m, k_r, mu_r)
                    osys = enumerate_ordered_partitions(m, mu_t)
                    osched = schedule_theorem2_ordered(p, worst_case_demand(p), osys)
                    ouni = split_library(p, mode="ordered")
                    ok = verify_schedule_partition(osched, demanded_for_schedule(ouni, osched)).ok
                    assert ok, ("ordered", mu_t, m, k_r, mu_r)
