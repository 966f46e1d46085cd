import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import brute_census, brute_connected, brute_non_flat, ground, set_partitions
from rcmcumulants.errors import DomainError, ResourceLimitError
from rcmcumulants.partitions import (GroundSet, SetPartition, bell_number, block_index,
                                     connected_nonflat_upper_bound, enumerate_partitions,
                                     is_connected, is_non_flat, is_reference_scan_connected,
                                     iter_partition_chunks, maximal_partition_count,
                                     normalize_filter, partition_census, row_components)

SMALL_ROWS = [(2,), (2, 2), (2, 2, 2), (3, 3), (2, 3), (3, 1, 2), (1, 1, 1, 1), (2, 2, 2, 1)]


def test_ground_set_elements_row_major():
    g = GroundSet.uniform(2, 3)
    assert g.elements == ((1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3))
    assert g.index((2, 1)) == 3
    with pytest.raises(DomainError):
        g.index((3, 1))


def test_ground_set_rejects_empty_rows():
    with pytest.raises(DomainError):
        GroundSet((2, 0))


def test_block_index_is_canonical():
    g = GroundSet.uniform(2, 2)
    p = SetPartition.from_blocks(g, [[(2, 2)], [(1, 1), (2, 1)], [(1, 2)]])
    assert p.codes == (0, 1, 0, 2)
    assert block_index(p, (1, 1)) == 1
    assert block_index(p, (2, 2)) == 3


def test_rgs_validation():
    g = GroundSet.uniform(1, 3)
    with pytest.raises(DomainError):
        SetPartition(g, (0, 2, 1))
    with pytest.raises(DomainError):
        SetPartition(g, (0, 1))


def test_from_blocks_rejects_overlap_and_gaps():
    g = GroundSet.uniform(1, 2)
    with pytest.raises(DomainError):
        SetPartition.from_blocks(g, [[(1, 1)], [(1, 1), (1, 2)]])
    with pytest.raises(DomainError):
        SetPartition.from_blocks(g, [[(1, 1)]])


def test_flat_and_connected_examples():
    g = GroundSet.uniform(2, 2)
    flat = SetPartition.from_blocks(g, [[(1, 1), (1, 2)], [(2, 1)], [(2, 2)]])
    assert not is_non_flat(flat)
    split = SetPartition.from_blocks(g, [[(1, 1)], [(1, 2)], [(2, 1)], [(2, 2)]])
    assert is_non_flat(split) and not is_connected(split)
    assert row_components(split) == [(1,), (2,)]
    joined = SetPartition.from_blocks(g, [[(1, 1), (2, 2)], [(1, 2)], [(2, 1)]])
    assert is_connected(joined)


def test_reference_scan_misses_late_links():
    # blocks in canonical order link rows 1-3, then 2-4, then 3-4; the scan
    # skips the 2-4 block because it is disjoint from {1,3} when first seen
    g = GroundSet.uniform(4, 2)
    p = SetPartition.from_blocks(g, [[(1, 1), (3, 1)], [(1, 2)], [(2, 1), (4, 1)], [(2, 2)], [(3, 2), (4, 2)]])
    assert is_connected(p)
    assert not is_reference_scan_connected(p)


@pytest.mark.parametrize("n", range(0, 9))
def test_bell_numbers(n):
    assert bell_number(n) == [1, 1, 2, 5, 15, 52, 203, 877, 4140][n]


@pytest.mark.parametrize("rows", SMALL_ROWS)
@pytest.mark.parametrize("kind", ["all", "non_flat", "connected_non_flat"])
def test_census_matches_brute_force(rows, kind):
    assert partition_census(GroundSet(rows), kind).histogram == brute_census(rows, kind)


@pytest.mark.parametrize("rows", SMALL_ROWS)
def test_enumeration_is_lexicographic_and_exact(rows):
    g = GroundSet(rows)
    got = [p.codes for p in enumerate_partitions(g, "connected_non_flat")]
    assert got == sorted(got)
    assert len(set(got)) == len(got)
    expected = set()
    for blocks in set_partitions(ground(rows)):
        if brute_non_flat(blocks) and brute_connected(blocks, len(rows)):
            expected.add(SetPartition.from_blocks(g, blocks).codes)
    assert set(got) == expected


@pytest.mark.parametrize("rows", [(2, 2, 2, 2), (3, 3, 3), (2, 3, 2)])
@pytest.mark.parametrize("kind", ["all", "non_flat", "connected_non_flat", "reference_scan"])
def test_backends_agree(rows, kind):
    g = GroundSet(rows)
    a = np.concatenate([c for c, _ in iter_partition_chunks(g, kind, backend="numba")])
    b = np.concatenate([c for c, _ in iter_partition_chunks(g, kind, backend="numpy")])
    assert np.array_equal(a, b)


def test_worker_count_does_not_change_output():
    g = GroundSet.uniform(4, 2)
    one = [p.codes for p in enumerate_partitions(g, "connected_non_flat", workers=1)]
    two = [p.codes for p in enumerate_partitions(g, "connected_non_flat", workers=2)]
    assert one == two
    assert partition_census(g, "connected_non_flat", workers=2) == partition_census(g, "connected_non_flat")


def test_reference_small_censuses():
    assert partition_census(GroundSet.uniform(3, 2), "connected_non_flat").histogram == {2: 4, 3: 32, 4: 32}
    assert partition_census(GroundSet.uniform(2, 3), "connected_non_flat").total == 33
    assert partition_census(GroundSet.uniform(3, 3), "connected_non_flat").total == 2871
    assert partition_census(GroundSet.uniform(2, 4), "connected_non_flat").total == 208
    assert partition_census(GroundSet((3, 5)), "connected_non_flat").total == 135


def test_connectivity_definition_at_order_four():
    g = GroundSet.uniform(4, 2)
    true = partition_census(g, "connected_non_flat")
    assert true.histogram == brute_census((2, 2, 2, 2), "connected_non_flat")
    assert true.total == 1240
    scan = partition_census(g, "reference_scan")
    assert scan.histogram == {2: 8, 3: 208, 4: 624, 5: 352}


def test_reference_scan_matches_python_predicate():
    g = GroundSet.uniform(4, 2)
    fast = {p.codes for p in enumerate_partitions(g, "reference_scan")}
    slow = {p.codes for p in enumerate_partitions(g, "non_flat") if is_reference_scan_connected(p)}
    assert fast == slow


def test_filter_aliases():
    assert normalize_filter("connected-nonflat") == "connected_non_flat"
    assert normalize_filter("nonflat") == "non_flat"
    with pytest.raises(DomainError):
        normalize_filter("bogus")


def test_ground_set_limit(monkeypatch):
    g = GroundSet.uniform(5, 2)
    with pytest.raises(ResourceLimitError):
        partition_census(g, limit=8)
    monkeypatch.setenv("RCM_MAX_GROUND_SET", "9")
    with pytest.raises(ResourceLimitError):
        next(enumerate_partitions(g))


def test_upper_bound_dominates_counts():
    for n, r in [(2, 2), (3, 2), (2, 3), (3, 3), (2, 4)]:
        assert partition_census(GroundSet.uniform(n, r), "connected_non_flat").total <= \
            connected_nonflat_upper_bound(n, r)


def test_maximal_count_formula_small_orders():
    for r in (2, 3, 4):
        hist = partition_census(GroundSet.uniform(2, r), "connected_non_flat").histogram
        assert hist[1 + (r - 1) * 2] == maximal_partition_count(2, r)
    # the closed form does not survive to three rows
    hist = partition_census(GroundSet.uniform(3, 2), "connected_non_flat").histogram
    assert hist[4] == 32 and maximal_partition_count(3, 2) == 24


@st.composite
def partitions(draw):
    rows = tuple(draw(st.lists(st.integers(1, 3), min_size=1, max_size=4)))
    g = GroundSet(rows)
    codes, top = [], -1
    for _ in range(g.size):
        c = draw(st.integers(0, top + 1))
        codes.append(c)
        top = max(top, c)
    return SetPartition(g, tuple(codes))


@given(partitions())
def test_blocks_round_trip(p):
    assert SetPartition.from_blocks(p.ground, reversed(p.blocks)) == p
    assert SetPartition.from_codes(p.ground, list(p.encode())) == p
    assert sum(len(b) for b in p.blocks) == p.ground.size


@given(partitions())
def test_predicates_match_brute_force(p):
    blocks = [list(b) for b in p.blocks]
    assert is_non_flat(p) == brute_non_flat(blocks)
    assert is_connected(p) == brute_connected(blocks, p.ground.n_rows)
    # the scan never accepts a disconnected partition
    if is_reference_scan_connected(p):
        assert is_connected(p)


@given(partitions())
def test_row_components_cover_rows(p):
    comps = row_components(p)
    assert sorted(i for c in comps for i in c) == list(range(1, p.ground.n_rows + 1))
