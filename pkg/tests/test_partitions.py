import numpy as np
import pytest

from segmentkit.errors import ArgumentError, StructuralError
from segmentkit.grid import DiscreteSignal, Grid
from segmentkit.partitions import (
    NOT_IN_REGIME,
    GridPartition,
    Partition,
    default_threshold,
    edges_to_partition,
    grid_partition_of,
    hausdorff_distance,
    intervals,
    jump_count,
    jump_partition,
    match_intervals,
    partition_of,
    partition_to_edges,
    refines,
    threshold_partition,
    union,
)


def test_partition_validation():
    with pytest.raises(StructuralError):
        Partition((0.0, 0.5))
    with pytest.raises(StructuralError):
        Partition((0.0, 0.6, 0.4, 1.0))
    with pytest.raises(StructuralError):
        Partition((1.0,))
    with pytest.raises(StructuralError):
        GridPartition(Grid(4), (0, 2, 2, 4))
    with pytest.raises(StructuralError):
        GridPartition(Grid(4), (0, 2, 3))


def test_partition_snaps_endpoints_within_tolerance():
    p = Partition((1e-14, 0.5, 1.0 - 1e-14))
    assert p.points == (0.0, 0.5, 1.0)


def test_jump_counts():
    assert jump_count(Partition((0.0, 1.0))) == 0
    assert jump_count(GridPartition(Grid(8), (0, 3, 5, 8))) == 2
    assert GridPartition.full(5).jumps == 4


def test_hausdorff_distance_is_a_metric_on_examples():
    p = Partition((0.0, 0.5, 1.0))
    q = Partition((0.0, 0.25, 0.5, 1.0))
    assert hausdorff_distance(p, p) == 0.0
    assert hausdorff_distance(p, q) == pytest.approx(0.25)
    assert hausdorff_distance(q, p) == hausdorff_distance(p, q)
    assert hausdorff_distance(Partition((0.0, 1.0)), Partition((0.0, 0.5, 1.0))) == pytest.approx(0.5)


def test_hausdorff_distance_accepts_grid_partitions():
    p = GridPartition(Grid(8), (0, 4, 8))
    assert hausdorff_distance(p, Partition((0.0, 0.5, 1.0))) == 0.0


def test_grid_partition_of_checks_exactness():
    p = Partition((0.0, 0.25, 1.0))
    assert grid_partition_of(p, 8).indices == (0, 2, 8)
    with pytest.raises(ArgumentError):
        grid_partition_of(p, 6)


def test_threshold_partition_places_break_after_the_jump():
    f = DiscreteSignal.from_values([0.0, 0.0, 1.0, 1.0])
    assert threshold_partition(f, 0.5).indices == (0, 2, 4)
    assert threshold_partition(f, 2.0).indices == (0, 4)
    assert jump_partition(DiscreteSignal.from_values([1.0, 1.0, 1.0])).indices == (0, 3)


def test_default_threshold():
    assert default_threshold(0.25, 2.0, 4) == pytest.approx(0.5)


def test_edges_bijection(rng):
    for _ in range(20):
        edges = rng.integers(0, 2, size=9)
        p = edges_to_partition(edges)
        assert p.n == 10
        np.testing.assert_array_equal(partition_to_edges(p), edges)
    with pytest.raises(ArgumentError):
        edges_to_partition([0, 2, 1])
    with pytest.raises(ArgumentError):
        edges_to_partition([0, 1], n=5)


def test_refines_and_union():
    coarse = GridPartition(Grid(8), (0, 4, 8))
    fine = GridPartition(Grid(8), (0, 2, 4, 8))
    assert refines(fine, coarse)
    assert not refines(coarse, fine)
    assert union(coarse, GridPartition(Grid(8), (0, 2, 8))) == fine

    joined = union(Partition((0.0, 0.3, 1.0)), Partition((0.0, 0.6, 1.0)))
    assert joined == partition_of([0.0, 0.3, 0.6, 1.0])


def test_intervals():
    decomposition = intervals(Partition((0.0, 0.25, 1.0)))
    assert len(decomposition) == 2
    assert decomposition[1] == (0.25, 1.0)


def test_match_intervals_inside_the_regime():
    limit = Partition((0.0, 0.5, 1.0))
    approx = Partition((0.0, 0.52, 1.0))
    matches = match_intervals(approx, limit)
    assert [m.limit for m in matches] == [(0.0, 0.5), (0.5, 1.0)]
    assert matches[0].matched == (0.0, 0.52)
    assert matches[1].matched == (0.52, 1.0)


def test_match_intervals_outside_the_regime():
    limit = Partition((0.0, 0.5, 1.0))
    matches = match_intervals(Partition((0.0, 1.0)), limit)
    assert all(m.matched is NOT_IN_REGIME for m in matches)
    assert not NOT_IN_REGIME


def random_partition(rng) -> Partition:
    return partition_of([0.0, 1.0, *rng.uniform(0.01, 0.99, size=int(rng.integers(0, 6)))])


def test_hausdorff_distance_satisfies_the_triangle_inequality(rng):
    for _ in range(500):
        p, q, r = random_partition(rng), random_partition(rng), random_partition(rng)
        assert hausdorff_distance(p, r) <= hausdorff_distance(p, q) + hausdorff_distance(q, r) + 1e-12
        assert hausdorff_distance(p, q) == hausdorff_distance(q, p)
        assert hausdorff_distance(p, p) == 0.0


@pytest.mark.parametrize("n", [2, 16, 101])
def test_larger_thresholds_give_coarser_partitions(rng, n):
    f = DiscreteSignal.from_values(np.cumsum(rng.normal(size=n)))
    thresholds = np.sort(rng.uniform(0.0, 3.0, size=12))
    partitions = [threshold_partition(f, threshold) for threshold in thresholds]
    for finer, coarser in zip(partitions, partitions[1:]):
        assert refines(finer, coarser)
