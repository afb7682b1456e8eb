import math

import numpy as np
import pytest

from segmentkit.errors import ArgumentError, StructuralError
from segmentkit.grid import (
    ContinuousSignal,
    DiscreteSignal,
    Grid,
    build_prefix,
    coarsen,
    discretize,
    embed,
    heaviside,
    projection_error,
    refine,
)


def test_grid_rejects_nonpositive_size():
    with pytest.raises(ArgumentError):
        Grid(0)
    with pytest.raises(ArgumentError):
        Grid(True)


def test_last_cell_is_closed():
    grid = Grid(4)
    assert grid.cell_of(1.0) == 3
    assert grid.cell_of(0.25) == 1
    assert grid.edges[-1] == 1.0


def test_discretize_linear_signal_gives_cell_midpoints():
    samples = discretize(ContinuousSignal.polynomial([0.0, 1.0]), 4)
    np.testing.assert_allclose(samples.values, [0.125, 0.375, 0.625, 0.875], atol=1e-15)


def test_discretize_heaviside_on_even_grid_is_exact():
    samples = discretize(heaviside(0.5), 8)
    assert samples.values.tolist() == [0.0] * 4 + [1.0] * 4


def test_discretize_splits_a_jump_inside_a_cell():
    samples = discretize(heaviside(0.3), 2)
    np.testing.assert_allclose(samples.values, [0.4, 1.0])


def test_signal_validation():
    with pytest.raises(StructuralError):
        ContinuousSignal([0.0, 0.5], [[1.0]])
    with pytest.raises(StructuralError):
        ContinuousSignal([0.0, 0.6, 0.4, 1.0], [[1.0], [2.0], [3.0]])
    with pytest.raises(StructuralError):
        ContinuousSignal([0.0, 1.0], [[0.0, 0.0, 0.0, 0.0, 1.0]])
    with pytest.raises(StructuralError):
        ContinuousSignal.from_pieces([[0.0, 0.5, 1.0], [0.6, 1.0, 2.0]])
    with pytest.raises(StructuralError):
        DiscreteSignal.from_values([1.0, np.nan])


def test_norms_and_inner_products_are_exact():
    ramp = ContinuousSignal.polynomial([0.0, 1.0])
    assert ramp.norm2() == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert ramp.inner(heaviside(0.5)) == pytest.approx(0.375, abs=1e-15)
    assert (ramp - ramp).norm2() == 0.0
    assert ramp.norm2_on(0.5, 1.0) == pytest.approx(7.0 / 24.0, abs=1e-15)
    assert ramp.derivative_energy() == pytest.approx(1.0)


def test_discontinuities_and_constant_pieces():
    signal = ContinuousSignal.from_pieces([[0.0, 0.4, 0.2, 0.5], [0.4, 0.75, 1.0, -0.3], [0.75, 1.0, 0.1]])
    np.testing.assert_allclose(signal.discontinuities(), [0.4, 0.75])
    assert not signal.is_piecewise_constant()
    assert heaviside(0.5).is_piecewise_constant()
    assert heaviside(0.5).constant_on(0.5, 1.0) == 1.0
    assert heaviside(0.5).constant_on(0.25, 1.0) is None


def test_json_document_roundtrip():
    signal = ContinuousSignal.from_pieces([[0.0, 0.5, 1.0, 2.0], [0.5, 1.0, -1.0]])
    again = ContinuousSignal.from_json(signal.to_json())
    np.testing.assert_array_equal(again.breaks, signal.breaks)
    np.testing.assert_array_equal(again.coeffs, signal.coeffs)


def test_embed_preserves_the_weighted_norm():
    samples = DiscreteSignal.from_values([1.0, -2.0, 0.5])
    assert embed(samples).norm2() == pytest.approx(samples.norm2(), abs=1e-15)


def test_coarsen_undoes_refine():
    samples = DiscreteSignal.from_values([1.0, 2.0, 4.0])
    assert coarsen(refine(samples, 3), 3) == samples
    with pytest.raises(ArgumentError):
        coarsen(samples, 2)


def test_prefix_sums_survive_cancellation():
    values = np.array([1e16, 1.0, -1e16, 1.0])
    table = build_prefix(DiscreteSignal.from_values(values))
    assert table.range_sum(0, 4) == 2.0


def test_projection_error_matches_direct_difference():
    ramp = ContinuousSignal.polynomial([0.0, 1.0])
    direct = (ramp - embed(discretize(ramp, 8))).norm()
    assert projection_error(ramp, 8) == pytest.approx(direct, rel=1e-9)
    # a linear function loses 1 / (12 n^2) of its squared norm
    assert projection_error(ramp, 8) ** 2 == pytest.approx(1.0 / (12 * 64), rel=1e-9)


SIGNALS = [
    ContinuousSignal.polynomial([0.0, 1.0]),
    heaviside(0.3),
    ContinuousSignal.from_pieces([[0.0, 0.4, 0.2, 0.5], [0.4, 0.75, 1.0, -0.3], [0.75, 1.0, 0.1, 0.0, 2.0, -1.0]]),
    ContinuousSignal.polynomial([1.0, -4.0, 3.0, 2.5]),
]


@pytest.mark.parametrize("signal", SIGNALS)
@pytest.mark.parametrize("n", [1, 3, 8, 64])
def test_averaging_never_increases_the_norm(signal, n):
    assert embed(discretize(signal, n)).norm() <= signal.norm() + 1e-12


@pytest.mark.parametrize("signal", SIGNALS)
def test_averaging_twice_equals_averaging_once(signal):
    np.testing.assert_allclose(coarsen(discretize(signal, 8), 2).values, discretize(signal, 2).values,
                               rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("n", [1, 3, 10, 64])
def test_discretize_recovers_embedded_samples(rng, n):
    samples = DiscreteSignal.from_values(rng.normal(size=n))
    again = discretize(embed(samples), n)
    np.testing.assert_allclose(again.values, samples.values, rtol=1e-12, atol=1e-14)


def test_prefix_sums_match_exact_summation(rng):
    values = rng.normal(size=200000) * 1e3 + 1e8
    table = build_prefix(DiscreteSignal.from_values(values))
    for k in (1, 17, 99999, 200000):
        assert table.sums[k] == pytest.approx(math.fsum(values[:k]), rel=1e-15)
        assert table.squares[k] == pytest.approx(math.fsum(values[:k] ** 2), rel=1e-15)
    assert table.sums[0] == 0.0 and table.squares[0] == 0.0


def test_malformed_samples_and_pieces_are_structural_errors():
    with pytest.raises(StructuralError):
        DiscreteSignal.from_values([1.0, "x"])
    with pytest.raises(StructuralError):
        ContinuousSignal.from_pieces([[0, 1, 'x']])
    with pytest.raises(StructuralError):
        ContinuousSignal.from_pieces([None])
