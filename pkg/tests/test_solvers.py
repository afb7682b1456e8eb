import numpy as np
import pytest

from segmentkit.errors import ArgumentError, RoutingError, TruncationWarning
from segmentkit.functionals import fixed_partition_objective
from segmentkit.grid import ContinuousSignal, DiscreteSignal, Grid, discretize, heaviside
from segmentkit.partitions import GridPartition, Partition, edges_to_partition
from segmentkit.solvers import (
    BlockSystem,
    block_eigenvalues,
    block_matrix,
    continuous_lipschitz_limit,
    cosine_moments,
    partition_solver_continuous,
    partition_solver_discrete,
    solve_block_discrete,
    solve_block_mean,
    solve_block_spectral,
    solver_lipschitz_bound,
    spectral_gap,
)


@pytest.mark.parametrize("m", range(1, 65))
def test_block_eigenvalues_match_dense_spectrum(m):
    dense = np.linalg.eigvalsh(block_matrix(m))
    np.testing.assert_allclose(np.sort(block_eigenvalues(m)), dense, atol=1e-9)


def test_block_matrix_rows_sum_to_zero():
    for m in (1, 2, 5):
        np.testing.assert_array_equal(block_matrix(m).sum(axis=1), np.zeros(m))


def test_elimination_matches_dense_and_dct_solves(rng):
    for _ in range(10):
        m = int(rng.integers(2, 40))
        system = BlockSystem(rng.normal(size=m), 64, float(rng.uniform(0.1, 10.0)))
        dense = np.linalg.solve(system.matrix(), system.rhs())
        np.testing.assert_allclose(solve_block_discrete(system), dense, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(solve_block_spectral(system), dense, rtol=1e-9, atol=1e-12)


def test_constant_block_is_reproduced_exactly():
    system = BlockSystem(np.full(5, 0.3), 16, 2.0)
    assert solve_block_discrete(system).tolist() == [0.3] * 5


def test_mu_zero_is_routed_to_the_mean():
    system = BlockSystem(np.array([1.0, 2.0]), 4, 0.0)
    with pytest.raises(RoutingError):
        solve_block_discrete(system)
    assert solve_block_mean(np.array([1.0, 2.0])).tolist() == [1.5, 1.5]


def test_block_system_validation():
    with pytest.raises(ArgumentError):
        BlockSystem(np.array([]), 4, 1.0)
    with pytest.raises(ArgumentError):
        BlockSystem(np.ones(5), 4, 1.0)


def test_partition_solver_is_blockwise():
    g = DiscreteSignal.from_values([0.0, 0.5, 1.0, 2.0])
    p = GridPartition(Grid(4), (0, 2, 4))
    solution = partition_solver_discrete(g, p, 0.0)
    assert solution.values.tolist() == [0.25, 0.25, 1.5, 1.5]
    assert solution.block_count == 2


def test_discrete_solution_contracts(rng):
    for _ in range(30):
        n = int(rng.integers(2, 64))
        g = DiscreteSignal.from_values(rng.normal(size=n))
        p = edges_to_partition(rng.integers(0, 2, size=n - 1))
        mu = float(rng.choice([0.0, 0.5, 3.0, 30.0]))
        assert partition_solver_discrete(g, p, mu).norm() <= g.norm() + 1e-12


def test_fixed_partition_objective_is_stationary(rng):
    n = 64
    for _ in range(50):
        g = DiscreteSignal.from_values(rng.normal(size=n))
        p = edges_to_partition((rng.uniform(size=n - 1) < 0.1).astype(int))
        mu = float(rng.uniform(0.1, 10.0))
        solution = partition_solver_discrete(g, p, mu)
        best = fixed_partition_objective(solution, g, p, mu)
        for _ in range(20):
            direction = rng.normal(size=n)
            for epsilon in (1e-4, -1e-4, 1e-5, -1e-5):
                moved = DiscreteSignal(g.grid, solution.values + epsilon * direction)
                assert fixed_partition_objective(moved, g, p, mu) >= best - 1e-9


def test_discrete_jump_partition_drops_invisible_breaks():
    g = discretize(heaviside(0.5), 8)
    p = GridPartition(Grid(8), (0, 2, 4, 8))
    solution = partition_solver_discrete(g, p, 1.0)
    assert solution.jump_partition().indices == (0, 4, 8)
    assert solution.values.tolist() == [0.0] * 4 + [1.0] * 4


def test_lipschitz_bound_uses_the_longest_block():
    g = DiscreteSignal.from_values(np.ones(16))
    p = GridPartition(Grid(16), (0, 4, 16))
    assert solver_lipschitz_bound(p, g) == pytest.approx(1.0 / spectral_gap(12, 16))
    assert solver_lipschitz_bound(GridPartition.full(16), g) == 0.0
    assert continuous_lipschitz_limit(g, 0.75) == pytest.approx(0.75 ** 2 / np.pi ** 2)


def test_cosine_moments_of_a_constant():
    moments = cosine_moments(ContinuousSignal.constant(2.0), 0.25, 1.0, 8)
    assert moments[0] == pytest.approx(2.0 * np.sqrt(0.75))
    assert not np.any(moments[1:])


def test_cosine_moments_of_a_ramp_match_quadrature():
    ramp = ContinuousSignal.polynomial([0.1, 1.0, -0.5])
    x = np.linspace(0.2, 0.7, 200001)
    moments = cosine_moments(ramp, 0.2, 0.7, 4)
    for s in range(5):
        basis = np.sqrt(2.0 / 0.5) * np.cos(s * np.pi * (x - 0.2) / 0.5) if s else np.full_like(x, 1.0 / np.sqrt(0.5))
        assert moments[s] == pytest.approx(np.trapezoid(ramp(x) * basis, x), abs=1e-9)


def test_continuous_solver_matches_closed_form():
    mu = 2.0
    solution = partition_solver_continuous(ContinuousSignal.polynomial([0.0, 1.0]), Partition((0.0, 1.0)), mu)
    a = (np.cosh(mu) - 1.0) / (mu * np.sinh(mu))
    x = np.array([0.0, 0.3, 0.8, 1.0])
    exact = x + a * np.cosh(mu * x) - np.sinh(mu * x) / mu
    np.testing.assert_allclose(solution.evaluate(x), exact, atol=1e-6)


def test_continuous_solver_potts_gives_block_means():
    solution = partition_solver_continuous(heaviside(0.5), Partition((0.0, 0.5, 1.0)), 0.0)
    assert solution.is_piecewise_constant()
    np.testing.assert_allclose(solution.evaluate([0.1, 0.9]), [0.0, 1.0], atol=1e-15)
    assert solution.reduced_cost() == pytest.approx(0.0, abs=1e-15)
    assert solution.jump_partition() == Partition((0.0, 0.5, 1.0))


def test_continuous_jump_partition_ignores_continuous_breaks():
    solution = partition_solver_continuous(heaviside(0.5), Partition((0.0, 0.25, 0.5, 1.0)), 3.0)
    assert solution.jump_partition() == Partition((0.0, 0.5, 1.0))


def test_truncation_warning():
    ramp = ContinuousSignal.polynomial([0.0, 1.0])
    with pytest.warns(TruncationWarning):
        solution = partition_solver_continuous(ramp, Partition((0.0, 1.0)), 100.0, modes=1)
    assert solution.truncation_bound > 0


def test_continuous_solution_contracts():
    g = ContinuousSignal.from_pieces([[0.0, 0.4, 0.2, 0.5], [0.4, 0.75, 1.0, -0.3], [0.75, 1.0, 0.1]])
    for mu in (0.0, 1.0, 10.0):
        solution = partition_solver_continuous(g, Partition((0.0, 0.3, 1.0)), mu)
        assert solution.norm() <= g.norm() + 1e-12


def test_two_sample_block_by_hand():
    solution = solve_block_discrete(BlockSystem(np.array([0.0, 1.0]), 2, 1.0))
    np.testing.assert_allclose(solution, [4.0 / 9.0, 5.0 / 9.0], rtol=1e-13)


@pytest.mark.parametrize("mu", [1e-3, 1e-4])
def test_small_mu_approaches_the_block_mean(rng, mu):
    n = 512
    g = rng.normal(size=n) + 5.0
    system = BlockSystem(g, n, mu)
    solution = solve_block_discrete(system)
    np.testing.assert_allclose(solution, solve_block_spectral(system), rtol=0, atol=1e-12)

    mean = solve_block_mean(g)
    bound = mu ** 2 / spectral_gap(n, n) * np.linalg.norm(g - mean)
    assert np.max(np.abs(solution - mean)) <= bound + 1e-12
    assert abs(np.mean(solution) - mean[0]) < 1e-12


def test_large_mu_reproduces_the_block():
    g = np.array([0.3, -1.0, 2.0, 0.5, 0.0])
    solution = solve_block_discrete(BlockSystem(g, 16, 1e6 * 16))
    np.testing.assert_allclose(solution, g, rtol=1e-3, atol=1e-9)


def test_residual_of_the_block_system(rng):
    for mu in (1e-4, 0.1, 10.0):
        system = BlockSystem(rng.normal(size=100) + 3.0, 128, mu)
        residual = system.matrix() @ solve_block_discrete(system) - system.rhs()
        assert np.linalg.norm(residual) <= 1e-10 * np.linalg.norm(system.g_block)


@pytest.mark.parametrize("mu", [0.0, 0.5, 4.0])
def test_partition_solver_is_linear_in_the_signal(rng, mu):
    n = 48
    p = edges_to_partition(rng.integers(0, 2, size=n - 1))
    first, second = rng.normal(size=n), rng.normal(size=n)
    combined = partition_solver_discrete(DiscreteSignal.from_values(2.5 * first - 0.75 * second), p, mu)
    expected = (2.5 * partition_solver_discrete(DiscreteSignal.from_values(first), p, mu).values
                - 0.75 * partition_solver_discrete(DiscreteSignal.from_values(second), p, mu).values)
    np.testing.assert_allclose(combined.values, expected, rtol=0, atol=1e-10)


@pytest.mark.parametrize("a", [0.3, 0.5, 1.0 / 3.0])
@pytest.mark.parametrize("mu", [0.0, 1.0, 5.0])
def test_step_solutions_are_local_to_the_block_of_the_jump(rng, a, mu):
    for n in (16, 64):
        g = discretize(heaviside(a), n)
        for _ in range(10):
            p = edges_to_partition(rng.integers(0, 2, size=n - 1))
            values = partition_solver_discrete(g, p, mu).values
            cell = min(int(a * n), n - 1)
            block = int(np.searchsorted(p.indices, cell, side='right')) - 1
            left, right = p.indices[block], p.indices[block + 1]
            np.testing.assert_allclose(values[:left], 0.0, atol=1e-15)
            np.testing.assert_allclose(values[right:], 1.0, atol=1e-15)
