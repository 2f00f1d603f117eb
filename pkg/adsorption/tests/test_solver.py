import numpy as np
import pytest
from django.core.exceptions import ValidationError

from adsorption.solver import (BOUND_TOLERANCE, GAS, SOLID, Grid, mass_balance_residual,
                               restrict, solve, solve_batch)


class TestGrid:
    def test_cell_centres_and_levels(self, grid):
        assert grid.xi_centers[0] == pytest.approx(0.005)
        assert grid.xi_centers[-1] == pytest.approx(0.995)
        assert np.all(np.diff(grid.xi_centers) > 0)
        assert grid.tau_levels[0] == 0.0
        assert grid.tau_levels[-1] == 1.0
        assert len(grid.tau_levels) == 101

    def test_coordinates_are_xi_major(self, grid):
        coords = grid.coordinates()

        assert coords.shape == (100 * 101, 2)
        np.testing.assert_array_equal(coords[:101, 0], grid.xi_centers[0])
        np.testing.assert_array_equal(coords[:101, 1], grid.tau_levels)

    def test_substeps_shorten_the_implicit_step(self):
        assert Grid(substeps=4).dtau == pytest.approx(0.0025)

    def test_if_sizes_are_invalid_raises_error(self):
        with pytest.raises(ValidationError):
            Grid(n_x=0, n_t=1)


class TestSolve:
    def test_saturated_bed_is_a_fixed_point(self, solve_ic, grid):
        out = solve_ic(np.ones(grid.n_x))

        assert np.max(np.abs(out.gas.values - 1.0)) <= 1e-12
        assert np.max(np.abs(out.solid.values - 1.0)) <= 1e-12

    def test_first_column_holds_the_initial_condition(self, solve_ic, random_ic):
        ic = random_ic(np.random.default_rng(0))

        out = solve_ic(ic)

        np.testing.assert_array_equal(out.gas.values[:, 0], ic)
        np.testing.assert_array_equal(out.solid.values[:, 0], ic)
        assert out.gas.phase == GAS
        assert out.solid.phase == SOLID

    def test_clean_bed_breaks_through_monotonically(self, solve_ic, grid):
        gas = solve_ic(np.zeros(grid.n_x)).gas.values

        assert np.all(np.diff(gas, axis=1) >= -1e-12)
        # the inlet cell leads every later cell
        assert np.all(gas[0, 1:] >= gas[1:, 1:].max(axis=0) - 1e-12)

    def test_is_affine_in_the_initial_condition(self, solve_ic, random_ic):
        rng = np.random.default_rng(1)
        for _ in range(20):
            u1, u2 = random_ic(rng), random_ic(rng)
            first, second = solve_ic(u1), solve_ic(u2)
            for alpha in np.arange(1, 10) / 10:
                mixed = solve_ic(alpha * u1 + (1 - alpha) * u2)
                for phase in ('gas', 'solid'):
                    expected = alpha * getattr(first, phase).values \
                        + (1 - alpha) * getattr(second, phase).values
                    assert np.max(np.abs(getattr(mixed, phase).values - expected)) <= 1e-10

    def test_outputs_stay_within_bounds(self, solve_ic, random_ic):
        rng = np.random.default_rng(2)
        for _ in range(10):
            out = solve_ic(random_ic(rng))
            for values in (out.gas.values, out.solid.values):
                assert values.min() >= -BOUND_TOLERANCE
                assert values.max() <= 1 + BOUND_TOLERANCE

    def test_ordered_initial_conditions_give_ordered_fields(self, solve_ic, random_ic):
        rng = np.random.default_rng(3)
        lower = random_ic(rng, high=0.5)
        upper = lower + rng.uniform(0.0, 0.5, size=lower.size)

        low, high = solve_ic(lower), solve_ic(upper)

        assert np.all(low.gas.values <= high.gas.values + 1e-10)
        assert np.all(low.solid.values <= high.solid.values + 1e-10)

    def test_batch_matches_single_solves(self, coeffs, grid, random_ic):
        rng = np.random.default_rng(4)
        ics = np.array([random_ic(rng) for _ in range(3)])

        gas, solid, residual = solve_batch(ics, coeffs, grid)

        assert gas.shape == (3, grid.n_x, grid.n_t)
        assert residual.shape == (3, grid.n_t - 1)
        np.testing.assert_array_equal(gas[1], solve(ics[1], coeffs, grid).gas.values)

    def test_if_ic_length_mismatches_grid_raises_error(self, coeffs, grid):
        with pytest.raises(ValidationError):
            solve(np.zeros(grid.n_x + 1), coeffs, grid)

    def test_if_ic_is_not_finite_raises_error(self, coeffs, grid):
        ic = np.zeros(grid.n_x)
        ic[3] = np.nan

        with pytest.raises(ValidationError):
            solve(ic, coeffs, grid)


class TestMassBalance:
    def test_fixed_point_has_no_residual(self, solve_ic, coeffs, grid):
        out = solve_ic(np.ones(grid.n_x))

        assert np.max(np.abs(mass_balance_residual(out, coeffs, grid))) <= 1e-14

    def test_clean_bed_balances_to_roundoff(self, solve_ic, coeffs, grid):
        out = solve_ic(np.zeros(grid.n_x))
        influx = coeffs.a_gas_x * grid.dtau

        relative = np.abs(mass_balance_residual(out, coeffs, grid)) / influx

        assert relative.max() <= 1e-9

    def test_random_initial_conditions_balance(self, solve_ic, random_ic, coeffs, grid):
        rng = np.random.default_rng(5)
        influx = coeffs.a_gas_x * grid.dtau
        for _ in range(50):
            out = solve_ic(random_ic(rng))
            assert np.max(np.abs(out.mass_balance_residual)) / influx <= 1e-9

    def test_recomputed_series_matches_solver_series(self, solve_ic, random_ic, coeffs, grid):
        out = solve_ic(random_ic(np.random.default_rng(6)))

        np.testing.assert_allclose(
            mass_balance_residual(out, coeffs, grid), out.mass_balance_residual,
            rtol=0, atol=1e-15)

    def test_substepped_solve_balances(self, coeffs):
        fine = Grid(n_x=100, n_t=101, substeps=3)
        out = solve(np.zeros(100), coeffs, fine)

        relative = np.abs(out.mass_balance_residual) / (coeffs.a_gas_x * fine.dtau * 3)

        assert relative.max() <= 1e-9

    def test_if_grid_mismatches_raises_error(self, solve_ic, coeffs, grid):
        out = solve_ic(np.zeros(grid.n_x))

        with pytest.raises(ValidationError):
            mass_balance_residual(out, coeffs, Grid(n_x=50))


class TestRefinement:
    def test_restrict_block_averages_space(self):
        values = np.arange(8, dtype=float).reshape(4, 2)

        np.testing.assert_array_equal(restrict(values, 2), [[1.0, 2.0], [5.0, 6.0]])

    def test_error_shrinks_at_first_order(self, coeffs):
        ic_at = lambda grid: 0.3 + 0.4 * np.exp(-(grid.xi_centers - 0.4) ** 2 / 0.02)
        reference_grid = Grid(n_x=400, substeps=8)
        reference = solve(ic_at(reference_grid), coeffs, reference_grid).gas.values

        errors = []
        for n_x, substeps in ((50, 2), (100, 4)):
            coarse = Grid(n_x=n_x, substeps=substeps)
            gas = solve(ic_at(coarse), coeffs, coarse).gas.values
            target = restrict(reference, 400 // n_x)
            errors.append(np.linalg.norm(gas - target) / np.linalg.norm(target))

        assert errors[0] / errors[1] >= 1.5
        assert np.log2(errors[0] / errors[1]) >= 0.8
