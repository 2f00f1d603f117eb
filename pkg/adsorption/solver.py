"""
Reference solver for the normalized adsorption step.

Cell-centred finite volumes in xi*, first-order upwind convection (the flow
enters at xi* = 0) and backward Euler in tau* for both phases. Backward
Euler with upwind fluxes couples each cell only to its upstream
neighbour, so a time step is one inlet-to-outlet sweep solving a 2x2 system
per cell. The sweep is vectorized over a batch of initial conditions.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.core.exceptions import ValidationError

from adsorption.physics import DimlessCoeffs, equilibrium_solid_ic
from core.exceptions import NumericalError

logger = logging.getLogger(__name__)

GAS = 'gas'
SOLID = 'solid'
PHASES = (GAS, SOLID)

INLET_CONCENTRATION = 1.0
BOUND_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Grid:
    """
    n_x: number of spatial cells; ICs and fields live on the cell centres.
    n_t: number of stored time levels, tau* = 0 included.
    substeps: implicit steps taken between two stored levels.
    """
    n_x: int = 100
    n_t: int = 101
    substeps: int = 1

    def __post_init__(self):
        errors = {}
        if self.n_x < 1:
            errors['n_x'] = 'n_x must be at least 1.'
        if self.n_t < 2:
            errors['n_t'] = 'n_t must be at least 2.'
        if self.substeps < 1:
            errors['substeps'] = 'substeps must be at least 1.'
        if errors:
            raise ValidationError(errors)

    @property
    def shape(self):
        return self.n_x, self.n_t

    @property
    def dxi(self):
        return 1.0 / self.n_x

    @property
    def dtau(self):
        """Length of one implicit step."""
        return 1.0 / ((self.n_t - 1) * self.substeps)

    @cached_property
    def xi_centers(self):
        return (np.arange(1, self.n_x + 1, dtype=np.float64) - 0.5) / self.n_x

    @cached_property
    def tau_levels(self):
        return np.linspace(0.0, 1.0, self.n_t)

    def coordinates(self):
        """(n_x * n_t, 2) array of (xi*, tau*) pairs, xi-major like the fields."""
        xi, tau = np.meshgrid(self.xi_centers, self.tau_levels, indexing='ij')
        return np.column_stack([xi.ravel(), tau.ravel()])

    def level_index(self, tau):
        """Column of the stored level closest to tau*."""
        if not 0.0 <= tau <= 1.0:
            raise ValidationError({'tau': f'tau* must lie in [0, 1], got {tau}.'})
        return int(round(tau * (self.n_t - 1)))

    def as_dict(self):
        return {'n_x': self.n_x, 'n_t': self.n_t, 'substeps': self.substeps}


@dataclass
class Field:
    """
    values: n_x x n_t matrix of a normalized concentration.
    phase: 'gas' or 'solid'.
    """
    values: np.ndarray
    phase: str

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValidationError({'phase': f'Unknown phase {self.phase!r}.'})
        if self.values.ndim != 2:
            raise ValidationError('A field is a two-dimensional matrix.')

    @property
    def shape(self):
        return self.values.shape


@dataclass
class SolveOutput:
    gas: Field
    solid: Field
    mass_balance_residual: np.ndarray


def _validate_ics(ics, grid):
    ics = np.asarray(ics, dtype=np.float64)
    if ics.ndim != 2 or ics.shape[1] != grid.n_x:
        raise ValidationError(
            f'Initial conditions of shape {ics.shape} do not match a grid of {grid.n_x} cells.',
            code='grid_mismatch')
    if not np.all(np.isfinite(ics)):
        raise ValidationError('Initial condition contains non-finite values.')
    return ics


def _step_factors(coeffs, grid):
    a = coeffs.a_gas_t / grid.dtau
    b = coeffs.a_gas_x / grid.dxi
    c = coeffs.a_solid_t / grid.dtau
    gas_diag = a + b + 1.0
    solid_diag = c + 1.0
    det = gas_diag * solid_diag - 1.0
    return a, b, c, gas_diag, solid_diag, det


def _balance(coeffs, grid, gas_old, gas_new, solid_old, solid_new, outlet, steps):
    """Discrete accumulation minus net inflow over ``steps`` implicit steps."""
    gas_change = coeffs.a_gas_t * (gas_new - gas_old).sum(axis=-1) * grid.dxi
    solid_change = coeffs.a_solid_t * (solid_new - solid_old).sum(axis=-1) * grid.dxi
    influx = coeffs.a_gas_x * grid.dtau * (steps * INLET_CONCENTRATION - outlet)
    return gas_change + solid_change - influx


def solve_batch(ics, coeffs: DimlessCoeffs, grid: Grid):
    """
    Solve every row of ``ics`` on ``grid``.
    Returns (gas, solid, residual) with fields of shape (N, n_x, n_t) and the
    mass-balance residual of shape (N, n_t - 1), one entry per stored interval.
    """
    ics = _validate_ics(np.atleast_2d(ics), grid)
    n_samples = ics.shape[0]
    a, b, c, gas_diag, solid_diag, det = _step_factors(coeffs, grid)

    gas = np.empty((n_samples, grid.n_x, grid.n_t))
    solid = np.empty_like(gas)
    residual = np.empty((n_samples, grid.n_t - 1))

    gas_now = ics.copy()
    solid_now = np.array([equilibrium_solid_ic(ic) for ic in ics]).reshape(ics.shape)
    gas[:, :, 0] = gas_now
    solid[:, :, 0] = solid_now

    logger.debug('Solving %d initial conditions on a %dx%d grid', n_samples, *grid.shape)
    for level in range(1, grid.n_t):
        gas_start, solid_start = gas_now, solid_now
        outflow = np.zeros(n_samples)
        for _ in range(grid.substeps):
            gas_next = np.empty_like(gas_now)
            solid_next = np.empty_like(solid_now)
            upstream = np.full(n_samples, INLET_CONCENTRATION)
            for j in range(grid.n_x):
                gas_rhs = a * gas_now[:, j] + b * upstream
                solid_rhs = c * solid_now[:, j]
                gas_next[:, j] = (solid_diag * gas_rhs + solid_rhs) / det
                solid_next[:, j] = (gas_diag * solid_rhs + gas_rhs) / det
                upstream = gas_next[:, j]
            # zero-gradient outlet: the outflow face carries the last cell value
            outflow += gas_next[:, -1]
            gas_now, solid_now = gas_next, solid_next
        gas[:, :, level] = gas_now
        solid[:, :, level] = solid_now
        residual[:, level - 1] = _balance(
            coeffs, grid, gas_start, gas_now, solid_start, solid_now, outflow, grid.substeps)

    if not (np.all(np.isfinite(gas)) and np.all(np.isfinite(solid))):
        raise NumericalError('Solver produced non-finite concentrations.')
    return gas, solid, residual


def solve(ic, coeffs: DimlessCoeffs, grid: Grid) -> SolveOutput:
    ic = np.asarray(ic, dtype=np.float64)
    if ic.ndim != 1:
        raise ValidationError('solve expects a single initial condition vector.')
    gas, solid, residual = solve_batch(ic[np.newaxis, :], coeffs, grid)
    return SolveOutput(
        gas=Field(gas[0], GAS),
        solid=Field(solid[0], SOLID),
        mass_balance_residual=residual[0],
    )


def mass_balance_residual(out: SolveOutput, coeffs: DimlessCoeffs, grid: Grid):
    """
    Per-interval residual of the discrete balance

        a_gas_t * sum(dCg) dxi + a_solid_t * sum(dCs) dxi
            = a_gas_x * dtau * (C_in - C_out)

    recomputed from the stored levels. Stored levels only hold the outlet
    value at the end of each interval, so this needs substeps == 1; with
    substeps the solver's own accumulated series is authoritative.
    """
    if out.gas.shape != grid.shape or out.solid.shape != grid.shape:
        raise ValidationError(
            f'Fields of shape {out.gas.shape} do not match grid {grid.shape}.',
            code='grid_mismatch')
    if grid.substeps != 1:
        raise ValidationError(
            'Stored levels do not resolve the outflow of intermediate substeps.',
            code='grid_mismatch')
    gas, solid = out.gas.values, out.solid.values
    return _balance(
        coeffs, grid,
        gas[:, :-1].T, gas[:, 1:].T,
        solid[:, :-1].T, solid[:, 1:].T,
        gas[-1, 1:], 1)


def restrict(values, factor):
    """Block-average the spatial axis (axis -2) of a fine field by ``factor``."""
    values = np.asarray(values)
    n_x = values.shape[-2]
    if n_x % factor:
        raise ValidationError(f'{n_x} cells cannot be coarsened by {factor}.')
    shape = values.shape[:-2] + (n_x // factor, factor, values.shape[-1])
    return values.reshape(shape).mean(axis=-2)
