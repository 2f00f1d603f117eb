import logging
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhysicalParams:
    """
    L: bed length (m).
    v_x: superficial gas velocity (m/s), positive (flow enters at x = 0).
    eps_B: bed porosity, strictly between 0 and 1.
    k_g: gas-solid mass transfer coefficient (m/s).
    d_p: particle diameter (m). Only used to sanity-check a_s.
    a_s: specific surface area (1/m).
    K_eq: Henry equilibrium constant.
    t_tot: simulated time of the adsorption step (s).
    C_0: reference concentration (mol/m3).
    The defaults are the reference bed used to build the datasets.
    """
    L: float = 1.0
    v_x: float = 0.1
    eps_B: float = 0.5
    k_g: float = 0.01
    d_p: float = 0.005
    a_s: float = 1200.0
    K_eq: float = 100.0
    t_tot: float = 1200.0
    C_0: float = 1000.0

    def validate(self):
        errors = {}
        for field in fields(self):
            value = getattr(self, field.name)
            if not math.isfinite(value) or value <= 0:
                errors[field.name] = f'{field.name} must be strictly positive, got {value}.'
        if 'eps_B' not in errors and self.eps_B >= 1:
            errors['eps_B'] = f'eps_B must lie in (0, 1), got {self.eps_B}.'
        if errors:
            raise ValidationError(errors)
        return self

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DimlessCoeffs:
    """
    Coefficients of the normalized system

        a_gas_t dCg/dtau + a_gas_x dCg/dxi = -(Cg - Cs)
        a_solid_t dCs/dtau = Cg - Cs

    on the unit square, with tau0 and xi0 the scalings that map t_tot and L
    onto 1.
    """
    tau0: float
    xi0: float
    a_gas_t: float
    a_gas_x: float
    a_solid_t: float

    def as_dict(self):
        return asdict(self)


def time_scale(params: PhysicalParams) -> float:
    return params.k_g * params.a_s / ((1.0 - params.eps_B) * params.K_eq)


def length_scale(params: PhysicalParams) -> float:
    return params.k_g * params.a_s / (params.eps_B * params.v_x)


def dimensionless_coefficients(params: PhysicalParams) -> DimlessCoeffs:
    params.validate()
    tau0 = time_scale(params) * params.t_tot
    xi0 = length_scale(params) * params.L
    return DimlessCoeffs(
        tau0=tau0,
        xi0=xi0,
        a_gas_t=params.eps_B / ((1.0 - params.eps_B) * params.K_eq * tau0),
        a_gas_x=1.0 / xi0,
        a_solid_t=1.0 / tau0,
    )


def to_dimensionless(params: PhysicalParams, x, t):
    """Map physical (x, t) onto the normalized (xi*, tau*) unit square."""
    coeffs = dimensionless_coefficients(params)
    xi = length_scale(params) * np.asarray(x, dtype=np.float64)
    tau = time_scale(params) * np.asarray(t, dtype=np.float64)
    return xi / coeffs.xi0, tau / coeffs.tau0


def to_physical(params: PhysicalParams, xi_star, tau_star):
    coeffs = dimensionless_coefficients(params)
    xi = np.asarray(xi_star, dtype=np.float64) * coeffs.xi0
    tau = np.asarray(tau_star, dtype=np.float64) * coeffs.tau0
    return xi / length_scale(params), tau / time_scale(params)


def check_specific_area(params: PhysicalParams, rtol=1e-12) -> bool:
    """a_s of a packed bed of spheres is 6/d_p; a mismatch is only worth a warning."""
    expected = 6.0 / params.d_p
    consistent = abs(params.a_s - expected) <= rtol * expected
    if not consistent:
        logger.warning(
            'a_s = %s differs from 6/d_p = %s; the equations use a_s as given.',
            params.a_s, expected)
    return consistent


def equilibrium_solid_ic(gas_ic):
    """
    Dimensionless solid IC in equilibrium with the gas IC.
    With a linear isotherm and Cs* = Cs / (K_eq C_0) the isotherm reduces to
    the identity, so the result is a copy of the gas profile.
    """
    gas_ic = np.asarray(gas_ic, dtype=np.float64)
    if not np.all(np.isfinite(gas_ic)):
        raise ValidationError('Initial condition contains non-finite values.')
    if gas_ic.size and (gas_ic.min() < 0.0 or gas_ic.max() > 1.0):
        raise ValidationError(
            f'Initial condition must lie in [0, 1], got [{gas_ic.min()}, {gas_ic.max()}].')
    return gas_ic.copy()
