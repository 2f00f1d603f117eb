import logging

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from adsorption.physics import (PhysicalParams, check_specific_area, dimensionless_coefficients,
                                equilibrium_solid_ic, to_dimensionless, to_physical)


class TestDimensionlessCoefficients:
    def test_reference_bed_scales(self, coeffs):
        assert coeffs.tau0 == pytest.approx(288.0, rel=1e-12)
        assert coeffs.xi0 == pytest.approx(240.0, rel=1e-12)

    def test_reference_bed_prefactors(self, coeffs):
        assert coeffs.a_gas_x == pytest.approx(1 / 240, rel=1e-12)
        assert coeffs.a_gas_t == pytest.approx(0.5 / (0.5 * 100 * 288), rel=1e-12)
        assert coeffs.a_solid_t == pytest.approx(1 / 288, rel=1e-12)

    def test_gas_accumulation_recovers_porosity(self, params, coeffs):
        recovered = coeffs.a_gas_t * coeffs.tau0 * (1 - params.eps_B) * params.K_eq

        assert recovered == pytest.approx(params.eps_B, rel=1e-12)

    def test_unit_time_scale_when_rate_matches_capacity(self):
        params = PhysicalParams(k_g=0.01, a_s=100.0, t_tot=50.0, eps_B=0.5, K_eq=100.0)

        assert dimensionless_coefficients(params).tau0 == pytest.approx(1.0, rel=1e-12)

    def test_is_deterministic(self, params):
        assert dimensionless_coefficients(params) == dimensionless_coefficients(params)

    @pytest.mark.parametrize('field, value', [
        ('L', 0.0), ('v_x', -0.1), ('k_g', float('nan')), ('eps_B', 1.0), ('eps_B', 0.0),
    ])
    def test_if_params_are_invalid_raises_error_naming_field(self, field, value):
        params = PhysicalParams(**{field: value})

        with pytest.raises(ValidationError) as info:
            dimensionless_coefficients(params)

        assert field in info.value.message_dict


class TestCoordinateTransform:
    def test_bed_end_maps_to_unit_corner(self, params):
        xi, tau = to_dimensionless(params, params.L, params.t_tot)

        assert xi == pytest.approx(1.0, rel=1e-12)
        assert tau == pytest.approx(1.0, rel=1e-12)

    def test_round_trip_reproduces_inputs(self, params):
        x = np.linspace(0.01, params.L, 17)
        t = np.linspace(1.0, params.t_tot, 17)

        back_x, back_t = to_physical(params, *to_dimensionless(params, x, t))

        np.testing.assert_allclose(back_x, x, rtol=1e-12)
        np.testing.assert_allclose(back_t, t, rtol=1e-12)


class TestSpecificAreaCheck:
    def test_reference_bed_is_consistent(self, params):
        assert check_specific_area(params)

    def test_if_area_disagrees_logs_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger='adsorption.physics'):
            consistent = check_specific_area(PhysicalParams(a_s=1000.0))

        assert not consistent
        assert '6/d_p' in caplog.text


class TestEquilibriumSolidIC:
    @pytest.mark.parametrize('value', [0.0, 1.0])
    def test_uniform_bed_maps_to_itself(self, value):
        ic = np.full(100, value)

        np.testing.assert_array_equal(equilibrium_solid_ic(ic), ic)

    def test_returns_identity_copy(self):
        ic = np.random.default_rng(3).uniform(size=100)

        solid = equilibrium_solid_ic(ic)

        np.testing.assert_array_equal(solid, ic)
        assert solid is not ic

    def test_if_values_out_of_range_raises_error(self):
        with pytest.raises(ValidationError):
            equilibrium_solid_ic(np.array([0.2, 1.2]))
