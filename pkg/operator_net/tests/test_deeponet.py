import numpy as np
import pytest
from django.core.exceptions import ValidationError

from adsorption.solver import SOLID, Grid
from core.exceptions import ArtifactIOError
from operator_net.deeponet import (Architecture, backward, forward, forward_with_cache,
                                   load_checkpoint, predict_field, predict_fields,
                                   save_checkpoint)


class TestArchitecture:
    def test_reference_widths(self):
        architecture = Architecture()

        assert architecture.branch_dims == [100] + [200] * 6 + [100]
        assert architecture.trunk_dims == [2] + [200] * 6 + [100]


class TestForward:
    def test_outputs_lie_strictly_inside_unit_interval(self, make_model, tiny_grid):
        rng = np.random.default_rng(0)
        for seed in range(3):
            model = make_model(seed=seed)
            ics = rng.uniform(size=(10, tiny_grid.n_x))
            coords = rng.uniform(size=(100000, 2))

            prediction = forward(model, ics, coords)

            assert prediction.shape == (10, 100000)
            assert prediction.min() > 0.0
            assert prediction.max() < 1.0

    @pytest.mark.parametrize('dtype', [np.float64, np.float32])
    @pytest.mark.parametrize('output_bias', [-1000.0, -40.0, 18.0, 40.0, 1000.0])
    def test_saturated_head_stays_inside_unit_interval(
            self, make_model, tiny_grid, dtype, output_bias):
        model = make_model(dtype=dtype)
        model.output_bias[:] = output_bias
        ics = np.random.default_rng(1).uniform(size=(4, tiny_grid.n_x))

        prediction = forward(model, ics, tiny_grid.coordinates())
        fields = predict_fields(model, ics, tiny_grid)

        for values in (prediction, fields):
            assert values.dtype == dtype
            assert values.min() > 0.0
            assert values.max() < 1.0

    def test_zero_branch_head_gives_one_half(self, make_model, tiny_grid):
        model = make_model()
        model.branch[-1].weight[:] = 0.0
        model.branch[-1].bias[:] = 0.0
        model.output_bias[:] = 0.0

        prediction = forward(model, np.full(tiny_grid.n_x, 0.3), tiny_grid.coordinates())

        np.testing.assert_array_equal(prediction, 0.5)

    def test_factorized_grid_matches_point_by_point(self, make_model, tiny_grid):
        model = make_model(seed=1)
        ic = np.random.default_rng(1).uniform(size=tiny_grid.n_x)
        coords = tiny_grid.coordinates()

        full = forward(model, ic, coords)
        pointwise = np.array([forward(model, ic, coord[np.newaxis, :])[0] for coord in coords])

        assert np.max(np.abs(full - pointwise)) <= 1e-12

    def test_permuting_coordinates_permutes_outputs(self, make_model, tiny_grid):
        model = make_model(seed=2)
        ic = np.random.default_rng(2).uniform(size=tiny_grid.n_x)
        coords = tiny_grid.coordinates()
        order = np.random.default_rng(3).permutation(len(coords))

        np.testing.assert_allclose(forward(model, ic, coords)[order],
                                   forward(model, ic, coords[order]), rtol=0, atol=1e-15)

    def test_if_coordinates_leave_unit_square_raises_error(self, make_model, tiny_grid):
        with pytest.raises(ValidationError):
            forward(make_model(), np.zeros(tiny_grid.n_x), np.array([[0.5, 1.2]]))

    def test_if_ic_length_mismatches_raises_error(self, make_model, tiny_grid):
        with pytest.raises(ValidationError):
            forward(make_model(), np.zeros(tiny_grid.n_x + 1), np.array([[0.5, 0.5]]))


class TestPredictField:
    def test_matches_forward_on_grid(self, make_model, tiny_grid):
        model = make_model(seed=4)
        ic = np.random.default_rng(4).uniform(size=tiny_grid.n_x)

        field = predict_field(model, ic, tiny_grid)

        assert field.shape == tiny_grid.shape
        assert field.phase == model.phase
        np.testing.assert_allclose(
            field.values.ravel(), forward(model, ic, tiny_grid.coordinates()), rtol=0, atol=1e-15)

    def test_untrained_reference_model_is_bounded(self):
        from operator_net.deeponet import build_model

        model = build_model(Architecture(), 'gas', np.random.default_rng(5))
        field = predict_field(model, np.full(100, 0.5), Grid())

        assert field.shape == (100, 101)
        assert field.values.min() > 0.0
        assert field.values.max() < 1.0

    def test_is_pure(self, make_model, tiny_grid):
        model = make_model(seed=6)
        ics = np.random.default_rng(6).uniform(size=(3, tiny_grid.n_x))

        np.testing.assert_array_equal(predict_fields(model, ics, tiny_grid),
                                      predict_fields(model, ics, tiny_grid))


class TestGradients:
    @pytest.mark.parametrize('output_bias', [True, False])
    def test_full_model_matches_central_differences(
            self, make_model, tiny_architecture, tiny_grid, central_difference, relative_gap,
            output_bias):
        architecture = Architecture(**{**tiny_architecture.as_dict(), 'output_bias': output_bias})
        for draw in range(10):
            rng = np.random.default_rng(100 + draw)
            model = make_model(seed=draw, architecture=architecture)
            for item in model.branch + model.trunk:
                item.bias[:] = rng.normal(scale=0.1, size=item.bias.shape)
            ics = rng.uniform(size=(3, tiny_grid.n_x))
            coords = rng.uniform(size=(7, 2))
            target = rng.uniform(size=(3, 7))

            def loss():
                return np.mean((forward(model, ics, coords) - target) ** 2)

            prediction, cache = forward_with_cache(model, ics, coords)
            analytic = backward(model, cache, 2 * (prediction - target) / target.size)
            numeric = central_difference(loss, model.parameters())

            assert relative_gap(analytic, numeric) <= 1e-5

    def test_disabled_output_bias_gets_no_gradient(self, make_model, tiny_architecture, tiny_grid):
        architecture = Architecture(**{**tiny_architecture.as_dict(), 'output_bias': False})
        model = make_model(architecture=architecture)
        prediction, cache = forward_with_cache(
            model, np.ones((1, tiny_grid.n_x)), np.array([[0.1, 0.2]]))

        grads = backward(model, cache, np.ones_like(prediction))

        assert grads[-1][0] == 0.0

    def test_if_cache_missing_raises_error(self, make_model):
        model = make_model()

        with pytest.raises(ValidationError):
            backward(model, None, np.ones((1, 1)))


class TestCheckpoint:
    def test_round_trip_restores_weights(self, make_model, tiny_grid, tmp_path):
        model = make_model(seed=7, phase=SOLID)
        model.output_bias[:] = 0.25

        save_checkpoint(model, tmp_path)
        loaded = load_checkpoint(tmp_path)

        assert loaded.phase == SOLID
        assert loaded.architecture == model.architecture
        for original, restored in zip(model.parameters(), loaded.parameters()):
            np.testing.assert_array_equal(original, restored)

    def test_float32_round_trip(self, make_model, tmp_path):
        model = make_model(seed=8, dtype=np.float32)

        save_checkpoint(model, tmp_path)

        assert load_checkpoint(tmp_path).dtype == np.float32

    def test_if_checkpoint_missing_raises_io_error(self, tmp_path):
        with pytest.raises(ArtifactIOError):
            load_checkpoint(tmp_path)

    def test_if_weights_do_not_fit_architecture_raises_io_error(self, make_model, tmp_path):
        from core import formats

        save_checkpoint(make_model(), tmp_path)
        formats.write_array(tmp_path / 'weights.bin', np.zeros(3))

        with pytest.raises(ArtifactIOError):
            load_checkpoint(tmp_path)
