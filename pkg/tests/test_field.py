import numpy as np
import pytest
from numpy.testing import assert_allclose

from unicycle_esc.errors import RejectedInputError, UnsupportedOracleError
from unicycle_esc.field import (
    FieldModel,
    NoiseModel,
    SourceSchedule,
    measure,
    oracle_gradient,
    sample_field,
    source_position,
)


def gaussian(center=(0.0, 0.0), widths=(1.0, 2.0)):
    return FieldModel("gaussian", 5.0, SourceSchedule.fixed(center), shape=widths)


def test_quadratic_values(quad_field):
    assert sample_field(quad_field, (1, 1), 0.0) == 10.0
    assert sample_field(quad_field, (2, 2), 0.0) == 8.0
    shifted = FieldModel("quadratic", 4.5, SourceSchedule.fixed((0, 0)), shape=(1, 3))
    assert sample_field(shifted, (0, 0)) == 4.5


def test_gaussian_value():
    f = gaussian()
    assert sample_field(f, (0, 0)) == 5.0
    assert_allclose(sample_field(f, (1.0, 2.0)), 5.0 * np.exp(-1.0), rtol=1e-15)


def test_custom_polynomial():
    f = FieldModel("custom-polynomial", 1.0, SourceSchedule.fixed((1, 0)), terms=[(2, 0, -1.0), (0, 2, -2.0)])
    assert_allclose(sample_field(f, (3, 1)), 1.0 - 4.0 - 2.0)
    with pytest.raises(UnsupportedOracleError):
        oracle_gradient(f, (0, 0))


def test_non_finite_position_rejected(quad_field):
    with pytest.raises(RejectedInputError):
        sample_field(quad_field, (np.nan, 0.0))
    with pytest.raises(RejectedInputError):
        sample_field(quad_field, (0.0, np.inf))


def test_oracle_gradient_examples(quad_field):
    assert_allclose(oracle_gradient(quad_field, (1, 1)), [0.0, 0.0])
    assert_allclose(oracle_gradient(quad_field, (2, 2)), [-1.0, -3.0])
    assert_allclose(oracle_gradient(gaussian(), (0, 0)), [0.0, 0.0])


@pytest.mark.parametrize("field", ["quad", "gauss"])
def test_oracle_matches_central_differences(field, quad_field):
    f = quad_field if field == "quad" else gaussian(center=(0.3, -0.2), widths=(0.8, 1.5))
    rng = np.random.default_rng(7)
    step = 1e-5
    for x, y in rng.uniform(-2, 3, size=(100, 2)):
        g = oracle_gradient(f, (x, y))
        fd = np.array([
            sample_field(f, (x + step, y)) - sample_field(f, (x - step, y)),
            sample_field(f, (x, y + step)) - sample_field(f, (x, y - step)),
        ]) / (2 * step)
        # The gaussian tail is tiny in absolute terms; compare against the gradient scale.
        assert np.linalg.norm(fd - g) <= 1e-6 * max(np.linalg.norm(g), 1e-3)


def test_maximum_at_center(quad_field):
    rng = np.random.default_rng(3)
    for f in (quad_field, gaussian(center=(0.5, 0.5))):
        top = sample_field(f, f.center(0.0))
        for p in rng.uniform(-5, 5, size=(200, 2)):
            assert sample_field(f, p) <= top


def test_source_schedule_hold():
    s = SourceSchedule(((0, (0, 0)), (10, (2, 0))))
    assert source_position(SourceSchedule.fixed((1, 1)), 50.0) == (1.0, 1.0)
    assert source_position(s, 9.99) == (0.0, 0.0)
    assert source_position(s, 10.0) == (2.0, 0.0)
    assert s.relocation_times == [10.0]
    with pytest.raises(RejectedInputError):
        source_position(s, -0.1)


@pytest.mark.parametrize(
    "waypoints",
    [(), ((1.0, (0, 0)),), ((0.0, (0, 0)), (0.0, (1, 1))), ((0.0, (0, 0)), (5.0, (1, 1)), (4.0, (2, 2)))],
)
def test_schedule_validation(waypoints):
    with pytest.raises(RejectedInputError):
        SourceSchedule(waypoints)


def test_moving_field_follows_schedule():
    f = FieldModel("quadratic", 1.0, SourceSchedule(((0, (0, 0)), (5, (3, 4)))))
    assert sample_field(f, (0, 0), 4.9) == 1.0
    assert sample_field(f, (3, 4), 5.0) == 1.0
    assert_allclose(oracle_gradient(f, (3, 4), 5.0), [0, 0])


def test_zero_noise_is_exact(quad_field):
    stream = NoiseModel(0.0, 1).stream()
    for p in [(0.3, 0.2), (2, 2), (-1, 5)]:
        assert measure(quad_field, stream, p) == sample_field(quad_field, p)


def test_noise_is_deterministic_per_seed(quad_field):
    a, b = NoiseModel(0.1, 42).stream(), NoiseModel(0.1, 42).stream()
    sa = [measure(quad_field, a, (2, 2)) for _ in range(50)]
    sb = [measure(quad_field, b, (2, 2)) for _ in range(50)]
    assert sa == sb
    c = NoiseModel(0.1, 43).stream()
    assert [measure(quad_field, c, (2, 2)) for _ in range(50)] != sa


def test_noise_mean():
    f = FieldModel("quadratic", 10.0, SourceSchedule.fixed((1, 1)), shape=(1, 3))
    stream = NoiseModel(0.1, 0).stream()
    n = 100_000
    samples = np.array([measure(f, stream, (2, 2)) for _ in range(n)])
    assert abs(samples.mean() - 8.0) < 3 * 0.1 / np.sqrt(n)
    assert_allclose(samples.std(), 0.1, rtol=0.02)


def test_invalid_field_parameters():
    with pytest.raises(RejectedInputError):
        FieldModel("cone", 1.0, SourceSchedule.fixed((0, 0)))
    with pytest.raises(RejectedInputError):
        FieldModel("gaussian", 1.0, SourceSchedule.fixed((0, 0)), shape=(0.0, 1.0))
    with pytest.raises(RejectedInputError):
        NoiseModel(-0.1)
