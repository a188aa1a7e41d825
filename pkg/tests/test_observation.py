import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tvsr import (DegenerateSignalError, DimensionError, FrameSpec, ObservationSet, add_noise,
                  frame_operator, noise_variance, simulate_observations, synth_scene, snr_db)


def test_frame_spec_validation():
    with pytest.raises(ValueError):
        FrameSpec(9)
    with pytest.raises(ValueError):
        FrameSpec(1, decim=0)
    spec = FrameSpec(2, (0.5, 1.0), decim=4)
    assert spec.lr_shape((16, 12)) == (4, 3)
    with pytest.raises(DimensionError):
        spec.check((10, 12))


def test_noise_variance_formula():
    img = np.array([[0.0, 2.0], [4.0, 6.0]])  # population variance 5
    assert noise_variance(img, 10.0) == pytest.approx(0.5)
    assert noise_variance(img, 0.0) == pytest.approx(5.0)
    assert noise_variance(img, math.inf) == 0.0


def test_noise_is_seeded_and_inf_is_a_copy():
    img = synth_scene(32, 32, seed=1)
    a, b, c = add_noise(img, 20, 7), add_noise(img, 20, 7), add_noise(img, 20, 8)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    clean = add_noise(img, math.inf, 7)
    np.testing.assert_array_equal(clean, img)
    assert clean is not img


def test_constant_image_cannot_be_calibrated():
    with pytest.raises(DegenerateSignalError):
        add_noise(np.full((4, 4), 3.0), 20, 0)


@given(st.floats(0, 40), st.integers(0, 2 ** 32 - 1))
def test_empirical_snr_tracks_target(target, seed):
    img = synth_scene(64, 64, seed=seed % 1000)
    noise = add_noise(img, target, seed) - img
    assert snr_db(img, np.var(noise)) == pytest.approx(target, abs=0.5)


def test_noiseless_simulation_applies_the_frame_operator():
    hr = synth_scene(16, 16, seed=0)
    specs = [FrameSpec(k, (0.5 * k, -0.25 * k)) for k in (1, 4, 7)]
    obs = simulate_observations(hr, specs)
    assert isinstance(obs, ObservationSet) and obs.N == 3
    for spec, img in obs.frames:
        assert img.shape == (8, 8)
        np.testing.assert_allclose(img, frame_operator(spec, hr.shape).forward(hr))
    assert [op.out_shape for op in obs.operators()] == [(8, 8)] * 3


def test_observation_set_rejects_mismatched_frames():
    with pytest.raises(DimensionError):
        ObservationSet((16, 16), [(FrameSpec(1), np.zeros((4, 4)))])
