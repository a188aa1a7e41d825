import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from tvsr import (DimensionError, DomainError, EmptyObservationError, fuse,
                  interpolation_fusion, mad_metric, mad_register, mse_metric, snr_db,
                  synth_texture, translate_int, zero_fill_interpolate)

lr_images = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
                   elements=st.floats(0, 255))


@given(lr_images, st.integers(1, 4), st.integers(1, 10))
def test_lr_samples_are_kept_and_range_is_bounded(lr, r, sweeps):
    up = zero_fill_interpolate(lr, r, sweeps)
    assert up.shape == (lr.shape[0] * r, lr.shape[1] * r)
    np.testing.assert_array_equal(up[::r, ::r], lr)
    assert up.min() >= min(lr.min(), 0) - 1e-12
    assert up.max() <= lr.max() + 1e-12


def test_constant_converges_to_constant():
    up, change = zero_fill_interpolate(np.full((4, 4), 10.0), 2, sweeps=400, return_change=True)
    np.testing.assert_allclose(up, 10.0, atol=1e-6)
    assert change < 1e-6


def test_single_sweep_by_hand():
    # [DERIVED] one horizontal then one vertical 3-tap mean on a 1x2 input, r=2
    up = zero_fill_interpolate(np.array([[6.0, 12.0]]), 2, sweeps=1)
    # horizontal: row 0 -> [6, (0+6+12)/3, 12, (0+12)/2] = [6, 6, 12, 6]; row 1 stays 0
    # vertical: every free pixel becomes (row0 + row1) / 2 since each column has 2 rows
    np.testing.assert_allclose(up, [[6, 3, 12, 3], [3, 3, 6, 3]])


def test_registration_recovers_integer_shift():
    img = synth_texture(40, 40, seed=2)
    for dx, dy in [(0, 0), (2, -1), (-3, 3)]:
        moved = translate_int(img, dx, dy)
        reg = mad_register(img, moved, 3)
        assert reg.shift == (dx, dy)
        assert reg.mad_at_best == pytest.approx(0.0, abs=1e-12)
        assert reg.search_radius == 3


def test_registration_tie_breaks_towards_zero():
    assert mad_register(np.ones((6, 6)), np.ones((6, 6)), 2).shift == (0, 0)
    with pytest.raises(DimensionError):
        mad_register(np.ones((4, 4)), np.ones((4, 4)), 4)


def test_translate_and_fuse():
    img = np.arange(1.0, 26.0).reshape(5, 5)
    moved = translate_int(img, 1, 2)
    np.testing.assert_array_equal(moved[2:, 1:], img[:-2, :-1])
    assert not moved[:2].any() and not moved[:, 0].any()
    fused = fuse([img, moved], [(0, 0), (1, 2)])
    np.testing.assert_allclose(fused, img)  # first frame covers every pixel
    only = fuse([moved], [(1, 2)])
    np.testing.assert_array_equal(only[:3, :4], img[:3, :4])
    assert not only[3:].any()


def test_fuse_validation():
    with pytest.raises(EmptyObservationError):
        fuse([], [])
    with pytest.raises(DimensionError):
        fuse([np.ones((2, 2))], [])


def test_pipeline_on_shifted_decimations():
    hr = synth_texture(32, 32, seed=4)
    frames = [hr[::2, ::2], translate_int(hr, 2, 0)[::2, ::2]]
    fused, ups, regs = interpolation_fusion(frames, 2, sweeps=30, radius=3)
    assert fused.shape == hr.shape and len(ups) == 2
    assert regs[0].shift == (0, 0) and regs[1].shift == (2, 0)


def test_metrics_by_hand():
    a = np.array([[0.0, 1.0], [2.0, 3.0]])
    b = np.array([[1.0, 1.0], [0.0, 3.0]])
    assert mad_metric(a, b) == 0.75
    assert mse_metric(a, b) == 1.25
    assert snr_db(np.array([[0.0, 2.0], [4.0, 6.0]]), 0.5) == pytest.approx(10.0)
    with pytest.raises(DomainError):
        snr_db(a, 0.0)
    with pytest.raises(DimensionError):
        mse_metric(a, np.zeros((3, 3)))
