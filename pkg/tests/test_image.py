import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from tvsr import (KERNEL_IDS, DimensionError, Psf, UnknownKernelError, as_image, from_lex,
                  make_kernel, synth_rectangle, synth_scene, synth_texture, to_lex)


def test_lex_order_is_column_major():
    img = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(to_lex(img), [1.0, 3.0, 2.0, 4.0])
    np.testing.assert_array_equal(from_lex([1.0, 3.0, 2.0, 4.0], (2, 2)), img)


@given(arrays(np.float64, st.tuples(st.integers(1, 9), st.integers(1, 9)),
              elements=st.floats(-1e6, 1e6)))
def test_lex_round_trip_is_bitwise(img):
    v = to_lex(img)
    assert v.shape == (img.size,)
    back = from_lex(v, img.shape)
    assert back.tobytes() == np.ascontiguousarray(img).tobytes()


def test_from_lex_rejects_wrong_length():
    with pytest.raises(DimensionError):
        from_lex(np.zeros(5), (2, 3))


@pytest.mark.parametrize("bad", [np.zeros((2, 2, 2)), np.array([[np.nan, 1.0]]),
                                 np.array([[np.inf]])])
def test_as_image_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        as_image(bad)


def test_kernel_one_matches_published_table():
    # [PUBLISHED] ker1 = (1/19) * [0 0 1 0 0; 0 1 2 1 0; 1 2 3 2 1; 0 1 2 1 0; 0 0 1 0 0]
    raw = np.array([[0, 0, 1, 0, 0], [0, 1, 2, 1, 0], [1, 2, 3, 2, 1],
                    [0, 1, 2, 1, 0], [0, 0, 1, 0, 0]]) / 19.0
    np.testing.assert_array_equal(make_kernel(1).taps, raw)


@pytest.mark.parametrize("kid", [k for k in KERNEL_IDS if k != 4])
def test_bank_kernels_are_normalised_and_symmetric(kid):
    k = make_kernel(kid).taps
    assert k.shape == (5, 5)
    assert k.min() >= 0
    assert k.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(k, k[::-1, ::-1])


def test_kernel_four_keeps_its_published_prefactor():
    # [PUBLISHED] ker4 = (1/18) * [...]; its integer taps add up to 16, not 18.
    k = make_kernel(4).taps
    assert k.sum() == pytest.approx(16 / 18, abs=1e-15)
    assert k[2, 0] == k[2, 4] == pytest.approx(1 / 18)


@pytest.mark.parametrize("kid", [0, 9, -1, "x"])
def test_unknown_kernel(kid):
    with pytest.raises(UnknownKernelError):
        make_kernel(kid)


def test_psf_validation_and_immutability():
    with pytest.raises(ValueError):
        Psf(np.ones((3, 3)))
    with pytest.raises(ValueError):
        Psf(-np.ones((5, 5)))
    psf = Psf.delta()
    assert psf.taps[2, 2] == 1.0 and psf.taps.sum() == 1.0
    with pytest.raises(ValueError):
        psf.taps[0, 0] = 1.0


def test_synth_rectangle():
    img = synth_rectangle(10, 12, (2, 3, 4, 5), fg=7.0, bg=1.0)
    assert img.shape == (10, 12)
    assert img[2:6, 3:8].min() == img[2:6, 3:8].max() == 7.0
    assert (img == 7.0).sum() == 20
    assert (img == 1.0).sum() == 120 - 20
    with pytest.raises(DimensionError):
        synth_rectangle(10, 10, (8, 0, 4, 4))


@pytest.mark.parametrize("synth", [synth_scene, synth_texture])
def test_synthetic_scenes_are_seeded(synth):
    a, b, c = synth(32, 40, seed=3), synth(32, 40, seed=3), synth(32, 40, seed=4)
    assert a.shape == (32, 40)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all(np.isfinite(a)) and 0 <= a.min() and a.max() <= 255
    assert a.std() > 5
