import numpy as np
import pytest
from hypothesis import given, strategies as st

from tvsr import (KERNEL_IDS, DimensionError, SizeCapError, blur_op, compose, decimate_op,
                  dense_materialize, diff_h, diff_v, from_lex, identity_op, make_kernel, to_lex,
                  warp_op)


def dense_blur(taps, shape):
    """Oracle: H x (i, j) = sum_ab k[a, b] x(i + a - 2, j + b - 2), zero outside."""
    h, w = shape
    n = h * w
    A = np.zeros((n, n))
    idx = lambda i, j: j * h + i  # column-major position
    for i in range(h):
        for j in range(w):
            for a in range(5):
                for b in range(5):
                    ii, jj = i + a - 2, j + b - 2
                    if 0 <= ii < h and 0 <= jj < w:
                        A[idx(i, j), idx(ii, jj)] += taps[a, b]
    return A


def dense_decimate(r, shape):
    h, w = shape
    lh, lw = h // r, w // r
    A = np.zeros((lh * lw, h * w))
    for i in range(lh):
        for j in range(lw):
            A[j * lh + i, (j * r) * h + i * r] = 1.0
    return A


def adjoint_gap(op, rng):
    x = rng.standard_normal(op.in_len)
    y = rng.standard_normal(op.out_len)
    return abs(op.apply(x) @ y - x @ op.apply_adjoint(y)) / (np.linalg.norm(x) * np.linalg.norm(y))


def all_ops(shape):
    ops = [blur_op(make_kernel(k), shape) for k in KERNEL_IDS]
    ops += [warp_op(dx, dy, shape) for dx, dy in [(1, 0), (0, -2), (3, 2), (0.5, 0.25), (-1.7, 2.3)]]
    ops += [decimate_op(r, shape) for r in (2, 3, 4) if shape[0] % r == 0 and shape[1] % r == 0]
    ops += [diff_h(shape), diff_v(shape), identity_op(shape)]
    ops.append(compose([ops[0], ops[9], decimate_op(2, shape)]))
    return ops


@pytest.mark.parametrize("shape", [(8, 8), (12, 16)])
def test_adjoint_identity_and_dense_transpose(shape, rng):
    for op in all_ops(shape):
        assert adjoint_gap(op, rng) <= 1e-12, op.descriptor
        fwd = dense_materialize(op)
        adj = dense_materialize(op.T)
        np.testing.assert_allclose(adj, fwd.T, atol=1e-13, err_msg=op.descriptor)


@pytest.mark.parametrize("kid", KERNEL_IDS)
def test_blur_matches_explicit_correlation(kid):
    shape = (7, 9)
    psf = make_kernel(kid)
    np.testing.assert_allclose(dense_materialize(blur_op(psf, shape)),
                               dense_blur(psf.taps, shape), atol=1e-15)


def test_blur_preserves_interior_mass():
    x = np.zeros((12, 12))
    x[5:7, 4:8] = np.arange(8.0).reshape(2, 4)
    for kid in (1, 5, 7):
        assert blur_op(make_kernel(kid), x.shape).forward(x).sum() == pytest.approx(x.sum())


def test_integer_warp_moves_content():
    x = np.arange(30.0).reshape(5, 6)
    out = warp_op(2, 1, x.shape).forward(x)
    # out[r, c] = x[r - dy, c - dx], zero where that falls outside
    np.testing.assert_array_equal(out[1:, 2:], x[:-1, :-2])
    assert not out[0].any() and not out[:, :2].any()


def test_half_pixel_warp_is_bilinear_average():
    x = np.arange(20.0).reshape(4, 5)
    out = warp_op(0.5, 0, x.shape).forward(x)
    np.testing.assert_allclose(out[:, 1:], 0.5 * (x[:, 1:] + x[:, :-1]))
    np.testing.assert_allclose(out[:, 0], 0.5 * x[:, 0])


def test_warp_rejects_huge_shift():
    with pytest.raises(DimensionError):
        warp_op(8, 0, (8, 8))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_decimate_and_zero_fill(r):
    shape = (6, 6)
    op = decimate_op(r, shape)
    np.testing.assert_array_equal(dense_materialize(op), dense_decimate(r, shape))
    x = np.arange(36.0).reshape(shape)
    np.testing.assert_array_equal(op.forward(x), x[::r, ::r])
    up = op.adjoint(op.forward(x))
    np.testing.assert_array_equal(up[::r, ::r], x[::r, ::r])
    assert np.count_nonzero(up) == np.count_nonzero(x[::r, ::r])


def test_decimate_needs_divisible_shape():
    with pytest.raises(DimensionError):
        decimate_op(3, (8, 8))


def test_compose_order_and_shape_checks():
    shape = (8, 8)
    B, M, D = blur_op(make_kernel(3), shape), warp_op(1, 0, shape), decimate_op(2, shape)
    H = compose([B, M, D])
    x = np.random.default_rng(0).standard_normal(shape)
    np.testing.assert_allclose(H.forward(x), D.forward(M.forward(B.forward(x))))
    np.testing.assert_allclose(dense_materialize(H),
                               dense_materialize(D) @ dense_materialize(M) @ dense_materialize(B))
    with pytest.raises(DimensionError):
        compose([D, B])


def test_shape_checks_on_apply():
    op = identity_op((4, 4))
    with pytest.raises(DimensionError):
        op.apply(np.zeros(15))
    with pytest.raises(DimensionError):
        op.forward(np.zeros((4, 5)))


def test_dense_cap():
    with pytest.raises(SizeCapError):
        dense_materialize(identity_op((64, 64)), cap=1000)


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 32 - 1))
def test_warp_adjoint_property(dx, dy, seed):
    op = warp_op(dx, dy, (9, 11))
    assert adjoint_gap(op, np.random.default_rng(seed)) <= 1e-12


@given(st.sampled_from(KERNEL_IDS), st.floats(-2, 2), st.floats(-2, 2),
       st.sampled_from([1, 2, 4]), st.integers(0, 2 ** 32 - 1))
def test_composite_linearity_and_adjoint(kid, dx, dy, r, seed):
    shape = (8, 8)
    H = compose([blur_op(make_kernel(kid), shape), warp_op(dx, dy, shape), decimate_op(r, shape)])
    g = np.random.default_rng(seed)
    a, b = g.standard_normal(2)
    x, z = g.standard_normal((2, H.in_len))
    np.testing.assert_allclose(H.apply(a * x + b * z), a * H.apply(x) + b * H.apply(z),
                               atol=1e-12)
    assert adjoint_gap(H, g) <= 1e-12
    np.testing.assert_allclose(from_lex(H.apply(to_lex(x.reshape(shape, order="F"))),
                                        H.out_shape), H.forward(x.reshape(shape, order="F")))
