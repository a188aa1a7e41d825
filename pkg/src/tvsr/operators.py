"""Matrix-free linear operators on lexicographically ordered images.

Every operator carries a forward map and its exact adjoint.  Internally the
maps act on 2-D grids; :meth:`LinearOperator.apply` and
:meth:`LinearOperator.apply_adjoint` wrap them for column-major vectors so
that the operators compose with iterative solvers.
"""
import math

import numpy as np
from scipy import ndimage

from .errors import DimensionError, SizeCapError
from .image import Psf, from_lex, to_lex

__all__ = [
    "LinearOperator",
    "identity_op",
    "blur_op",
    "warp_op",
    "decimate_op",
    "compose",
    "dense_materialize",
    "DENSE_CAP",
]

DENSE_CAP = 2 ** 22


def _shape(shape):
    h, w = (int(s) for s in shape)
    if h <= 0 or w <= 0:
        raise DimensionError(f"invalid grid shape {shape}")
    return h, w


class LinearOperator:
    """A linear map between image grids with an exact adjoint.

    Parameters
    ----------
    in_shape, out_shape : (int, int)
        Grid shapes of the domain and range.
    forward, adjoint : callable
        Maps taking a 2-D array of ``in_shape`` (resp. ``out_shape``) and
        returning a 2-D array of ``out_shape`` (resp. ``in_shape``).
    kind : str
        Descriptor tag, e.g. ``"Blur"`` or ``"Composite"``.
    params : dict
        Descriptor payload (kernel id, shift, factor, ...).
    """

    def __init__(self, in_shape, out_shape, forward, adjoint, kind, params=None):
        self.in_shape = _shape(in_shape)
        self.out_shape = _shape(out_shape)
        self._forward = forward
        self._adjoint = adjoint
        self.kind = kind
        self.params = dict(params or {})

    @property
    def in_len(self):
        return self.in_shape[0] * self.in_shape[1]

    @property
    def out_len(self):
        return self.out_shape[0] * self.out_shape[1]

    @property
    def descriptor(self):
        return (self.kind, self.params)

    def forward(self, img):
        img = np.asarray(img, dtype=np.float64)
        if img.shape != self.in_shape:
            raise DimensionError(f"{self.kind} expects {self.in_shape}, got {img.shape}")
        return self._forward(img)

    def adjoint(self, img):
        img = np.asarray(img, dtype=np.float64)
        if img.shape != self.out_shape:
            raise DimensionError(f"{self.kind} adjoint expects {self.out_shape}, got {img.shape}")
        return self._adjoint(img)

    def apply(self, v):
        return to_lex(self.forward(from_lex(v, self.in_shape)))

    def apply_adjoint(self, v):
        return to_lex(self.adjoint(from_lex(v, self.out_shape)))

    @property
    def T(self):
        """Adjoint view: an operator whose forward map is this adjoint."""
        return LinearOperator(self.out_shape, self.in_shape, self._adjoint, self._forward,
                              "Adjoint", {"of": self})

    def __repr__(self):
        return f"LinearOperator({self.kind}, {self.in_shape} -> {self.out_shape})"


def identity_op(shape):
    shape = _shape(shape)
    return LinearOperator(shape, shape, np.copy, np.copy, "Identity")


def blur_op(psf, shape):
    """Same-size 2-D correlation with ``psf`` and zero-padded borders.

    The adjoint is correlation with the 180-degree rotated kernel, also
    zero-padded.
    """
    if not isinstance(psf, Psf):
        psf = Psf(psf)
    h, w = _shape(shape)
    if h < 5 or w < 5:
        raise DimensionError(f"blur needs at least 5x5 pixels, got {h}x{w}")
    taps = psf.taps

    def forward(x):
        return ndimage.correlate(x, taps, mode="constant", cval=0.0)

    def adjoint(y):
        return ndimage.convolve(y, taps, mode="constant", cval=0.0)

    return LinearOperator((h, w), (h, w), forward, adjoint, "Blur", {"psf": psf.id})


def _shift_zero(a, k, axis):
    """out[i] = a[i - k] along ``axis``, zero where i - k falls outside."""
    out = np.zeros_like(a)
    n = a.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if k >= 0:
        dst[axis], src[axis] = slice(k, n), slice(0, n - k)
    else:
        dst[axis], src[axis] = slice(0, n + k), slice(-k, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _translate_1d(a, d, axis, adjoint=False):
    base = math.floor(d)
    frac = d - base
    sign = -1 if adjoint else 1
    out = _shift_zero(a, sign * base, axis)
    if frac:
        out *= 1.0 - frac
        out += frac * _shift_zero(a, sign * (base + 1), axis)
    return out


def warp_op(dx, dy, shape):
    """Global translation by ``dx`` columns and ``dy`` rows.

    ``forward(x)[r, c] = x(r - dy, c - dx)`` with bilinear interpolation and
    zero fill outside the source grid, so a positive ``dx`` moves content to
    the right.  Integer shifts are exact pixel copies.
    """
    h, w = _shape(shape)
    dx, dy = float(dx), float(dy)
    if not (math.isfinite(dx) and math.isfinite(dy)):
        raise ValueError("shift must be finite")
    if abs(dx) >= min(h, w) or abs(dy) >= min(h, w):
        raise DimensionError(f"shift ({dx}, {dy}) too large for a {h}x{w} grid")

    def forward(x):
        return _translate_1d(_translate_1d(x, dx, axis=1), dy, axis=0)

    def adjoint(y):
        return _translate_1d(_translate_1d(y, dy, axis=0, adjoint=True), dx, axis=1, adjoint=True)

    return LinearOperator((h, w), (h, w), forward, adjoint, "Warp", {"dx": dx, "dy": dy})


def decimate_op(r, shape):
    """Keep every ``r``-th row and column, starting at the top-left pixel.

    The adjoint places the low-resolution samples back on the same
    positions and zero-fills the rest.
    """
    h, w = _shape(shape)
    r = int(r)
    if r <= 0 or h % r or w % r:
        raise DimensionError(f"decimation factor {r} does not divide {h}x{w}")

    def forward(x):
        return x[::r, ::r].copy()

    def adjoint(y):
        out = np.zeros((h, w))
        out[::r, ::r] = y
        return out

    return LinearOperator((h, w), (h // r, w // r), forward, adjoint, "Decimate", {"r": r})


def compose(ops):
    """Chain operators; ``ops[0]`` is applied first.

    For the observation operator of one frame use
    ``compose([blur, warp, decimate])``.
    """
    ops = list(ops)
    if not ops:
        raise DimensionError("compose needs at least one operator")
    for a, b in zip(ops, ops[1:]):
        if a.out_shape != b.in_shape:
            raise DimensionError(f"cannot chain {a!r} into {b!r}")

    def forward(x):
        for op in ops:
            x = op._forward(x)
        return x

    def adjoint(y):
        for op in reversed(ops):
            y = op._adjoint(y)
        return y

    return LinearOperator(ops[0].in_shape, ops[-1].out_shape, forward, adjoint,
                          "Composite", {"ops": tuple(ops)})


def dense_materialize(op, cap=DENSE_CAP):
    """Dense ``out_len x in_len`` matrix whose column j is ``op.apply(e_j)``.

    Meant only for small test problems.
    """
    if op.in_len * op.out_len > cap:
        raise SizeCapError(f"{op.out_len}x{op.in_len} matrix exceeds the cap of {cap} entries")
    mat = np.empty((op.out_len, op.in_len))
    e = np.zeros(op.in_len)
    for j in range(op.in_len):
        e[j] = 1.0
        mat[:, j] = op.apply(e)
        e[j] = 0.0
    return mat
