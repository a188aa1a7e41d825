"""Total-variation functionals, difference operators and MM weights."""
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedVariantError
from .image import as_image
from .operators import LinearOperator, _shape

__all__ = [
    "TvVariant",
    "diff_h",
    "diff_v",
    "gradients",
    "tv_value",
    "tv_smoothed",
    "mm_weights",
]

CLASSIC, SMOOTHED, LOG_WEIGHTED = "classic", "smoothed", "log_weighted"


@dataclass(frozen=True)
class TvVariant:
    """Which TV functional to use.

    ``classic`` is the plain isotropic sum of gradient magnitudes; the MM
    solver majorizes it through ``sqrt(s^2 + eps_floor^2) - eps_floor``.
    ``smoothed`` is ``sqrt(s^2 + eps^2) - eps`` (``eps=1`` is the
    minimal-surface form).  ``log_weighted`` is evaluation only.
    """

    kind: str = SMOOTHED
    eps: float = 1.0
    eps_floor: float = 1e-8

    def __post_init__(self):
        if self.kind not in (CLASSIC, SMOOTHED, LOG_WEIGHTED):
            raise ValueError(f"unknown TV kind {self.kind!r}")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if not self.eps_floor > 0:
            raise ValueError("eps_floor must be strictly positive")

    @classmethod
    def classic(cls, eps_floor=1e-8):
        return cls(CLASSIC, 0.0, eps_floor)

    @classmethod
    def smoothed(cls, eps=1.0):
        return cls(SMOOTHED, eps)

    @classmethod
    def log_weighted(cls):
        return cls(LOG_WEIGHTED, 0.0)

    @property
    def smoothing(self):
        """The eps actually used inside the square root by the MM solver."""
        if self.kind == LOG_WEIGHTED:
            raise UnsupportedVariantError("log-weighted TV has no quadratic majorizer")
        return self.eps if self.kind == SMOOTHED else self.eps_floor


def _backward_diff(x, axis):
    d = np.zeros_like(x)
    if axis == 1:
        d[:, 1:] = x[:, 1:] - x[:, :-1]
    else:
        d[1:, :] = x[1:, :] - x[:-1, :]
    return d


def _backward_diff_adj(g, axis):
    # Transpose of _backward_diff: the first row/column of g carries no
    # difference and is ignored.
    out = np.zeros_like(g)
    if axis == 1:
        out[:, 1:] += g[:, 1:]
        out[:, :-1] -= g[:, 1:]
    else:
        out[1:, :] += g[1:, :]
        out[:-1, :] -= g[1:, :]
    return out


def _diff_op(shape, axis, kind):
    h, w = _shape(shape)
    if h < 2 or w < 2:
        raise ValueError("difference operators need at least 2x2 images")
    return LinearOperator((h, w), (h, w),
                          lambda x: _backward_diff(x, axis),
                          lambda g: _backward_diff_adj(g, axis), kind)


def diff_h(shape):
    """``x[i, j] - x[i, j-1]``; zero in the first column."""
    return _diff_op(shape, 1, "DiffH")


def diff_v(shape):
    """``x[i, j] - x[i-1, j]``; zero in the first row."""
    return _diff_op(shape, 0, "DiffV")


def gradients(x):
    """Horizontal and vertical backward differences of an image."""
    x = as_image(x)
    return _backward_diff(x, 1), _backward_diff(x, 0)


def tv_smoothed(x, eps):
    dh, dv = gradients(x)
    return float(np.sum(np.sqrt(dh * dh + dv * dv + eps * eps) - eps))


def tv_value(x, variant=None):
    """Evaluate the TV functional selected by ``variant``."""
    variant = variant or TvVariant()
    dh, dv = gradients(x)
    s = np.sqrt(dh * dh + dv * dv)
    if variant.kind == CLASSIC:
        return float(np.sum(s))
    if variant.kind == SMOOTHED:
        return tv_smoothed(x, variant.eps)
    log1p = np.log1p(s)
    return float(np.sum(s * (2.0 + log1p) / (1.0 + log1p)))


def mm_weights(x_t, lam, variant=None):
    """Per-pixel weights ``(lam/2) / sqrt(dh^2 + dv^2 + eps^2)`` at ``x_t``."""
    variant = variant or TvVariant()
    if not lam > 0:
        raise ValueError("lambda must be positive")
    eps = variant.smoothing
    dh, dv = gradients(x_t)
    return (0.5 * lam) / np.sqrt(dh * dh + dv * dv + eps * eps)
