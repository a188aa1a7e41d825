"""Interpolation + fusion baseline and image quality metrics."""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, EmptyObservationError
from .image import as_image
from .operators import _shift_zero

__all__ = [
    "RegistrationResult",
    "zero_fill_interpolate",
    "mad_register",
    "translate_int",
    "fuse",
    "interpolation_fusion",
    "mad_metric",
    "mse_metric",
    "snr_db",
]


def _same_shape(a, b):
    a, b = as_image(a), as_image(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def _neighbour_mean(y, axis):
    # (prev + self + next) / 3, averaging over the neighbours that exist.
    total = y.copy()
    count = np.ones_like(y)
    for k in (1, -1):
        total += _shift_zero(y, k, axis)
        count += _shift_zero(np.ones_like(y), k, axis)
    return total / count


def zero_fill_interpolate(lr, r, sweeps=50, return_change=False):
    """Upsample by ``r`` with iterative 3-tap averaging of the empty pixels.

    LR samples land on the top-left pixel of each ``r`` x ``r`` block and are
    never modified.  Every sweep replaces each other pixel by the mean of
    itself and its left/right neighbours, then by the mean of itself and its
    upper/lower neighbours.  At the border the missing neighbour is dropped
    from the mean.

    With ``return_change=True`` also returns the max absolute change made by
    the last sweep.
    """
    lr = as_image(lr, "lr")
    r, sweeps = int(r), int(sweeps)
    if r < 1 or sweeps < 1:
        raise ValueError("r and sweeps must be positive")
    h, w = lr.shape
    y = np.zeros((h * r, w * r))
    y[::r, ::r] = lr
    fixed = np.zeros(y.shape, dtype=bool)
    fixed[::r, ::r] = True
    change = 0.0
    if r > 1:
        for _ in range(sweeps):
            prev = y.copy()
            y = np.where(fixed, y, _neighbour_mean(y, 1))
            y = np.where(fixed, y, _neighbour_mean(y, 0))
            change = float(np.max(np.abs(y - prev)))
    return (y, change) if return_change else y


@dataclass(frozen=True)
class RegistrationResult:
    shift: tuple
    mad_at_best: float
    search_radius: int


def mad_register(ref, frame, radius):
    """Integer translation that best maps ``ref`` onto ``frame``.

    Tests every ``(dx, dy)`` in ``[-radius, radius]^2`` and scores it by the
    mean absolute difference between ``frame[r, c]`` and
    ``ref[r - dy, c - dx]`` over their overlap.  Ties go to the smaller
    ``|dx| + |dy|``, then to the lexicographically smaller ``(dx, dy)``.
    """
    ref, frame = _same_shape(ref, frame)
    radius = int(radius)
    h, w = ref.shape
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius >= min(h, w):
        raise DimensionError(f"radius {radius} too large for {h}x{w} images")
    best = None
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            f = frame[max(dy, 0):h + min(dy, 0), max(dx, 0):w + min(dx, 0)]
            g = ref[max(-dy, 0):h + min(-dy, 0), max(-dx, 0):w + min(-dx, 0)]
            score = float(np.mean(np.abs(f - g)))
            key = (score, abs(dx) + abs(dy), dx, dy)
            if best is None or key < best:
                best = key
    return RegistrationResult((best[2], best[3]), best[0], radius)


def translate_int(img, dx, dy):
    """Move content by integer ``(dx, dy)``; vacated pixels become zero."""
    return _shift_zero(_shift_zero(as_image(img), int(dy), 0), int(dx), 1)


def fuse(frames, shifts):
    """Undo each frame's shift and average wherever frames overlap.

    Pixels covered by no frame are zero.
    """
    frames = [as_image(f, "frame") for f in frames]
    if not frames:
        raise EmptyObservationError("nothing to fuse")
    if len(shifts) != len(frames):
        raise DimensionError("need one shift per frame")
    shape = frames[0].shape
    if any(f.shape != shape for f in frames):
        raise DimensionError("frames differ in shape")
    total = np.zeros(shape)
    count = np.zeros(shape)
    ones = np.ones(shape)
    for f, (dx, dy) in zip(frames, shifts):
        total += translate_int(f, -dx, -dy)
        count += translate_int(ones, -dx, -dy)
    return np.divide(total, count, out=np.zeros(shape), where=count > 0)


def interpolation_fusion(lr_frames, r, sweeps=50, radius=3, reference=0):
    """Full baseline: interpolate each frame, register to one, then fuse.

    Returns the fused image, the interpolated frames and the registrations.
    """
    upsampled = [zero_fill_interpolate(f, r, sweeps) for f in lr_frames]
    if not upsampled:
        raise EmptyObservationError("nothing to fuse")
    ref = upsampled[reference]
    regs = [mad_register(ref, u, radius) for u in upsampled]
    return fuse(upsampled, [reg.shift for reg in regs]), upsampled, regs


def mad_metric(x, x_hat):
    x, x_hat = _same_shape(x, x_hat)
    return float(np.mean(np.abs(x - x_hat)))


def mse_metric(x, x_hat):
    x, x_hat = _same_shape(x, x_hat)
    return float(np.mean((x - x_hat) ** 2))


def snr_db(clean, noise_var):
    """``10 log10(Var(clean) / noise_var)`` with the population variance."""
    if not noise_var > 0:
        raise DomainError("noise variance must be positive")
    return float(10.0 * np.log10(np.var(as_image(clean)) / noise_var))
