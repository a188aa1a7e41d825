"""Image containers, lexicographic ordering, the PSF bank and synthetic scenes.

Images are plain 2-D ``float64`` numpy arrays indexed ``[row, col]``.  The
lexicographic vector of an image is its column-major flattening, which is the
convention every operator in :mod:`tvsr.operators` follows.
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionError, UnknownKernelError

__all__ = [
    "as_image",
    "to_lex",
    "from_lex",
    "Psf",
    "make_kernel",
    "KERNEL_IDS",
    "synth_rectangle",
    "synth_scene",
    "synth_texture",
]


def as_image(img, name="image"):
    """Return ``img`` as a finite 2-D float64 array (no copy when possible)."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def to_lex(img):
    """Flatten an image column by column.

    >>> to_lex(np.array([[1., 2.], [3., 4.]]))
    array([1., 3., 2., 4.])
    """
    return as_image(img).ravel(order="F")


def from_lex(v, shape):
    """Inverse of :func:`to_lex` for an image of the given ``(height, width)``."""
    v = np.asarray(v, dtype=np.float64)
    h, w = (int(s) for s in shape)
    if v.ndim != 1 or h <= 0 or w <= 0 or v.size != h * w:
        raise DimensionError(f"vector of length {v.size} cannot be reshaped to {h}x{w}")
    return v.reshape((h, w), order="F")


# Raw integer tap tables with their normalising divisors.
_KERNEL_TABLE = {
    1: (19, [[0, 0, 1, 0, 0], [0, 1, 2, 1, 0], [1, 2, 3, 2, 1], [0, 1, 2, 1, 0], [0, 0, 1, 0, 0]]),
    2: (14, [[0, 0, 0, 0, 0], [0, 1, 2, 1, 0], [0, 2, 2, 2, 0], [0, 1, 2, 1, 0], [0, 0, 0, 0, 0]]),
    3: (16, [[0, 0, 0, 0, 0], [0, 1, 2, 1, 0], [0, 2, 4, 2, 0], [0, 1, 2, 1, 0], [0, 0, 0, 0, 0]]),
    4: (18, [[0, 0, 0, 0, 0], [0, 1, 2, 1, 0], [1, 2, 2, 2, 1], [0, 1, 2, 1, 0], [0, 0, 0, 0, 0]]),
    5: (25, [[1, 1, 1, 1, 1]] * 5),
    6: (18, [[0, 0, 0, 0, 0], [0, 2, 2, 2, 0], [0, 2, 2, 2, 0], [0, 2, 2, 2, 0], [0, 0, 0, 0, 0]]),
    7: (28, [[0, 1, 1, 1, 0], [1, 1, 2, 1, 1], [1, 2, 4, 2, 1], [1, 1, 2, 1, 1], [0, 1, 1, 1, 0]]),
    8: (26, [[0, 1, 1, 1, 0], [1, 1, 2, 1, 1], [1, 2, 2, 2, 1], [1, 1, 2, 1, 1], [0, 1, 1, 1, 0]]),
}

KERNEL_IDS = tuple(sorted(_KERNEL_TABLE))


@dataclass(frozen=True, eq=False)
class Psf:
    """A 5x5 point spread function.

    ``id`` is 1..8 for the built-in bank and ``None`` for user kernels.
    """

    taps: np.ndarray
    id: int = None

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if taps.shape != (5, 5):
            raise DimensionError(f"PSF must be 5x5, got {taps.shape}")
        if np.any(taps < 0) or not np.all(np.isfinite(taps)):
            raise ValueError("PSF taps must be finite and non-negative")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @classmethod
    def delta(cls):
        taps = np.zeros((5, 5))
        taps[2, 2] = 1.0
        return cls(taps)


def make_kernel(kernel_id):
    """Return built-in blur kernel ``kernel_id`` (1..8)."""
    try:
        divisor, raw = _KERNEL_TABLE[int(kernel_id)]
    except (KeyError, TypeError, ValueError):
        raise UnknownKernelError(f"unknown kernel id {kernel_id!r}; expected 1..8") from None
    return Psf(np.array(raw, dtype=np.float64) / divisor, int(kernel_id))


def synth_rectangle(h, w, rect, fg=255.0, bg=0.0):
    """Constant background with one filled rectangle.

    ``rect`` is ``(top, left, height, width)`` in pixels and must fit inside
    the ``h`` x ``w`` grid.
    """
    top, left, rh, rw = (int(v) for v in rect)
    if h <= 0 or w <= 0:
        raise DimensionError("grid must be non-empty")
    if top < 0 or left < 0 or rh <= 0 or rw <= 0 or top + rh > h or left + rw > w:
        raise DimensionError(f"rectangle {rect} does not fit in a {h}x{w} grid")
    img = np.full((h, w), float(bg))
    img[top:top + rh, left:left + rw] = float(fg)
    return img


def synth_scene(h, w, seed=0):
    """Piecewise-smooth test scene with values in [0, 255].

    A smooth random background (low-pass filtered white noise) overlaid with
    a few flat rectangles and discs, which gives both textured regions and
    sharp edges.  Deterministic for a given ``seed``.
    """
    if h < 8 or w < 8:
        raise DimensionError("synth_scene needs at least 8x8 pixels")
    rng = np.random.default_rng(seed)
    sigma = max(h, w) / 16.0
    field = ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma, mode="wrap")
    field = (field - field.min()) / (np.ptp(field) or 1.0)
    img = 40.0 + 120.0 * field

    rows, cols = np.mgrid[0:h, 0:w]
    for _ in range(3):
        rh, rw = rng.integers(h // 6, h // 2), rng.integers(w // 6, w // 2)
        top, left = rng.integers(0, h - rh), rng.integers(0, w - rw)
        img[top:top + rh, left:left + rw] = rng.uniform(0.0, 255.0)
    for _ in range(2):
        radius = rng.uniform(min(h, w) / 10, min(h, w) / 5)
        cy, cx = rng.uniform(radius, h - radius), rng.uniform(radius, w - radius)
        img[(rows - cy) ** 2 + (cols - cx) ** 2 <= radius ** 2] = rng.uniform(0.0, 255.0)
    return img


def synth_texture(h, w, seed=0, sigma=4.0):
    """Smooth random texture in [0, 255] with no flat regions."""
    rng = np.random.default_rng(seed)
    field = ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma, mode="wrap")
    return 255.0 * (field - field.min()) / (np.ptp(field) or 1.0)
