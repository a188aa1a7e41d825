"""Horn-Schunck optical flow between two frames.

Flow components are in pixels per frame interval: ``vx`` along columns and
``vy`` along rows, so that ``f2(r + vy, c + vx) ~= f1(r, c)``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionError
from .image import as_image

__all__ = [
    "FlowField",
    "FlowConfig",
    "AVERAGE_STENCIL",
    "derivatives",
    "local_average",
    "horn_schunck",
    "hs_energy",
    "global_shift",
]

# Neighbourhood average used by the velocity update; centre weight is 0.
AVERAGE_STENCIL = np.array([[1 / 12, 1 / 6, 1 / 12],
                            [1 / 6, 0.0, 1 / 6],
                            [1 / 12, 1 / 6, 1 / 12]])


@dataclass
class FlowField:
    vx: np.ndarray
    vy: np.ndarray

    def __post_init__(self):
        self.vx = np.asarray(self.vx, dtype=np.float64)
        self.vy = np.asarray(self.vy, dtype=np.float64)
        if self.vx.shape != self.vy.shape or self.vx.ndim != 2:
            raise DimensionError("vx and vy must be 2-D arrays of the same shape")

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape))

    @property
    def shape(self):
        return self.vx.shape

    @property
    def magnitude(self):
        return np.hypot(self.vx, self.vy)


@dataclass(frozen=True)
class FlowConfig:
    """Horn-Schunck settings.

    ``pyramid_levels=1`` gives the plain single-scale method; larger values
    add coarse-to-fine refinement for displacements of several pixels.
    """

    alpha: float = 1.0
    iterations: int = 100
    pyramid_levels: int = 4

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError("iterations must be a positive integer")
        if int(self.pyramid_levels) != self.pyramid_levels or self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be a positive integer")


def _pair(f1, f2):
    f1 = as_image(f1, "f1")
    f2 = as_image(f2, "f2")
    if f1.shape != f2.shape:
        raise DimensionError(f"frame shapes differ: {f1.shape} vs {f2.shape}")
    return f1, f2


def derivatives(f1, f2):
    """Spatio-temporal derivatives from the 2x2x2 cube of samples.

    Each of ``Ix``, ``Iy`` and ``It`` is the mean of four first differences
    along parallel cube edges anchored at pixel ``(i, j)``.  Corners past the
    last row or column are taken as zero.  ``It`` is ``f2 - f1``.
    """
    f1, f2 = _pair(f1, f2)
    if min(f1.shape) < 2:
        raise DimensionError("derivatives need at least 2x2 frames")
    a = np.pad(f1, ((0, 1), (0, 1)))
    b = np.pad(f2, ((0, 1), (0, 1)))

    def corners(p):
        return p[:-1, :-1], p[:-1, 1:], p[1:, :-1], p[1:, 1:]

    a00, a01, a10, a11 = corners(a)
    b00, b01, b10, b11 = corners(b)
    ix = 0.25 * ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10))
    iy = 0.25 * ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01))
    it = 0.25 * ((b00 - a00) + (b10 - a10) + (b01 - a01) + (b11 - a11))
    return ix, iy, it


def _average(v):
    return ndimage.correlate(v, AVERAGE_STENCIL, mode="constant", cval=0.0)


def local_average(flow):
    """Weighted 8-neighbour average of both components (zero-padded)."""
    return FlowField(_average(flow.vx), _average(flow.vy))


def _sweeps(ix, iy, it, vx, vy, alpha, iterations):
    # Linearised about the starting flow (vx0, vy0); with a zero start this is
    # exactly the classic update.
    vx0, vy0 = vx, vy
    denom = alpha ** 2 + ix ** 2 + iy ** 2
    for _ in range(iterations):
        ax, ay = _average(vx), _average(vy)
        t = (ix * (ax - vx0) + iy * (ay - vy0) + it) / denom
        vx = ax - ix * t
        vy = ay - iy * t
    return vx, vy


def _downsample(img):
    h, w = img.shape
    return img.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def _upsample_flow(v, shape):
    up = 2.0 * np.repeat(np.repeat(v, 2, axis=0), 2, axis=1)
    return up[:shape[0], :shape[1]]


def _warp_back(img, vx, vy):
    """Sample ``img`` at ``(r + vy, c + vx)`` with bilinear interpolation."""
    if not (vx.any() or vy.any()):
        return img
    rows, cols = np.indices(img.shape, dtype=np.float64)
    return ndimage.map_coordinates(img, [rows + vy, cols + vx], order=1, mode="nearest")


def horn_schunck(f1, f2, cfg=None, initial=None):
    """Estimate the flow carrying ``f1`` onto ``f2``.

    Runs ``cfg.iterations`` Jacobi sweeps of the coupled velocity update per
    pyramid level, starting from zero flow (or ``initial``).  Levels are
    built by 2x2 box averaging while both dimensions stay even and at least
    8 pixels; between levels the flow is upsampled and doubled, and ``f2`` is
    warped back by the current estimate before refining.
    """
    cfg = cfg or FlowConfig()
    f1, f2 = _pair(f1, f2)
    if min(f1.shape) < 2:
        raise DimensionError("horn_schunck needs at least 2x2 frames")

    pyr = [(f1, f2)]
    while len(pyr) < cfg.pyramid_levels:
        h, w = pyr[-1][0].shape
        if h % 2 or w % 2 or min(h, w) < 16:
            break
        pyr.append((_downsample(pyr[-1][0]), _downsample(pyr[-1][1])))

    if initial is not None:
        if initial.shape != f1.shape:
            raise DimensionError("initial flow shape does not match the frames")
        if len(pyr) > 1:
            raise ValueError("initial flow is only supported with pyramid_levels=1")
        vx, vy = initial.vx.copy(), initial.vy.copy()
    else:
        vx = vy = np.zeros(pyr[-1][0].shape)

    for level, (g1, g2) in enumerate(reversed(pyr)):
        if level:
            vx, vy = _upsample_flow(vx, g1.shape), _upsample_flow(vy, g1.shape)
        ix, iy, it = derivatives(g1, _warp_back(g2, vx, vy))
        vx, vy = _sweeps(ix, iy, it, vx, vy, cfg.alpha, int(cfg.iterations))
    return FlowField(vx, vy)


def hs_energy(f1, f2, flow, alpha):
    """Discrete Horn-Schunck functional.

    Sum of squared brightness-constancy residuals plus ``alpha`` times the
    squared forward-difference gradients of both flow components.
    """
    ix, iy, it = derivatives(f1, f2)
    if flow.shape != ix.shape:
        raise DimensionError("flow shape does not match the frames")
    data = np.sum((ix * flow.vx + iy * flow.vy + it) ** 2)
    smooth = 0.0
    for v in (flow.vx, flow.vy):
        smooth += np.sum(np.diff(v, axis=0) ** 2) + np.sum(np.diff(v, axis=1) ** 2)
    return float(data + alpha * smooth)


def global_shift(flow, fraction=0.5):
    """Mean flow over the central window spanning ``fraction`` of each axis."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    h, w = flow.shape
    nh, nw = max(1, round(h * fraction)), max(1, round(w * fraction))
    r0, c0 = (h - nh) // 2, (w - nw) // 2
    window = (slice(r0, r0 + nh), slice(c0, c0 + nw))
    return float(flow.vx[window].mean()), float(flow.vy[window].mean())
