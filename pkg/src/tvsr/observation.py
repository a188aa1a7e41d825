"""Forward observation model: blur, warp, decimate, then additive noise."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSignalError, DimensionError, UnknownKernelError
from .image import KERNEL_IDS, as_image, from_lex, make_kernel, to_lex
from .operators import blur_op, compose, decimate_op, warp_op

__all__ = [
    "FrameSpec",
    "ObservationSet",
    "frame_operator",
    "add_noise",
    "noise_variance",
    "simulate_observations",
]


@dataclass(frozen=True)
class FrameSpec:
    """Acquisition parameters of one low-resolution frame.

    ``shift`` is ``(dx, dy)`` in high-resolution pixels (columns, rows).
    ``snr_db`` may be ``math.inf`` for a noiseless frame.
    """

    psf_id: int
    shift: tuple = (0.0, 0.0)
    decim: int = 2
    snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if self.psf_id not in KERNEL_IDS:
            raise UnknownKernelError(f"unknown kernel id {self.psf_id!r}; expected 1..8")
        dx, dy = self.shift
        object.__setattr__(self, "shift", (float(dx), float(dy)))
        if int(self.decim) != self.decim or self.decim < 1:
            raise ValueError(f"decim must be a positive integer, got {self.decim!r}")
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")

    def check(self, hr_shape):
        h, w = hr_shape
        if h % self.decim or w % self.decim:
            raise DimensionError(f"decimation factor {self.decim} does not divide {h}x{w}")

    def lr_shape(self, hr_shape):
        self.check(hr_shape)
        return hr_shape[0] // self.decim, hr_shape[1] // self.decim


@dataclass
class ObservationSet:
    """Low-resolution frames paired with the specs that produced them."""

    hr_shape: tuple
    frames: list = field(default_factory=list)

    def __post_init__(self):
        self.hr_shape = tuple(int(s) for s in self.hr_shape)
        for spec, img in self.frames:
            if np.shape(img) != spec.lr_shape(self.hr_shape):
                raise DimensionError(
                    f"frame shape {np.shape(img)} does not match {spec.lr_shape(self.hr_shape)}")

    @property
    def N(self):
        return len(self.frames)

    @property
    def specs(self):
        return [spec for spec, _ in self.frames]

    @property
    def images(self):
        return [img for _, img in self.frames]

    def operators(self):
        """Observation operator ``H_k`` for every frame."""
        return [frame_operator(spec, self.hr_shape) for spec in self.specs]


def frame_operator(spec, hr_shape):
    """``H_k = D_k M_k B_k``: blur first, then warp, then decimate."""
    spec.check(hr_shape)
    return compose([
        blur_op(make_kernel(spec.psf_id), hr_shape),
        warp_op(spec.shift[0], spec.shift[1], hr_shape),
        decimate_op(spec.decim, hr_shape),
    ])


def noise_variance(img, snr_db):
    """Noise variance giving ``snr_db`` relative to the population variance of ``img``."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    var = float(np.var(img))
    if var == 0.0:
        raise DegenerateSignalError("cannot calibrate noise on a constant image")
    return var * 10.0 ** (-snr_db / 10.0)


def add_noise(img, snr_db, seed):
    """Add white Gaussian noise at the requested SNR (dB).

    Deterministic for a given ``seed``; ``snr_db = inf`` returns a copy.
    """
    img = as_image(img)
    var = noise_variance(img, snr_db)
    if var == 0.0:
        return img.copy()
    rng = np.random.default_rng(seed)
    return img + math.sqrt(var) * rng.standard_normal(img.shape)


def simulate_observations(hr, specs):
    """Generate one noisy low-resolution frame per spec from the HR image."""
    hr = as_image(hr, "hr")
    x = to_lex(hr)
    frames = []
    for spec in specs:
        op = frame_operator(spec, hr.shape)
        clean = from_lex(op.apply(x), op.out_shape)
        frames.append((spec, add_noise(clean, spec.snr_db, spec.seed)))
    return ObservationSet(hr.shape, frames)
