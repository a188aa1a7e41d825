"""Majorization-minimization for TV-regularised multi-frame reconstruction.

The objective is ``L(x) = sum_k ||H_k x - y_k||^2 + lam * TV(x)``.  Each
outer step replaces TV by a quadratic upper bound that touches it at the
current iterate and lowers that bound with a few CG steps on

    (sum_k H_k^T H_k + D^T W D) x = sum_k H_k^T y_k.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cg import cg_solve
from .errors import DimensionError, EmptyObservationError, NumericalError
from .image import as_image, from_lex, to_lex
from .observation import ObservationSet
from .operators import LinearOperator
from .tv import (TvVariant, _backward_diff, _backward_diff_adj, gradients, mm_weights,
                 tv_smoothed, tv_value)

__all__ = [
    "SolverConfig",
    "MMResult",
    "back_projection",
    "normal_operator",
    "objective",
    "smoothed_objective",
    "majorizer_value",
    "objective_gradient",
    "mm_deconvolve",
]


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 1.0
    cg_eps: float = 1e-1
    cg_max_iters: int = 50
    mm_max_iters: int = 10
    mm_rel_tol: float = 1e-4
    tv: TvVariant = field(default_factory=TvVariant)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.cg_eps > 0:
            raise ValueError("cg_eps must be positive")
        if self.cg_max_iters < 1 or self.mm_max_iters < 1:
            raise ValueError("iteration limits must be positive")
        if self.mm_rel_tol < 0:
            raise ValueError("mm_rel_tol must be non-negative")


@dataclass
class MMResult:
    """Reconstruction plus a per-iteration record.

    ``objective[0]`` is L at the initial image; entry ``t`` (t >= 1) belongs
    to outer iterate t, as do ``cg_iters[t-1]`` and ``wall_ms[t-1]``.
    """

    x: np.ndarray
    objective: list
    cg_iters: list
    wall_ms: list
    converged: bool = False

    @property
    def iterations(self):
        return len(self.cg_iters)


def _frames(frames, ops):
    images = frames.images if isinstance(frames, ObservationSet) else list(frames)
    ops = list(ops)
    if not images:
        raise EmptyObservationError("no observations")
    if len(images) != len(ops):
        raise DimensionError(f"{len(images)} frames but {len(ops)} operators")
    images = [as_image(y, "frame") for y in images]
    for y, op in zip(images, ops):
        if y.shape != op.out_shape:
            raise DimensionError(f"frame {y.shape} does not match operator range {op.out_shape}")
    hr = ops[0].in_shape
    if any(op.in_shape != hr for op in ops):
        raise DimensionError("operators disagree on the high-resolution shape")
    return images, ops


def _data_term(x, images, ops):
    return float(sum(np.sum((op.forward(x) - y) ** 2) for y, op in zip(images, ops)))


def back_projection(frames, ops):
    """``sum_k H_k^T y_k`` as an HR image."""
    images, ops = _frames(frames, ops)
    return sum(op.adjoint(y) for y, op in zip(images, ops))


def objective(x, frames, ops, cfg):
    """Data misfit plus ``lam`` times the TV variant named in ``cfg``."""
    images, ops = _frames(frames, ops)
    x = as_image(x)
    return _data_term(x, images, ops) + cfg.lam * tv_value(x, cfg.tv)


def smoothed_objective(x, frames, ops, cfg):
    """Objective with the eps-smoothed TV that the MM bound actually majorizes."""
    images, ops = _frames(frames, ops)
    x = as_image(x)
    return _data_term(x, images, ops) + cfg.lam * tv_smoothed(x, cfg.tv.smoothing)


def majorizer_value(x, x_t, frames, ops, cfg):
    """Quadratic surrogate ``Q(x | x_t)``; equals the smoothed objective at x_t."""
    images, ops = _frames(frames, ops)
    x, x_t = as_image(x), as_image(x_t)
    w = mm_weights(x_t, cfg.lam, cfg.tv)
    dh, dv = gradients(x)
    dh_t, dv_t = gradients(x_t)
    bound = np.sum(w * ((dh * dh - dh_t * dh_t) + (dv * dv - dv_t * dv_t)))
    return (_data_term(x, images, ops) + cfg.lam * tv_smoothed(x_t, cfg.tv.smoothing)
            + float(bound))


def objective_gradient(x, frames, ops, cfg):
    """Gradient of :func:`smoothed_objective`."""
    images, ops = _frames(frames, ops)
    x = as_image(x)
    g = 2.0 * sum(op.adjoint(op.forward(x) - y) for y, op in zip(images, ops))
    eps = cfg.tv.smoothing
    dh, dv = gradients(x)
    mag = np.sqrt(dh * dh + dv * dv + eps * eps)
    g = g + cfg.lam * (_backward_diff_adj(dh / mag, 1) + _backward_diff_adj(dv / mag, 0))
    return g


def normal_operator(ops, weights):
    """``A = sum_k H_k^T H_k + Dh^T W Dh + Dv^T W Dv`` as a LinearOperator."""
    ops = list(ops)
    shape = ops[0].in_shape
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != shape:
        raise DimensionError("weight field does not match the image shape")

    def forward(x):
        out = _backward_diff_adj(weights * _backward_diff(x, 1), 1)
        out += _backward_diff_adj(weights * _backward_diff(x, 0), 0)
        for op in ops:
            out += op._adjoint(op._forward(x))
        return out

    return LinearOperator(shape, shape, forward, forward, "Normal", {"n_frames": len(ops)})


def mm_deconvolve(frames, ops, cfg=None, x0=None, callback=None):
    """Reconstruct the HR image by MM with inexact CG inner solves.

    Starts from the back-projection ``sum_k H_k^T y_k`` unless ``x0`` is
    given.  Each outer step warm-starts CG at the current iterate, so the
    surrogate, and hence ``L``, never increases.  Stops after
    ``cfg.mm_max_iters`` steps or once the relative change of ``L`` drops to
    ``cfg.mm_rel_tol``.  ``callback(t, x, L)`` runs after each outer step.
    """
    cfg = cfg or SolverConfig()
    images, ops = _frames(frames, ops)
    shape = ops[0].in_shape
    rhs = to_lex(back_projection(images, ops))
    x = rhs.copy() if x0 is None else to_lex(as_image(x0)).copy()
    if x.size != rhs.size:
        raise DimensionError("x0 does not match the HR shape")

    img = from_lex(x, shape)
    L = objective(img, images, ops, cfg)
    result = MMResult(img, [L], [], [])
    for t in range(1, cfg.mm_max_iters + 1):
        start = time.perf_counter()
        A = normal_operator(ops, mm_weights(img, cfg.lam, cfg.tv))
        x, n_cg, _ = cg_solve(A, rhs, x, eps=cfg.cg_eps, max_iters=cfg.cg_max_iters)
        img = from_lex(x, shape)
        L_new = objective(img, images, ops, cfg)
        if not math.isfinite(L_new):
            raise NumericalError(f"objective became non-finite at outer iteration {t}")
        result.x = img
        result.objective.append(L_new)
        result.cg_iters.append(n_cg)
        result.wall_ms.append(1000.0 * (time.perf_counter() - start))
        if callback is not None:
            callback(t, img, L_new)
        done = abs(L_new - L) <= cfg.mm_rel_tol * abs(L)
        L = L_new
        if done:
            result.converged = True
            break
    return result
