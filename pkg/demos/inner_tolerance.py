"""How the inner CG tolerance shapes the MM iteration.

The stopping test is ||r|| <= eps ||y||.  With eps = 0.1 the back-projection
is already close enough after a single CG step, the next outer step does no
CG work at all and the loop ends at a fixed point far from the minimiser.
Tighter inner solves keep making progress.
"""
from importlib import resources
from dataclasses import replace

from tvsr import load_config, load_scene, mm_deconvolve, mse_metric, simulate_observations

cfg = load_config(resources.files("tvsr") / "configs" / "eight_frames.cfg")
hr = load_scene(cfg.scene)
obs = simulate_observations(hr, cfg.frames)
ops = obs.operators()

for eps in (1e-1, 1e-2, 1e-3, 1e-4):
    res = mm_deconvolve(obs, ops, replace(cfg.solver, cg_eps=eps, mm_rel_tol=1e-4))
    print(f"cg_eps={eps:6.0e}  outer={res.iterations:2d}  cg={res.cg_iters}"
          f"  L={res.objective[-1]:.6g}  MSE={mse_metric(hr, res.x):.2f}")
