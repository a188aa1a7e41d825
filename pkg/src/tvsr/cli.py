"""Command line driver: ``tvsr {simulate,flow,reconstruct,fuse,report}``.

Exit codes: 0 success, 2 bad configuration or arguments, 3 bad input data,
4 numerical failure.  A failing command leaves no partial outputs behind.
"""
import argparse
import hashlib
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .baselines import interpolation_fusion, mad_metric, mse_metric, zero_fill_interpolate
from .config import load_config, load_scene
from .errors import ConfigSyntaxError, ConfigValueError, FormatError, NumericalError, SRError
from .flow import FlowConfig, global_shift, horn_schunck
from .mm import mm_deconvolve
from .observation import FrameSpec, frame_operator, simulate_observations
from .pgm import read_pgm, write_pgm

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def fmt(v):
    """Stable float formatting for every text artifact."""
    v = float(v)
    return "0" if v == 0 else f"{v:.12g}"


def sha256(data):
    return hashlib.sha256(data).hexdigest()


class Outputs:
    """Stage files as ``*.part`` and move them into place only on success."""

    def __init__(self, directory):
        self.directory = directory
        self.staged = []

    def __enter__(self):
        os.makedirs(self.directory, exist_ok=True)
        return self

    def write(self, name, data):
        if isinstance(data, str):
            data = data.encode("utf-8")
        path = os.path.join(self.directory, name)
        with open(path + ".part", "wb") as fh:
            fh.write(data)
        self.staged.append(path)
        return data

    def __exit__(self, exc_type, exc, tb):
        for path in self.staged:
            if exc_type is None:
                os.replace(path + ".part", path)
            elif os.path.exists(path + ".part"):
                os.remove(path + ".part")
        return False


def kv_text(pairs, header=None):
    lines = [f"# {header}"] if header else []
    lines += [f"{k} = {v}" for k, v in pairs]
    return "\n".join(lines) + "\n"


def read_kv(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            out[key] = value
    return out


def _config(args):
    if not args.config:
        raise UsageError("--config is required")
    overrides = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects section.key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    for flag, key in [("master_seed", "experiment.master_seed"), ("lam", "solver.lambda"),
                      ("cg_eps", "solver.cg_eps"), ("mm_iters", "solver.mm_max_iters"),
                      ("tv", "solver.tv")]:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = str(value)
    cfg = load_config(args.config, overrides)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    elif not os.path.isabs(cfg.output_dir):
        cfg.output_dir = os.path.join(os.path.dirname(os.path.abspath(args.config)),
                                      cfg.output_dir)
    return cfg


# ---------------------------------------------------------------- simulate

def cmd_simulate(args, out):
    cfg = _config(args)
    hr = load_scene(cfg.scene)
    obs = simulate_observations(hr, cfg.frames)
    with Outputs(cfg.output_dir) as w:
        hr_bytes = w.write("hr.pgm", write_pgm(hr))
        pairs = [("hr_file", "hr.pgm"), ("hr_shape", f"{hr.shape[0]} {hr.shape[1]}"),
                 ("hr_sha256", sha256(hr_bytes)), ("master_seed", cfg.master_seed),
                 ("n_frames", obs.N)]
        x = hr.ravel(order="F")
        for k, (spec, img) in enumerate(obs.frames, 1):
            name = f"frame_{k:02d}.pgm"
            data = w.write(name, write_pgm(img))
            op = frame_operator(spec, hr.shape)
            clean = op.apply(x).reshape(op.out_shape, order="F")
            p = f"frame_{k:02d}"
            pairs += [(f"{p}.file", name), (f"{p}.psf", spec.psf_id),
                      (f"{p}.shift", f"{fmt(spec.shift[0])} {fmt(spec.shift[1])}"),
                      (f"{p}.decim", spec.decim), (f"{p}.snr_db", fmt(spec.snr_db)),
                      (f"{p}.seed", spec.seed),
                      (f"{p}.noise_var_empirical", fmt(np.var(img - clean))),
                      (f"{p}.sha256", sha256(data))]
        w.write("manifest.txt", kv_text(pairs, "tvsr simulation manifest"))
    print(f"simulated {obs.N} frames into {cfg.output_dir}", file=out)


def _load_run(directory):
    """Read the manifest, verify checksums, and return (hr, specs, frames)."""
    path = os.path.join(directory, "manifest.txt")
    if not os.path.isfile(path):
        raise FileNotFoundError(f"{path} not found; run 'tvsr simulate' first")
    m = read_kv(path)

    def load(name, digest):
        with open(os.path.join(directory, name), "rb") as fh:
            data = fh.read()
        if sha256(data) != digest:
            raise FormatError(f"checksum mismatch for {name}")
        return read_pgm(data)

    try:
        hr = load(m["hr_file"], m["hr_sha256"])
        specs, frames = [], []
        for k in range(1, int(m["n_frames"]) + 1):
            p = f"frame_{k:02d}"
            dx, dy = (float(v) for v in m[f"{p}.shift"].split())
            specs.append(FrameSpec(int(m[f"{p}.psf"]), (dx, dy), int(m[f"{p}.decim"]),
                                   float(m[f"{p}.snr_db"]), int(m[f"{p}.seed"])))
            frames.append(load(m[f"{p}.file"], m[f"{p}.sha256"]))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, SRError):
            raise
        raise FormatError(f"malformed manifest {path}: {exc}") from None
    return hr, specs, frames


# ---------------------------------------------------------------- baseline

def _baseline(cfg, hr, specs, frames):
    decims = {s.decim for s in specs}
    if len(decims) != 1:
        raise FormatError("interpolation fusion needs a common decimation factor")
    r = decims.pop()
    start = time.perf_counter()
    fused, _, regs = interpolation_fusion(frames, r, cfg.baseline.sweeps, cfg.baseline.radius)
    elapsed = time.perf_counter() - start
    singles = [mse_metric(hr, zero_fill_interpolate(f, r, cfg.baseline.sweeps)) for f in frames]
    best = int(np.argmin(singles))
    pairs = [("fusion.mad", fmt(mad_metric(hr, fused))), ("fusion.mse", fmt(mse_metric(hr, fused))),
             ("fusion.runtime_s", fmt(elapsed)),
             ("best_single.frame", best + 1), ("best_single.mse", fmt(singles[best]))]
    for k, reg in enumerate(regs, 1):
        pairs.append((f"fusion.shift_{k:02d}", f"{reg.shift[0]} {reg.shift[1]}"))
    return fused, pairs


def cmd_fuse(args, out):
    cfg = _config(args)
    hr, specs, frames = _load_run(cfg.output_dir)
    fused, pairs = _baseline(cfg, hr, specs, frames)
    with Outputs(cfg.output_dir) as w:
        w.write("fused.pgm", write_pgm(fused))
        w.write("fusion_metrics.txt", kv_text(pairs, "interpolation-fusion baseline"))
    for k, v in pairs[:3]:
        print(f"{k} = {v}", file=out)


# ---------------------------------------------------------------- reconstruct

def cmd_reconstruct(args, out):
    cfg = _config(args)
    hr, specs, frames = _load_run(cfg.output_dir)
    ops = [frame_operator(s, hr.shape) for s in specs]
    start = time.perf_counter()
    res = mm_deconvolve(frames, ops, cfg.solver)
    elapsed = time.perf_counter() - start
    if not np.all(np.isfinite(res.x)):
        raise NumericalError("reconstruction contains non-finite values")
    fused, fusion_pairs = _baseline(cfg, hr, specs, frames)

    trace = ["iter,L,cg_iters"]
    timing = ["iter,wall_ms"]
    cg = [0] + list(res.cg_iters)
    for t, L in enumerate(res.objective):
        trace.append(f"{t},{fmt(L)},{cg[t]}")
        if t:
            timing.append(f"{t},{res.wall_ms[t - 1]:.3f}")
    pairs = [("mm.mad", fmt(mad_metric(hr, res.x))), ("mm.mse", fmt(mse_metric(hr, res.x))),
             ("mm.runtime_s", fmt(elapsed)), ("mm.outer_iterations", res.iterations),
             ("mm.final_objective", fmt(res.objective[-1])),
             ("mm.converged", str(res.converged).lower()),
             ("solver.lambda", fmt(cfg.solver.lam)), ("solver.tv", cfg.solver.tv.kind),
             ("solver.cg_eps", fmt(cfg.solver.cg_eps))] + fusion_pairs
    with Outputs(cfg.output_dir) as w:
        w.write("x_hat.pgm", write_pgm(res.x))
        w.write("fused.pgm", write_pgm(fused))
        w.write("trace.csv", "\n".join(trace) + "\n")
        w.write("timing.csv", "\n".join(timing) + "\n")
        w.write("metrics.txt", kv_text(pairs, "reconstruction metrics against hr.pgm"))
    for k, v in pairs[:4] + fusion_pairs[:2]:
        print(f"{k} = {v}", file=out)


# ---------------------------------------------------------------- report

def cmd_report(args, out):
    if args.output_dir:
        directory = args.output_dir
    else:
        directory = _config(args).output_dir
    path = os.path.join(directory, "metrics.txt")
    if not os.path.isfile(path):
        raise FileNotFoundError(f"{path} not found; run 'tvsr reconstruct' first")
    m = read_kv(path)
    print(f"{'method':<22}{'MAD':>12}{'MSE':>12}{'runtime_s':>12}", file=out)
    for label, p in [("MM-TV", "mm"), ("interpolation-fusion", "fusion")]:
        print(f"{label:<22}{float(m[p + '.mad']):>12.4f}{float(m[p + '.mse']):>12.4f}"
              f"{float(m[p + '.runtime_s']):>12.4f}", file=out)
    print(f"best single frame: #{m['best_single.frame']} "
          f"MSE {float(m['best_single.mse']):.4f}", file=out)
    trace = os.path.join(directory, "trace.csv")
    if os.path.isfile(trace):
        with open(trace, encoding="utf-8") as fh:
            rows = [line.strip().split(",") for line in fh][1:]
        print("objective trace:", file=out)
        for t, L, n in rows:
            print(f"  {int(t):3d}  L={float(L):.6g}  cg_iters={n}", file=out)


# ---------------------------------------------------------------- flow

def _scaled(v):
    lo, hi = float(v.min()), float(v.max())
    return np.zeros_like(v) if hi == lo else 255.0 * (v - lo) / (hi - lo)


def cmd_flow(args, out):
    cfg = FlowConfig()
    if args.config:
        cfg = _config(args).flow
    cfg = FlowConfig(args.alpha if args.alpha is not None else cfg.alpha,
                     args.iterations if args.iterations is not None else cfg.iterations,
                     args.pyramid_levels if args.pyramid_levels is not None
                     else cfg.pyramid_levels)
    with open(args.frame_a, "rb") as fh:
        f1 = read_pgm(fh.read())
    with open(args.frame_b, "rb") as fh:
        f2 = read_pgm(fh.read())
    flow = horn_schunck(f1, f2, cfg)
    dx, dy = global_shift(flow)
    lines = [f"estimated: dx={dx + 0.0:.4f} dy={dy + 0.0:.4f}"]
    if args.true_shift:
        tx, ty = args.true_shift
        lines.append(f"true: dx={tx:.4f} dy={ty:.4f}")
        lines.append(f"error: dx={dx - tx + 0.0:.4f} dy={dy - ty + 0.0:.4f}")
    if args.output_dir:
        with Outputs(args.output_dir) as w:
            w.write("vx.pgm", write_pgm(_scaled(flow.vx)))
            w.write("vy.pgm", write_pgm(_scaled(flow.vy)))
            w.write("flow.txt", "\n".join(lines) + "\n")
    print("\n".join(lines), file=out)


# ---------------------------------------------------------------- entry

def build_parser():
    parser = argparse.ArgumentParser(prog="tvsr", description="Multi-frame TV super-resolution")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment file")
        p.add_argument("--output-dir", help="override [experiment] output_dir")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a configuration value (repeatable)")
        p.add_argument("--master-seed", type=int)

    p = sub.add_parser("simulate", help="synthesise LR frames from the HR scene")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="run MM-TV on simulated frames")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--cg-eps", type=float)
    p.add_argument("--mm-iters", type=int)
    p.add_argument("--tv", choices=["classic", "smoothed"])
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("fuse", help="run the interpolation-fusion baseline")
    common(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("report", help="summarise a finished run")
    common(p, config_required=False)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("flow", help="Horn-Schunck global shift between two PGM frames")
    p.add_argument("frame_a")
    p.add_argument("frame_b")
    common(p, config_required=False)
    p.add_argument("--alpha", type=float)
    p.add_argument("--iters", "--iterations", dest="iterations", type=int)
    p.add_argument("--pyramid-levels", type=int)
    p.add_argument("--true-shift", type=float, nargs=2, metavar=("DX", "DY"))
    p.set_defaults(func=cmd_flow)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        args.func(args, out)
    except (ConfigSyntaxError, ConfigValueError, UsageError) as exc:
        print(f"tvsr: configuration error: {exc}", file=err)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"tvsr: numerical failure: {exc}", file=err)
        return EXIT_NUMERIC
    except (SRError, OSError, ValueError) as exc:
        print(f"tvsr: data error: {exc}", file=err)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
