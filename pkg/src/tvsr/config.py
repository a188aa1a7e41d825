"""Experiment description files.

The format is line oriented ``key = value`` text with ``[section]`` headers.
``[frame]`` may repeat, one block per low-resolution frame; every other
section appears at most once.  ``#`` starts a comment.  See
``tvsr/configs/eight_frames.cfg`` for a complete example.
"""
import math
import os
from dataclasses import dataclass, field, replace

from .errors import ConfigSyntaxError, ConfigValueError
from .flow import FlowConfig
from .image import KERNEL_IDS, synth_rectangle, synth_scene, synth_texture
from .mm import SolverConfig
from .observation import FrameSpec
from .pgm import load_pgm
from .tv import TvVariant

__all__ = [
    "SceneSpec",
    "BaselineConfig",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "frame_seed",
    "load_scene",
]

_MASK64 = (1 << 64) - 1


def frame_seed(master_seed, index):
    """SplitMix64 output number ``index`` for the stream seeded by ``master_seed``.

    Frame k's seed depends only on (master_seed, k), so appending frames
    leaves earlier frames untouched.
    """
    z = (int(master_seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SceneSpec:
    kind: str = "synthetic"
    height: int = 64
    width: int = 64
    seed: int = 0
    rect: tuple = None
    fg: float = 255.0
    bg: float = 0.0
    path: str = None


@dataclass(frozen=True)
class BaselineConfig:
    sweeps: int = 50
    radius: int = 3


@dataclass
class ExperimentConfig:
    scene: SceneSpec
    frames: list
    solver: SolverConfig = field(default_factory=SolverConfig)
    flow: FlowConfig = field(default_factory=FlowConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    output_dir: str = "tvsr_out"
    master_seed: int = 0

    @property
    def N(self):
        return len(self.frames)


_SECTIONS = {
    "experiment": {"master_seed", "output_dir"},
    "scene": {"kind", "height", "width", "seed", "rect", "fg", "bg", "path"},
    "solver": {"lambda", "tv", "eps", "eps_floor", "cg_eps", "cg_max_iters",
               "mm_max_iters", "mm_rel_tol"},
    "flow": {"alpha", "iterations", "pyramid_levels"},
    "baseline": {"sweeps", "radius"},
    "frame": {"psf", "shift", "snr_db", "decim", "seed"},
}


def _tokenize(text):
    """Split into ``(section, {key: (value, line)}, header_line)`` blocks."""
    blocks = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigSyntaxError(f"malformed section header {raw.strip()!r}", lineno)
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise ConfigSyntaxError(f"unknown section [{name}]", lineno)
            if name != "frame" and any(b[0] == name for b in blocks):
                raise ConfigSyntaxError(f"section [{name}] repeated", lineno)
            current = (name, {}, lineno)
            blocks.append(current)
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if current is None:
            raise ConfigSyntaxError("key outside of any section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        name, entries, _ = current
        if key not in _SECTIONS[name]:
            raise ConfigValueError(f"{name}.{key}", f"unknown key (line {lineno})")
        if key in entries:
            raise ConfigSyntaxError(f"duplicate key {key!r}", lineno)
        entries[key] = (value, lineno)
    return blocks


def _convert(section, key, value, kind):
    name = key if section == "frame" else f"{section}.{key}"
    try:
        if kind is int:
            out = int(value, 0)
        elif kind is float:
            out = float(value)
            if math.isnan(out):
                raise ValueError
        elif kind == "pair":
            parts = [float(p) for p in value.replace(",", " ").split()]
            if len(parts) != 2:
                raise ValueError
            out = tuple(parts)
        elif kind == "quad":
            parts = [int(p) for p in value.replace(",", " ").split()]
            if len(parts) != 4:
                raise ValueError
            out = tuple(parts)
        else:
            out = value
    except ValueError:
        expected = {int: "an integer", float: "a number", "pair": "two numbers",
                    "quad": "four integers"}[kind]
        raise ConfigValueError(name, f"expected {expected}, got {value!r}") from None
    return out


_TYPES = {
    "experiment": {"master_seed": int, "output_dir": str},
    "scene": {"kind": str, "height": int, "width": int, "seed": int, "rect": "quad",
              "fg": float, "bg": float, "path": str},
    "solver": {"lambda": float, "tv": str, "eps": float, "eps_floor": float, "cg_eps": float,
               "cg_max_iters": int, "mm_max_iters": int, "mm_rel_tol": float},
    "flow": {"alpha": float, "iterations": int, "pyramid_levels": int},
    "baseline": {"sweeps": int, "radius": int},
    "frame": {"psf": int, "shift": "pair", "snr_db": float, "decim": int, "seed": int},
}


def _values(section, entries):
    return {k: _convert(section, k, v, _TYPES[section][k]) for k, (v, _) in entries.items()}


def _build(ctor, key, **kwargs):
    try:
        return ctor(**kwargs)
    except ConfigValueError:
        raise
    except ValueError as exc:
        raise ConfigValueError(key, str(exc)) from None


def parse_config(text, base_dir=".", overrides=None):
    """Parse and validate an experiment description.

    ``overrides`` maps ``"section.key"`` to a string value and is applied on
    top of the file; a ``frame.*`` override applies to every frame.  Missing
    optional keys take their defaults (lambda=1, cg_eps=0.1, alpha=1.0,
    decim=2, eps=1).  Relative paths are resolved against ``base_dir``.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    blocks = _tokenize(text)
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in _SECTIONS or key not in _SECTIONS[section]:
            raise ConfigValueError(dotted, "unknown key in override")
        targets = [b for b in blocks if b[0] == section]
        if not targets:
            if section == "frame":
                raise ConfigValueError(dotted, "no [frame] blocks to override")
            targets = [(section, {}, 0)]
            blocks.append(targets[0])
        for _, entries, _ in targets:
            entries[key] = (str(value), 0)

    singles = {name: {} for name in _SECTIONS if name != "frame"}
    frame_blocks = []
    for name, entries, _ in blocks:
        values = _values(name, entries)
        if name == "frame":
            frame_blocks.append(values)
        else:
            singles[name] = values

    exp = singles["experiment"]
    master_seed = exp.get("master_seed", 0)
    if not 0 <= master_seed <= _MASK64:
        raise ConfigValueError("experiment.master_seed", "must fit in 64 unsigned bits")

    sc = singles["scene"]
    kind = sc.get("kind", "synthetic").lower()
    if kind not in ("synthetic", "texture", "rectangle", "file"):
        raise ConfigValueError("scene.kind", f"unknown scene kind {kind!r}")
    path = sc.get("path")
    if kind == "file":
        if path is None:
            raise ConfigValueError("scene.path", "required for kind = file")
        path = os.path.join(base_dir, path)
        if not os.path.isfile(path):
            raise ConfigValueError("scene.path", f"file not found: {path}")
    height, width = sc.get("height", 64), sc.get("width", 64)
    if height < 8 or width < 8:
        raise ConfigValueError("scene.height", "scene must be at least 8x8")
    if kind == "rectangle" and "rect" not in sc:
        raise ConfigValueError("scene.rect", "required for kind = rectangle")
    scene = SceneSpec(kind, height, width, sc.get("seed", 0), sc.get("rect"),
                      sc.get("fg", 255.0), sc.get("bg", 0.0), path)

    so = singles["solver"]
    tv_kind = so.get("tv", "smoothed").lower()
    if tv_kind == "classic":
        tv = _build(TvVariant.classic, "solver.eps_floor", eps_floor=so.get("eps_floor", 1e-8))
    elif tv_kind == "smoothed":
        tv = _build(TvVariant.smoothed, "solver.eps", eps=so.get("eps", 1.0))
    else:
        raise ConfigValueError("solver.tv", "must be 'classic' or 'smoothed'")
    solver = _build(SolverConfig, "solver", lam=so.get("lambda", 1.0),
                    cg_eps=so.get("cg_eps", 0.1), cg_max_iters=so.get("cg_max_iters", 50),
                    mm_max_iters=so.get("mm_max_iters", 10),
                    mm_rel_tol=so.get("mm_rel_tol", 1e-4), tv=tv)

    fl = singles["flow"]
    flow = _build(FlowConfig, "flow", alpha=fl.get("alpha", 1.0),
                  iterations=fl.get("iterations", 100),
                  pyramid_levels=fl.get("pyramid_levels", 4))

    bl = singles["baseline"]
    baseline = BaselineConfig(bl.get("sweeps", 50), bl.get("radius", 3))
    if baseline.sweeps < 1 or baseline.radius < 0:
        raise ConfigValueError("baseline", "sweeps must be >= 1 and radius >= 0")

    frames = []
    for k, fb in enumerate(frame_blocks):
        if "psf" not in fb:
            raise ConfigValueError("psf", f"missing in frame {k + 1}")
        if fb["psf"] not in KERNEL_IDS:
            raise ConfigValueError("psf", f"frame {k + 1}: kernel id must be 1..8")
        decim = fb.get("decim", 2)
        if decim < 1:
            raise ConfigValueError("decim", f"frame {k + 1}: must be a positive integer")
        if kind != "file" and (height % decim or width % decim):
            raise ConfigValueError("decim", f"frame {k + 1}: {decim} does not divide "
                                            f"{height}x{width}")
        seed = fb.get("seed", frame_seed(master_seed, k))
        frames.append(FrameSpec(fb["psf"], fb.get("shift", (0.0, 0.0)), decim,
                                fb.get("snr_db", math.inf), seed))
    if not frames:
        raise ConfigValueError("frame", "at least one [frame] block is required")

    return ExperimentConfig(scene, frames, solver, flow, baseline,
                            exp.get("output_dir", "tvsr_out"), master_seed)


def load_config(path, overrides=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, os.path.dirname(os.path.abspath(path)), overrides)


def load_scene(scene):
    """Materialise the high-resolution ground truth described by ``scene``."""
    if scene.kind == "file":
        return load_pgm(scene.path)
    if scene.kind == "rectangle":
        return synth_rectangle(scene.height, scene.width, scene.rect, scene.fg, scene.bg)
    if scene.kind == "texture":
        return synth_texture(scene.height, scene.width, scene.seed)
    return synth_scene(scene.height, scene.width, scene.seed)

