"""Run configuration: line-oriented ``key = value`` files with dotted sections.

The format is deliberately trivial to parse from any language: UTF-8 lines,
full-line comments starting with ``#``, one ``key = value`` pair per line,
dotted section prefixes (``model.theta``, ``kernel.epsilon``, ``grid.n``,
``time.tau``, ``init.*``, ``forcing.*``, ``output.*``, ``seed``).  Complex
values are ``re+imi`` literals, e.g. ``0.5-0.25i``.

Defaults: kernel.epsilon = 1e-8 for 0 < m < 1 (saturated m = 0 runs must
set it explicitly), kernel.M = 1e8, grid.length = 1, snapshot_every = 1,
b = gamma = 0, seed = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grid import Field, Grid, read_snapshot, sine_mode
from .kernels import KernelParams
from .operators import OperatorSpec
from .params import ModelParams, ray_coefficient
from .rng import Rng
from .timestepper import ForcingSpec, TimeConfig


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def parse_complex(text: str) -> complex:
    """Complex literal ``re+imi`` (also plain reals and pure imaginaries)."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as err:
        raise ConfigError(f"bad complex literal {text!r}") from err


def _parse_mode_index(text: str):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) == 1:
        return int(parts[0])
    return tuple(int(p) for p in parts)


def parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


@dataclass
class RunConfig:
    model: ModelParams
    kernel: KernelParams
    grid: Grid
    time: TimeConfig
    forcing: ForcingSpec
    init_kind: str = "zero"
    init_k: int | tuple = 1
    init_amplitude: complex = 1.0
    init_scale: float = 1.0
    init_path: str | None = None
    outputs: dict = field(default_factory=dict)
    seed: int = 0

    def operator_spec(self) -> OperatorSpec:
        return OperatorSpec(self.model, self.kernel, self.grid)

    def initial_field(self) -> Field:
        if self.init_kind == "zero":
            return Field.zero(self.grid)
        if self.init_kind == "modal":
            return sine_mode(self.grid, self.init_k, self.init_amplitude)
        if self.init_kind == "random":
            rng = Rng(self.seed).substream(0xC61)
            return Field(rng.complex_normal(self.grid.size, self.init_scale), self.grid)
        u = read_snapshot(self.init_path)
        if u.grid != self.grid:
            raise ConfigError(f"initial snapshot grid {u.grid} does not match {self.grid}")
        return u


def _take(pairs: dict, key: str, conv, default=None, required=False):
    if key in pairs:
        raw = pairs.pop(key)
        try:
            return conv(raw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad value for {key}: {raw!r}") from err
    if required:
        raise ConfigError(f"missing required key {key}")
    return default


def parse_config(text: str) -> RunConfig:
    pairs = parse_pairs(text)

    theta = _take(pairs, "model.theta", float, required=True)
    m = _take(pairs, "model.m", float, required=True)
    p = _take(pairs, "model.p", float, required=True)
    # the m = 0 cone is the exact ray mu e^{-i theta}: decimal literals round
    # off it, so the ray parameterization computes a from theta directly
    a_ray = _take(pairs, "model.a_ray", float, default=None)
    if a_ray is not None:
        if "model.a" in pairs:
            raise ConfigError("give model.a or model.a_ray, not both")
        a = ray_coefficient(a_ray, theta)
    else:
        a = _take(pairs, "model.a", parse_complex, required=True)
    b = _take(pairs, "model.b", parse_complex, default=0.0 + 0.0j)
    gamma = _take(pairs, "model.gamma", parse_complex, default=0.0 + 0.0j)
    model = ModelParams(theta=theta, m=m, p=p, a=a, b=b, gamma=gamma)

    epsilon = _take(pairs, "kernel.epsilon", float, default=None)
    trunc = _take(pairs, "kernel.M", float, default=1e8)
    if epsilon is None:
        if m == 0.0:
            raise ConfigError("saturated runs (m = 0) need an explicit kernel.epsilon")
        epsilon = 0.0 if m == 1.0 else 1e-8
    kernel = KernelParams(epsilon=epsilon, M=trunc)

    grid = Grid(dim=_take(pairs, "grid.dim", int, default=1),
                n=_take(pairs, "grid.n", int, required=True),
                length=_take(pairs, "grid.length", float, default=1.0))

    time = TimeConfig(tau=_take(pairs, "time.tau", float, required=True),
                      t_end=_take(pairs, "time.t_end", float, required=True),
                      snapshot_every=_take(pairs, "time.snapshot_every", int, default=1))

    samples = _take(pairs, "forcing.samples",
                    lambda s: tuple(float(x) for x in s.split(",")), default=())
    forcing = ForcingSpec(kind=_take(pairs, "forcing.kind", str, default="zero"),
                          k=_take(pairs, "forcing.k", _parse_mode_index, default=1),
                          amplitude=_take(pairs, "forcing.amplitude", parse_complex,
                                          default=1.0 + 0.0j),
                          path=_take(pairs, "forcing.path", str, default=None),
                          profile=_take(pairs, "forcing.profile", str, default="constant"),
                          rate=_take(pairs, "forcing.rate", float, default=0.0),
                          samples=samples)

    config = RunConfig(
        model=model, kernel=kernel, grid=grid, time=time, forcing=forcing,
        init_kind=_take(pairs, "init.kind", str, default="zero"),
        init_k=_take(pairs, "init.k", _parse_mode_index, default=1),
        init_amplitude=_take(pairs, "init.amplitude", parse_complex, default=1.0 + 0.0j),
        init_scale=_take(pairs, "init.scale", float, default=1.0),
        init_path=_take(pairs, "init.path", str, default=None),
        outputs={key.split(".", 1)[1]: pairs.pop(key)
                 for key in [k for k in pairs if k.startswith("output.")]},
        seed=_take(pairs, "seed", int, default=0),
    )
    if pairs:
        raise ConfigError(f"unknown keys: {sorted(pairs)}")
    if config.init_kind not in ("zero", "modal", "file", "random"):
        raise ConfigError(f"unknown init.kind {config.init_kind!r}")
    if config.init_kind == "file" and not config.init_path:
        raise ConfigError("init.kind = file needs init.path")
    if forcing.kind == "file" and not forcing.path:
        raise ConfigError("forcing.kind = file needs forcing.path")
    return config


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return parse_config(text)
