"""Experiment configuration: a YAML key-value tree with a closed schema.

Unknown keys and bad values raise :class:`ConfigError` carrying the line number of
the offending node.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .spectral_groups import GroupKind, GroupSpec


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source or '<config>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


class Experiment(str, enum.Enum):
    LINEAR_DECAY = "LinearDecay"
    REGIME_SWEEP = "RegimeSweep"
    SEMILINEAR_EXISTENCE = "SemilinearExistence"
    EPSILON_THRESHOLD = "EpsilonThreshold"
    GN_PROBE = "GNProbe"
    PROPAGATOR_TABLE = "PropagatorTable"

    @property
    def command(self) -> str:
        return _COMMANDS[self]

    @classmethod
    def from_command(cls, name: str) -> "Experiment":
        for exp, cmd in _COMMANDS.items():
            if name in (cmd, exp.value):
                return exp
        raise ValueError(name)


_COMMANDS = {
    Experiment.LINEAR_DECAY: "linear-decay",
    Experiment.REGIME_SWEEP: "regime-sweep",
    Experiment.SEMILINEAR_EXISTENCE: "semilinear-existence",
    Experiment.EPSILON_THRESHOLD: "epsilon-threshold",
    Experiment.GN_PROBE: "gn-probe",
    Experiment.PROPAGATOR_TABLE: "propagator-table",
}


@dataclass(frozen=True)
class DataSpec:
    """Initial data recipe.

    profile: ``random`` (Gaussian, variance (1 + lambda^2)^-r), ``single-mode`` or ``zero``.
    ``zero_mode`` optionally pins the zero-mode coefficients (u0, u1) before scaling.
    ``amplitude`` is the target ||u0||_{H^1} + ||u1||_{L^2}; None keeps the raw draw.
    """

    seed: int = 0
    profile: str = "random"
    decay_exponent: float = 1.0
    amplitude: float | None = None
    mode: tuple[int, ...] | None = None
    zero_mode: tuple[float, float] | None = None


@dataclass(frozen=True)
class Tolerances:
    rate: float = 0.02
    picard_tol: float = 1e-10
    max_contraction: float = 0.5
    gn_stability: float = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    group: GroupSpec = GroupSpec(GroupKind.TORUS_D3)
    K: int = 8
    b: float = 1.0
    m_sq: float = 1.0
    p: float = 2.0
    T: float = 30.0
    dt: float | None = None
    picard_max_iter: int = 50
    dealias_oversample: int | None = None
    data: DataSpec = field(default_factory=DataSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: str | None = None
    # experiment-specific knobs
    t_max: float = 20.0
    n_times: int = 400
    fit_window: tuple[float, float] = (5.0, 20.0)
    cases: tuple[tuple[float, float], ...] = ((1.0, 1.0), (2.0, 1.0), (3.0, 1.0))
    q: float = 4.0
    n_fields: int = 1000
    lambda_sq: float = 0.0
    growth_factor: float = 4.0
    start_amplitude: float = 1e-4
    bisection_steps: int = 6

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, data=replace(self.data, seed=int(seed)))


# key -> (kind, extra validation) ; kinds: int, float, posfloat, str, ...
def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


_TOP = {
    "experiment": "experiment",
    "group": "group",
    "K": ("int", _nonneg, "must be >= 0"),
    "b": ("float", _positive, "must be > 0"),
    "m_sq": ("float", _positive, "must be > 0"),
    "p": ("float", lambda x: x > 1, "must be > 1"),
    "T": ("float", _positive, "must be > 0"),
    "dt": ("optfloat", lambda x: x is None or x > 0, "must be > 0"),
    "picard_max_iter": ("int", _positive, "must be >= 1"),
    "dealias_oversample": ("optint", lambda x: x is None or x >= 1, "must be >= 1"),
    "output": ("optstr", None, ""),
    "t_max": ("float", _positive, "must be > 0"),
    "n_times": ("int", lambda x: x >= 5, "must be >= 5"),
    "fit_window": ("pair", lambda x: 0 <= x[0] < x[1], "must be [lo, hi] with 0 <= lo < hi"),
    "cases": ("cases", None, ""),
    "q": ("float", lambda x: x >= 1, "must be >= 1"),
    "n_fields": ("int", _positive, "must be >= 1"),
    "lambda_sq": ("float", _nonneg, "must be >= 0"),
    "growth_factor": ("float", lambda x: x > 1, "must be > 1"),
    "start_amplitude": ("float", _positive, "must be > 0"),
    "bisection_steps": ("int", _nonneg, "must be >= 0"),
    "data": "data",
    "tolerances": "tolerances",
}

_DATA = {
    "seed": ("int", _nonneg, "must be >= 0"),
    "profile": ("str", lambda x: x in ("random", "single-mode", "zero"), "must be random, single-mode or zero"),
    "decay_exponent": ("float", _nonneg, "must be >= 0"),
    "amplitude": ("optfloat", lambda x: x is None or x >= 0, "must be >= 0"),
    "mode": ("intlist", None, ""),
    "zero_mode": ("pair", None, ""),
}

_TOL = {
    "rate": ("float", _positive, "must be > 0"),
    "picard_tol": ("float", _positive, "must be > 0"),
    "max_contraction": ("float", _positive, "must be > 0"),
    "gn_stability": ("float", _positive, "must be > 0"),
}


def _scalar(node, kind, source):
    line = node.start_mark.line + 1
    if kind in ("optfloat", "optint", "optstr") and isinstance(node, yaml.ScalarNode) and node.tag.endswith(":null"):
        return None
    if not isinstance(node, yaml.ScalarNode):
        raise ConfigError(f"expected a scalar, got a {type(node).__name__}", line, source)
    value = yaml.safe_load(node.value) if not node.style else node.value
    base = kind.removeprefix("opt")
    try:
        if base == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError
            return int(value)
        if base == "float":
            if isinstance(value, bool):
                raise TypeError
            out = float(value)
            if not math.isfinite(out):
                raise TypeError
            return out
        if base == "str":
            return str(value)
    except (TypeError, ValueError):
        pass
    raise ConfigError(f"expected {base}, got {node.value!r}", line, source)


def _sequence(node, source):
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError("expected a list", node.start_mark.line + 1, source)
    return node.value


def _convert(node, spec, source):
    kind, check, msg = spec
    line = node.start_mark.line + 1
    if kind == "pair":
        items = _sequence(node, source)
        if len(items) != 2:
            raise ConfigError("expected a list of two numbers", line, source)
        value = tuple(_scalar(n, "float", source) for n in items)
    elif kind == "intlist":
        value = tuple(_scalar(n, "int", source) for n in _sequence(node, source))
    elif kind == "cases":
        rows = []
        for item in _sequence(node, source):
            pair = _convert(item, ("pair", lambda x: x[0] > 0 and x[1] > 0, "b and m_sq must be > 0"), source)
            rows.append(pair)
        if not rows:
            raise ConfigError("cases must not be empty", line, source)
        value = tuple(rows)
    else:
        value = _scalar(node, kind, source)
    if check is not None and not check(value):
        raise ConfigError(f"invalid value {node.value!r}: {msg}", line, source)
    return value


def _mapping(node, schema, source, what):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{what} must be a mapping", node.start_mark.line + 1, source)
    out = {}
    for key_node, value_node in node.value:
        key = key_node.value
        line = key_node.start_mark.line + 1
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in {what}", line, source)
        if key in out:
            raise ConfigError(f"duplicate key {key!r} in {what}", line, source)
        out[key] = (schema[key], value_node)
    return out


def parse_config(text: str, source: str | None = None, experiment: Experiment | None = None) -> ExperimentConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    if root is None:
        root = yaml.compose("{}")
    entries = _mapping(root, _TOP, source, "config")
    kwargs = {}
    for key, (spec, node) in entries.items():
        line = node.start_mark.line + 1
        if spec == "experiment":
            name = _scalar(node, "str", source)
            try:
                kwargs["experiment"] = Experiment.from_command(name)
            except ValueError:
                raise ConfigError(f"unknown experiment {name!r}", line, source) from None
        elif spec == "group":
            name = _scalar(node, "str", source)
            try:
                kwargs["group"] = GroupSpec.from_name(name)
            except ValueError:
                choices = ", ".join(k.value for k in GroupKind)
                raise ConfigError(f"unknown group {name!r} (choose from {choices})", line, source) from None
        elif spec == "data":
            sub = _mapping(node, _DATA, source, "data")
            kwargs["data"] = DataSpec(**{k: _convert(n, s, source) for k, (s, n) in sub.items()})
            _check_data(kwargs["data"], node, source)
        elif spec == "tolerances":
            sub = _mapping(node, _TOL, source, "tolerances")
            kwargs["tolerances"] = Tolerances(**{k: _convert(n, s, source) for k, (s, n) in sub.items()})
        else:
            kwargs[key] = _convert(node, spec, source)

    if experiment is not None:
        if "experiment" in kwargs and kwargs["experiment"] is not experiment:
            line = entries["experiment"][1].start_mark.line + 1
            raise ConfigError(
                f"config is for {kwargs['experiment'].value}, but subcommand {experiment.command} was given",
                line, source)
        kwargs["experiment"] = experiment
    if "experiment" not in kwargs:
        raise ConfigError("missing key 'experiment' (or pass a subcommand)", 1, source)
    cfg = ExperimentConfig(**kwargs)
    if cfg.dt is not None and cfg.dt > cfg.T:
        raise ConfigError("dt must not exceed T", entries["dt"][1].start_mark.line + 1, source)
    if cfg.data.mode is not None:
        width = cfg.group.torus_rank or 1
        if len(cfg.data.mode) != width:
            node = root_lookup(entries, "data")
            raise ConfigError(f"data.mode needs {width} integers for {cfg.group}",
                              node.start_mark.line + 1 if node is not None else None, source)
        if max(abs(c) for c in cfg.data.mode) > cfg.K or (not cfg.group.is_torus and cfg.data.mode[0] < 0):
            node = root_lookup(entries, "data")
            raise ConfigError(f"data.mode {list(cfg.data.mode)} is outside truncation K={cfg.K}",
                              node.start_mark.line + 1 if node is not None else None, source)
    return cfg


def root_lookup(entries, key):
    item = entries.get(key)
    return item[1] if item else None


def _check_data(spec: DataSpec, node, source):
    if spec.profile == "single-mode" and spec.mode is None:
        raise ConfigError("profile single-mode requires data.mode", node.start_mark.line + 1, source)


def load_config(path, experiment: Experiment | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path), experiment)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, Experiment):
            v = v.value
        elif isinstance(v, GroupSpec):
            v = v.kind.value
        elif isinstance(v, (DataSpec, Tolerances)):
            v = {g.name: _plain(getattr(v, g.name)) for g in fields(v)}
        out[f.name] = _plain(v)
    return out


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v
