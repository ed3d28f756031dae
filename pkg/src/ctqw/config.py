"""Declarative experiment configuration.

A config is a YAML mapping. Lattice fields sit at the top level; the
protocol, sweep grid, propagator and output settings are sub-mappings::

    experiment: compare
    N: 8401            # odd; "auto" sizes the chain for the horizon
    horizon: 2000
    sample_every: 20
    protocol: {mode: alternating, beta1: -2.5, beta2: -3, omega: 2.71}
    propagator: {substep: 0.05}
    output: {dir: out, format: csv}

Unknown keys are rejected. :func:`emit_config` writes the fully resolved
form, which parses back to an equal config.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import yaml

from ctqw.errors import ConfigError
from ctqw.experiments import SweepSpec, sample_times
from ctqw.lattice import LatticeSpec, required_sites
from ctqw.propagator import DefectProtocol, PropagatorConfig

EXPERIMENTS = ("run", "sweep-beta", "sweep-omega", "compare", "snapshot")
FORMATS = ("csv", "json")
DEFAULT_SAMPLES = 100

SWEEP_DEFAULTS = {
    "sweep-beta": {"lo": -4.0, "hi": 2.0, "count": 121},
    "sweep-omega": {"lo": 0.1, "hi": 10.0, "count": 200},
}

_TOP_KEYS = {
    "experiment", "N", "epsilon", "gamma", "defect_site", "initial_site",
    "horizon", "sample_every", "threads", "protocol", "sweep", "propagator", "output",
}
_PROTOCOL_KEYS = {"mode", "beta", "beta1", "beta2", "omega", "period", "phase"}
_SWEEP_KEYS = {"lo", "hi", "count", "refine"}
_PROPAGATOR_KEYS = {"substep", "tolerance", "edge_guard", "edge_threshold"}
_OUTPUT_KEYS = {"dir", "format"}


@dataclass(frozen=True)
class ProtocolConfig:
    mode: str = "none"
    beta1: float = 0.0
    beta2: float = 0.0
    omega: float | None = None
    period: float | None = None
    phase: float = 0.0

    def build(self) -> DefectProtocol:
        if self.mode == "none":
            return DefectProtocol.free()
        if self.mode == "static":
            return DefectProtocol.static(self.beta1)
        return DefectProtocol.alternating(
            self.beta1, self.beta2, period=self.period, offset=self.phase * self.period
        )


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    horizon: float
    num_sites: int | None = None
    epsilon: float = 0.0
    gamma: float = 1.0
    defect_site: int = 0
    initial_site: int = 0
    sample_every: float | None = None
    threads: int = 1
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    sweep: tuple | None = None
    propagator: PropagatorConfig = field(default_factory=PropagatorConfig)
    output_dir: str = "out"
    output_format: str = "csv"

    @property
    def lattice(self) -> LatticeSpec:
        n = self.num_sites
        if n is None:
            n = required_sites(self.horizon, self.gamma)
        return LatticeSpec(n, self.epsilon, self.gamma, self.defect_site)

    @property
    def samples(self) -> float:
        return self.horizon / DEFAULT_SAMPLES if self.sample_every is None else self.sample_every

    def sweep_spec(self) -> SweepSpec:
        lo, hi, count, _ = self.sweep
        kind = "beta" if self.experiment == "sweep-beta" else "omega"
        return SweepSpec(kind, lo, hi, count, self.horizon, self.protocol.beta1, self.protocol.beta2)

    def resolved(self, horizon_scale: float = 1.0) -> ExperimentConfig:
        """Config with the horizon scaled and the chain length fixed.

        An explicit ``N`` is kept; an automatic one is sized for the new horizon.
        """
        if not (math.isfinite(horizon_scale) and horizon_scale > 0):
            raise ConfigError(f"horizon scale must be positive, got {horizon_scale}", "horizon-scale")
        horizon = self.horizon * horizon_scale
        sample_every = None if self.sample_every is None else self.sample_every * horizon_scale
        n = self.num_sites if self.num_sites is not None else required_sites(horizon, self.gamma)
        cfg = replace(self, horizon=horizon, sample_every=sample_every, num_sites=n)
        _validate(cfg)
        return cfg

    def to_dict(self) -> dict:
        proto = self.protocol
        p: dict = {"mode": proto.mode}
        if proto.mode == "static":
            p["beta"] = proto.beta1
        elif proto.mode == "alternating" or self.experiment == "sweep-omega":
            p.update(beta1=proto.beta1, beta2=proto.beta2)
            if proto.period is not None:
                p.update(omega=proto.omega, period=proto.period)
            p["phase"] = proto.phase
        d = {
            "experiment": self.experiment,
            "N": "auto" if self.num_sites is None else self.num_sites,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "defect_site": self.defect_site,
            "initial_site": self.initial_site,
            "horizon": self.horizon,
        }
        if self.sample_every is not None:
            d["sample_every"] = self.sample_every
        d["threads"] = self.threads
        d["protocol"] = p
        if self.sweep is not None:
            d["sweep"] = dict(zip(("lo", "hi", "count", "refine"), self.sweep))
        d["propagator"] = asdict(self.propagator)
        d["output"] = {"dir": self.output_dir, "format": self.output_format}
        return d


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"must be a mapping, got {type(mapping).__name__}", where or "config")
    unknown = sorted(set(map(str, mapping)) - allowed)
    if unknown:
        prefix = f"{where}." if where else ""
        raise ConfigError(f"unknown key (allowed: {', '.join(sorted(allowed))})", prefix + unknown[0])


def _number(mapping, key, default=None, where=""):
    name = f"{where}.{key}" if where else key
    value = mapping.get(key, default)
    if value is None:
        return None
    if isinstance(value, str):
        # YAML 1.1 reads exponent literals without a dot (1e-12) as strings
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"must be a number, got {value!r}", name) from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"must be a number, got {value!r}", name)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", name)
    return value


def _integer(mapping, key, default=None, where=""):
    name = f"{where}.{key}" if where else key
    value = mapping.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"must be an integer, got {value!r}", name)
    return value


def _protocol(raw, experiment) -> ProtocolConfig:
    _check_keys(raw, _PROTOCOL_KEYS, "protocol")
    default_mode = "alternating" if experiment in ("compare", "sweep-omega") else "none"
    mode = raw.get("mode", default_mode)
    if mode not in ("none", "static", "alternating"):
        raise ConfigError(f"must be one of none, static, alternating; got {mode!r}", "protocol.mode")
    num = lambda k, d=None: _number(raw, k, d, "protocol")  # noqa: E731
    if mode == "none":
        extra = sorted(set(raw) - {"mode"})
        if extra:
            raise ConfigError("not used when mode is none", f"protocol.{extra[0]}")
        return ProtocolConfig()
    if mode == "static":
        extra = sorted(set(raw) - {"mode", "beta"})
        if extra:
            raise ConfigError("static mode takes only 'beta'", f"protocol.{extra[0]}")
        beta = num("beta")
        if beta is None:
            raise ConfigError("required for static mode", "protocol.beta")
        return ProtocolConfig("static", beta, beta)
    if "beta" in raw:
        raise ConfigError("alternating mode takes beta1 and beta2", "protocol.beta")
    beta1, beta2 = num("beta1"), num("beta2")
    for key, value in (("beta1", beta1), ("beta2", beta2)):
        if value is None:
            raise ConfigError("required for alternating mode", f"protocol.{key}")
    omega, period = num("omega"), num("period")
    if omega is not None and omega <= 0:
        raise ConfigError(f"omega > 0 violated (omega={omega})", "protocol.omega")
    if period is not None and period <= 0:
        raise ConfigError(f"T > 0 violated (period={period})", "protocol.period")
    if omega is not None and period is not None:
        if not math.isclose(period, 2 * math.pi / omega, rel_tol=1e-12):
            raise ConfigError("inconsistent with omega (period = 2 pi / omega)", "protocol.period")
    if omega is not None:
        period = 2 * math.pi / omega
    elif period is not None:
        omega = 2 * math.pi / period
    elif experiment != "sweep-omega":
        raise ConfigError("alternating mode needs omega or period", "protocol.omega")
    phase = num("phase", 0.0)
    return ProtocolConfig("alternating", beta1, beta2, omega, period, phase)


def _validate(cfg: ExperimentConfig):
    if not cfg.horizon > 0:
        raise ConfigError(f"horizon > 0 violated (horizon={cfg.horizon})", "horizon")
    lattice = cfg.lattice
    if not -lattice.half_width <= cfg.initial_site <= lattice.half_width:
        raise ConfigError(f"site {cfg.initial_site} lies outside the lattice", "initial_site")
    if cfg.sample_every is not None:
        if not cfg.sample_every > 0:
            raise ConfigError("sample_every > 0 violated", "sample_every")
        sample_times(cfg.horizon, cfg.sample_every)
    if cfg.threads < 1:
        raise ConfigError(f"threads >= 1 violated (threads={cfg.threads})", "threads")
    if cfg.experiment == "compare" and cfg.protocol.mode != "alternating":
        raise ConfigError("compare needs an alternating protocol", "protocol.mode")
    if cfg.experiment == "sweep-omega" and cfg.protocol.mode != "alternating":
        raise ConfigError("sweep-omega needs beta1 and beta2 of an alternating protocol", "protocol.mode")
    if cfg.sweep is not None:
        cfg.sweep_spec()
    if cfg.protocol.mode == "static" or cfg.protocol.period is not None:
        cfg.protocol.build()


def config_from_dict(raw, experiment: str | None = None) -> ExperimentConfig:
    """Validate a parsed mapping; ``experiment`` must agree with the file if both are given."""
    if raw is None:
        raw = {}
    _check_keys(raw, _TOP_KEYS, "")
    name = raw.get("experiment", experiment)
    if name is None:
        raise ConfigError("required", "experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"must be one of {', '.join(EXPERIMENTS)}; got {name!r}", "experiment")
    if experiment is not None and name != experiment:
        raise ConfigError(f"config is for {name!r}, command is {experiment!r}", "experiment")

    horizon = _number(raw, "horizon")
    if horizon is None:
        raise ConfigError("required", "horizon")
    n = raw.get("N")
    if n == "auto":
        n = None
    elif n is not None:
        n = _integer(raw, "N")

    sweep = None
    if name in SWEEP_DEFAULTS:
        s = raw.get("sweep", {})
        _check_keys(s, _SWEEP_KEYS, "sweep")
        d = SWEEP_DEFAULTS[name]
        sweep = (
            _number(s, "lo", d["lo"], "sweep"),
            _number(s, "hi", d["hi"], "sweep"),
            _integer(s, "count", d["count"], "sweep"),
            _integer(s, "refine", 0, "sweep"),
        )
        if sweep[3] < 0:
            raise ConfigError("refine >= 0 violated", "sweep.refine")
        if sweep[3] and name != "sweep-omega":
            raise ConfigError("refinement applies to omega sweeps only", "sweep.refine")
    elif "sweep" in raw:
        raise ConfigError(f"only used by sweep experiments, not {name!r}", "sweep")

    prop = raw.get("propagator", {})
    _check_keys(prop, _PROPAGATOR_KEYS, "propagator")
    base = PropagatorConfig()
    propagator = PropagatorConfig(
        substep=_number(prop, "substep", base.substep, "propagator"),
        tolerance=_number(prop, "tolerance", base.tolerance, "propagator"),
        edge_guard=_integer(prop, "edge_guard", base.edge_guard, "propagator"),
        edge_threshold=_number(prop, "edge_threshold", base.edge_threshold, "propagator"),
    )

    out = raw.get("output", {})
    _check_keys(out, _OUTPUT_KEYS, "output")
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"must be csv or json, got {fmt!r}", "output.format")
    out_dir = out.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("must be a non-empty path", "output.dir")

    cfg = ExperimentConfig(
        experiment=name,
        horizon=horizon,
        num_sites=n,
        epsilon=_number(raw, "epsilon", 0.0),
        gamma=_number(raw, "gamma", 1.0),
        defect_site=_integer(raw, "defect_site", 0),
        initial_site=_integer(raw, "initial_site", 0),
        sample_every=_number(raw, "sample_every"),
        threads=_integer(raw, "threads", 1),
        protocol=_protocol(raw.get("protocol", {}), name),
        sweep=sweep,
        propagator=propagator,
        output_dir=out_dir,
        output_format=fmt,
    )
    _validate(cfg)
    return cfg


def parse_config(text: str, experiment: str | None = None) -> ExperimentConfig:
    """Parse and validate a YAML config document.

    Raises
    ------
    ConfigError
        On YAML syntax errors (with line and column) and on any violated
        constraint (naming the offending key).
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"syntax error at {where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"syntax error: {exc}") from exc
    return config_from_dict(raw, experiment)


def emit_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=False)
