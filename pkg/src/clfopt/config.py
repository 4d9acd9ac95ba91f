"""Run configuration: a flat key = value file, overridden by CLI flags.

Every key has a CLI flag of the same name (dashes for underscores);
flags win over file entries, which win over the defaults below.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import clf as _clf
from .algorithms import ALGORITHMS, SCHEDULE_KINDS, StepSchedule
from .controller import ControlSet, MaxPrincipleController, NewtonController
from .flow import FlowConfig, INTEGRATORS
from .objectives import CATALOG_NAMES, BenchmarkProblem, make_benchmark

FLOW_ALGOS = ("flow_newton", "flow_clf")
RUN_ALGOS = ALGORITHMS + ("reference_gs",) + FLOW_ALGOS


class ConfigError(ValueError):
    """Invalid or unresolvable run configuration."""


@dataclass
class RunConfig:
    problem: str = "diagonal_quadratic"
    dim: int = 8
    seed: int = 0
    diag: tuple = (1.0, 4.0)
    n_samples: int = 40
    reg: float = 0.1
    algo: str = "cd"
    clf_kind: str = "max_squares"
    blocks: Optional[tuple] = None
    metric: str = "hessian"
    delta: float = 1.0
    ridge: float = 0.0
    schedule: str = "backtracking"
    alpha: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    eps_inf: float = 1e-8
    tie_tol: float = 1e-9
    max_iter: int = 100_000
    x0: Optional[tuple] = None
    t_final: float = 10.0
    step: float = 0.01
    integrator: str = "rk4"
    nu0: float = 1.0
    output: Optional[str] = None
    format: str = "csv"
    plot: bool = False

    def echo(self) -> dict:
        """JSON-ready snapshot of every field (reproducibility metadata)."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_FIELD_NAMES = {f.name for f in fields(RunConfig)}

_TUPLE_FLOAT = ("diag", "x0")
_TUPLE_INT = ("blocks",)
_INTS = ("dim", "seed", "n_samples", "max_iter")
_FLOATS = ("reg", "delta", "ridge", "alpha", "shrink", "sufficient_decrease",
           "eps_inf", "tie_tol", "t_final", "step", "nu0")
_BOOLS = ("plot",)


def parse_config_file(path) -> dict:
    """Read a flat `key = value` file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _FIELD_NAMES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = val.strip()
    return values


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    try:
        if key in _TUPLE_FLOAT:
            return tuple(float(tok) for tok in value.split(","))
        if key in _TUPLE_INT:
            return tuple(int(tok) for tok in value.split(","))
        if key in _INTS:
            return int(value)
        if key in _FLOATS:
            return float(value)
        if key in _BOOLS:
            return value.lower() in ("1", "true", "yes", "on")
    except ValueError:
        raise ConfigError(f"cannot parse value {value!r} for key {key!r}") from None
    return value


def build_run_config(file_values: dict | None = None,
                     overrides: dict | None = None) -> RunConfig:
    """Merge defaults <- file <- overrides, coerce types, and validate."""
    cfg = RunConfig()
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in _FIELD_NAMES:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None:
                continue
            setattr(cfg, key, _coerce(key, value))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.problem not in CATALOG_NAMES:
        raise ConfigError(f"unknown problem {cfg.problem!r}; one of {CATALOG_NAMES}")
    if cfg.algo not in RUN_ALGOS:
        raise ConfigError(f"unknown algo {cfg.algo!r}; one of {RUN_ALGOS}")
    if cfg.clf_kind not in _clf.KINDS:
        raise ConfigError(f"unknown clf {cfg.clf_kind!r}; one of {_clf.KINDS}")
    if cfg.metric not in ("hessian", "identity"):
        raise ConfigError("metric must be 'hessian' or 'identity'")
    if cfg.schedule not in SCHEDULE_KINDS:
        raise ConfigError(f"unknown schedule {cfg.schedule!r}; one of {SCHEDULE_KINDS}")
    if cfg.integrator not in INTEGRATORS:
        raise ConfigError(f"unknown integrator {cfg.integrator!r}; one of {INTEGRATORS}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")
    positive = {"delta": cfg.delta, "alpha": cfg.alpha, "eps_inf": cfg.eps_inf,
                "step": cfg.step, "t_final": cfg.t_final, "nu0": cfg.nu0}
    for name, val in positive.items():
        if val <= 0:
            raise ConfigError(f"{name} must be positive, got {val}")
    if cfg.ridge < 0 or cfg.tie_tol < 0:
        raise ConfigError("ridge and tie_tol must be nonnegative")
    if not 0 < cfg.shrink < 1 or not 0 < cfg.sufficient_decrease < 1:
        raise ConfigError("shrink and sufficient_decrease must lie in (0, 1)")
    if cfg.dim < 1 or cfg.max_iter < 1 or cfg.n_samples < 1:
        raise ConfigError("dim, max_iter, and n_samples must be >= 1")
    if cfg.reg < 0:
        raise ConfigError("reg must be nonnegative")
    if any(d <= 0 for d in cfg.diag):
        raise ConfigError("diag entries must be positive")


def make_problem(cfg: RunConfig) -> BenchmarkProblem:
    if cfg.problem == "diagonal_quadratic":
        return make_benchmark("diagonal_quadratic", diag=cfg.diag)
    if cfg.problem == "random_spd_quadratic":
        return make_benchmark("random_spd_quadratic", dim=cfg.dim, seed=cfg.seed)
    if cfg.problem == "logistic_l2":
        return make_benchmark("logistic_l2", dim=cfg.dim, n_samples=cfg.n_samples,
                              seed=cfg.seed, reg=cfg.reg)
    return make_benchmark("rosenbrock", dim=cfg.dim)


def make_blocks(cfg: RunConfig, dimension: int) -> _clf.BlockStructure:
    """Block partition from config, identity metrics per block; defaults to
    an even two-way split."""
    sizes = cfg.blocks
    if sizes is None:
        half = max(1, dimension // 2)
        sizes = (half, dimension - half) if dimension > half else (dimension,)
    if sum(sizes) != dimension:
        raise ConfigError(f"blocks {sizes} do not sum to the problem dimension {dimension}")
    return _clf.BlockStructure(sizes=tuple(sizes),
                               matrices=tuple(np.eye(s) for s in sizes))


def make_schedule(cfg: RunConfig) -> StepSchedule:
    return StepSchedule(kind=cfg.schedule, alpha=cfg.alpha, shrink=cfg.shrink,
                        sufficient_decrease=cfg.sufficient_decrease)


def make_flow_config(cfg: RunConfig, dimension: int) -> FlowConfig:
    if cfg.algo == "flow_newton":
        controller = NewtonController(nu0=cfg.nu0)
    else:
        lyap = _clf.LyapunovFunction(
            cfg.clf_kind,
            blocks=make_blocks(cfg, dimension) if cfg.clf_kind == "block_max" else None,
            tie_tolerance=cfg.tie_tol,
        )
        controller = MaxPrincipleController(
            clf=lyap,
            control_set=ControlSet(metric_kind=cfg.metric, delta=cfg.delta, ridge=cfg.ridge),
            nu0=cfg.nu0,
        )
    return FlowConfig(controller=controller, t_span=(0.0, cfg.t_final),
                      step=cfg.step, method=cfg.integrator, grad_tol=cfg.eps_inf)
