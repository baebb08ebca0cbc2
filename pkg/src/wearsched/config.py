"""Experiment configuration: YAML files with strict validation, dotted-path
overrides, and constructors for the model objects they describe.

Sections: ``system`` (explicit matrices, or the two-dimensional benchmark
family selected by ``beta``), ``channel``, ``truncation``, ``solver``,
``simulate``, ``output``. Unknown keys are rejected so typos cannot silently
change an experiment.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .channel import ChannelModel
from .errors import ConfigError, WearschedError
from .linear_model import SystemModel
from .mdp import AgeState, Truncation
from .solvers import SolveOptions

OUTPUT_DIR_ENV = "WEARSCHED_OUT"

SOLVER_METHODS = ("rvi", "spi", "threshold-heuristic")


@dataclass(frozen=True)
class SolverConfig:
    method: str = "rvi"
    tol: float = 1e-9
    max_iter: int = 200_000
    ref_state: AgeState = AgeState(1, 1)
    tau_renew: int | None = None  # threshold-heuristic only; None = search

    def options(self) -> SolveOptions:
        return SolveOptions(tol=self.tol, max_iter=self.max_iter, ref_state=self.ref_state)


@dataclass(frozen=True)
class SimulateConfig:
    epochs: int = 100_000
    seed: int = 0
    replications: int = 1


@dataclass(frozen=True)
class OutputConfig:
    directory: str = ""
    formats: tuple[str, ...] = ("csv", "json")

    def resolve_directory(self, override: str | None = None) -> Path:
        if override:
            return Path(override)
        if self.directory:
            return Path(self.directory)
        return Path(os.environ.get(OUTPUT_DIR_ENV, "out"))


@dataclass(frozen=True)
class ExperimentConfig:
    system: dict
    channel: dict
    truncation: dict
    solver: SolverConfig = field(default_factory=SolverConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    raw: dict = field(default_factory=dict)

    def build_system(self) -> SystemModel:
        return _build_system(self.system)

    def build_channel(self) -> ChannelModel:
        c = self.channel
        return ChannelModel(
            theta_max=c["theta_max"],
            theta_min=c["theta_min"],
            alpha=c["alpha"],
            tau_d=c["tau_d"],
            delta_r=c["delta_r"],
        )

    def build_truncation(self) -> Truncation:
        return Truncation(tau_max=self.truncation["tau_max"], delta_max=self.truncation["delta_max"])

    def echo(self) -> dict:
        """The normalized configuration; loading it again reproduces this run."""
        return self.raw


def _field_error(path: str, message: str) -> ConfigError:
    return ConfigError(field=path, message=message)


def _require_keys(section: dict, path: str, known: set[str], required: set[str]) -> None:
    for k in section:
        if k not in known:
            raise _field_error(f"{path}.{k}", "unknown key")
    for k in required:
        if k not in section:
            raise _field_error(f"{path}.{k}", "missing required key")


def _number(section: dict, path: str, key: str, default=None, *, integer=False, minimum=None,
            maximum=None, strict_min=False):
    if key not in section:
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _field_error(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise _field_error(f"{path}.{key}", f"expected an integer, got {v!r}")
    if minimum is not None and (v <= minimum if strict_min else v < minimum):
        op = ">" if strict_min else ">="
        raise _field_error(f"{path}.{key}", f"must be {op} {minimum}, got {v!r}")
    if maximum is not None and v > maximum:
        raise _field_error(f"{path}.{key}", f"must be <= {maximum}, got {v!r}")
    return int(v) if integer else float(v)


def _matrix(section: dict, path: str, key: str):
    v = section.get(key)
    if v is None:
        return None
    try:
        m = np.array(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise _field_error(f"{path}.{key}", f"expected a matrix (list of rows): {exc}") from exc
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise _field_error(f"{path}.{key}", "expected a matrix (list of rows)")
    return m


def _build_system(section: dict) -> SystemModel:
    if "beta" in section:
        beta = section["beta"]
        a = np.array([[float(beta), 0.5], [0.0, 0.8]])
        return SystemModel(A=a, C=np.array([[1.0, 1.0]]), Q=np.eye(2), R=np.array([[1.0]]))
    try:
        return SystemModel(A=section["a"], C=section["c"], Q=section["q"], R=section["r"])
    except WearschedError as exc:
        raise _field_error("system", str(exc)) from exc


def _validate_system(section, path="system") -> dict:
    if not isinstance(section, dict):
        raise _field_error(path, "expected a mapping")
    if "beta" in section:
        _require_keys(section, path, {"beta"}, {"beta"})
        _number(section, path, "beta", minimum=0.0, strict_min=True)
        return {"beta": float(section["beta"])}
    _require_keys(section, path, {"a", "c", "q", "r"}, {"a", "c", "q", "r"})
    out = {}
    for key in ("a", "c", "q", "r"):
        m = _matrix(section, path, key)
        if m is None:
            raise _field_error(f"{path}.{key}", "missing required key")
        out[key] = m.tolist()
    return out


def _validate_channel(section, path="channel") -> dict:
    if not isinstance(section, dict):
        raise _field_error(path, "expected a mapping")
    known = {"theta_max", "theta_min", "alpha", "tau_d", "delta_r"}
    _require_keys(section, path, known, known)
    theta_max = _number(section, path, "theta_max", minimum=0.0, maximum=1.0)
    theta_min = _number(section, path, "theta_min", minimum=0.0, maximum=1.0)
    if theta_min > theta_max:
        raise _field_error(f"{path}.theta_min", f"theta_min={theta_min} exceeds theta_max={theta_max}")
    return {
        "theta_max": theta_max,
        "theta_min": theta_min,
        "alpha": _number(section, path, "alpha", minimum=0.0, strict_min=True),
        "tau_d": _number(section, path, "tau_d", integer=True, minimum=2),
        "delta_r": _number(section, path, "delta_r", integer=True, minimum=2),
    }


def _validate_truncation(section, path="truncation") -> dict:
    if not isinstance(section, dict):
        raise _field_error(path, "expected a mapping")
    known = {"tau_max", "delta_max"}
    _require_keys(section, path, known, known)
    return {
        "tau_max": _number(section, path, "tau_max", integer=True, minimum=1),
        "delta_max": _number(section, path, "delta_max", integer=True, minimum=1),
    }


def _validate_solver(section, path="solver") -> SolverConfig:
    if section is None:
        return SolverConfig()
    if not isinstance(section, dict):
        raise _field_error(path, "expected a mapping")
    known = {"method", "tol", "max_iter", "ref_state", "tau_renew"}
    _require_keys(section, path, known, set())
    method = section.get("method", "rvi")
    if method not in SOLVER_METHODS:
        raise _field_error(f"{path}.method", f"must be one of {SOLVER_METHODS}, got {method!r}")
    ref = section.get("ref_state", [1, 1])
    if (
        not isinstance(ref, (list, tuple))
        or len(ref) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in ref)
    ):
        raise _field_error(f"{path}.ref_state", f"expected [tau, delta] positive integers, got {ref!r}")
    return SolverConfig(
        method=method,
        tol=_number(section, path, "tol", default=1e-9, minimum=0.0, strict_min=True),
        max_iter=_number(section, path, "max_iter", default=200_000, integer=True, minimum=1),
        ref_state=AgeState(ref[0], ref[1]),
        tau_renew=_number(section, path, "tau_renew", default=None, integer=True, minimum=0),
    )


def _validate_simulate(section, path="simulate") -> SimulateConfig:
    if section is None:
        return SimulateConfig()
    if not isinstance(section, dict):
        raise _field_error(path, "expected a mapping")
    known = {"epochs", "seed", "replications"}
    _require_keys(section, path, known, set())
    return SimulateConfig(
        epochs=_number(section, path, "epochs", default=100_000, integer=True, minimum=1),
        seed=_number(section, path, "seed", default=0, integer=True, minimum=0, maximum=2**64 - 1),
        replications=_number(section, path, "replications", default=1, integer=True, minimum=1),
    )


def _validate_output(section, path="output") -> OutputConfig:
    if section is None:
        return OutputConfig()
    if not isinstance(section, dict):
        raise _field_error(path, "expected a mapping")
    known = {"directory", "formats"}
    _require_keys(section, path, known, set())
    directory = section.get("directory", "")
    if not isinstance(directory, str):
        raise _field_error(f"{path}.directory", f"expected a string, got {directory!r}")
    formats = section.get("formats", ["csv", "json"])
    if not isinstance(formats, list) or not formats:
        raise _field_error(f"{path}.formats", f"expected a nonempty list, got {formats!r}")
    for fmt in formats:
        if fmt not in ("csv", "json"):
            raise _field_error(f"{path}.formats", f"unknown format {fmt!r}")
    return OutputConfig(directory=directory, formats=tuple(formats))


def validate_config_dict(data: dict) -> ExperimentConfig:
    """Validate a raw configuration mapping and produce the typed config.

    Model-level invariants are checked here too (by constructing the model
    objects), so every invalid configuration fails with a field-annotated
    error before any work starts.
    """
    if not isinstance(data, dict):
        raise ConfigError(field="<root>", message="configuration must be a mapping")
    known = {"system", "channel", "truncation", "solver", "simulate", "output"}
    for k in data:
        if k not in known:
            raise _field_error(k, "unknown section")
    for k in ("system", "channel", "truncation"):
        if k not in data:
            raise _field_error(k, "missing required section")

    system = _validate_system(data["system"])
    channel = _validate_channel(data["channel"])
    truncation = _validate_truncation(data["truncation"])
    solver = _validate_solver(data.get("solver"))
    simulate = _validate_simulate(data.get("simulate"))
    output = _validate_output(data.get("output"))

    raw = {
        "system": system,
        "channel": channel,
        "truncation": truncation,
        "solver": {
            "method": solver.method,
            "tol": solver.tol,
            "max_iter": solver.max_iter,
            "ref_state": [solver.ref_state.tau, solver.ref_state.delta],
            **({"tau_renew": solver.tau_renew} if solver.tau_renew is not None else {}),
        },
        "simulate": {
            "epochs": simulate.epochs,
            "seed": simulate.seed,
            "replications": simulate.replications,
        },
        "output": {"directory": output.directory, "formats": list(output.formats)},
    }
    cfg = ExperimentConfig(
        system=system,
        channel=channel,
        truncation=truncation,
        solver=solver,
        simulate=simulate,
        output=output,
        raw=raw,
    )
    # Construct the model objects once so invariant violations surface now.
    try:
        cfg.build_system()
    except WearschedError as exc:
        raise _field_error("system", str(exc)) from exc
    try:
        cfg.build_channel()
    except WearschedError as exc:
        raise _field_error("channel", str(exc)) from exc
    try:
        cfg.build_truncation()
    except WearschedError as exc:
        raise _field_error("truncation", str(exc)) from exc
    ref = cfg.solver.ref_state
    if ref.tau > truncation["tau_max"] or ref.delta > truncation["delta_max"]:
        raise _field_error("solver.ref_state", f"reference state {tuple(ref)} outside the grid")
    return cfg


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply repeatable ``--set section.key=value`` overrides to a raw mapping.

    Values parse as YAML scalars/lists, so ``--set channel.alpha=0.05`` and
    ``--set solver.ref_state=[2,3]`` both work.
    """
    for item in overrides:
        if "=" not in item:
            raise ConfigError(field=item, message="override must look like section.key=value")
        dotted, value = item.split("=", 1)
        keys = dotted.strip().split(".")
        if not all(keys):
            raise ConfigError(field=dotted, message="empty key path in override")
        try:
            parsed = yaml.safe_load(value)
        except yaml.YAMLError as exc:
            raise ConfigError(field=dotted, message=f"unparseable value {value!r}: {exc}") from exc
        if isinstance(parsed, str):
            # YAML 1.1 leaves bare scientific notation like 1e-8 as a string.
            try:
                parsed = float(parsed)
            except ValueError:
                pass
        node = data
        for k in keys[:-1]:
            nxt = node.get(k)
            if nxt is None:
                nxt = {}
                node[k] = nxt
            if not isinstance(nxt, dict):
                raise ConfigError(field=dotted, message=f"cannot descend into non-mapping {k!r}")
            node = nxt
        node[keys[-1]] = parsed
    return data


def load_config(path: str | Path, overrides: list[str] | None = None) -> ExperimentConfig:
    """Load, override and validate an experiment configuration file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(field="<config>", message=f"configuration file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(field="<config>", message=f"invalid YAML: {exc}") from exc
    if data is None:
        data = {}
    if overrides:
        if not isinstance(data, dict):
            raise ConfigError(field="<root>", message="configuration must be a mapping")
        data = apply_overrides(data, overrides)
    return validate_config_dict(data)
