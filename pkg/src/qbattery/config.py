"""
TOML run/sweep configuration files.

A run file has the tables ``[model]``, ``[drive]``, ``[dissipation]``,
``[initial]`` and ``[simulation]``; a sweep file replaces ``[dissipation]``
and ``[initial]`` with ``[sweep]``.  See the README for every key.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import DissipationConfig, DriveConfig, InitialStateSpec, Interaction, ModelConfig, Scenario
from .propagator import AdaptiveFock, FixedFock, SimulationConfig
from .sweep import SweepSpec

__all__ = ["ConfigSchemaError", "RunConfig", "load_toml", "parse_run_config", "parse_sweep_config"]


class ConfigSchemaError(ValueError):
    """Malformed configuration; ``problems`` lists every offending key."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


_NUM = (int, float)

# table -> key -> (types, required)
_RUN_SCHEMA = {
    "model": {
        "n_qubits": (int, True),
        "interaction": (str, True),
        "g": (_NUM, True),
        "omega_q": (_NUM, False),
        "omega_c": (_NUM, False),
    },
    "drive": {"enabled": (bool, False), "eta0": (_NUM, False), "sigma": (_NUM, False), "t0": (_NUM, False)},
    "dissipation": {"kappa": (_NUM, False), "gamma_minus": (_NUM, False), "gamma_z": (_NUM, False)},
    "initial": {"scenario": (str, True), "cavity_fock": (int, False)},
    "simulation": {
        "t_final": (_NUM, False),
        "sample_dt": (_NUM, False),
        "rel_tol": (_NUM, False),
        "abs_tol": (_NUM, False),
        "method": (str, False),
        "fock_policy": (str, False),
        "fock_cutoff": (int, False),
        "population_eps": (_NUM, False),
    },
}

_SWEEP_SCHEMA = {
    "sweep": {
        "n_list": (list, True),
        "g_list": (list, False),
        "kappa_list": (list, False),
        "gamma_minus_list": (list, False),
        "gamma_z_list": (list, False),
        "scenarios": (list, False),
        "interactions": (list, False),
        "cavity_fock": (int, False),
    },
    "model": {"omega_q": (_NUM, False), "omega_c": (_NUM, False)},
    "drive": _RUN_SCHEMA["drive"],
    "simulation": _RUN_SCHEMA["simulation"],
}


def load_toml(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _check(raw: dict, schema: dict) -> list[str]:
    problems = []
    for table in raw:
        if table not in schema:
            problems.append(f"unknown table [{table}]")
    for table, keys in schema.items():
        section = raw.get(table, {})
        if not isinstance(section, dict):
            problems.append(f"[{table}] must be a table")
            continue
        for key in section:
            if key not in keys:
                problems.append(f"unknown key {table}.{key}")
        for key, (types, required) in keys.items():
            if key not in section:
                if required:
                    problems.append(f"missing required key {table}.{key}")
                continue
            val = section[key]
            if isinstance(val, bool) and types is not bool:
                problems.append(f"{table}.{key} has wrong type bool")
            elif not isinstance(val, types):
                problems.append(f"{table}.{key} has wrong type {type(val).__name__}")
    return problems


def _enum(value, enum_cls, name, problems):
    try:
        return enum_cls(value)
    except ValueError:
        problems.append(f"{name}={value!r} is not one of {[e.value for e in enum_cls]}")
        return None


def _sim(raw: dict, problems: list[str]) -> SimulationConfig | None:
    s = dict(raw.get("simulation", {}))
    policy = s.pop("fock_policy", "adaptive")
    cutoff = s.pop("fock_cutoff", None)
    eps = s.pop("population_eps", 1e-6)
    if policy == "fixed":
        if cutoff is None:
            problems.append("missing required key simulation.fock_cutoff (fock_policy = 'fixed')")
            return None
        fock = FixedFock(cutoff)
    elif policy == "adaptive":
        fock = AdaptiveFock(start=cutoff, population_eps=eps)
    else:
        problems.append(f"simulation.fock_policy={policy!r} is not 'fixed' or 'adaptive'")
        return None
    try:
        return SimulationConfig(fock_policy=fock, **s)
    except ValueError as exc:
        problems.append(f"[simulation]: {exc}")
        return None


def _drive(raw: dict, problems: list[str]) -> DriveConfig | None:
    d = dict(raw.get("drive", {}))
    if not d.pop("enabled", True):
        return None
    try:
        return DriveConfig(**d)
    except ValueError as exc:
        problems.append(f"[drive]: {exc}")
        return None


@dataclass(frozen=True)
class RunConfig:
    n_qubits: int
    model: ModelConfig
    dissipation: DissipationConfig
    initial: InitialStateSpec
    sim: SimulationConfig


def parse_run_config(raw: dict) -> RunConfig:
    problems = _check(raw, _RUN_SCHEMA)
    if problems:
        raise ConfigSchemaError(problems)
    m = raw["model"]
    inter = _enum(m["interaction"], Interaction, "model.interaction", problems)
    scen = _enum(raw["initial"]["scenario"], Scenario, "initial.scenario", problems)
    drive = _drive(raw, problems)
    sim = _sim(raw, problems)
    n = m["n_qubits"]
    if n < 1:
        problems.append("model.n_qubits must be >= 1")
    cavity_fock = raw["initial"].get("cavity_fock", n)
    try:
        model = ModelConfig(
            g=m["g"], interaction=inter or Interaction.TAVIS_CUMMINGS,
            omega_q=m.get("omega_q", 1.0), omega_c=m.get("omega_c", 1.0), drive=drive,
        )
    except ValueError as exc:
        problems.append(f"[model]: {exc}")
    try:
        diss = DissipationConfig(**raw.get("dissipation", {}))
    except ValueError as exc:
        problems.append(f"[dissipation]: {exc}")
    try:
        init = InitialStateSpec(scen or Scenario.DRIVEN, cavity_fock=cavity_fock)
    except ValueError as exc:
        problems.append(f"[initial]: {exc}")
    if problems:
        raise ConfigSchemaError(problems)
    return RunConfig(n, model, diss, init, sim)


def parse_sweep_config(raw: dict) -> SweepSpec:
    problems = _check(raw, _SWEEP_SCHEMA)
    if problems:
        raise ConfigSchemaError(problems)
    sw = dict(raw["sweep"])
    for key in ("scenarios", "interactions"):
        enum_cls = Scenario if key == "scenarios" else Interaction
        if key in sw:
            sw[key] = [_enum(v, enum_cls, f"sweep.{key}", problems) for v in sw[key]]
    drive = _drive(raw, problems)
    sim = _sim(raw, problems)
    if problems:
        raise ConfigSchemaError(problems)
    kwargs = dict(sw)
    kwargs.update(raw.get("model", {}))
    try:
        return SweepSpec(sim=sim, drive=drive or DriveConfig(eta0=0.0), **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigSchemaError([f"[sweep]: {exc}"]) from None
