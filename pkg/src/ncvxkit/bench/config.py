"""Experiment configuration: a YAML document per experiment.

Top-level keys: ``schema_version`` (currently 1), ``problem``, ``size``
(problem-specific integers/floats), ``seeds`` (nonempty list of ints) and
``solvers`` (list of {name, options}).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from ..exceptions import ConfigError

CONFIG_SCHEMA_VERSION = 1


@dataclass
class SolverSpec:
    name: str
    options: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    problem: str
    size: dict
    seeds: list
    solvers: list

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        version = raw.get("schema_version")
        if version != CONFIG_SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {version!r} (expected {CONFIG_SCHEMA_VERSION})"
            )
        for key in ("problem", "size", "seeds", "solvers"):
            if key not in raw:
                raise ConfigError(f"missing config key {key!r}")
        problem = str(raw["problem"]).lower()
        size = dict(raw["size"])
        seeds = list(raw["seeds"])
        if not seeds:
            raise ConfigError("seeds must be nonempty")
        if not all(isinstance(s, int) for s in seeds):
            raise ConfigError("seeds must be integers")
        solver_specs = []
        if not raw["solvers"]:
            raise ConfigError("solvers must be nonempty")
        for entry in raw["solvers"]:
            if isinstance(entry, str):
                solver_specs.append(SolverSpec(name=entry.lower()))
            elif isinstance(entry, dict) and "name" in entry:
                solver_specs.append(
                    SolverSpec(name=str(entry["name"]).lower(),
                               options=dict(entry.get("options") or {}))
                )
            else:
                raise ConfigError(f"malformed solver entry: {entry!r}")
        return cls(problem=problem, size=size, seeds=seeds, solvers=solver_specs)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_yaml(fh.read())
