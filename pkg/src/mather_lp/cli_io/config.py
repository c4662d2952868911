"""JSON run configuration.

Example (``minimize``)::

    {
      "command": "minimize",
      "lagrangian": {"dim": 1, "potential": [{"k": [1], "cos": 1.0}], "cohomology": [0.0]},
      "grid": {"n_x": 64, "n_v": 17, "h": 0.0625}
    }

Unknown keys are rejected everywhere.
"""
from __future__ import annotations

import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..domain import CohomologyClass, LagrangianSpec, Mode, PotentialSpec
from ..holonomy import GridConfig

COMMANDS = ("minimize", "alpha-curve", "beta-curve", "genericity", "c-sweep", "eps-sweep", "validate-flow")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModeModel(_Strict):
    k: list[int]
    cos: float = 0.0
    sin: float = 0.0


class LagrangianModel(_Strict):
    dim: Literal[1, 2] = 1
    potential: list[ModeModel] = Field(default_factory=list)
    cohomology: list[float] | None = None
    epsilon: float = 1.0

    @model_validator(mode="after")
    def _dims(self):
        if any(len(m.k) != self.dim for m in self.potential):
            raise ValueError(f"every wave-vector needs {self.dim} components")
        if self.cohomology is not None and len(self.cohomology) != self.dim:
            raise ValueError(f"cohomology needs {self.dim} components")
        return self

    def build(self) -> LagrangianSpec:
        return LagrangianSpec(self.dim, potential_from(self.potential, self.dim), self.cohomology, self.epsilon)


class GridModel(_Strict):
    n_x: int = Field(ge=2, le=4096)
    n_v: int = Field(ge=1, le=257)
    h: float = Field(gt=0)

    @field_validator("n_v")
    @classmethod
    def _odd(cls, n_v):
        if n_v % 2 == 0:
            raise ValueError("n_v must be odd")
        return n_v

    def build(self, dim) -> GridConfig:
        return GridConfig(dim, self.n_x, self.n_v, self.h)


class ExperimentModel(_Strict):
    c_values: list[list[float]] | None = None
    rho_values: list[list[float]] | None = None
    eps_values: list[float] | None = None
    potential: list[ModeModel] | None = None
    n_samples: int = Field(default=200, ge=1)
    n_modes: int = Field(default=5, ge=1)
    amplitude: float = Field(default=1.0, ge=0)
    x0: list[float] | None = None
    v0: list[float] | None = None
    h_ode: float = Field(default=1e-3, gt=0)
    T: float = Field(default=200.0, gt=0)


REQUIRED = {
    "alpha-curve": ("c_values",),
    "beta-curve": ("rho_values",),
    "c-sweep": ("potential", "c_values"),
    "eps-sweep": ("potential", "eps_values", "c_values"),
    "validate-flow": ("x0", "v0"),
}


class RunConfig(_Strict):
    command: Literal[COMMANDS]
    lagrangian: LagrangianModel = Field(default_factory=LagrangianModel)
    grid: GridModel
    experiment: ExperimentModel = Field(default_factory=ExperimentModel)
    seed: int = 0
    workers: int | None = Field(default=None, ge=1)
    output_dir: str = "mather-lp-output"

    @model_validator(mode="after")
    def _required(self):
        missing = [f"experiment.{k}" for k in REQUIRED.get(self.command, ()) if getattr(self.experiment, k) is None]
        if missing:
            raise ValueError(f"command {self.command!r} requires {', '.join(missing)}")
        return self

    def to_json_dict(self):
        return self.model_dump(mode="json")


def potential_from(modes, dim) -> PotentialSpec:
    return PotentialSpec(dim, tuple(Mode(tuple(m.k), m.cos, m.sin) for m in modes))


class ConfigError(Exception):
    """Malformed configuration; the message names the offending field or line."""


def _describe(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        where = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{where}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict, **overrides) -> RunConfig:
    data = dict(data)
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_describe(err)) from None


def load_config(path, **overrides) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(data, **overrides)


def cohomology_list(values):
    return [CohomologyClass(tuple(v)) for v in values]


def config_schema() -> dict:
    """JSON Schema of the run configuration (shipped as docs/config.schema.json)."""
    return RunConfig.model_json_schema()
