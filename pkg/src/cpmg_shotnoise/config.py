"""YAML run configuration for the command-line tool.

The schema is validated with pydantic before any computation; unknown keys
are rejected and every error message carries the YAML line number.

Example::

    params:
      kappa_inv_ns: 19.4
      two_chi_mhz: 5.7
    drive:
      kind: thermal
      n_th: 1.0e-3
    grid:
      f_s_mhz: {start: 0.1, stop: 12.5, num: 40, spacing: log}
    rates:
      formulas: [thermal, thermal_filterfunction]
      populations: [1.0e-4, 6.3e-4, 1.15e-3]
    seed: 1
"""
from __future__ import annotations

import enum
from pathlib import Path
from typing import Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .core import ConfigurationError, DriveSpec, ResonatorQubitParams
from .io import DataFormatError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParamsConfig(_Strict):
    kappa_inv_ns: float = Field(gt=0)
    two_chi_mhz: float
    detuning_mhz: float = 0.0

    def build(self) -> ResonatorQubitParams:
        return ResonatorQubitParams.from_lab_units(self.kappa_inv_ns, self.two_chi_mhz, self.detuning_mhz)


class DriveConfig(_Strict):
    """``n_coh`` sets a resonant coherent drive by its population."""

    kind: Literal["none", "thermal", "coherent"] = "thermal"
    n_th: float = Field(0.0, ge=0)
    n_coh: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "thermal" and self.n_coh:
            raise ValueError("n_coh is only valid with kind 'coherent'")
        if self.kind == "none" and (self.n_th or self.n_coh):
            raise ValueError("kind 'none' requires zero populations")
        return self

    def build(self, params: ResonatorQubitParams) -> DriveSpec:
        if self.kind == "none":
            return DriveSpec()
        if self.kind == "thermal":
            return DriveSpec.thermal(self.n_th)
        return DriveSpec.coherent_population(params.with_detuning(0.0), self.n_coh, self.n_th)


class GridRange(_Strict):
    start: float = Field(gt=0)
    stop: float = Field(gt=0)
    num: int = Field(ge=1)
    spacing: Literal["log", "linear"] = "log"


class GridConfig(_Strict):
    f_s_mhz: Union[list[float], GridRange]

    @field_validator("f_s_mhz")
    @classmethod
    def _positive(cls, v):
        if isinstance(v, list):
            if not v:
                raise ValueError("f_s_mhz list is empty")
            if any(x <= 0 for x in v):
                raise ValueError("CPMG frequencies must be positive")
        return v

    def frequencies_hz(self) -> np.ndarray:
        g = self.f_s_mhz
        if isinstance(g, GridRange):
            f = np.geomspace(g.start, g.stop, g.num) if g.spacing == "log" else np.linspace(g.start, g.stop, g.num)
        else:
            f = np.asarray(g, dtype=float)
        return f * 1e6


class Formula(str, enum.Enum):
    THERMAL = "thermal"
    THERMAL_MODERATE = "thermal_moderate"
    THERMAL_FILTERFUNCTION = "thermal_filterfunction"
    COHERENT = "coherent"
    COHERENT_DETUNED = "coherent_detuned"
    COHERENT_FILTERFUNCTION = "coherent_filterfunction"


class RatesConfig(_Strict):
    formulas: list[Formula] = Field(default_factory=lambda: [Formula.THERMAL])
    populations: list[float] | None = None

    @field_validator("populations")
    @classmethod
    def _nonneg(cls, v):
        if v is not None and any(x < 0 for x in v):
            raise ValueError("populations must be >= 0")
        return v


class SimulateConfig(_Strict):
    route: Literal["mc", "lindblad"] = "mc"
    ensemble_size: int = Field(10_000, ge=1)
    pulse_duration_ns: float = Field(0.0, ge=0)
    n_fock: int = Field(5, ge=2)
    steps_per_scale: int = Field(40, ge=20)
    n_values: list[int] | None = None


class FitConfig(_Strict):
    model: Literal["thermal", "coherent", "coherent_detuned"] = "thermal"
    shared_pedestal: bool = True
    ambient_thermal: bool = False
    weighted: Literal["auto", "yes", "no"] = "auto"
    fixed_pedestal_per_s: float | None = None


class SynthConfig(_Strict):
    model: Literal["thermal", "coherent", "coherent_detuned"] = "thermal"
    populations: list[float] = Field(min_length=1)
    pedestal_per_s: float = 0.0
    sigma_per_s: float = Field(0.0, ge=0)
    rel_sigma: float = Field(0.0, ge=0)


class CalibrateConfig(_Strict):
    kind: Literal["thermal", "coherent"] = "thermal"


class RunConfig(_Strict):
    schema_version: Literal[1] = 1
    params: ParamsConfig
    drive: DriveConfig = DriveConfig()
    grid: GridConfig | None = None
    rates: RatesConfig = RatesConfig()
    simulate: SimulateConfig = SimulateConfig()
    fit: FitConfig = FitConfig()
    synth: SynthConfig | None = None
    calibrate: CalibrateConfig = CalibrateConfig()
    seed: int = Field(0, ge=0, lt=2 ** 64)

    def require_grid(self) -> np.ndarray:
        if self.grid is None:
            raise ConfigurationError("this command needs a 'grid' section")
        return self.grid.frequencies_hz()


def _node_line(root, loc) -> int | None:
    """1-based line of the YAML node addressed by a pydantic error location."""
    node = root
    line = None if node is None else node.start_mark.line + 1
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == key:
                    nxt = v
                    line = k.start_mark.line + 1
                    break
            if nxt is None:
                break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Validate YAML text; raise ConfigurationError with line-numbered messages."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "unknown line"
        raise ConfigurationError(f"{source}: {where}: invalid YAML ({getattr(exc, 'problem', exc)})") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: line 1: top level must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            # drop union-branch tags such as 'list[float]' from the path
            loc = [p for p in err["loc"] if not (isinstance(p, str) and ("[" in p or p == "GridRange"))]
            line = _node_line(root, loc)
            path = ".".join(str(p) for p in loc) or "<root>"
            msgs.append(f"{source}: line {line if line is not None else '?'}: {path}: {err['msg']}")
        raise ConfigurationError("\n".join(msgs)) from exc


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_config(text, str(path))
