"""Run configuration: a YAML file validated before any computation.

Precedence, highest first: command-line flags, the config file, the
``CVDISTILL_OUT`` environment variable (output directory only), defaults.
"""

from __future__ import annotations

import os
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

PIPELINES = ("curve", "entropy-curve", "epr", "wigner", "tomo-sim", "extrapolate", "verify")
OUT_ENV = "CVDISTILL_OUT"
# ideal pure-state pipelines are cheap, so they default to a larger box
DEFAULT_CUTOFF = {"entropy-curve": 30}
CUTOFF = 20


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Physics(_Strict):
    scheme: Literal["undistilled", "1photon", "2photon"] = "1photon"
    db: Optional[float] = -3.2
    r: Optional[float] = None
    R: Optional[float] = Field(default=None, ge=0, lt=1)
    eta_apd: float = Field(default=1.0, gt=0, le=1)
    eta_out: float = Field(default=1.0, gt=0, le=1)
    D: Optional[int] = Field(default=None, ge=2, le=60)

    @model_validator(mode="after")
    def _one_squeezing(self):
        if self.r is not None and self.r < 0:
            raise ValueError("r must be non-negative")
        if self.db is not None and self.db > 0:
            raise ValueError("db must be zero or negative (squeezed)")
        return self


class Grid(_Strict):
    db_min: float = Field(default=-0.5, le=0)
    db_max: float = Field(default=-6.0, le=0)
    points: int = Field(default=12, ge=2, le=400)
    step_r: float = Field(default=0.01, gt=0)


class Sampling(_Strict):
    N: int = Field(default=100_000, ge=1)
    phases: list[float] = Field(default_factory=lambda: [k * 3.141592653589793 / 6 for k in range(6)])
    seed: int = Field(default=1, ge=0, lt=2**64)
    D_rec: int = Field(default=14, ge=2, le=40)
    method: Literal["joint", "factorized"] = "joint"

    @field_validator("phases")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("at least one phase is required")
        return v


class Analysis(_Strict):
    d_list: list[int] = Field(default_factory=lambda: [1, 2, 4, 8, 16])
    B_resamples: int = Field(default=0, ge=0)
    max_iter: int = Field(default=2000, ge=1)
    tol: float = Field(default=1e-9, gt=0)

    @field_validator("B_resamples")
    @classmethod
    def _enough(cls, v):
        if 0 < v < 20:
            raise ValueError("B_resamples must be 0 (off) or at least 20")
        return v


class WignerOpts(_Strict):
    half_width: float = Field(default=5.0, gt=0)
    points: int = Field(default=201, ge=3, le=2001)
    mode: Literal["minus", "plus"] = "minus"


class Output(_Strict):
    dir: Optional[str] = None
    plot: bool = False


class RunConfig(_Strict):
    pipeline: Optional[str] = None
    physics: Physics = Field(default_factory=Physics)
    grid: Grid = Field(default_factory=Grid)
    sampling: Sampling = Field(default_factory=Sampling)
    analysis: Analysis = Field(default_factory=Analysis)
    wigner: WignerOpts = Field(default_factory=WignerOpts)
    output: Output = Field(default_factory=Output)

    @field_validator("pipeline")
    @classmethod
    def _known(cls, v):
        if v is not None and v not in PIPELINES:
            raise ValueError(f"unknown pipeline {v!r}")
        return v

    def squeezing_r(self) -> float:
        from .analysis import db_to_r

        if self.physics.r is not None:
            return float(self.physics.r)
        return db_to_r(self.physics.db if self.physics.db is not None else 0.0)

    def cutoff(self) -> int:
        if self.physics.D is not None:
            return int(self.physics.D)
        return DEFAULT_CUTOFF.get(self.pipeline or "", CUTOFF)

    def out_dir(self) -> str:
        return self.output.dir or os.environ.get(OUT_ENV) or "cvdistill-out"

    def resolved(self) -> dict:
        doc = self.model_dump(mode="json")
        doc["output"]["dir"] = self.out_dir()
        doc["physics"]["D"] = self.cutoff()
        # rendering does not change any data artifact
        doc["output"].pop("plot", None)
        return doc


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Read ``path`` (if any), apply nested ``overrides`` and validate.

    Raises :class:`ConfigError` for unreadable files, unknown keys or bad values.
    """
    doc: dict = {}
    if path:
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a mapping")
    doc = _merge(doc, overrides or {})
    try:
        return RunConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
