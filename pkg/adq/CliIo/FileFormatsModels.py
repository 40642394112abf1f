from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from adq.Config import Budgets
from adq.ConvexCore.ConvexCoreModels import UNIT_TOL

FORMAT_VERSION = 1
TOOL_VERSION = "0.1.0"


class Provenance(BaseModel):
    command: str
    seed: int
    budgets: Budgets
    tool_version: str = TOOL_VERSION


class MeasureFile(BaseModel):
    version: Literal[1] = FORMAT_VERSION
    n: int = Field(ge=2, le=3)
    even: bool = False
    atoms: list[list[float]]
    weights: list[float]

    @field_validator("atoms")
    @classmethod
    def _normalize(cls, atoms: list[list[float]]) -> list[list[float]]:
        if not atoms:
            raise ValueError("measure has no atoms")
        normalized = []
        for atom in atoms:
            norm = float(np.linalg.norm(atom))
            if not np.isfinite(norm) or norm < 1e-8:
                raise ValueError("atom with (near) zero or non-finite length")
            normalized.append(atom if abs(norm - 1.0) <= UNIT_TOL else [float(x) / norm for x in atom])
        return normalized

    @field_validator("weights")
    @classmethod
    def _positive(cls, weights: list[float]) -> list[float]:
        if any(not np.isfinite(w) or w <= 0.0 for w in weights):
            raise ValueError("weights must be positive and finite")
        return weights

    @model_validator(mode="after")
    def _shapes(self) -> "MeasureFile":
        if any(len(atom) != self.n for atom in self.atoms):
            raise ValueError(f"every atom must have {self.n} coordinates")
        if len(self.atoms) != len(self.weights):
            raise ValueError("atoms and weights differ in length")
        return self


class BodyFile(BaseModel):
    version: Literal[1] = FORMAT_VERSION
    kind: Literal["polytope", "ball"] = "polytope"
    n: int = Field(ge=2, le=3)
    normals: list[list[float]] = []
    supports: list[float] = []
    vertices: list[list[float]] = []
    radius: Optional[float] = Field(default=None, gt=0.0)
    provenance: Optional[Provenance] = None

    @model_validator(mode="after")
    def _shapes(self) -> "BodyFile":
        if self.kind == "ball":
            if self.radius is None:
                raise ValueError("a ball needs a radius")
            return self
        if any(len(normal) != self.n for normal in self.normals):
            raise ValueError(f"every normal must have {self.n} coordinates")
        if len(self.normals) != len(self.supports):
            raise ValueError("normals and supports differ in length")
        if not all(np.isfinite(self.supports)):
            raise ValueError("supports must be finite")
        return self


class ReportFile(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    version: Literal[1] = FORMAT_VERSION
    p: float
    m: int
    converged: bool
    lagrange_residual: float
    measure_residual: float
    iterations: int
    psi_value: float
    objective_trace: list[float]
    trace_breaks: list[int] = []
    target_weights: list[float]
    atoms: list[float]
    seed: int
    budgets: Budgets
    flags: list[str] = []
    j_value: Optional[float] = None
    discretization_level: Optional[int] = None
    body: BodyFile
