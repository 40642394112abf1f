from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from adq.Config import Budgets, DEFAULT_SEED
from adq.ConvexCore.ConvexCoreModels import HPolytope, as_directions

SEPARATION_TOL = 1e-6
EVEN_TOL = 1e-12


class DiscreteMeasure(BaseModel):
    """μ = Σ α_i δ_{u_i}: distinct unit atoms with positive weights."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    atoms: np.ndarray
    weights: np.ndarray
    even: bool = False

    @model_validator(mode="after")
    def _check(self) -> "DiscreteMeasure":
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if atoms.shape[1] != self.n:
            raise ValueError(f"atoms have dimension {atoms.shape[1]}, expected n = {self.n}")
        if len(atoms) != len(weights):
            raise ValueError(f"{len(atoms)} atoms but {len(weights)} weights")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        if np.any(np.linalg.norm(atoms, axis=1) < 1e-8):
            raise ValueError("atom with (near) zero length")
        atoms = as_directions(atoms)
        gram = np.clip(atoms @ atoms.T, -1.0, 1.0)
        np.fill_diagonal(gram, -1.0)
        if len(atoms) > 1 and np.max(gram) > np.cos(SEPARATION_TOL):
            raise ValueError("atoms must be pairwise distinct")
        if self.even:
            partner = np.argmin(np.linalg.norm(atoms[:, None, :] + atoms[None, :, :], axis=2), axis=1)
            if np.any(np.linalg.norm(atoms + atoms[partner], axis=1) > 1e-9) or np.any(
                np.abs(weights - weights[partner]) > EVEN_TOL * np.maximum(1.0, weights)
            ):
                raise ValueError("measure flagged even but -u does not carry the weight of u")
        self.atoms = atoms
        self.weights = weights
        return self

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    @property
    def size(self) -> int:
        return len(self.weights)

    def antipode_index(self) -> np.ndarray:
        """Index of the atom at -u for each atom u (even measures only)."""
        return np.argmin(
            np.linalg.norm(self.atoms[:, None, :] + self.atoms[None, :, :], axis=2), axis=1
        )


class SolveConfig(BaseModel):
    p: float
    m: int = Field(ge=1)
    max_iters: int = Field(default=500, ge=1)
    step0: float = Field(default=1.0, gt=0.0)
    armijo: float = Field(default=1e-4, gt=0.0, lt=1.0)
    max_backtracks: int = Field(default=40, ge=1)
    barrier0: float = Field(default=1e-3, ge=0.0)
    barrier_halving_every: int = Field(default=50, ge=1)
    tol: float = Field(default=1e-3, gt=0.0)
    budgets: Budgets = Field(default_factory=Budgets)
    force: bool = False
    log_every: int = Field(default=25, ge=1)

    @property
    def seed(self) -> int:
        return self.budgets.seed


class SolveReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    polytope: HPolytope
    p: float
    m: int
    converged: bool
    lagrange_residual: float
    measure_residual: float
    iterations: int
    psi_value: float
    objective_trace: list[float]
    # trace indices where a halved barrier starts a new segment
    trace_breaks: list[int] = []
    target_weights: list[float]
    atoms: list[float]
    seed: int = DEFAULT_SEED
    budgets: Budgets
    flags: list[str] = []
    j_value: Optional[float] = None
    discretization_level: Optional[int] = None

    def trace_segments(self) -> list[list[float]]:
        """objective_trace split at the barrier halvings; each segment is one objective."""
        bounds = [0, *self.trace_breaks, len(self.objective_trace)]
        return [self.objective_trace[lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:])]


class AdmissibilityResult(BaseModel):
    passed: bool
    witness: Optional[list[float]] = None
    ratio: Optional[float] = None
    subspace: Optional[list[list[float]]] = None


class UniquenessResult(BaseModel):
    reports: list[SolveReport]
    max_hausdorff: float
    diameter: float
    normalized: bool


class AscentState(BaseModel):
    """One evaluated iterate of an ascent: objective, gradient and stationarity residual."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: float
    gradient: np.ndarray
    residual: float
    polytope: HPolytope
    atoms0: np.ndarray
    psi: float
