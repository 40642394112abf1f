from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

ORTHO_TOL = 1e-10

RuleKind = Literal["circle-uniform", "circle-gauss", "sphere-fibonacci", "sphere-adaptive", "monte-carlo", "point"]


class Subspace(BaseModel):
    """ξ ∈ G(n, m) through an orthonormal frame (rows)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    dim_ambient: int
    dim: int
    frame: np.ndarray

    @model_validator(mode="after")
    def _orthonormal(self) -> "Subspace":
        frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        if frame.shape != (self.dim, self.dim_ambient):
            raise ValueError(f"frame shape {frame.shape} != ({self.dim}, {self.dim_ambient})")
        if np.max(np.abs(frame @ frame.T - np.eye(self.dim))) > ORTHO_TOL:
            raise ValueError("frame is not orthonormal")
        self.frame = frame
        return self

    def projector(self) -> np.ndarray:
        return self.frame.T @ self.frame


class QuadratureRule(BaseModel):
    """
    Nodes with weights. Grassmann rules store frames of shape (N, m, n) and are
    probability rules; sphere rules store points of shape (N, n) with weights
    summing to the surface area nω_n.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: RuleKind
    nodes: np.ndarray
    weights: np.ndarray
    probability: bool = True
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _positive(self) -> "QuadratureRule":
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if self.probability and abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
            raise ValueError("probability rule weights must sum to 1")
        return self

    @property
    def size(self) -> int:
        return len(self.weights)


class FacetSurfaceRule(BaseModel):
    """Points x on the facets of a polytope with H^{n-1} weights and facet labels."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray
    weights: np.ndarray
    labels: np.ndarray
    heights: np.ndarray

    @property
    def directions(self) -> np.ndarray:
        return self.points / np.linalg.norm(self.points, axis=1)[:, None]

    @property
    def sphere_weights(self) -> np.ndarray:
        """Pull-back to the sphere: du = (x·ν)|x|^{-n} dH^{n-1}(x)."""
        n = self.points.shape[1]
        radii = np.linalg.norm(self.points, axis=1)
        return self.weights * self.heights / radii**n
