from functools import cached_property
from math import gamma, pi
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from adq.Errors import DegenerateInput, OriginOutside

UNIT_TOL = 1e-12
TIGHT_TOL = 1e-9


def ball_volume(m: int) -> float:
    """ω_m, the volume of the unit ball in R^m."""
    return pi ** (m / 2.0) / gamma(m / 2.0 + 1.0)


def as_direction(v) -> np.ndarray:
    """Coerce a UnitVector or array-like to a float array of unit length."""
    if isinstance(v, UnitVector):
        return np.asarray(v.coords, dtype=float)
    arr = np.asarray(v, dtype=float)
    norm = np.linalg.norm(arr)
    if norm < 1e-8:
        raise DegenerateInput("direction has (near) zero length")
    if abs(norm - 1.0) > UNIT_TOL:
        arr = arr / norm
    return arr


def as_directions(vs) -> np.ndarray:
    """Row-normalized (N, n) array; rows already unit within UNIT_TOL are left bitwise unchanged."""
    arr = np.atleast_2d(np.asarray(vs, dtype=float))
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms < 1e-8):
        raise DegenerateInput("direction has (near) zero length")
    off = np.abs(norms - 1.0) > UNIT_TOL
    if np.any(off):
        arr = arr.copy()
        arr[off] = arr[off] / norms[off, None]
    return arr


class UnitVector(BaseModel):
    coords: tuple[float, ...]

    @field_validator("coords")
    @classmethod
    def _unit_length(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        norm = float(np.linalg.norm(value))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"norm {norm!r} is not 1 within {UNIT_TOL}")
        return value

    @classmethod
    def of(cls, values: Sequence[float]) -> "UnitVector":
        arr = np.asarray(values, dtype=float)
        norm = np.linalg.norm(arr)
        if norm < 1e-8:
            raise DegenerateInput("cannot normalize a zero vector")
        return cls(coords=tuple(float(x) for x in arr / norm))

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


class Facet(BaseModel):
    index: int
    # n=2: the two endpoints in counterclockwise order; n=3: vertex cycle,
    # counterclockwise seen from outside
    vertex_ids: list[int]
    area: float
    degenerate: bool


class NormalConeDual(BaseModel):
    """N(K,o)* = {x : x·u_i <= 0 for every active i}; all of space if nothing is active."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    active: list[int]
    normals: np.ndarray

    def contains(self, x) -> bool:
        if not self.active:
            return True
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.normals[self.active] @ x <= TIGHT_TOL))


class HPolytope(BaseModel):
    """P = ∩{x : x·u_i <= t_i} with derived vertices and facets."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    dim: int
    normals: np.ndarray
    supports: np.ndarray
    vertices: np.ndarray
    facets: list[Facet]

    @property
    def num_facets(self) -> int:
        return len(self.supports)

    @cached_property
    def scale(self) -> float:
        return float(max(1.0, np.max(np.abs(self.supports))))

    @cached_property
    def diameter(self) -> float:
        diffs = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.max(np.linalg.norm(diffs, axis=2)))

    @property
    def origin_interior(self) -> bool:
        return bool(np.all(self.supports > 0.0))

    def radial_many(self, directions: np.ndarray) -> np.ndarray:
        """ρ_P over the rows of directions. Zero where the origin blocks the ray."""
        if np.any(self.supports < 0.0):
            raise OriginOutside("some support number is negative, origin lies outside P")
        dots = directions @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(dots > 1e-14, self.supports[None, :] / dots, np.inf)
        return np.min(ratios, axis=1)

    def gauss_many(self, directions: np.ndarray) -> np.ndarray:
        """Facet index hit by each ray, smallest index on ties, -1 when ρ = 0."""
        if np.any(self.supports < 0.0):
            raise OriginOutside("some support number is negative, origin lies outside P")
        dots = directions @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(dots > 1e-14, self.supports[None, :] / dots, np.inf)
        best = np.min(ratios, axis=1)
        ties = ratios <= best[:, None] * (1.0 + 1e-12) + 1e-300
        labels = np.argmax(ties, axis=1)
        labels[best <= 0.0] = -1
        return labels

    def support_many(self, directions: np.ndarray) -> np.ndarray:
        return np.max(directions @ self.vertices.T, axis=1)

    def scaled(self, c: float) -> "HPolytope":
        """The dilate cP, with derived data rescaled rather than recomputed."""
        if c <= 0:
            raise DegenerateInput("dilation factor must be positive")
        facets = [
            facet.model_copy(update={"area": facet.area * c ** (self.dim - 1)})
            for facet in self.facets
        ]
        return HPolytope(
            dim=self.dim,
            normals=self.normals.copy(),
            supports=self.supports * c,
            vertices=self.vertices * c,
            facets=facets,
        )


class BallBody(BaseModel):
    """The analytic ball rB^n, a test fixture every evaluator accepts."""

    dim: int = Field(ge=2, le=3)
    radius: float = Field(default=1.0, gt=0.0)

    @property
    def origin_interior(self) -> bool:
        return True

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def radial_many(self, directions: np.ndarray) -> np.ndarray:
        return np.full(len(directions), self.radius)

    def support_many(self, directions: np.ndarray) -> np.ndarray:
        return np.full(len(directions), self.radius)

    def section_volume(self, m: int) -> float:
        return ball_volume(m) * self.radius**m

    def scaled(self, c: float) -> "BallBody":
        return BallBody(dim=self.dim, radius=self.radius * c)


Body = Union[HPolytope, BallBody]
