from typing import Optional

import numpy as np

from adq.ConvexCore.ConvexCore import ConvexCore
from adq.ConvexCore.ConvexCoreModels import BallBody, HPolytope
from adq.Errors import DegenerateInput, UnboundedBody
from adq.Logger import Logger
from adq.Solver.SolverModels import DiscreteMeasure


def regular_directions(count: int, offset_degrees: float = 0.0) -> np.ndarray:
    angles = np.deg2rad(offset_degrees) + 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


class Fixtures:
    """Reference bodies and measures with closed-form values."""

    def __init__(self, logger: Optional[Logger] = None):
        self.core = ConvexCore(logger)

    def square(self, half_width: float = 1.0) -> HPolytope:
        """[-a, a]^2"""
        return self.core.build_polytope(regular_directions(4), np.full(4, half_width))

    def cube(self, half_width: float = 1.0) -> HPolytope:
        normals = np.vstack([np.eye(3), -np.eye(3)])
        return self.core.build_polytope(normals, np.full(6, half_width))

    def triangle(self, inradius: float = 1.0) -> HPolytope:
        """Equilateral triangle with facet normals at 90°, 210° and 330°."""
        return self.core.build_polytope(regular_directions(3, 90.0), np.full(3, inradius))

    def octagon(self, inradius: float = 1.0) -> HPolytope:
        return self.core.build_polytope(regular_directions(8), np.full(8, inradius))

    def ball(self, n: int, radius: float = 1.0) -> BallBody:
        return BallBody(dim=n, radius=radius)

    def cross_measure(self) -> DiscreteMeasure:
        """{±e1, ±e2}, unit weights: on the boundary of subspace concentration."""
        return DiscreteMeasure(n=2, atoms=regular_directions(4), weights=np.ones(4), even=True)

    def octagon_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(n=2, atoms=regular_directions(8), weights=np.ones(8), even=True)

    def triangle_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(n=2, atoms=regular_directions(3, 90.0), weights=np.ones(3))

    def hemisphere_measure(self) -> DiscreteMeasure:
        """{e1, e2}: every atom in one open half-plane."""
        return DiscreteMeasure(n=2, atoms=np.eye(2), weights=np.ones(2))

    def random_polytope(
        self, n: int, facets: int, rng: np.random.Generator, low: float = 0.5, high: float = 1.5
    ) -> HPolytope:
        """Random normals with supports in [low, high]; resampled until bounded."""
        for _ in range(100):
            normals = rng.standard_normal((facets, n))
            normals /= np.linalg.norm(normals, axis=1)[:, None]
            supports = rng.uniform(low, high, facets)
            try:
                return self.core.build_polytope(normals, supports)
            except (UnboundedBody, DegenerateInput):
                continue
        raise DegenerateInput(f"no bounded random polytope with {facets} facets in R^{n}")

    def random_symmetric_polytope(
        self, n: int, pairs: int, rng: np.random.Generator, low: float = 0.5, high: float = 1.5
    ) -> HPolytope:
        for _ in range(100):
            half = rng.standard_normal((pairs, n))
            half /= np.linalg.norm(half, axis=1)[:, None]
            supports = rng.uniform(low, high, pairs)
            try:
                return self.core.build_polytope(
                    np.vstack([half, -half]), np.concatenate([supports, supports])
                )
            except (UnboundedBody, DegenerateInput):
                continue
        raise DegenerateInput(f"no bounded symmetric polytope with {pairs} pairs in R^{n}")

    def random_unimodular(self, n: int, rng: np.random.Generator, max_condition: float = 5.0) -> np.ndarray:
        """det = 1 and condition number at most max_condition."""
        while True:
            q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
            q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
            logs = rng.uniform(-1.0, 1.0, n)
            logs -= logs.mean()
            singular = np.exp(logs)
            if singular.max() / singular.min() > max_condition:
                continue
            phi = q1 @ np.diag(singular) @ q2
            if np.linalg.det(phi) < 0:
                phi[:, 0] = -phi[:, 0]
            return phi
