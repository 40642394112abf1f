from typing import Optional

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection, QhullError

from adq.ConvexCore.ConvexCoreModels import (
    TIGHT_TOL,
    BallBody,
    Body,
    Facet,
    HPolytope,
    NormalConeDual,
    as_direction,
    as_directions,
)
from adq.Errors import (
    BadDims,
    DegenerateInput,
    OriginOnBoundary,
    OriginOutside,
    UnboundedBody,
    ZeroRadial,
)
from adq.Grassmann.SphereLattice import circle_points, fibonacci_sphere
from adq.Logger import Logger
from adq.Solver.Admissibility import Admissibility


class ConvexCore:
    """Polytope and star-body primitives for n = 2, 3."""

    AREA_TOL = 1e-14
    HAUSDORFF_GRID = {2: 720, 3: 2000}

    def __init__(self, logger: Optional[Logger] = None):
        self.logger = logger

    def build_polytope(self, normals, supports) -> HPolytope:
        """Intersect the halfspaces x·u_i <= t_i and derive vertices and facets"""
        normals = as_directions(normals)
        supports = np.asarray(supports, dtype=float).reshape(-1)
        k, n = normals.shape
        if n not in (2, 3):
            raise BadDims(f"only n = 2 or 3 is supported, got n = {n}")
        if len(supports) != k:
            raise DegenerateInput(f"{k} normals but {len(supports)} support numbers")
        if k < n + 1:
            raise DegenerateInput(f"need at least n+1 = {n + 1} halfspaces, got {k}")

        passed, witness = Admissibility.hemisphere_witness(normals)
        if not passed:
            raise UnboundedBody(
                "normals lie in a closed hemisphere, the intersection is unbounded",
                witness=witness.tolist(),
            )

        center, radius = self._chebyshev_center(normals, supports)
        if radius <= 1e-12:
            raise DegenerateInput("halfspaces bound an empty or lower-dimensional set")

        scale = float(max(1.0, np.max(np.abs(supports))))
        tol = TIGHT_TOL * scale
        halfspaces = np.hstack([normals, -supports[:, None]])
        try:
            intersections = HalfspaceIntersection(halfspaces, center).intersections
        except QhullError as error:
            raise DegenerateInput(f"qhull could not intersect the halfspaces: {str(error).splitlines()[0]}") from error
        vertices = self._dedupe(intersections, tol)
        slack = vertices @ normals.T - supports[None, :]
        vertices = vertices[np.all(slack <= tol, axis=1)]

        facets = [
            self._facet(i, normals[i], supports[i], vertices, tol, scale)
            for i in range(k)
        ]
        return HPolytope(
            dim=n, normals=normals, supports=supports, vertices=vertices, facets=facets
        )

    def support_function(self, P: Body, v) -> float:
        v = as_direction(v)
        return float(P.support_many(v[None, :])[0])

    def radial_function(self, P: Body, u) -> float:
        u = as_direction(u)
        return float(P.radial_many(u[None, :])[0])

    def gauss_map_at(self, P: HPolytope, u) -> int:
        """Index of the facet containing ρ_P(u)u; the smallest index on ridges."""
        u = as_direction(u)
        label = int(P.gauss_many(u[None, :])[0])
        if label < 0:
            raise ZeroRadial(f"ρ_P(u) = 0 at u = {u.tolist()}")
        return label

    def dual_operator(self, P: Body, u) -> float:
        """𝒟h_P(u) = max_v (u·v)/h_P(v), attained at a facet normal; equals 1/ρ_P(u)."""
        u = as_direction(u)
        if isinstance(P, BallBody):
            return 1.0 / P.radius
        if np.any(P.supports < 0.0):
            raise OriginOutside("origin lies outside P")
        if np.any(P.supports <= 0.0):
            raise OriginOnBoundary("the duality operator needs the origin in the interior")
        return float(np.max((P.normals @ u) / P.supports))

    def hausdorff_distance(self, P: HPolytope, Q: HPolytope) -> float:
        if P.dim != Q.dim:
            raise BadDims("bodies live in different dimensions")
        directions = [P.normals, Q.normals]
        for vertices in (P.vertices, Q.vertices):
            norms = np.linalg.norm(vertices, axis=1)
            keep = norms > 1e-12
            directions.append(vertices[keep] / norms[keep, None])
        if P.dim == 2:
            directions.append(circle_points(self.HAUSDORFF_GRID[2]))
        else:
            directions.append(fibonacci_sphere(self.HAUSDORFF_GRID[3]))
        grid = np.vstack(directions)
        return float(np.max(np.abs(P.support_many(grid) - Q.support_many(grid))))

    def normal_cone_dual(self, P: HPolytope) -> NormalConeDual:
        active = [int(i) for i in np.flatnonzero(np.abs(P.supports) <= TIGHT_TOL * P.scale)]
        return NormalConeDual(active=active, normals=P.normals)

    def transform_polytope(self, P: HPolytope, phi) -> HPolytope:
        """φP for an invertible linear map φ."""
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (P.dim, P.dim):
            raise BadDims(f"map must be {P.dim}x{P.dim}")
        if abs(np.linalg.det(phi)) < 1e-12:
            raise DegenerateInput("map is singular")
        images = P.normals @ np.linalg.inv(phi)
        lengths = np.linalg.norm(images, axis=1)
        return self.build_polytope(images / lengths[:, None], P.supports / lengths)

    def volume(self, P: Body) -> float:
        if isinstance(P, BallBody):
            return P.section_volume(P.dim)
        areas = np.array([facet.area for facet in P.facets])
        return float(np.dot(P.supports, areas) / P.dim)

    def ball(self, n: int, radius: float = 1.0) -> BallBody:
        return BallBody(dim=n, radius=radius)

    def _chebyshev_center(self, normals: np.ndarray, supports: np.ndarray):
        k, n = normals.shape
        cost = np.zeros(n + 1)
        cost[-1] = -1.0
        A_ub = np.hstack([normals, np.ones((k, 1))])
        bounds = [(None, None)] * n + [(0.0, None)]
        result = linprog(cost, A_ub=A_ub, b_ub=supports, bounds=bounds, method="highs")
        if result.status != 0:
            return np.zeros(n), 0.0
        return result.x[:n], float(result.x[-1])

    def _dedupe(self, points: np.ndarray, tol: float) -> np.ndarray:
        kept: list[np.ndarray] = []
        for point in points:
            if not np.all(np.isfinite(point)):
                continue
            if any(np.linalg.norm(point - other) <= 10 * tol for other in kept):
                continue
            kept.append(point)
        return np.array(kept)

    def _facet(
        self,
        index: int,
        normal: np.ndarray,
        support: float,
        vertices: np.ndarray,
        tol: float,
        scale: float,
    ) -> Facet:
        on = np.flatnonzero(np.abs(vertices @ normal - support) <= tol)
        n = len(normal)
        area_tol = self.AREA_TOL * scale ** (n - 1)
        if n == 2:
            if len(on) < 2:
                return Facet(index=index, vertex_ids=[int(i) for i in on], area=0.0, degenerate=True)
            tangent = np.array([-normal[1], normal[0]])
            s = vertices[on] @ tangent
            lo, hi = int(on[np.argmin(s)]), int(on[np.argmax(s)])
            length = float(np.max(s) - np.min(s))
            return Facet(
                index=index, vertex_ids=[lo, hi], area=length, degenerate=length <= area_tol
            )

        if len(on) < 3:
            return Facet(index=index, vertex_ids=[int(i) for i in on], area=0.0, degenerate=True)
        e1 = null_space(normal[None, :])[:, 0]
        e2 = np.cross(normal, e1)
        local = np.column_stack([vertices[on] @ e1, vertices[on] @ e2])
        centroid = local.mean(axis=0)
        order = np.argsort(np.arctan2(local[:, 1] - centroid[1], local[:, 0] - centroid[0]))
        cycle = local[order]
        x, y = cycle[:, 0], cycle[:, 1]
        area = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        return Facet(
            index=index,
            vertex_ids=[int(i) for i in on[order]],
            area=area,
            degenerate=area <= area_tol,
        )
