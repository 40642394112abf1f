from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from adq.ConvexCore.ConvexCoreModels import (
    TIGHT_TOL,
    BallBody,
    Body,
    HPolytope,
    as_direction,
)
from adq.Errors import BadDims, DegenerateInput
from adq.Grassmann.GrassmannModels import FacetSurfaceRule, QuadratureRule, Subspace
from adq.Grassmann.SphereLattice import circle_points, fibonacci_hemisphere, fibonacci_sphere
from adq.Logger import Logger

EMPTY_SECTION = 1e-14
GAUSS_ORDER_CAP = 128

# 7-point degree-5 rule on the reference triangle (barycentric, weights sum to 1)
_A1 = (6.0 - 15.0**0.5) / 21.0
_A2 = (6.0 + 15.0**0.5) / 21.0
_W1 = (155.0 - 15.0**0.5) / 1200.0
_W2 = (155.0 + 15.0**0.5) / 1200.0
TRIANGLE_RULE_POINTS = np.array(
    [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [_A1, _A1, 1.0 - 2.0 * _A1],
        [_A1, 1.0 - 2.0 * _A1, _A1],
        [1.0 - 2.0 * _A1, _A1, _A1],
        [_A2, _A2, 1.0 - 2.0 * _A2],
        [_A2, 1.0 - 2.0 * _A2, _A2],
        [1.0 - 2.0 * _A2, _A2, _A2],
    ]
)
TRIANGLE_RULE_WEIGHTS = np.array([9.0 / 40.0, _W1, _W1, _W1, _W2, _W2, _W2])

# upper octahedron faces, counterclockwise seen from outside
HEMISPHERE_FACES = np.array(
    [
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
        [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
    ]
)


def split_spherical_triangles(triangles: np.ndarray) -> np.ndarray:
    """(T, 3, 3) unit corners -> (T, 4, 3, 3); the children tile the parent's spherical triangle."""
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]

    def midpoint(x, y):
        s = x + y
        return s / np.linalg.norm(s, axis=1)[:, None]

    ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
    return np.stack(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ],
        axis=1,
    )


def spherical_triangle_nodes(triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    The 7-point rule on each flat triangle, projected radially onto the sphere
    with du = (x·ν)|x|^{-3} dA and rescaled so every triangle's weights sum to
    its exact spherical excess. Returns directions (T, 7, 3) and weights (T, 7).
    """
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    points = np.einsum("qc,tcd->tqd", TRIANGLE_RULE_POINTS, triangles)
    normal = np.cross(b - a, c - a)
    doubled_area = np.linalg.norm(normal, axis=1)
    radii = np.linalg.norm(points, axis=2)
    jacobian = np.abs(np.einsum("tqd,td->tq", points, normal / doubled_area[:, None])) / radii**3
    weights = TRIANGLE_RULE_WEIGHTS[None, :] * (0.5 * doubled_area)[:, None] * jacobian
    triple = np.abs(np.einsum("td,td->t", a, np.cross(b, c)))
    excess = 2.0 * np.arctan2(
        triple, 1.0 + np.einsum("td,td->t", a, b) + np.einsum("td,td->t", b, c) + np.einsum("td,td->t", c, a)
    )
    weights *= (excess / weights.sum(axis=1))[:, None]
    return points / radii[..., None], weights


def complement_frames(normals: np.ndarray) -> np.ndarray:
    """Orthonormal frames (N, 2, 3) of the planes normal to each row of normals."""
    helper = np.zeros_like(normals)
    use_y = np.abs(normals[:, 0]) > 0.9
    helper[~use_y, 0] = 1.0
    helper[use_y, 1] = 1.0
    e1 = helper - np.sum(helper * normals, axis=1)[:, None] * normals
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(normals, e1)
    return np.stack([e1, e2], axis=1)


@lru_cache(maxsize=8)
def _reference_triangle_rule(levels: int) -> tuple[np.ndarray, np.ndarray]:
    triangles = [np.eye(3)]
    for _ in range(levels):
        refined = []
        for tri in triangles:
            a, b, c = tri
            ab, bc, ca = (a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0
            refined.extend(
                [np.array([a, ab, ca]), np.array([ab, b, bc]), np.array([ca, bc, c]), np.array([ab, bc, ca])]
            )
        triangles = refined
    points = np.vstack([TRIANGLE_RULE_POINTS @ tri for tri in triangles])
    weights = np.tile(TRIANGLE_RULE_WEIGHTS, len(triangles)) / len(triangles)
    return points, weights


class Grassmann:
    """Haar sampling and quadrature on G(n,m), S^{n-1}, G_u(n-1,m-1), and sections |K∩ξ|."""

    def __init__(self, logger: Optional[Logger] = None, chunk_budget: int = 4_000_000):
        self.logger = logger
        self.chunk_budget = chunk_budget

    def haar_frames(self, n: int, m: int, count: int, seed: int) -> np.ndarray:
        self._check_dims(n, m)
        rng = np.random.default_rng(seed)
        gaussian = rng.standard_normal((count, n, m))
        q, _ = np.linalg.qr(gaussian)
        return np.transpose(q, (0, 2, 1))

    def haar_sample(self, n: int, m: int, count: int, seed: int) -> list[Subspace]:
        """Orthonormalized Gaussian frames: rotation invariant, deterministic in seed"""
        return [
            Subspace(dim_ambient=n, dim=m, frame=frame)
            for frame in self.haar_frames(n, m, count, seed)
        ]

    def grassmann_rule(self, n: int, m: int, budget: int, seed: int) -> QuadratureRule:
        self._check_dims(n, m)
        if budget < 16:
            raise BadDims(f"budget must be at least 16, got {budget}")
        weights = np.full(budget, 1.0 / budget)
        if n == 2:
            lines = circle_points(budget, half=True)
            return QuadratureRule(kind="circle-uniform", nodes=lines[:, None, :], weights=weights)
        if n == 3 and m == 1:
            lines = fibonacci_hemisphere(budget)
            return QuadratureRule(kind="sphere-fibonacci", nodes=lines[:, None, :], weights=weights)
        if n == 3 and m == 2:
            normals = fibonacci_hemisphere(budget)
            return QuadratureRule(
                kind="sphere-fibonacci", nodes=complement_frames(normals), weights=weights
            )
        return QuadratureRule(
            kind="monte-carlo",
            nodes=self.haar_frames(n, m, budget, seed),
            weights=weights,
            seed=seed,
        )

    def kinked_circle_rule(self, kinks: np.ndarray, budget: int) -> QuadratureRule:
        """Lines of R^2 by Gauss-Legendre on the pieces of [0, π) cut at the angles of kinks."""
        lines, weights = self._kink_split_lines(np.eye(2)[None, :, :], np.asarray(kinks, dtype=float), budget)
        keep = weights[0] > 0.0
        return QuadratureRule(
            kind="circle-gauss",
            nodes=lines[0, keep][:, None, :],
            weights=weights[0, keep] / weights[0, keep].sum(),
        )

    def adaptive_grassmann_rule(
        self,
        integrand: Callable[[np.ndarray], np.ndarray],
        m: int,
        rtol: float = 1e-4,
        max_nodes: int = 600_000,
        base_levels: int = 4,
    ) -> QuadratureRule:
        """
        Probability rule on G(3, m) refined where integrand (frames -> values)
        varies. Lines (m=1) are indexed by their direction and planes (m=2) by
        their normal, both on the upper hemisphere, which starts as the four
        upper octahedron faces. Every leaf triangle carries its own 7-point
        value and the sum over its four children; the leaves holding half of
        the estimated error are split until that error drops below rtol times
        the integral or max_nodes evaluations are spent.
        """
        self._check_dims(3, m)

        def frames_of(directions: np.ndarray) -> np.ndarray:
            return directions[:, None, :] if m == 1 else complement_frames(directions)

        def children_of(triangles: np.ndarray):
            children = split_spherical_triangles(triangles)
            nodes, weights = spherical_triangle_nodes(children.reshape(-1, 3, 3))
            values = integrand(frames_of(nodes.reshape(-1, 3))).reshape(len(triangles), 4, -1)
            child_values = np.sum(values * weights.reshape(len(triangles), 4, -1), axis=2)
            return children, nodes.reshape(len(triangles), -1, 3), weights.reshape(len(triangles), -1), child_values

        triangles = HEMISPHERE_FACES
        for _ in range(base_levels):
            triangles = split_spherical_triangles(triangles).reshape(-1, 3, 3)
        nodes, weights = spherical_triangle_nodes(triangles)
        coarse = np.sum(integrand(frames_of(nodes.reshape(-1, 3))).reshape(len(triangles), -1) * weights, axis=1)
        children, leaf_nodes, leaf_weights, child_values = children_of(triangles)
        spent = nodes.shape[0] * nodes.shape[1] + leaf_weights.size
        per_split = 4 * leaf_weights.shape[1]

        while True:
            fine = child_values.sum(axis=1)
            errors = np.abs(fine - coarse)
            integral = float(fine.sum())
            if errors.sum() <= rtol * abs(integral) or spent + per_split > max_nodes:
                break
            order = np.argsort(-errors)
            covered = np.searchsorted(np.cumsum(errors[order]), 0.5 * errors.sum()) + 1
            picked = order[: min(covered, (max_nodes - spent) // per_split)]
            kept = np.setdiff1d(np.arange(len(errors)), picked)
            new_children, new_nodes, new_weights, new_values = children_of(children[picked].reshape(-1, 3, 3))
            coarse = np.concatenate([coarse[kept], child_values[picked].ravel()])
            children = np.concatenate([children[kept], new_children])
            leaf_nodes = np.concatenate([leaf_nodes[kept], new_nodes])
            leaf_weights = np.concatenate([leaf_weights[kept], new_weights])
            child_values = np.concatenate([child_values[kept], new_values])
            spent += new_weights.size

        if errors.sum() > rtol * abs(integral) and self.logger:
            self.logger.log_warning(
                f"adaptive G(3,{m}) rule stopped at {spent} evaluations, "
                f"estimated relative error {errors.sum() / max(abs(integral), 1e-300):.1e}"
            )
        weights = leaf_weights.ravel()
        return QuadratureRule(
            kind="sphere-adaptive",
            nodes=frames_of(leaf_nodes.reshape(-1, 3)),
            weights=weights / weights.sum(),
        )

    def sub_grassmann_rule(self, u, m: int, budget: int) -> QuadratureRule:
        """Rule for ν_{m-1} on G_u(n-1, m-1); nodes are frames of ζ ⊂ u⊥"""
        u = as_direction(u)
        n = len(u)
        self._check_dims(n, m)
        if m == 1:
            return QuadratureRule(
                kind="point", nodes=np.zeros((1, 0, n)), weights=np.ones(1)
            )
        if n == 3 and m == 2:
            basis = complement_frames(u[None, :])[0]
            angles = circle_points(budget, half=True)
            lines = angles @ basis
            return QuadratureRule(
                kind="circle-uniform",
                nodes=lines[:, None, :],
                weights=np.full(budget, 1.0 / budget),
            )
        raise BadDims(f"no sub-Grassmannian rule for n = {n}, m = {m}")

    def span_frames(
        self, directions: np.ndarray, m: int, budget: int, kinks: Optional[np.ndarray] = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Frames of span{u, ζ_j} for every row u and every node ζ_j of the
        sub-Grassmannian rule, shape (N, B, m, n), with weights (N, B) summing
        to 1 per row. Given kinks (points such as polytope vertices), the
        half circle of lines ζ ⊂ u⊥ is cut wherever span{u, ζ} passes through
        one of them and each piece gets Gauss-Legendre nodes.
        """
        N, n = directions.shape
        self._check_dims(n, m)
        if m == 1:
            return directions[:, None, None, :], np.ones((N, 1))
        if n == 3 and m == 2:
            basis = complement_frames(directions)
            if kinks is None or len(kinks) == 0:
                angles = circle_points(budget, half=True)
                lines = np.einsum("bj,njd->nbd", angles, basis)
                weights = np.full((N, budget), 1.0 / budget)
            else:
                lines, weights = self._kink_split_lines(basis, np.asarray(kinks, dtype=float), budget)
            frames = np.stack(
                [np.broadcast_to(directions[:, None, :], lines.shape), lines], axis=2
            )
            return frames, weights
        raise BadDims(f"no sub-Grassmannian rule for n = {n}, m = {m}")

    @staticmethod
    def _kink_split_lines(basis: np.ndarray, kinks: np.ndarray, budget: int) -> tuple[np.ndarray, np.ndarray]:
        """Piecewise Gauss-Legendre lines in the planes spanned by basis (N, 2, 3)."""
        pieces = len(kinks)
        order = min(GAUSS_ORDER_CAP, max(2, budget // pieces))
        gauss_x, gauss_w = np.polynomial.legendre.leggauss(order)
        projected = np.einsum("vd,njd->nvj", kinks, basis)
        cuts = np.sort(np.mod(np.arctan2(projected[..., 1], projected[..., 0]), np.pi), axis=1)
        ends = np.concatenate([cuts[:, 1:], cuts[:, :1] + np.pi], axis=1)
        half = (ends - cuts) / 2.0
        angles = (cuts[..., None] + half[..., None] * (gauss_x + 1.0)).reshape(len(basis), -1)
        weights = (half[..., None] * gauss_w / np.pi).reshape(len(basis), -1)
        lines = np.cos(angles)[..., None] * basis[:, None, 0, :] + np.sin(angles)[..., None] * basis[:, None, 1, :]
        return lines, weights

    def sphere_rule(self, n: int, budget: int) -> QuadratureRule:
        """Surface-measure rule on S^{n-1}: uniform circle (n=2) or Fibonacci lattice (n=3)"""
        if n == 2:
            return QuadratureRule(
                kind="circle-uniform",
                nodes=circle_points(budget),
                weights=np.full(budget, 2.0 * np.pi / budget),
                probability=False,
            )
        if n == 3:
            return QuadratureRule(
                kind="sphere-fibonacci",
                nodes=fibonacci_sphere(budget),
                weights=np.full(budget, 4.0 * np.pi / budget),
                probability=False,
            )
        raise BadDims(f"no sphere rule for n = {n}")

    def facet_surface_rule(self, P: HPolytope, levels: int = 2, edge_points: int = 16) -> FacetSurfaceRule:
        """
        Quadrature nodes on the facets of P. Edges (n=2) use Gauss-Legendre on
        pieces split where the antipodal ray crosses a vertex direction, so
        integrands involving ρ(-u) stay smooth on each piece. Facets (n=3) are
        fan-triangulated and each triangle refined `levels` times.
        """
        points, weights, labels = [], [], []
        if P.dim == 2:
            gauss_x, gauss_w = np.polynomial.legendre.leggauss(edge_points)
            flipped = -P.vertices
            for facet in P.facets:
                if facet.degenerate:
                    continue
                a, b = P.vertices[facet.vertex_ids[0]], P.vertices[facet.vertex_ids[1]]
                edge = b - a
                cuts = [0.0, 1.0]
                for d in flipped:
                    denom = edge[0] * d[1] - edge[1] * d[0]
                    if abs(denom) < 1e-14:
                        continue
                    s = (d[0] * a[1] - d[1] * a[0]) / denom
                    if 1e-12 < s < 1.0 - 1e-12 and np.dot(a + s * edge, d) > 0.0:
                        cuts.append(s)
                cuts = np.unique(cuts)
                length = np.linalg.norm(edge)
                for lo, hi in zip(cuts[:-1], cuts[1:]):
                    s = lo + (hi - lo) * (gauss_x + 1.0) / 2.0
                    points.append(a[None, :] + s[:, None] * edge[None, :])
                    weights.append(gauss_w * (hi - lo) / 2.0 * length)
                    labels.append(np.full(edge_points, facet.index))
        elif P.dim == 3:
            bary, ref_weights = _reference_triangle_rule(levels)
            for facet in P.facets:
                if facet.degenerate:
                    continue
                cycle = P.vertices[facet.vertex_ids]
                for j in range(1, len(cycle) - 1):
                    corners = np.array([cycle[0], cycle[j], cycle[j + 1]])
                    area = 0.5 * np.linalg.norm(np.cross(corners[1] - corners[0], corners[2] - corners[0]))
                    if area <= EMPTY_SECTION:
                        continue
                    points.append(bary @ corners)
                    weights.append(ref_weights * area)
                    labels.append(np.full(len(ref_weights), facet.index))
        else:
            raise BadDims(f"no facet rule for n = {P.dim}")

        if not points:
            raise DegenerateInput("polytope has no full-dimensional facets")
        labels = np.concatenate(labels).astype(int)
        return FacetSurfaceRule(
            points=np.vstack(points),
            weights=np.concatenate(weights),
            labels=labels,
            heights=P.supports[labels],
        )

    def section_volume(self, P: Body, xi: Subspace) -> float:
        """vol_m(P ∩ ξ); 0 for empty or lower-dimensional sections"""
        return float(self.section_volumes(P, xi.frame[None, :, :])[0])

    def section_volumes(self, P: Body, frames: np.ndarray) -> np.ndarray:
        """Vectorized vol_m(P ∩ ξ) over frames of shape (N, m, n)."""
        N, m, n = frames.shape
        if isinstance(P, BallBody):
            return np.full(N, P.section_volume(m))
        if n != P.dim:
            raise BadDims(f"frames live in R^{n}, body in R^{P.dim}")
        if m == 1:
            u = frames[:, 0, :]
            return P.radial_many(u) + P.radial_many(-u)
        if m == 2 and n == 3:
            out = np.empty(N)
            pairs = P.num_facets * (P.num_facets - 1) // 2
            chunk = max(1, self.chunk_budget // max(1, pairs * P.num_facets))
            for start in range(0, N, chunk):
                out[start : start + chunk] = self._polygon_areas(P, frames[start : start + chunk])
            return out
        raise BadDims(f"sections of dimension {m} in R^{n} are not supported")

    def _polygon_areas(self, P: HPolytope, frames: np.ndarray) -> np.ndarray:
        """
        Area of the planar sections {y : a_i·y <= t_i}, a_i = frame·u_i. Vertices
        are the feasible pairwise line intersections; with the origin inside,
        area = Σ ½ (t_i/|a_i|)·(edge length on line i).
        """
        t = P.supports
        k = len(t)
        a = np.einsum("pmd,kd->pkm", frames, P.normals)
        lengths = np.linalg.norm(a, axis=2)
        usable = lengths > 1e-12
        I, J = np.triu_indices(k, 1)
        aI, aJ = a[:, I, :], a[:, J, :]
        det = aI[..., 0] * aJ[..., 1] - aI[..., 1] * aJ[..., 0]
        ok = (np.abs(det) > 1e-14) & usable[:, I] & usable[:, J]
        safe = np.where(ok, det, 1.0)
        y0 = (t[I] * aJ[..., 1] - t[J] * aI[..., 1]) / safe
        y1 = (aI[..., 0] * t[J] - aJ[..., 0] * t[I]) / safe
        y = np.stack([y0, y1], axis=2)
        slack = np.einsum("pqd,pkd->pqk", y, a) - t[None, None, :]
        feasible = ok & np.all(slack <= TIGHT_TOL * P.scale, axis=2)

        tangents = np.stack([-a[..., 1], a[..., 0]], axis=2) / np.where(usable, lengths, 1.0)[..., None]
        sI = np.einsum("pqd,pqd->pq", y, tangents[:, I, :])
        sJ = np.einsum("pqd,pqd->pq", y, tangents[:, J, :])
        line_of = np.concatenate([I, J])
        s_all = np.concatenate([sI, sJ], axis=1)
        f_all = np.concatenate([feasible, feasible], axis=1)

        area = np.zeros(len(frames))
        heights = np.where(usable, t[None, :] / np.where(usable, lengths, 1.0), 0.0)
        for line in range(k):
            cols = line_of == line
            s = s_all[:, cols]
            f = f_all[:, cols]
            hi = np.max(np.where(f, s, -np.inf), axis=1)
            lo = np.min(np.where(f, s, np.inf), axis=1)
            edge = np.where(np.isfinite(hi) & np.isfinite(lo) & (hi > lo), hi - lo, 0.0)
            area += 0.5 * heights[:, line] * edge
        return np.where(area < EMPTY_SECTION, 0.0, area)

    @staticmethod
    def _check_dims(n: int, m: int):
        if not 1 <= m <= n - 1:
            raise BadDims(f"need 1 <= m <= n-1, got n = {n}, m = {m}")
