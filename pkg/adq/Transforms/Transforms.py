from typing import Optional

import numpy as np

from adq.ConvexCore.ConvexCoreModels import Body, HPolytope, as_direction, as_directions, ball_volume
from adq.Errors import BadDims
from adq.Grassmann.Grassmann import Grassmann, complement_frames
from adq.Grassmann.GrassmannModels import Subspace
from adq.Grassmann.SphereLattice import circle_points
from adq.Logger import Logger
from adq.Transforms.TransformsModels import GrassmannFunction, SphericalFunction, SubspaceCache


def dual_radon_constant(n: int, m: int) -> float:
    """mω_m / (nω_n)"""
    return m * ball_volume(m) / (n * ball_volume(n))


class Transforms:
    """Radon transform R_m, its dual R*_m, section profiles and intersection bodies."""

    def __init__(self, grassmann: Optional[Grassmann] = None, logger: Optional[Logger] = None):
        self.grassmann = grassmann or Grassmann(logger)
        self.logger = logger

    def radial_of(self, K: Body) -> SphericalFunction:
        return SphericalFunction(evaluator=K.radial_many, description="radial function")

    def radon_m(self, f: SphericalFunction, xi: Subspace, budget: int = 512) -> float:
        """∫_{S^{n-1}∩ξ} f dH^{m-1}"""
        frame = xi.frame
        if xi.dim == 1:
            u = frame[0]
            return float(f(np.vstack([u, -u])).sum())
        if xi.dim == 2:
            circle = circle_points(budget) @ frame
            return float(f(circle).sum() * 2.0 * np.pi / budget)
        raise BadDims(f"Radon transform over {xi.dim}-dimensional subspaces is not supported")

    def dual_radon_m(
        self, F: GrassmannFunction, u, budget: int = 128, m: Optional[int] = None
    ) -> float:
        u = as_direction(u)
        return float(self.dual_radon_many(F, u[None, :], budget, m)[0])

    def dual_radon_many(
        self, F: GrassmannFunction, directions: np.ndarray, budget: int = 128, m: Optional[int] = None
    ) -> np.ndarray:
        """
        (mω_m/nω_n)·∫_{G_u(n-1,m-1)} F(span{u,ζ}) dν_{m-1}(ζ) for every row u.
        For m = 1 this is the closed form (2/(nω_n))·F(span u).
        """
        m = m or F.dim
        if m is None:
            raise BadDims("subspace dimension m is required")
        directions = as_directions(directions)
        N, n = directions.shape
        frames, weights = self.grassmann.span_frames(directions, m, budget, F.kinks)
        B = weights.shape[1]
        values = F(frames.reshape(N * B, m, n)).reshape(N, B)
        return dual_radon_constant(n, m) * np.einsum("nb,nb->n", values, weights)

    def section_profile(self, P: Body, cached: bool = True) -> GrassmannFunction:
        """F(ξ) = |P ∩ ξ|^{n-1}, memoized per subspace when cached"""
        n = P.dim
        cache = SubspaceCache() if cached else None

        def profile(frames: np.ndarray) -> np.ndarray:
            if cache is None:
                return self.grassmann.section_volumes(P, frames) ** (n - 1)
            return cache.evaluate(
                frames, lambda fresh: self.grassmann.section_volumes(P, fresh) ** (n - 1)
            )

        kinks = P.vertices if isinstance(P, HPolytope) else None
        return GrassmannFunction(evaluator=profile, description="|K∩ξ|^(n-1)", kinks=kinks)

    def hyperplane_frames(self, directions: np.ndarray) -> np.ndarray:
        """Frames of u⊥ for every row u, shape (N, n-1, n)."""
        directions = as_directions(directions)
        n = directions.shape[1]
        if n == 2:
            return np.stack([-directions[:, 1], directions[:, 0]], axis=1)[:, None, :]
        if n == 3:
            return complement_frames(directions)
        raise BadDims(f"no hyperplane frames for n = {n}")

    def intersection_body_radial(self, K: Body, u) -> float:
        """ρ_{IK}(u) = vol_{n-1}(K ∩ u⊥)"""
        u = as_direction(u)
        return float(self.intersection_body_radials(K, u[None, :])[0])

    def intersection_body_radials(self, K: Body, directions: np.ndarray) -> np.ndarray:
        if K.dim not in (2, 3):
            raise BadDims(f"intersection bodies need n = 2 or 3, got {K.dim}")
        return self.grassmann.section_volumes(K, self.hyperplane_frames(directions))

    def bidual_intersection_radial(self, K: Body, u, m: int, budget: int = 128) -> float:
        """ρ_{𝕀_m K}(u) = R*_m(|K∩·|^{n-1})(u)^{1/(n-m)}"""
        u = as_direction(u)
        return float(self.bidual_intersection_radials(K, u[None, :], m, budget)[0])

    def bidual_intersection_radials(
        self, K: Body, directions: np.ndarray, m: int, budget: int = 128
    ) -> np.ndarray:
        n = K.dim
        values = self.dual_radon_many(self.section_profile(K), directions, budget, m)
        return values ** (1.0 / (n - m))

    def second_intersection_radial(self, K: Body, u, budget: int = 512) -> float:
        """ρ_{I(IK)}(u) = vol_{n-1}(IK ∩ u⊥) = (1/(n-1))·R_{n-1}(ρ_{IK}^{n-1})(u⊥)"""
        u = as_direction(u)
        n = K.dim
        frame = self.hyperplane_frames(u[None, :])[0]
        xi = Subspace(dim_ambient=n, dim=n - 1, frame=frame)
        ibody = SphericalFunction(
            evaluator=lambda w: self.intersection_body_radials(K, w) ** (n - 1) / (n - 1),
            description="ρ_IK^(n-1)/(n-1)",
        )
        return self.radon_m(ibody, xi, budget)
