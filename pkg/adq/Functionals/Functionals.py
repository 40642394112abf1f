from typing import Optional

import numpy as np

from adq.Config import Budgets
from adq.ConvexCore.ConvexCore import ConvexCore
from adq.ConvexCore.ConvexCoreModels import TIGHT_TOL, BallBody, Body, HPolytope, as_directions, ball_volume
from adq.Errors import (
    AsymmetricInput,
    BadDims,
    EmptyMeasure,
    ExcludedExponent,
    NonPositiveSupport,
    NotEven,
    OriginOnBoundary,
    OriginOutside,
)
from adq.Functionals.FunctionalsModels import CurvatureAtoms
from adq.Grassmann.GrassmannModels import FacetSurfaceRule, QuadratureRule
from adq.Logger import Logger
from adq.Solver.SolverModels import DiscreteMeasure
from adq.Transforms.Transforms import Transforms

SYMMETRY_TOL = 1e-8


class Functionals:
    """
    Ψ̃_m in its Grassmannian and spherical forms, dual intrinsic volumes, Lp dual
    curvature totals, the Lp curvature measure atoms of Ψ̃_m on polytopes, Lp
    Wulff families and the energies of the symmetric problem.

    Polytopes are integrated on their facets; the spherical integrals are
    pulled back with du = (x·ν)|x|^{-n} dH^{n-1}(x).
    """

    def __init__(
        self,
        transforms: Optional[Transforms] = None,
        budgets: Optional[Budgets] = None,
        logger: Optional[Logger] = None,
    ):
        self.transforms = transforms or Transforms(logger=logger)
        self.grassmann = self.transforms.grassmann
        self.core = ConvexCore(logger)
        self.budgets = budgets or Budgets()
        self.logger = logger

    def grassmann_rule(self, n: int, m: int, budgets: Optional[Budgets] = None) -> QuadratureRule:
        budgets = budgets or self.budgets
        return self.grassmann.grassmann_rule(n, m, budgets.grassmann, budgets.seed)

    def body_rule(self, K: Body, m: int, budgets: Optional[Budgets] = None) -> QuadratureRule:
        """
        Rule fitted to K: the half circle cut at the vertex angles of a polygon,
        or for n = 3 the adaptive rule refined on vol_m(K∩ξ)^3, so thin bodies
        get nodes where their sections peak.
        """
        budgets = budgets or self.budgets
        n = K.dim
        if n == 3:
            return self.grassmann.adaptive_grassmann_rule(
                lambda frames: self.grassmann.section_volumes(K, frames) ** n,
                m,
                rtol=budgets.adaptive_rtol,
                max_nodes=budgets.adaptive_nodes,
            )
        if isinstance(K, HPolytope):
            return self.grassmann.kinked_circle_rule(K.vertices, budgets.grassmann)
        return self.grassmann_rule(n, m, budgets)

    def psi_grassmann(self, K: Body, m: int, rule: Optional[QuadratureRule] = None) -> float:
        """Ψ̃_m(K) = ∫_{G(n,m)} vol_m(K∩ξ)^n dν_m(ξ), on body_rule(K, m) unless a rule is given"""
        n = K.dim
        if not 1 <= m <= n - 1:
            raise BadDims(f"need 1 <= m <= n-1, got n = {n}, m = {m}")
        if rule is None:
            rule = self.body_rule(K, m)
        if rule.nodes.shape[1:] != (m, n):
            raise BadDims(f"rule nodes have shape {rule.nodes.shape[1:]}, expected ({m}, {n})")
        sections = self.grassmann.section_volumes(K, rule.nodes)
        return float(np.dot(sections**n, rule.weights))

    def psi_spherical(self, K: Body, m: int, budgets: Optional[Budgets] = None) -> float:
        """Ψ̃_m(K) = (1/m)∫ ρ_K^m 𝓡*_m(|K∩·|^{n-1}) du"""
        budgets = budgets or self.budgets
        n = K.dim
        if not 1 <= m <= n - 1:
            raise BadDims(f"need 1 <= m <= n-1, got n = {n}, m = {m}")
        directions, weights, radii = self._sphere_nodes(K, budgets)
        dual = self.transforms.dual_radon_many(
            self.transforms.section_profile(K), directions, budgets.sub, m
        )
        return float(np.sum(weights * radii**m * dual) / m)

    def affine_dual_quermassintegral(self, K: Body, m: int, rule: Optional[QuadratureRule] = None) -> float:
        """Φ̃_{n-m}(K) = (ω_n/ω_m)·Ψ̃_m(K)^{1/n}"""
        n = K.dim
        return ball_volume(n) / ball_volume(m) * self.psi_grassmann(K, m, rule) ** (1.0 / n)

    def dual_intrinsic_volume(self, K: Body, q: float, budgets: Optional[Budgets] = None) -> float:
        """Ṽ_q(K) = (1/n)∫ ρ_K^q du"""
        if q <= 0:
            raise BadDims(f"q must be positive, got {q}")
        self._require_interior_origin(K)
        directions, weights, radii = self._sphere_nodes(K, budgets or self.budgets)
        return float(np.sum(weights * radii**q) / K.dim)

    def dual_curvature_total(self, K: Body, p: float, q: float, budgets: Optional[Budgets] = None) -> float:
        """C̃_{p,q}(K, S^{n-1}) = (1/n)∫ (u·ν_K(ρ_K(u)u))^{-p} ρ_K(u)^{q-p} du"""
        self._require_interior_origin(K)
        n = K.dim
        if isinstance(K, BallBody):
            return ball_volume(n) * K.radius ** (q - p)
        rule = self._facet_rule(K, budgets or self.budgets)
        radii = np.linalg.norm(rule.points, axis=1)
        # u·ν = t/|x| and ρ = |x| on the facet carrying x
        return float(np.sum(rule.weights * rule.heights ** (1.0 - p) * radii ** (q - n)) / n)

    def dual_curvature_atoms(self, P: HPolytope, p: float, q: float, budgets: Optional[Budgets] = None) -> np.ndarray:
        """Per-facet masses of C̃_{p,q}(P,·): (1/n)∫_F t^{1-p}|x|^{q-n} dH^{n-1}"""
        self._require_interior_origin(P)
        rule = self._facet_rule(P, budgets or self.budgets)
        radii = np.linalg.norm(rule.points, axis=1)
        values = rule.weights * rule.heights ** (1.0 - p) * radii ** (q - P.dim) / P.dim
        return np.bincount(rule.labels, weights=values, minlength=P.num_facets)

    def curvature_atoms(self, P: Body, p: float, m: int, budgets: Optional[Budgets] = None) -> CurvatureAtoms:
        """
        C̃ᵃ_{p,m}(P,{u_i}) = ∫_{F_i} t_i^{1-p}|x|^{m-n}𝓡*_m(|P∩·|^{n-1})(x/|x|) dH^{n-1}.
        Degenerate facets carry no nodes and get mass 0.
        """
        budgets = budgets or self.budgets
        n = P.dim
        if not 1 <= m <= n - 1:
            raise BadDims(f"need 1 <= m <= n-1, got n = {n}, m = {m}")
        self._require_positive_supports(P)
        profile = self.transforms.section_profile(P)

        if isinstance(P, BallBody):
            sphere = self.grassmann.sphere_rule(n, budgets.sphere)
            dual = self.transforms.dual_radon_many(profile, sphere.nodes, budgets.sub, m)
            r = P.radius
            masses = sphere.weights * r ** (1.0 - p) * r ** (m - n) * r ** (n - 1) * dual
            return CurvatureAtoms(normals=sphere.nodes, masses=masses, p=p, m=m)

        rule = self._facet_rule(P, budgets)
        radii = np.linalg.norm(rule.points, axis=1)
        dual = self.transforms.dual_radon_many(profile, rule.directions, budgets.sub, m)
        values = rule.weights * rule.heights ** (1.0 - p) * radii ** (m - n) * dual
        masses = np.bincount(rule.labels, weights=values, minlength=P.num_facets)
        return CurvatureAtoms(normals=P.normals, masses=masses, p=p, m=m)

    def curvature_atoms_cone(self, P: HPolytope, p: float, m: int, budgets: Optional[Budgets] = None) -> CurvatureAtoms:
        """
        Sphere-cone form t_i^{-p}∫_{Δ_i} ρ_P^m 𝓡*_m(|P∩·|^{n-1}) du, Δ_i the
        directions whose radial point lies on facet i. Generic sphere rule,
        independent of the facet triangulation.
        """
        budgets = budgets or self.budgets
        self._require_positive_supports(P)
        sphere = self.grassmann.sphere_rule(P.dim, budgets.sphere)
        labels = P.gauss_many(sphere.nodes)
        radii = P.radial_many(sphere.nodes)
        dual = self.transforms.dual_radon_many(
            self.transforms.section_profile(P), sphere.nodes, budgets.sub, m
        )
        values = sphere.weights * radii**m * dual * P.supports[labels] ** (-p)
        masses = np.bincount(labels, weights=values, minlength=P.num_facets)
        return CurvatureAtoms(normals=P.normals, masses=masses, p=p, m=m)

    def wulff_shape(self, normals, h0, f, t: float, p: float) -> HPolytope:
        """K_t with h_t = (h0^p + t·f)^{1/p} for p > 0 and h0·e^{t·f} for p = 0"""
        normals = as_directions(normals)
        h0 = np.asarray(h0, dtype=float).reshape(-1)
        f = np.asarray(f, dtype=float).reshape(-1)
        if p < 0:
            raise ExcludedExponent(f"Lp Wulff family needs p >= 0, got {p}")
        if np.any(h0 <= 0.0):
            raise NonPositiveSupport("h0 must be positive on every normal")
        if p == 0:
            supports = h0 * np.exp(t * f)
        else:
            base = h0**p + t * f
            if np.any(base <= 0.0):
                raise NonPositiveSupport(f"h0^p + t·f is not positive at t = {t}")
            supports = base ** (1.0 / p)
        return self.core.build_polytope(normals, supports)

    def variation_derivative(self, P: HPolytope, f, p: float, m: int, budgets: Optional[Budgets] = None) -> float:
        """d/dt Ψ̃_m(K_t) at t = 0: (n/p)Σ f_i·atom_i(p), or n·Σ f_i·atom_i(0) for p = 0"""
        f = np.asarray(f, dtype=float).reshape(-1)
        atoms = self.curvature_atoms(P, p, m, budgets)
        scale = P.dim if p == 0 else P.dim / p
        return float(scale * np.dot(f, atoms.masses))

    def energy(self, K: Body, measure: DiscreteMeasure, p: float) -> float:
        """E_{p,μ}(K): -(1/p)log((1/|μ|)∫h^p dμ) for p > 0, -(1/|μ|)∫log h dμ for p = 0"""
        if measure.size == 0:
            raise EmptyMeasure("measure has no atoms")
        supports = K.support_many(measure.atoms)
        if np.any(supports <= 0.0):
            raise NonPositiveSupport("support function must be positive on the atoms")
        weights = measure.weights / measure.total
        if p == 0:
            return float(-np.dot(weights, np.log(supports)))
        if p < 0:
            raise ExcludedExponent(f"energy needs p >= 0, got {p}")
        return float(-np.log(np.dot(weights, supports**p)) / p)

    def j_functional(
        self,
        K: Body,
        measure: DiscreteMeasure,
        p: float,
        m: int,
        budgets: Optional[Budgets] = None,
        psi: Optional[float] = None,
    ) -> float:
        """J_{m,p,μ}(K) = (1/(mn))·log Ψ̃_m(K) + E_{p,μ}(K), homogeneous of degree 0"""
        if not measure.even:
            raise NotEven("J is defined for even measures")
        h_plus = K.support_many(measure.atoms)
        h_minus = K.support_many(-measure.atoms)
        if np.any(np.abs(h_plus - h_minus) > SYMMETRY_TOL * np.maximum(1.0, np.abs(h_plus))):
            raise AsymmetricInput("body is not origin-symmetric on the atoms of μ")
        n = K.dim
        if psi is None:
            psi = self.psi_grassmann(K, m, self.body_rule(K, m, budgets))
        return float(np.log(psi) / (m * n) + self.energy(K, measure, p))

    def _facet_rule(self, P: HPolytope, budgets: Budgets) -> FacetSurfaceRule:
        return self.grassmann.facet_surface_rule(P, budgets.triangle_levels, budgets.edge_points)

    def _sphere_nodes(self, K: Body, budgets: Budgets) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(directions, surface weights, ρ_K) for the facet-adapted or the generic sphere rule."""
        if isinstance(K, BallBody):
            sphere = self.grassmann.sphere_rule(K.dim, budgets.sphere)
            return sphere.nodes, sphere.weights, K.radial_many(sphere.nodes)
        if not K.origin_interior:
            self._require_interior_origin(K)
        rule = self._facet_rule(K, budgets)
        return rule.directions, rule.sphere_weights, np.linalg.norm(rule.points, axis=1)

    @staticmethod
    def _require_interior_origin(K: Body):
        if isinstance(K, BallBody):
            return
        if np.any(K.supports < 0.0):
            raise OriginOutside("origin lies outside the body")
        if np.any(K.supports <= TIGHT_TOL * K.scale):
            raise OriginOnBoundary("origin lies on the boundary of the body")

    @staticmethod
    def _require_positive_supports(P: Body):
        if isinstance(P, BallBody):
            return
        if np.any(P.supports < 0.0):
            raise NonPositiveSupport("support numbers must be positive")
        if np.any(P.supports <= TIGHT_TOL * P.scale):
            raise OriginOnBoundary("a support number vanishes, the origin lies on the boundary")
