from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from adq.CliIo.Fixtures import Fixtures
from adq.CliIo.VerifierModels import CheckResult, VerifySuite
from adq.Config import Budgets
from adq.ConvexCore.ConvexCore import ConvexCore
from adq.ConvexCore.ConvexCoreModels import HPolytope, ball_volume
from adq.Errors import AdqError
from adq.Functionals.Functionals import Functionals
from adq.Grassmann.SphereLattice import fibonacci_sphere
from adq.Logger import Logger
from adq.Solver.Admissibility import Admissibility
from adq.Solver.MinkowskiSolver import MinkowskiSolver
from adq.Solver.SolverModels import DiscreteMeasure, SolveConfig
from adq.Transforms.Transforms import dual_radon_constant

def chord_oracle(P: HPolytope) -> float:
    """Ψ̃_1 of a polygon as (1/π)∫_0^π chord(θ)^2 dθ by adaptive quadrature split at the kinks."""
    kinks = np.sort(np.mod(np.arctan2(P.vertices[:, 1], P.vertices[:, 0]), np.pi))

    def chord_squared(theta: float) -> float:
        u = np.array([[np.cos(theta), np.sin(theta)]])
        return float((P.radial_many(u)[0] + P.radial_many(-u)[0]) ** 2)

    value, _ = quad(chord_squared, 0.0, np.pi, points=kinks.tolist(), limit=400, epsabs=1e-13, epsrel=1e-12)
    return value / np.pi


def relative_error(value: float, expected: float) -> float:
    return abs(value - expected) / max(abs(expected), 1e-300)


class Verifier:
    """Runs the invariant and oracle suites with a fixed seed."""

    def __init__(self, budgets: Optional[Budgets] = None, logger: Optional[Logger] = None):
        self.budgets = budgets or Budgets()
        self.logger = logger
        self.functionals = Functionals(budgets=self.budgets)
        self.transforms = self.functionals.transforms
        self.solver = MinkowskiSolver(self.functionals)
        self.admissibility = Admissibility()
        self.fixtures = Fixtures()
        self.core = ConvexCore()
        self.suites: dict[VerifySuite, Callable[[], list[CheckResult]]] = {
            VerifySuite.Ball: self.check_ball,
            VerifySuite.Square: self.check_square,
            VerifySuite.Representation: self.check_representation,
            VerifySuite.Homogeneity: self.check_homogeneity,
            VerifySuite.SlInvariance: self.check_sl_invariance,
            VerifySuite.Gradient: self.check_gradient,
            VerifySuite.TotalMass: self.check_total_mass,
            VerifySuite.DiscreteSolve: self.check_discrete_solve,
            VerifySuite.SymmetricSolve: self.check_symmetric_solve,
            VerifySuite.Uniqueness: self.check_uniqueness,
            VerifySuite.IntersectionIdentity: self.check_intersection_identity,
            VerifySuite.Admissibility: self.check_admissibility,
        }

    def run(self, selected: Optional[list[VerifySuite]] = None) -> list[CheckResult]:
        results = []
        for suite in selected or list(VerifySuite):
            if self.logger:
                self.logger.start_stage(f"verify {suite.value}")
            try:
                checks = self.suites[suite]()
            except AdqError as error:
                checks = [CheckResult(suite=suite.value, name="suite raised", passed=False, detail=error.message)]
            for check in checks:
                if self.logger:
                    self.logger.log_check(check)
            results.extend(checks)
            if self.logger:
                self.logger.end_stage()
        return results

    def check_ball(self) -> list[CheckResult]:
        checks = []
        for n, m in [(2, 1), (3, 1), (3, 2)]:
            ball = self.fixtures.ball(n)
            expected = ball_volume(m) ** n
            grassmann = self.functionals.psi_grassmann(ball, m)
            spherical = self.functionals.psi_spherical(ball, m)
            checks.append(self._relative("ball", f"psi_grassmann B^{n}, m={m}", grassmann, expected, 1e-3))
            checks.append(self._relative("ball", f"psi_spherical B^{n}, m={m}", spherical, expected, 1e-3))
        return checks

    def check_square(self) -> list[CheckResult]:
        square = self.fixtures.square()
        return [
            self._relative("square", "psi_grassmann [-1,1]^2", self.functionals.psi_grassmann(square, 1), 16 / np.pi, 1e-3),
            self._relative("square", "psi_spherical [-1,1]^2", self.functionals.psi_spherical(square, 1), 16 / np.pi, 1e-3),
        ]

    def check_representation(self) -> list[CheckResult]:
        rng = np.random.default_rng(self.budgets.seed)
        checks = []
        for index in range(20):
            n = 2 if index < 10 else 3
            m = 1 if n == 2 else 1 + index % 2
            P = self.fixtures.random_polytope(n, int(rng.integers(n + 3, n + 7)), rng)
            grassmann = self.functionals.psi_grassmann(P, m)
            spherical = self.functionals.psi_spherical(P, m)
            checks.append(self._relative("representation", f"polytope {index} (n={n}, m={m})", spherical, grassmann, 2e-3))
        return checks

    def check_homogeneity(self) -> list[CheckResult]:
        rng = np.random.default_rng(self.budgets.seed)
        checks = []
        bodies = [(self.fixtures.square(), 1), (self.fixtures.random_polytope(3, 8, rng), 2)]
        for P, m in bodies:
            n = P.dim
            rule = self.functionals.body_rule(P, m)
            psi = self.functionals.psi_grassmann(P, m, rule)
            atoms = self.functionals.curvature_atoms(P, 1.5, m).masses
            for c in (0.5, 2.0):
                scaled = P.scaled(c)
                ratio = self.functionals.psi_grassmann(scaled, m, rule) / psi
                checks.append(self._relative("homogeneity", f"psi n={n} m={m} c={c}", ratio, c ** (m * n), 1e-6))
                scaled_atoms = self.functionals.curvature_atoms(scaled, 1.5, m).masses
                positive = atoms > 0
                worst = float(np.max(np.abs(scaled_atoms[positive] / atoms[positive] / c ** (m * n - 1.5) - 1.0)))
                checks.append(self._bound("homogeneity", f"atoms n={n} m={m} c={c}", worst, 1e-6))
        return checks

    def check_sl_invariance(self) -> list[CheckResult]:
        rng = np.random.default_rng(self.budgets.seed)
        checks = []
        # (n, m, facets, maps, tolerance)
        for n, m, facets, maps, tolerance in [(2, 1, 6, 10, 5e-3), (3, 1, 8, 3, 2e-3), (3, 2, 8, 3, 2e-3)]:
            P = self.fixtures.random_polytope(n, facets, rng)
            psi = self.functionals.psi_grassmann(P, m)
            for index in range(maps):
                image = self.core.transform_polytope(P, self.fixtures.random_unimodular(n, rng))
                checks.append(
                    self._relative(
                        "sl-invariance",
                        f"n={n} m={m} unimodular map {index}",
                        self.functionals.psi_grassmann(image, m),
                        psi,
                        tolerance,
                    )
                )
        return checks

    def check_gradient(self) -> list[CheckResult]:
        rng = np.random.default_rng(self.budgets.seed)
        checks = []
        step = 1e-4
        rule = self.functionals.grassmann_rule(2, 1)
        for index in range(10):
            p = (0.0, 1.5, 3.0)[index % 3]
            P = self.fixtures.random_polytope(2, int(rng.integers(4, 8)), rng)
            f = rng.uniform(0.1, 1.0, P.num_facets)
            plus = self.functionals.wulff_shape(P.normals, P.supports, f, step, p)
            minus = self.functionals.wulff_shape(P.normals, P.supports, f, -step, p)
            difference = (
                self.functionals.psi_grassmann(plus, 1, rule) - self.functionals.psi_grassmann(minus, 1, rule)
            ) / (2.0 * step)
            derivative = self.functionals.variation_derivative(P, f, p, 1)
            checks.append(self._relative("gradient", f"case {index} (p={p:g})", derivative, difference, 1e-2))
        return checks

    def check_total_mass(self) -> list[CheckResult]:
        rng = np.random.default_rng(self.budgets.seed)
        checks = []
        for index in range(10):
            n = 2 if index < 6 else 3
            m = 1 if n == 2 else 1 + index % 2
            P = self.fixtures.random_polytope(n, int(rng.integers(n + 3, n + 7)), rng)
            total = self.functionals.curvature_atoms(P, 0.0, m).total
            expected = m * self.functionals.psi_grassmann(P, m)
            checks.append(self._relative("total-mass", f"polytope {index} (n={n}, m={m})", total, expected, 2e-3))
        return checks

    def check_discrete_solve(self) -> list[CheckResult]:
        config = SolveConfig(p=3.0, m=1, budgets=self.budgets)
        checks = []
        triangle = self.solver.solve_discrete_lp(self.fixtures.triangle_measure(), config)
        expected = chord_oracle(self.fixtures.triangle()) / 3.0
        checks.append(self._bound("discrete-solve", "triangle measure residual", triangle.measure_residual, 1e-2))
        checks.append(self._supports("discrete-solve", "triangle supports", triangle.polytope.supports, expected))
        square = self.solver.solve_discrete_lp(self.fixtures.cross_measure(), config)
        checks.append(self._bound("discrete-solve", "square measure residual", square.measure_residual, 1e-2))
        checks.append(self._supports("discrete-solve", "square supports", square.polytope.supports, 4.0 / np.pi))
        return checks

    def check_symmetric_solve(self) -> list[CheckResult]:
        checks = []
        octagon = self.solver.solve_symmetric(self.fixtures.octagon_measure(), SolveConfig(p=0.0, m=1, budgets=self.budgets))
        expected = (8.0 / chord_oracle(self.fixtures.octagon())) ** 0.5
        checks.append(self._supports("symmetric-solve", "octagon supports", octagon.polytope.supports, expected))
        cross = self.solver.solve_symmetric(
            self.fixtures.cross_measure(), SolveConfig(p=0.0, m=1, budgets=self.budgets, force=True)
        )
        checks.append(self._supports("symmetric-solve", "cross supports (forced)", cross.polytope.supports, (np.pi / 4.0) ** 0.5))
        return checks

    def check_uniqueness(self) -> list[CheckResult]:
        result = self.solver.uniqueness_check(
            self.fixtures.triangle_measure(), SolveConfig(p=3.0, m=1, budgets=self.budgets), starts=5
        )
        return [self._bound("uniqueness", "triangle, 5 starts", result.max_hausdorff / result.diameter, 1e-2)]

    def check_intersection_identity(self) -> list[CheckResult]:
        cube = self.fixtures.cube()
        directions = fibonacci_sphere(50)
        profile = self.transforms.section_profile(cube)
        lhs = self.transforms.dual_radon_many(profile, directions, self.budgets.sub, 2)
        constant = dual_radon_constant(3, 2) / ball_volume(2)
        rhs = np.array(
            [constant * self.transforms.second_intersection_radial(cube, u, self.budgets.sphere) for u in directions]
        )
        worst = float(np.max(np.abs(lhs - rhs) / rhs))
        return [self._bound("intersection-identity", "cube, 50 directions", worst, 1e-2)]

    def check_admissibility(self) -> list[CheckResult]:
        checks = []
        cases = [
            ("hemisphere {e1, e2}", self.fixtures.hemisphere_measure(), False),
            ("hemisphere {±e1, ±e2}", self.fixtures.cross_measure(), True),
            (
                "hemisphere {e1, e2, -(e1+e2)/√2}",
                DiscreteMeasure(n=2, atoms=np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]), weights=np.ones(3)),
                True,
            ),
        ]
        for name, measure, expected in cases:
            passed = self.admissibility.hemisphere_check(measure).passed
            checks.append(CheckResult(suite="admissibility", name=name, passed=passed == expected, detail=f"-> {passed}"))
        concentration = [
            ("concentration {±e1, ±e2}", self.fixtures.cross_measure(), False),
            ("concentration octagon", self.fixtures.octagon_measure(), True),
            (
                "concentration on ±e1",
                DiscreteMeasure(n=2, atoms=np.array([[1.0, 0.0], [-1.0, 0.0]]), weights=np.ones(2), even=True),
                False,
            ),
        ]
        for name, measure, expected in concentration:
            passed = self.admissibility.subspace_concentration_check(measure).passed
            checks.append(CheckResult(suite="admissibility", name=name, passed=passed == expected, detail=f"-> {passed}"))
        return checks

    def _relative(self, suite: str, name: str, value: float, expected: float, tolerance: float) -> CheckResult:
        error = relative_error(value, expected)
        return CheckResult(
            suite=suite,
            name=name,
            passed=error <= tolerance,
            detail=f"{value:.10g} vs {expected:.10g} (rel err {error:.2e}, tol {tolerance:.0e})",
            error=error,
        )

    def _bound(self, suite: str, name: str, value: float, tolerance: float) -> CheckResult:
        return CheckResult(
            suite=suite,
            name=name,
            passed=value <= tolerance,
            detail=f"{value:.3e} (tol {tolerance:.0e})",
            error=value,
        )

    def _supports(self, suite: str, name: str, supports: np.ndarray, expected: float) -> CheckResult:
        error = float(np.max(np.abs(supports - expected)) / expected)
        return CheckResult(
            suite=suite,
            name=name,
            passed=error <= 1e-2,
            detail=f"max |t - {expected:.8g}|/t = {error:.2e}",
            error=error,
        )
