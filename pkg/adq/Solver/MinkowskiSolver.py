from typing import Callable, Optional, Union

import numpy as np

from adq.ConvexCore.ConvexCore import ConvexCore
from adq.Errors import (
    BadDims,
    ConcentrationFail,
    ExcludedExponent,
    ExponentBelowGuarantee,
    InadmissibleMeasure,
    NoConvergence,
    NotEven,
)
from adq.Functionals.Functionals import Functionals
from adq.Grassmann.SphereLattice import circle_points, fibonacci_sphere
from adq.Logger import Logger
from adq.Solver.Admissibility import Admissibility
from adq.Solver.SolverModels import (
    AscentState,
    DiscreteMeasure,
    SolveConfig,
    SolveReport,
    UniquenessResult,
)
from adq.Transforms.TransformsModels import SphericalFunction

EXPONENT_TOL = 1e-12


class MinkowskiSolver:
    """
    Polytopal solutions of the Lp Minkowski problem for the curvature measures of
    Ψ̃_m. Discrete data are solved by constrained ascent in log support numbers,
    general data by atomizing onto sphere cells first.
    """

    def __init__(self, functionals: Optional[Functionals] = None, logger: Optional[Logger] = None):
        self.functionals = functionals or Functionals(logger=logger)
        self.core = ConvexCore(logger)
        self.admissibility = Admissibility(logger)
        self.logger = logger

    def solve_discrete_lp(
        self,
        measure: DiscreteMeasure,
        config: SolveConfig,
        start: Optional[np.ndarray] = None,
        allow_mn: bool = False,
    ) -> SolveReport:
        """
        Maximize Ψ̃_m(P(z)) over Z = {Σα_i t_i^p = 1} with a vanishing log-barrier,
        then dilate the maximizer so its Lp curvature atoms equal the weights.
        allow_mn admits p = mn for diagnostics; the result is then only
        determined up to dilation and is left unscaled.
        """
        n, m, p = measure.n, config.m, config.p
        self._check_m(n, m)
        mn = m * n
        at_mn = abs(p - mn) < EXPONENT_TOL
        if p <= 1.0 or (at_mn and not allow_mn):
            raise ExcludedExponent(f"discrete solver needs p > 1 and p != mn = {mn}, got p = {p}")
        check = self.admissibility.hemisphere_check(measure)
        if not check.passed:
            raise InadmissibleMeasure(
                "measure is concentrated on a closed hemisphere", witness=check.witness
            )

        alpha = measure.weights
        atoms = measure.atoms
        k = measure.size
        budgets = config.budgets

        def retract(s: np.ndarray) -> np.ndarray:
            return s - np.log(np.dot(alpha, np.exp(p * s))) / p

        def evaluate(s: np.ndarray, beta: float) -> AscentState:
            t = np.exp(s)
            P = self.core.build_polytope(atoms, t)
            atoms0 = self.functionals.curvature_atoms(P, 0.0, m, budgets).masses
            psi = float(np.sum(atoms0)) / m
            value = np.log(psi) + beta * np.mean(s)
            gradient = n * atoms0 / psi + beta / k
            return AscentState(
                value=float(value),
                gradient=gradient,
                residual=self._lagrange_residual(atoms0, alpha * t**p),
                polytope=P,
                atoms0=atoms0,
                psi=psi,
            )

        def tangent(s: np.ndarray, gradient: np.ndarray) -> np.ndarray:
            normal = p * alpha * np.exp(p * s)
            return gradient - np.dot(gradient, normal) / np.dot(normal, normal) * normal

        if start is None:
            s0 = -np.log(k * alpha) / p
        else:
            s0 = retract(np.log(np.asarray(start, dtype=float).reshape(-1)))

        if self.logger:
            self.logger.start_stage(f"discrete L{p:g} solve (n={n}, m={m}, k={k})")
        s, state, trace, breaks, converged, iterations = self._ascend(
            evaluate, s0, config, tangent, retract, config.barrier0
        )

        t = np.exp(s)
        P0 = state.polytope
        flags = []
        if at_mn:
            P = P0
            flags.append("p-equals-mn-scale-free")
        else:
            b = alpha * t**p
            positive = state.atoms0 > 0.0
            multiplier = np.dot(state.atoms0[positive], b[positive]) / np.dot(
                state.atoms0[positive], state.atoms0[positive]
            )
            # atoms_p(cP0) = c^{mn-p}·t^{-p}·atoms_0(P0) and λ·atoms_0 = α t^p at stationarity
            P = P0.scaled(multiplier ** (1.0 / (mn - p)))
        report = self._report(measure, config, P, converged, state.residual, iterations, trace, breaks, flags)
        return self._finish(report)

    def solve_symmetric(
        self, measure: DiscreteMeasure, config: SolveConfig, start: Optional[np.ndarray] = None
    ) -> SolveReport:
        """
        Maximize J_{m,p,μ} over origin-symmetric polytopes with normals supp μ,
        one log support number per antipodal pair, then rescale so the Lp
        curvature atoms equal the weights.
        """
        if not measure.even:
            raise NotEven("the symmetric solver needs an even measure")
        n, m, p = measure.n, config.m, config.p
        self._check_m(n, m)
        if p < 0.0:
            raise ExcludedExponent(f"symmetric solver needs p >= 0, got p = {p}")
        mn = m * n

        flags = []
        concentration = self.admissibility.subspace_concentration_check(measure)
        if not concentration.passed:
            message = (
                f"strict subspace concentration fails: ratio {concentration.ratio:.6g} "
                "on the reported subspace"
            )
            if not config.force:
                raise ConcentrationFail(message, concentration.ratio, concentration.subspace)
            flags.append("subspace-concentration-violated")
            if self.logger:
                self.logger.log_warning(message + " (forced)")

        atoms, alpha = measure.atoms, measure.weights
        antipode = measure.antipode_index()
        representatives = np.flatnonzero(np.arange(measure.size) < antipode)
        partners = antipode[representatives]
        pair_of = np.empty(measure.size, dtype=int)
        pair_of[representatives] = np.arange(len(representatives))
        pair_of[partners] = np.arange(len(representatives))
        pair_alpha = alpha[representatives] + alpha[partners]
        total = measure.total
        budgets = config.budgets

        def evaluate(s: np.ndarray, beta: float) -> AscentState:
            t = np.exp(s[pair_of])
            P = self.core.build_polytope(atoms, t)
            atoms0 = self.functionals.curvature_atoms(P, 0.0, m, budgets).masses
            psi = float(np.sum(atoms0)) / m
            share = (atoms0[representatives] + atoms0[partners]) / (m * psi)
            if p == 0:
                target = pair_alpha / total
                energy = -np.dot(alpha, np.log(t)) / total
            else:
                tp = np.exp(p * s)
                target = pair_alpha * tp / np.dot(pair_alpha, tp)
                energy = -np.log(np.dot(alpha, t**p) / total) / p
            value = np.log(psi) / mn + energy
            residual = float(np.max(np.abs(share - target) / target))
            return AscentState(
                value=float(value),
                gradient=share - target,
                residual=residual,
                polytope=P,
                atoms0=atoms0,
                psi=psi,
            )

        def retract(s: np.ndarray) -> np.ndarray:
            return s - np.mean(s)

        if start is None:
            s0 = np.zeros(len(representatives))
        else:
            s0 = retract(np.log(np.asarray(start, dtype=float).reshape(-1)[representatives]))

        if self.logger:
            self.logger.start_stage(f"symmetric L{p:g} solve (n={n}, m={m}, k={measure.size})")
        s, state, trace, breaks, converged, iterations = self._ascend(
            evaluate, s0, config, lambda _, gradient: gradient, retract, 0.0
        )

        K0 = state.polytope
        if abs(p - mn) < EXPONENT_TOL:
            P = K0
            flags.append("p-equals-mn-scale-free")
        else:
            h = K0.supports
            power = np.dot(alpha, h**p) if p > 0 else total
            c = (power / (m * state.psi)) ** (1.0 / (mn - p))
            P = K0.scaled(c)
        report = self._report(measure, config, P, converged, state.residual, iterations, trace, breaks, flags)
        report.j_value = self.functionals.j_functional(
            P, measure, p, m, budgets, psi=report.psi_value
        )
        return self._finish(report)

    def solve_general(
        self,
        source: Union[DiscreteMeasure, SphericalFunction],
        resolution: int,
        config: SolveConfig,
        n: Optional[int] = None,
    ) -> SolveReport:
        """
        Atomize μ onto `resolution` sphere cells (arcs for n = 2, Fibonacci
        Voronoi cells for n = 3) and solve the discrete problem. A density is
        given as a SphericalFunction with the ambient dimension n.
        """
        if isinstance(source, DiscreteMeasure):
            n = source.n
        elif n is None:
            raise BadDims("a density needs the ambient dimension n")
        m, p = config.m, config.p
        self._check_m(n, m)
        threshold = n + m * (n - 2)
        flags = []
        if p <= threshold:
            message = f"existence is only guaranteed for p > n + m(n-2) = {threshold}, got p = {p}"
            if not config.force:
                raise ExponentBelowGuarantee(message)
            flags.append("exponent-below-guarantee")
            if self.logger:
                self.logger.log_warning(message + " (forced)")

        measure = self.discretize(source, resolution, n, config.budgets.sphere)
        report = self.solve_discrete_lp(measure, config)
        report.flags.extend(flags)
        report.discretization_level = resolution
        return report

    def discretize(
        self,
        source: Union[DiscreteMeasure, SphericalFunction],
        resolution: int,
        n: int,
        sphere_budget: int = 512,
    ) -> DiscreteMeasure:
        """
        Cell masses placed at the cell centers, cells in the order of their
        first atom. A discrete μ with at most `resolution` atoms seeds one cell
        at every atom and the grid fills the rest, so it comes back unchanged.
        """
        if resolution < n + 1:
            raise BadDims(f"resolution must be at least n+1 = {n + 1}")
        centers = self.cell_centers(n, resolution)
        even = False
        if isinstance(source, DiscreteMeasure):
            directions, masses = source.atoms, source.weights
            if source.size <= resolution:
                centers = np.vstack([source.atoms, centers[: resolution - source.size]])
                even = source.even
        else:
            count = max(sphere_budget, 16 * resolution)
            if n == 2:
                # half-step offset keeps nodes off the arc boundaries
                angles = 2.0 * np.pi * (np.arange(count) + 0.5) / count
                directions = np.column_stack([np.cos(angles), np.sin(angles)])
                weights = np.full(count, 2.0 * np.pi / count)
            else:
                sphere = self.functionals.grassmann.sphere_rule(n, count)
                directions, weights = sphere.nodes, sphere.weights
            masses = np.clip(source(directions), 0.0, None) * weights
        # ties go to the lowest index, which is the atom's own cell when seeded
        cells = np.argmax(directions @ centers.T, axis=1)

        new_atoms, new_weights = [], []
        for cell in dict.fromkeys(cells.tolist()):
            mass = float(np.sum(masses[cells == cell]))
            if mass > 0.0:
                new_atoms.append(centers[cell])
                new_weights.append(mass)
        return DiscreteMeasure(n=n, atoms=np.array(new_atoms), weights=np.array(new_weights), even=even)

    @staticmethod
    def cell_centers(n: int, resolution: int) -> np.ndarray:
        if n == 2:
            return circle_points(resolution)
        if n == 3:
            return fibonacci_sphere(resolution)
        raise BadDims(f"no sphere cells for n = {n}")

    def uniqueness_check(self, measure: DiscreteMeasure, config: SolveConfig, starts: int) -> UniquenessResult:
        """
        Multi-start solve_discrete_lp from seeded random interior starts and the
        largest pairwise Hausdorff distance. For p = mn every solution is first
        normalized to Ψ̃_m = 1.
        """
        mn = config.m * measure.n
        at_mn = abs(config.p - mn) < EXPONENT_TOL
        rng = np.random.default_rng(config.seed)
        default = (measure.size * measure.weights) ** (-1.0 / config.p)
        reports = []
        for index in range(starts):
            start = default if index == 0 else default * np.exp(rng.uniform(-0.5, 0.5, measure.size))
            reports.append(self.solve_discrete_lp(measure, config, start=start, allow_mn=at_mn))

        bodies = [report.polytope for report in reports]
        if at_mn:
            bodies = [
                body.scaled(report.psi_value ** (-1.0 / mn)) for body, report in zip(bodies, reports)
            ]
        distance = 0.0
        for i in range(len(bodies)):
            for j in range(i + 1, len(bodies)):
                distance = max(distance, self.core.hausdorff_distance(bodies[i], bodies[j]))
        diameter = max(body.diameter for body in bodies)
        if self.logger:
            self.logger.log_value("max pairwise Hausdorff distance", distance, f"diameter {diameter:.6g}")
        return UniquenessResult(
            reports=reports, max_hausdorff=distance, diameter=diameter, normalized=at_mn
        )

    def _ascend(
        self,
        evaluate: Callable[[np.ndarray, float], AscentState],
        s: np.ndarray,
        config: SolveConfig,
        tangent: Callable[[np.ndarray, np.ndarray], np.ndarray],
        retract: Callable[[np.ndarray], np.ndarray],
        barrier: float,
    ):
        """
        Armijo backtracking ascent; returns (s, state, trace, breaks, converged,
        accepted steps). Halving the barrier changes the objective, so the
        current point is re-evaluated and opens a new trace segment; breaks are
        the trace indices where segments start after the first.
        """
        beta = barrier
        state = evaluate(s, beta)
        trace = [state.value]
        breaks = []
        step = config.step0
        accepted = 0
        converged = False
        for iterations in range(1, config.max_iters + 1):
            if state.residual <= config.tol:
                converged = True
                break
            direction = tangent(s, state.gradient)
            slope = float(np.dot(direction, state.gradient))
            if slope <= 0.0:
                break
            for _ in range(config.max_backtracks):
                candidate = retract(s + step * direction)
                trial = evaluate(candidate, beta)
                if trial.value >= state.value + config.armijo * step * slope:
                    break
                step /= 2.0
            else:
                if self.logger:
                    self.logger.log_warning(f"line search stalled at iteration {iterations}")
                break
            s, state = candidate, trial
            accepted += 1
            trace.append(state.value)
            if self.logger and accepted % config.log_every == 0:
                self.logger.log_iteration(accepted, state.value, state.residual, step)
            if beta > 0.0 and accepted % config.barrier_halving_every == 0:
                beta /= 2.0
                state = evaluate(s, beta)
                breaks.append(len(trace))
                trace.append(state.value)
            step = min(config.step0, 2.0 * step)
        converged = converged or state.residual <= config.tol
        return s, state, trace, breaks, converged, accepted

    @staticmethod
    def _lagrange_residual(atoms0: np.ndarray, targets: np.ndarray) -> float:
        """max_i |λ·atom_i - b_i|/b_i with the least-squares multiplier λ; inf on degenerate facets"""
        if np.any(atoms0 <= 0.0):
            return float("inf")
        multiplier = np.dot(atoms0, targets) / np.dot(atoms0, atoms0)
        return float(np.max(np.abs(multiplier * atoms0 - targets) / targets))

    def _report(self, measure, config, P, converged, residual, iterations, trace, breaks, flags) -> SolveReport:
        atoms = self.functionals.curvature_atoms(P, config.p, config.m, config.budgets)
        measure_residual = float(np.max(np.abs(atoms.masses - measure.weights) / measure.weights))
        psi = atoms.masses @ P.supports**config.p / config.m
        return SolveReport(
            polytope=P,
            p=config.p,
            m=config.m,
            converged=converged,
            lagrange_residual=residual,
            measure_residual=measure_residual,
            iterations=iterations,
            psi_value=float(psi),
            objective_trace=[float(v) for v in trace],
            trace_breaks=list(breaks),
            target_weights=measure.weights.tolist(),
            atoms=atoms.masses.tolist(),
            seed=config.seed,
            budgets=config.budgets,
            flags=list(flags),
        )

    def _finish(self, report: SolveReport) -> SolveReport:
        if self.logger:
            self.logger.end_stage()
            self.logger.log_solve_result(report)
        if not report.converged:
            raise NoConvergence(
                f"no stationary point within {report.iterations} iterations "
                f"(residual {report.lagrange_residual:.3e})",
                report=report,
            )
        return report

    @staticmethod
    def _check_m(n: int, m: int):
        if not 1 <= m <= n - 1:
            raise BadDims(f"need 1 <= m <= n-1, got n = {n}, m = {m}")
