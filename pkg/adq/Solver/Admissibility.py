from typing import Optional

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from adq.Errors import EmptyMeasure, NotEven
from adq.Logger import Logger
from adq.Solver.SolverModels import AdmissibilityResult, DiscreteMeasure

PARALLEL_TOL = 1e-9


class Admissibility:
    """Hypothesis checks on the Minkowski datum μ."""

    def __init__(self, logger: Optional[Logger] = None):
        self.logger = logger

    @staticmethod
    def hemisphere_witness(atoms: np.ndarray) -> tuple[bool, Optional[np.ndarray]]:
        """
        True when the atoms are not contained in a closed hemisphere, i.e. the
        origin is interior to their convex hull. Decided by the LP
        max δ s.t. Σλ_i u_i = 0, Σλ_i = 1, λ_i >= δ plus a rank test. On failure
        a direction w with u_i·w <= 0 for all atoms is returned.
        """
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        k, n = atoms.shape
        if np.linalg.matrix_rank(atoms, tol=1e-10) < n:
            return False, null_space(atoms, rcond=1e-10)[:, 0]

        cost = np.zeros(k + 1)
        cost[-1] = -1.0
        A_eq = np.zeros((n + 1, k + 1))
        A_eq[:n, :k] = atoms.T
        A_eq[n, :k] = 1.0
        b_eq = np.zeros(n + 1)
        b_eq[n] = 1.0
        A_ub = np.hstack([-np.eye(k), np.ones((k, 1))])
        b_ub = np.zeros(k)
        bounds = [(0.0, None)] * k + [(-1.0, 1.0)]
        result = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
        if result.status == 0 and result.x[-1] > 1e-12:
            return True, None

        # separating direction: min Σ u_i·w subject to u_i·w <= 0, |w|_inf <= 1
        separation = linprog(
            atoms.sum(axis=0),
            A_ub=atoms,
            b_ub=np.zeros(k),
            bounds=[(-1.0, 1.0)] * n,
            method="highs",
        )
        w = separation.x if separation.status == 0 else -atoms.sum(axis=0)
        norm = np.linalg.norm(w)
        if norm < 1e-12:
            w = null_space(atoms, rcond=1e-8)[:, 0] if n > np.linalg.matrix_rank(atoms) else -atoms[0]
            norm = np.linalg.norm(w)
        return False, w / norm

    def hemisphere_check(self, measure: DiscreteMeasure) -> AdmissibilityResult:
        if measure.size == 0:
            raise EmptyMeasure("measure has no atoms")
        passed, witness = self.hemisphere_witness(measure.atoms)
        result = AdmissibilityResult(
            passed=passed, witness=None if witness is None else witness.tolist()
        )
        if self.logger:
            detail = "" if passed else f"witness w = {result.witness}"
            self.logger.log_admissibility("hemisphere check", passed, detail)
        return result

    def subspace_concentration_check(self, measure: DiscreteMeasure) -> AdmissibilityResult:
        """
        Strict subspace concentration μ(ξ∩S^{n-1})/|μ| < dim ξ/n. For a discrete
        μ only subspaces spanned by atoms can violate it, so those are enumerated.
        Reports the subspace with the largest ratio relative to its bound.
        """
        if not measure.even:
            raise NotEven("subspace concentration is defined for even measures")
        if measure.size == 0:
            raise EmptyMeasure("measure has no atoms")
        n = measure.n
        atoms, weights = measure.atoms, measure.weights
        total = measure.total

        candidates: list[tuple[float, float, np.ndarray]] = []
        for u in atoms:
            mass = weights[np.abs(atoms @ u) >= 1.0 - PARALLEL_TOL].sum()
            candidates.append((mass / total, 1.0 / n, u[None, :]))
        if n == 3:
            for i in range(len(atoms)):
                for j in range(i + 1, len(atoms)):
                    normal = np.cross(atoms[i], atoms[j])
                    length = np.linalg.norm(normal)
                    if length < 1e-9:
                        continue
                    normal /= length
                    mass = weights[np.abs(atoms @ normal) <= PARALLEL_TOL].sum()
                    frame = np.vstack([atoms[i], np.cross(normal, atoms[i])])
                    candidates.append((mass / total, 2.0 / 3.0, frame))

        ratio, bound, frame = max(candidates, key=lambda item: item[0] / item[1])
        passed = ratio < bound - 1e-12
        result = AdmissibilityResult(passed=passed, ratio=float(ratio), subspace=frame.tolist())
        if self.logger:
            self.logger.log_admissibility(
                "subspace concentration", passed, f"worst ratio {ratio:.6g} vs bound {bound:.6g}"
            )
        return result
