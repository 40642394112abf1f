import numpy as np
from pydantic import BaseModel, ConfigDict


class CurvatureAtoms(BaseModel):
    """
    Atoms of the Lp curvature measure of Ψ̃_m on the facet normals of a
    polytope. For the analytic ball the normals are the nodes of a sphere rule
    and the masses its discretization.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    normals: np.ndarray
    masses: np.ndarray
    p: float
    m: int

    @property
    def total(self) -> float:
        return float(np.sum(self.masses))

    def positive(self) -> np.ndarray:
        return self.masses > 0.0
