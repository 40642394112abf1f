from enum import Enum
from typing import Optional

from pydantic import BaseModel


class VerifySuite(Enum):
    Ball = "ball"
    Square = "square"
    Representation = "representation"
    Homogeneity = "homogeneity"
    SlInvariance = "sl-invariance"
    Gradient = "gradient"
    TotalMass = "total-mass"
    DiscreteSolve = "discrete-solve"
    SymmetricSolve = "symmetric-solve"
    Uniqueness = "uniqueness"
    IntersectionIdentity = "intersection-identity"
    Admissibility = "admissibility"

    @classmethod
    def names(cls) -> list[str]:
        return [suite.value for suite in cls]


class CheckResult(BaseModel):
    suite: str
    name: str
    passed: bool
    detail: str = ""
    error: Optional[float] = None
