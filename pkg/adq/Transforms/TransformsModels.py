from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict


class SphericalFunction(BaseModel):
    """f ∈ C(S^{n-1}); the evaluator maps directions (N, n) to values (N,)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    evaluator: Callable[[np.ndarray], np.ndarray]
    description: str = ""

    def __call__(self, directions: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.atleast_2d(directions)), dtype=float)


class GrassmannFunction(BaseModel):
    """F ∈ C(G(n, m)); the evaluator maps frames (N, m, n) to values (N,)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    evaluator: Callable[[np.ndarray], np.ndarray]
    dim: Optional[int] = None
    description: str = ""
    # points whose containing subspaces bound the pieces where F is smooth
    kinks: Optional[np.ndarray] = None

    def __call__(self, frames: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(frames), dtype=float)


class SubspaceCache:
    """
    Values keyed by the subspace projector quantized to a 1e-7 grid, so any
    frame of the same subspace hits the same entry. Single writer, last write
    wins; the stored values are deterministic.
    """

    QUANTUM = 1e-7

    def __init__(self):
        self.values: dict[bytes, float] = {}
        self.hits = 0
        self.misses = 0

    def keys(self, frames: np.ndarray) -> list[bytes]:
        projectors = np.einsum("pmi,pmj->pij", frames, frames)
        quantized = np.rint(projectors / self.QUANTUM).astype(np.int64)
        return [row.tobytes() for row in quantized.reshape(len(frames), -1)]

    def evaluate(self, frames: np.ndarray, compute: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        keys = self.keys(frames)
        out = np.empty(len(frames))
        missing = []
        for position, key in enumerate(keys):
            value = self.values.get(key)
            if value is None:
                missing.append(position)
            else:
                out[position] = value
        self.hits += len(frames) - len(missing)
        self.misses += len(missing)
        if missing:
            computed = compute(frames[missing])
            out[missing] = computed
            for position, value in zip(missing, computed):
                self.values[keys[position]] = float(value)
        return out
