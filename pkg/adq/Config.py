import os
from pydantic import BaseModel, Field

DEFAULT_SEED = 20240917


class Budgets(BaseModel):
    """Quadrature budgets shared by every evaluation. Recorded in every report."""

    sphere: int = Field(default=512, ge=16)
    grassmann: int = Field(default=4096, ge=16)
    adaptive_nodes: int = Field(default=600_000, ge=1000)
    adaptive_rtol: float = Field(default=1e-4, gt=0.0, lt=1.0)
    sub: int = Field(default=128, ge=4)
    triangle_levels: int = Field(default=2, ge=0, le=6)
    edge_points: int = Field(default=16, ge=2, le=64)
    seed: int = DEFAULT_SEED

    @classmethod
    def from_env(cls) -> "Budgets":
        """Defaults overridden by ADQ_* environment variables (call load_dotenv first)."""
        values = {}
        env_map = {
            "seed": "ADQ_SEED",
            "sphere": "ADQ_BUDGET_SPHERE",
            "grassmann": "ADQ_BUDGET_GRASSMANN",
            "adaptive_nodes": "ADQ_ADAPTIVE_NODES",
            "adaptive_rtol": "ADQ_ADAPTIVE_RTOL",
            "sub": "ADQ_BUDGET_SUB",
            "triangle_levels": "ADQ_TRIANGLE_LEVELS",
            "edge_points": "ADQ_EDGE_POINTS",
        }
        for field_name, env_name in env_map.items():
            raw = os.getenv(env_name)
            if raw is not None and raw.strip():
                values[field_name] = raw.strip()
        return cls(**values)
