from enum import Enum

from pydantic import BaseModel, Field, model_validator


class GridMode(str, Enum):
    FULL = "full"
    RADIAL = "radial"


MAX_RADIAL_DIMENSION = 7


class GridSpec(BaseModel):
    """Discretization of R^n.

    Full mode samples [-L, L)^n with `points` nodes per axis (n in {1, 2}).
    Radial mode samples r in [0, r_max] with `points` nodes for odd n <= 7;
    frequency nodes are rho_k = k * pi / r_max, so rho_max * dr = pi.
    """

    mode: GridMode = Field(..., description="full or radial")
    n: int = Field(..., ge=1, description="Spatial dimension")
    points: int = Field(..., ge=8, description="Samples per axis (full) or radial samples (radial)")
    extent: float = Field(..., gt=0, description="Half-width L (full) or r_max (radial)")

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {"mode": "radial", "n": 7, "points": 512, "extent": 160.0}
        }

    @model_validator(mode="after")
    def _check_mode(self) -> "GridSpec":
        if self.mode is GridMode.FULL:
            if self.n not in (1, 2):
                raise ValueError(f"full mode supports n in {{1, 2}} (got n={self.n})")
            if self.points & (self.points - 1):
                raise ValueError(f"full mode needs a power of two points per axis (got {self.points})")
        else:
            if self.n % 2 == 0 or self.n > MAX_RADIAL_DIMENSION:
                raise ValueError(f"radial mode supports odd n <= {MAX_RADIAL_DIMENSION} (got n={self.n})")
        return self
