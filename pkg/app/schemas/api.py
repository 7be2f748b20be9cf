from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from .params import DecayRateTable, DerivedConstants, ProblemParams, TheoremVerdict
from .run import ScanRanges


class HealthResponse(BaseModel):

    status: str = Field(..., description="Service status")


class CheckResponse(BaseModel):

    params: ProblemParams
    constants: DerivedConstants
    verdict: TheoremVerdict
    rates: Optional[DecayRateTable] = Field(None, description="Present when a theorem applies")
    weights: Optional[Dict[str, float]] = Field(None, description="X(t) envelope exponents per column")

    class Config:
        json_schema_extra = {
            "example": {
                "params": {"n": 7, "sigma1": 1, "sigma2": 1, "p1": 9, "p2": 10, "q": 4, "m": 1},
                "verdict": {"scenario": "Thm11_loss", "eps_p1_sigma2": 0.0},
            }
        }


class ScanRequest(BaseModel):

    ranges: ScanRanges
    include_rows: bool = Field(False, description="Return every classified tuple, not just counts")


class ScanRow(BaseModel):

    params: ProblemParams
    scenario: str


class ScanResponse(BaseModel):

    total: int
    counts: Dict[str, int]
    rows: List[ScanRow] = Field(default_factory=list)

    class Config:
        json_schema_extra = {
            "example": {
                "total": 2,
                "counts": {"Thm11_loss": 1, "Thm11B_noloss": 1, "none": 0},
                "rows": [],
            }
        }
