from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from .params import Scenario


class WeightSpec(BaseModel):
    """Exponents e of the (1+tau)^e envelopes that define the X(t) norm.

    Keys are NormSeries column ids; the X(t) norm divides each column by its
    envelope.
    """

    scenario: Scenario
    exponents: Dict[str, float] = Field(..., description="column id -> envelope exponent")

    def family(self, component: str) -> tuple:
        """(lq, dsigma, t, d2sigma) exponents of one component."""
        return tuple(self.exponents[f"{component}_{key}"] for key in ("lq", "dsigma", "t", "d2sigma"))


class EnvelopeResult(BaseModel):

    column: str
    exponent: float = Field(..., description="Predicted exponent of (1+t)")
    constant: Optional[float] = Field(None, description="sup of value/(1+t)^e over the window")
    early_sup: Optional[float] = None
    late_sup: Optional[float] = None
    slope: Optional[float] = Field(None, description="Fitted log-log slope, if the window supports a fit")
    slope_stderr: Optional[float] = None
    data_norm: Optional[float] = Field(None, description="Norm of the initial data the estimate is stated against")
    relative_constant: Optional[float] = Field(None, description="constant / data_norm")
    passed: bool
    note: str = ""


class RateFit(BaseModel):

    column: str
    slope: float
    stderr: float
    samples: int
    window: tuple


class KernelSuiteResult(BaseModel):

    n: int
    sigma: float
    a: float
    r: float
    kernel: str
    times: List[float]
    norms: List[float]
    envelope: EnvelopeResult
    majorant_slope: Optional[float] = None
    majorant_exponent: Optional[float] = None


class PicardResult(BaseModel):

    distances: List[float] = Field(default_factory=list)
    ratios: List[Optional[float]] = Field(default_factory=list)
    u_correction: List[float] = Field(default_factory=list, description="sup_t of the u nonlinear part per iterate")
    v_correction: List[float] = Field(default_factory=list, description="sup_t of the v nonlinear part per iterate")
    converged: bool = False
    diverged: bool = False
    iterations: int = 0
