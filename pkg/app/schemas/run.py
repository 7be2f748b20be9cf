from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from .grid import GridMode, GridSpec
from .params import ProblemParams


class Scheme(str, Enum):
    FROZEN = "frozen"
    MIDPOINT_ETD = "midpoint_etd"


class DataKind(str, Enum):
    GAUSSIAN = "gaussian"
    BUMP = "bump"


class DataSlot(str, Enum):
    U0 = "u0"
    U1 = "u1"
    V0 = "v0"
    V1 = "v1"


class StepperConfig(BaseModel):

    h: float = Field(0.1, gt=0, description="Time step")
    scheme: Scheme = Field(Scheme.MIDPOINT_ETD, description="frozen (1st order) or midpoint_etd (2nd order)")
    dealias: bool = Field(True, description="2/3 rule on the nonlinearity (full mode only)")
    nonlinear: bool = Field(True, description="Disable to run the linear flow through the stepper")
    picard_max_iters: int = Field(6, ge=1, description="Maximum Picard iterates")
    picard_tol: float = Field(1e-13, ge=0, description="Iterate distance treated as converged")

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {"h": 0.1, "scheme": "midpoint_etd", "dealias": True, "picard_max_iters": 6}
        }


class DataSpec(BaseModel):
    """Initial data: amplitude * profile in each selected slot, zero elsewhere."""

    kind: DataKind = Field(DataKind.GAUSSIAN, description="gaussian or bump")
    amplitude: float = Field(1e-3, ge=0, description="Amplitude epsilon")
    width: float = Field(1.0, gt=0, description="Length scale of the profile")
    slots: List[DataSlot] = Field(
        default_factory=lambda: [DataSlot.U0, DataSlot.V0],
        description="Which of (u0, u1, v0, v1) carry the profile",
    )

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {"kind": "gaussian", "amplitude": 0.001, "width": 1.0, "slots": ["u0", "v0"]}
        }


class ScanRanges(BaseModel):
    """Per-parameter value lists; the scan visits their Cartesian product."""

    n: List[int] = Field(default_factory=lambda: [3, 5, 7, 9])
    sigma1: List[float] = Field(default_factory=lambda: [1.0, 1.5, 2.0])
    sigma2: List[float] = Field(default_factory=lambda: [1.0, 1.5, 2.0])
    p1: List[float] = Field(default_factory=lambda: [2.0, 4.0, 6.0, 9.0, 12.0])
    p2: List[float] = Field(default_factory=lambda: [2.0, 4.0, 6.0, 10.0, 12.0])
    q: List[float] = Field(default_factory=lambda: [2.0, 4.0])
    m: List[float] = Field(default_factory=lambda: [1.0])

    class Config:
        json_schema_extra = {
            "example": {"n": [7], "sigma1": [1], "sigma2": [1], "p1": [9, 10], "p2": [10], "q": [4], "m": [1]}
        }

    def cardinality(self) -> int:
        total = 1
        for values in (self.n, self.sigma1, self.sigma2, self.p1, self.p2, self.q, self.m):
            total *= len(values)
        return total


class KernelSuiteConfig(BaseModel):

    n: int = Field(3, ge=1)
    sigma: float = Field(1.0, ge=1)
    a_values: List[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0])
    r_values: List[float] = Field(
        default_factory=lambda: [float("inf"), 1.0],
        description="Lebesgue exponents of the kernel norm (inf allowed)",
    )
    kernel: Literal["k0", "k1"] = "k1"
    t_min: float = Field(10.0, gt=0)
    t_max: float = Field(1000.0, gt=0)
    samples: int = Field(25, ge=8)

    @model_validator(mode="after")
    def _check_window(self) -> "KernelSuiteConfig":
        if self.t_max <= self.t_min:
            raise ValueError(f"t_max must exceed t_min (got {self.t_min}, {self.t_max})")
        return self


class LinearSuiteConfig(BaseModel):

    n: int = Field(3, ge=1)
    sigmas: List[float] = Field(default_factory=lambda: [1.0, 2.0])
    q: float = Field(2.0, gt=1)
    m: float = Field(1.0, ge=1)
    kind: DataKind = DataKind.GAUSSIAN


class RunConfig(BaseModel):
    """One JSON document drives every command; blocks a command does not use may be omitted."""

    command: Optional[str] = Field(None, description="check, scan, kernel, linear, run, picard or report")
    params: Optional[ProblemParams] = None
    grid: GridSpec = Field(
        default_factory=lambda: GridSpec(mode=GridMode.RADIAL, n=7, points=512, extent=160.0)
    )
    stepper: StepperConfig = Field(default_factory=StepperConfig)
    data: DataSpec = Field(default_factory=DataSpec)
    horizon: float = Field(100.0, gt=0, description="Final time T")
    output_dir: Optional[str] = Field(None, description="Run directory; defaults under SIGEVO_OUTPUT_ROOT")
    scan: ScanRanges = Field(default_factory=ScanRanges)
    kernel_suite: KernelSuiteConfig = Field(default_factory=KernelSuiteConfig)
    linear_suite: LinearSuiteConfig = Field(default_factory=LinearSuiteConfig)
    epsilon_variant: Literal["paper", "gn_derived"] = "paper"
    snapshots: bool = Field(True, description="Write final-state field snapshots")

    class Config:
        json_schema_extra = {
            "example": {
                "command": "run",
                "params": {"n": 7, "sigma1": 1, "sigma2": 1, "p1": 9, "p2": 10, "q": 4, "m": 1},
                "grid": {"mode": "radial", "n": 7, "points": 512, "extent": 160.0},
                "stepper": {"h": 0.1, "scheme": "midpoint_etd"},
                "data": {"kind": "gaussian", "amplitude": 0.001},
                "horizon": 100.0,
            }
        }

    def require_params(self) -> ProblemParams:
        if self.params is None:
            raise ValueError("config has no 'params' block")
        return self.params
