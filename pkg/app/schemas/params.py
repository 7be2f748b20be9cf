from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class Scenario(str, Enum):
    THM11_LOSS = "Thm11_loss"
    THM12_LOSS = "Thm12_loss"
    THM11B_NOLOSS = "Thm11B_noloss"
    THM12B_NOLOSS = "Thm12B_noloss"
    NONE = "none"

    @property
    def branch(self) -> Optional[int]:
        """1 for the sigma1 >= sigma2 family, 2 for sigma2 >= sigma1."""
        if self in (Scenario.THM11_LOSS, Scenario.THM11B_NOLOSS):
            return 1
        if self in (Scenario.THM12_LOSS, Scenario.THM12B_NOLOSS):
            return 2
        return None


SCENARIO_TITLES: Dict[Scenario, str] = {
    Scenario.THM11_LOSS: "loss of decay, sigma1 >= sigma2",
    Scenario.THM12_LOSS: "loss of decay, sigma2 >= sigma1",
    Scenario.THM11B_NOLOSS: "no loss of decay, sigma1 >= sigma2",
    Scenario.THM12B_NOLOSS: "no loss of decay, sigma2 >= sigma1",
    Scenario.NONE: "no admissibility result applies",
}


class EpsilonVariant(str, Enum):
    PAPER = "paper"
    GN_DERIVED = "gn_derived"


class ProblemParams(BaseModel):

    n: int = Field(..., ge=1, description="Spatial dimension")
    sigma1: float = Field(..., ge=1, description="Order of the u equation")
    sigma2: float = Field(..., ge=1, description="Order of the v equation")
    p1: float = Field(..., gt=1, description="Exponent of |v|^p1 driving u")
    p2: float = Field(..., gt=1, description="Exponent of |u|^p2 driving v")
    q: float = Field(..., gt=1, description="Integrability index of the solution space")
    m: float = Field(1.0, ge=1, description="Additional data regularity index")

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {"n": 7, "sigma1": 1, "sigma2": 1, "p1": 9, "p2": 10, "q": 4, "m": 1}
        }

    @model_validator(mode="after")
    def _check_indices(self) -> "ProblemParams":
        if not self.q < float("inf"):
            raise ValueError(f"invalid-parameters: q must be finite (got q={self.q})")
        if not self.m < self.q:
            raise ValueError(
                f"invalid-parameters: require 1 <= m < q < inf (got m={self.m}, q={self.q})"
            )
        return self

    def as_tuple(self) -> tuple:
        return (self.n, self.m, self.q, self.sigma1, self.sigma2, self.p1, self.p2)


class DerivedConstants(BaseModel):

    half_n: int = Field(..., description="floor(n/2)")
    alpha: float
    beta: float
    gamma: float
    kappa1: float
    kappa2: float
    r: float = Field(..., description="Young index with 1 + 1/q = 1/r + 1/m")
    threshold1: Optional[float] = Field(
        None, description="1 + 2 m sigma2 (1+kappa1) / (n - 2 m sigma2 kappa1); None if denominator <= 0"
    )
    threshold2: Optional[float] = Field(
        None, description="1 + 2 m sigma1 (1+kappa2) / (n - 2 m sigma1 kappa2); None if denominator <= 0"
    )

    class Config:
        frozen = True

    def kappa(self, branch: int) -> float:
        return self.kappa1 if branch == 1 else self.kappa2


class ConditionEntry(BaseModel):

    condition_id: str
    satisfied: bool
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    note: str = ""


class ConditionReport(BaseModel):

    entries: List[ConditionEntry] = Field(default_factory=list)

    def get(self, condition_id: str) -> ConditionEntry:
        for entry in self.entries:
            if entry.condition_id == condition_id:
                return entry
        raise KeyError(condition_id)

    def holds(self, condition_id: str) -> bool:
        return self.get(condition_id).satisfied

    def failing(self) -> List[ConditionEntry]:
        return [entry for entry in self.entries if not entry.satisfied]


class TheoremVerdict(BaseModel):

    scenario: Scenario
    report: ConditionReport
    eps_p1_sigma2: Optional[float] = None
    eps_p2_sigma1: Optional[float] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def applies(self) -> bool:
        return self.scenario is not Scenario.NONE


class ComponentRates(BaseModel):

    rate_lq: float = Field(..., description="Exponent of (1+t) for the L^q norm")
    rate_mid: float = Field(..., description="Exponent for |D|^sigma w and w_t")
    rate_top: float = Field(..., description="Exponent for |D|^{2 sigma} w")


class DecayRateTable(BaseModel):

    scenario: Scenario
    u: ComponentRates
    v: ComponentRates
    epsilon_variant: EpsilonVariant = EpsilonVariant.PAPER
