"""Pydantic models"""

from dataclasses import dataclass
from typing import Optional

from pydantic import BaseModel, Field

from app.services.coordination.models import VerificationReport
from app.services.imprecision.models import ImprecisionWitness, ReachabilityPartition
from app.services.scenarios.models import AttackReport
from app.services.systems.utils import PointRef


class ErrorReport(BaseModel):
    """Usage or input error"""

    error: str


class CheckReport(BaseModel):
    """A formula checked at one point, or for validity without a point"""

    formula: str
    point: Optional[PointRef] = None
    holds: bool
    expected: Optional[bool] = None
    assertion_holds: Optional[bool] = None
    counterexample: Optional[PointRef] = None
    # every point where the formula holds, when checked without a point
    extension: Optional[list[PointRef]] = None
    caveats: list[str] = Field(default_factory=list)

    class Config:
        """Model config"""

        schema_extra = {
            "example": {
                "formula": "C[{A,B}] sent",
                "point": ["r(s=3,d=1)", 9],
                "holds": False,
                "expected": False,
                "assertion_holds": True,
                "counterexample": None,
                "caveats": [],
                "extension": None,
            }
        }


class ExtensionReport(BaseModel):
    """Every point where a formula holds"""

    formula: str
    size: int
    total: int
    points: list[PointRef]


class EnsembleReport(BaseModel):
    """Coordination and triviality of a loaded ensemble"""

    ensemble: str
    group: list[str]
    mode: str
    coordination: VerificationReport
    nontrivial: VerificationReport


class ImprecisionReport(BaseModel):
    """Temporal imprecision verdict, optionally with the reachability partition"""

    witness: ImprecisionWitness
    partition: Optional[ReachabilityPartition] = None


class VerifyReport(BaseModel):
    """A named claim and the sub-reports backing it"""

    claim: str
    group: list[str]
    formula: Optional[str] = None
    holds: bool
    reports: list[VerificationReport]
    caveats: list[str] = Field(default_factory=list)


class ScenarioReport(BaseModel):
    """Summary of a generated system file"""

    scenario: str
    out: str
    agents: list[str]
    horizon: int
    runs: int
    points: int
    specification: Optional[VerificationReport] = None
    attack: Optional[AttackReport] = None


@dataclass
class CommandResult:
    """What a command hands back to the entry point"""

    report: BaseModel
    status: int
    summary: str
