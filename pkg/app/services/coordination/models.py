from dataclasses import dataclass
from typing import Mapping, Optional

from pydantic import BaseModel, Field, root_validator

from app.services.systems.models import Event
from app.services.systems.utils import PointRef


@dataclass(frozen=True)
class Ensemble:
    """One local event per member of a group"""

    name: str
    group: tuple[str, ...]
    events: Mapping[str, Event]


class Evidence(BaseModel):
    """Points backing a verdict, with the agent concerned"""

    points: list[PointRef]
    agent: Optional[str] = None
    explanation: str


class VerificationReport(BaseModel):
    """Outcome of checking one claim on one system"""

    claim: str
    holds: bool
    counterexample: Optional[Evidence] = None
    witness: Optional[Evidence] = None
    caveats: list[str] = Field(default_factory=list)

    @root_validator(skip_on_failure=True)
    def counterexample_iff_failure(cls, values):  # pylint: disable=no-self-argument
        """a report carries a counterexample exactly when the claim fails"""
        if values["holds"] == (values.get("counterexample") is not None):
            raise ValueError("counterexample must be present iff holds is false")
        return values

    class Config:
        """Model config"""

        schema_extra = {
            "example": {
                "claim": "coordination eps:0",
                "holds": False,
                "counterexample": {
                    "points": [["r(s=0,d=2)", 0]],
                    "agent": "B",
                    "explanation": "in A's event but not in B's",
                },
                "caveats": [],
            }
        }


class EventSpec(BaseModel):
    """An ensemble member's event, by local states or by explicit points"""

    local_states: Optional[list[str]] = Field(None, alias="localStates")
    points: Optional[list[PointRef]] = None

    @root_validator(skip_on_failure=True)
    def exactly_one_form(cls, values):  # pylint: disable=no-self-argument
        """either localStates or points, not both"""
        if (values.get("local_states") is None) == (values.get("points") is None):
            raise ValueError("give exactly one of localStates or points")
        return values


class EnsembleFile(BaseModel):
    """The ensemble file format"""

    name: str = "ensemble"
    group: list[str] = Field(min_items=1)
    events: dict[str, EventSpec]

    class Config:
        """Model config"""

        schema_extra = {
            "example": {
                "name": "receipt",
                "group": ["A", "B"],
                "events": {
                    "A": {"localStates": ["cnt0"]},
                    "B": {"points": [["r0", 3], ["r1", 4]]},
                },
            }
        }
