from typing import Optional

from pydantic import BaseModel, root_validator

from app.services.systems.utils import PointRef


class ImprecisionFailure(BaseModel):
    """A (run, time, group) for which no pair of agents can be mixed across m, m+1"""

    run: Optional[str] = None
    time: Optional[int] = None
    group: list[str]
    reason: str


class ImprecisionWitness(BaseModel):
    """Verdict of the temporal imprecision check"""

    group: list[str]
    has_imprecision: bool
    failure: Optional[ImprecisionFailure] = None

    @root_validator(skip_on_failure=True)
    def failure_iff_precise(cls, values):  # pylint: disable=no-self-argument
        """a failure is reported exactly when imprecision is absent"""
        if values["has_imprecision"] == (values.get("failure") is not None):
            raise ValueError("failure must be present iff has_imprecision is false")
        return values


class ReachabilityPartition(BaseModel):
    """Classes of points connected by chains of indistinguishability"""

    group: list[str]
    classes: list[list[PointRef]]
