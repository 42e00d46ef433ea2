from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Mapping, Optional

from pydantic import BaseModel, Field, root_validator, validator


class MuddyConfig(BaseModel):
    """Muddy children: n children, coarse or fine timing, question rounds"""

    n: int = Field(3, ge=2)
    variant: Literal["coarse", "fine"] = "coarse"
    delay_min: int = Field(1, ge=1)
    delay_max: int = Field(2, ge=1)
    question_rounds: Optional[int] = None

    @root_validator(skip_on_failure=True)
    def check_rounds_and_delays(cls, values):  # pylint: disable=no-self-argument
        """default question_rounds to n; delays must form a range"""
        if values["delay_max"] < values["delay_min"]:
            raise ValueError("delay_max must be at least delay_min")
        if values["question_rounds"] is None:
            values["question_rounds"] = values["n"]
        if values["question_rounds"] < values["n"]:
            raise ValueError("question_rounds must be at least n")
        return values

    @property
    def rounds(self) -> int:
        """question_rounds once defaulted"""
        return self.question_rounds or self.n


class AliceBobConfig(BaseModel):
    """Alice sends at s in 0..max_send; delivery takes 0..eps time units"""

    eps: int = Field(2, ge=1)
    max_send: int = Field(3, ge=0)
    horizon: Optional[int] = None
    timestamped: bool = False

    @root_validator(skip_on_failure=True)
    def check_horizon(cls, values):  # pylint: disable=no-self-argument
        """default and minimum horizon leave room for three knowledge levels"""
        least = values["max_send"] + 3 * values["eps"]
        if values["horizon"] is None:
            values["horizon"] = least
        if values["horizon"] < least:
            raise ValueError(f"horizon must be at least max_send + 3*eps = {least}")
        return values


class Action(Enum):
    """A general's move in one round"""

    SEND = "send"
    ATTACK = "attack"
    SEND_ATTACK = "send+attack"
    WAIT = "wait"

    @property
    def sends(self) -> bool:
        return self in (Action.SEND, Action.SEND_ATTACK)

    @property
    def attacks(self) -> bool:
        return self in (Action.ATTACK, Action.SEND_ATTACK)


GENERALS = ("A", "B")

# (canonical received history, round) -> action
DecisionTable = Mapping[tuple[str, int], Action]


@dataclass(frozen=True)
class AttackProtocol:
    """Deterministic decision tables for both generals and a delivery model"""

    name: str
    tables: Mapping[str, DecisionTable]
    max_rounds: int
    lossy: bool = True
    max_delay: int = 1
    notes: tuple[str, ...] = field(default_factory=tuple)


class ProtocolRule(BaseModel):
    """One decision-table row"""

    history: str = ""
    round: int = Field(ge=0)
    action: Action


class ProtocolFile(BaseModel):
    """The protocol file format"""

    name: str = "custom"
    max_rounds: int = Field(ge=1)
    lossy: bool = True
    max_delay: int = Field(1, ge=1)
    A: list[ProtocolRule] = Field(default_factory=list)
    B: list[ProtocolRule] = Field(default_factory=list)

    @validator("A", "B")
    def deterministic(cls, rules):  # pylint: disable=no-self-argument
        """at most one action per (history, round)"""
        seen = set()
        for rule in rules:
            key = (rule.history, rule.round)
            if key in seen:
                raise ValueError(
                    f"two actions for history {key[0]!r} at round {key[1]}"
                )
            seen.add(key)
        return rules

    class Config:
        """Model config"""

        schema_extra = {
            "example": {
                "name": "ack:1",
                "max_rounds": 3,
                "A": [
                    {"history": "", "round": 0, "action": "send"},
                    {"history": "", "round": 1, "action": "wait"},
                    {"history": "B0@2", "round": 2, "action": "attack"},
                ],
                "B": [
                    {"history": "", "round": 0, "action": "wait"},
                    {"history": "A0@1", "round": 1, "action": "send"},
                ],
            }
        }


class AttackReport(BaseModel):
    """What model checking says about an attack protocol"""

    protocol: str
    mode: str
    attacks_ever: bool
    coordinated: bool
    ck_at_attack: bool
    violating_run: Optional[str] = None

    @root_validator(skip_on_failure=True)
    def vacuous_without_attack(cls, values):  # pylint: disable=no-self-argument
        """no attack means nothing to coordinate"""
        if not values["attacks_ever"] and not (
            values["coordinated"] and values["ck_at_attack"]
        ):
            raise ValueError("a protocol that never attacks is vacuously coordinated")
        return values


class TranscriptEntry(BaseModel):
    """One time step of a run"""

    time: int
    env: str
    locals: dict[str, str]
    props: list[str]
    actions: list[str] = Field(default_factory=list)


class TranscriptReport(BaseModel):
    """Per-time log of one run"""

    run: str
    scenario: Optional[str] = None
    entries: list[TranscriptEntry]
