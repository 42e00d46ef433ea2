"""Fixed-point kinds and extension results"""

import re
from dataclasses import dataclass
from enum import Enum

from app.services.logic.formulas import Formula
from app.services.systems.models import Event


class ModeKind(Enum):
    """Timing relation between events of an ensemble"""

    PERFECT = "perfect"
    EPS = "eps"
    EVENTUAL = "eventual"


@dataclass(frozen=True)
class CoordinationMode:
    """Perfect, eps(N) or eventual; selects E/C, E^eps/C^eps or E^d/C^d"""

    kind: ModeKind
    eps: int = 0

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    @classmethod
    def perfect(cls) -> "CoordinationMode":
        return cls(ModeKind.PERFECT)

    @classmethod
    def within(cls, eps: int) -> "CoordinationMode":
        return cls(ModeKind.EPS, eps)

    @classmethod
    def eventual(cls) -> "CoordinationMode":
        return cls(ModeKind.EVENTUAL)

    @classmethod
    def parse(cls, text: str) -> "CoordinationMode":
        """perfect | eps:N | eventual"""
        text = text.strip()
        if text == "perfect":
            return cls.perfect()
        if text == "eventual":
            return cls.eventual()
        match = re.fullmatch(r"eps:(\d+)", text)
        if match:
            return cls.within(int(match.group(1)))
        raise ValueError(f"unknown mode {text!r}, expected perfect, eps:N or eventual")

    def __str__(self) -> str:
        if self.kind is ModeKind.EPS:
            return f"eps:{self.eps}"
        return self.kind.value


@dataclass(frozen=True)
class Extension:
    """ev(phi): the points where a formula holds"""

    formula: Formula
    points: Event
