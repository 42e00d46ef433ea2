"""Exceptions raised by the checker services."""

from typing import Any, Optional


class CheckerError(Exception):
    """Base class for every input or usage error of the checker"""


class SystemValidationError(CheckerError):
    """An interpreted system description is malformed"""


class ResolutionError(CheckerError):
    """An agent, proposition, run or point does not exist in the system"""


class FormulaSyntaxError(CheckerError):
    """A formula does not follow the grammar"""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class EnsembleError(CheckerError):
    """An ensemble is malformed or one of its events is not local"""

    def __init__(self, message: str, witness: Optional[tuple[Any, Any]] = None):
        super().__init__(message)
        self.witness = witness


class ImprecisionError(CheckerError):
    """Temporal imprecision questions asked outside their hypotheses"""


class ScenarioConfigError(CheckerError):
    """A scenario generator was given parameters out of bounds"""


class ProtocolError(CheckerError):
    """An attack protocol table is invalid or incomplete"""
