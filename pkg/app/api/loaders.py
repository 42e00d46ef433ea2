"""Turn command-line arguments into domain values"""

import re
from typing import Optional

from app.services.exceptions import CheckerError, ResolutionError
from app.services.logic.models import CoordinationMode
from app.services.systems.models import InterpretedSystem, Point
from app.services.systems.system_service import require_group, require_point

POINT_RE = re.compile(r"^(?P<run>.+):(?P<time>\d+)$")


def load_point(sys: InterpretedSystem, text: str) -> Point:
    """"runId:time" resolved against the system"""
    match = POINT_RE.match(text.strip())
    if match is None:
        raise ResolutionError(f"malformed point {text!r}, expected runId:time")
    return require_point(sys, Point(match["run"], int(match["time"])))


def parse_group(sys: InterpretedSystem, text: Optional[str]) -> tuple[str, ...]:
    """"{A,B}" or "A,B"; every agent when text is empty"""
    if not text:
        return tuple(sorted(sys.agents))
    inner = text.strip()
    if inner.startswith("{") and inner.endswith("}"):
        inner = inner[1:-1]
    names = [name.strip() for name in inner.split(",")]
    return require_group(sys, [name for name in names if name])


def parse_mode(text: str) -> CoordinationMode:
    """perfect | eps:N | eventual"""
    try:
        return CoordinationMode.parse(text)
    except ValueError as exc:
        raise CheckerError(str(exc)) from exc


def parse_bool(text: str) -> bool:
    """true | false"""
    lowered = text.strip().lower()
    if lowered not in ("true", "false"):
        raise CheckerError(f"expected true or false, got {text!r}")
    return lowered == "true"
