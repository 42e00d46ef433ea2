from typing import Iterable

from app.services.systems.models import Point

PointRef = tuple[str, int]


def point_refs(points: Iterable[Point]) -> list[PointRef]:
    """sorted [run, time] pairs for reports"""

    return [(p.run, p.time) for p in sorted(points)]


def split_by_run(points: Iterable[Point]) -> dict[str, set[int]]:
    """run id -> times of the given points in that run"""

    by_run: dict[str, set[int]] = {}
    for point in points:
        by_run.setdefault(point.run, set()).add(point.time)
    return by_run
