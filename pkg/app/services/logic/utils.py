"""Timing helpers shared by the knowledge operators and coordination checks"""

from typing import Optional


def effective_eps(eps: int, horizon: int) -> int:
    """Interval length actually used on a run of times 0..horizon"""
    return min(eps, horizon)


def interval_starts(m: int, eps: int, horizon: int) -> range:
    """Starts m' of every interval [m', m'+eps] inside [0, horizon] containing m.

    When eps exceeds the horizon the whole run is the only interval.
    """
    width = effective_eps(eps, horizon)
    return range(max(0, m - width), min(m, horizon - width) + 1)


def near_horizon(m: int, eps: int, horizon: int) -> bool:
    """True if an interval of length eps starting at m would cross the horizon"""
    return eps > 0 and m > horizon - eps


def horizon_caveat(eps: int, horizon: int, m: Optional[int] = None) -> Optional[str]:
    """How eps-intervals were fitted into the run, when that matters for m"""
    if eps > horizon:
        return (
            f"eps {eps} exceeds the horizon {horizon}: the whole run [0, {horizon}] "
            f"is used as the interval (effective eps = min(eps, horizon) = "
            f"{horizon}); requiring m'+{eps} <= {horizon} would leave no interval "
            "and make every eps-operator empty"
        )
    if m is not None and near_horizon(m, eps, horizon):
        return (
            f"time {m} is within {eps} of the horizon {horizon}: only intervals "
            f"[m', m'+{eps}] with m'+{eps} <= {horizon} are considered, so later "
            "knowledge is not seen"
        )
    return None
