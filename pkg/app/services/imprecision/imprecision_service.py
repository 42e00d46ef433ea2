"""Module service on temporal imprecision and its consequences."""

import logging
from itertools import combinations
from typing import Iterable, Optional

from app.services.coordination.coordination_service import build_ensemble
from app.services.coordination.models import Ensemble, Evidence, VerificationReport
from app.services.exceptions import ImprecisionError
from app.services.imprecision.models import (
    ImprecisionFailure,
    ImprecisionWitness,
    ReachabilityPartition,
)
from app.services.logic.checker import checker_for
from app.services.logic.formulas import C, Formula, group_of
from app.services.logic.parser import format_formula
from app.services.systems.models import InterpretedSystem, Point
from app.services.systems.system_service import reachability_classes, require_group
from app.services.systems.utils import point_refs
from config import get_config

c = get_config()
logger = logging.getLogger(__name__)


def candidate_groups(sys: InterpretedSystem) -> list[tuple[str, ...]]:
    """Groups of size >= 2 worth checking.

    Every such subset when the system is small enough, otherwise the pairs and
    the full agent set.
    """
    agents = tuple(sorted(sys.agents))
    if len(agents) < 2:
        return []
    if len(agents) <= c.MAX_GROUP_AGENTS:
        sizes = range(2, len(agents) + 1)
    else:
        sizes = range(2, 3)
    groups = [g for size in sizes for g in combinations(agents, size)]
    if agents not in groups:
        groups.append(agents)
    return groups


def _mixing_pairs(
    sys: InterpretedSystem, members: tuple[str, ...]
) -> dict[tuple[str, str], set[tuple[str, str]]]:
    """(i, j) -> every (r'_i(m'), r'_j(m')) combination that occurs"""
    pairs: dict[tuple[str, str], set[tuple[str, str]]] = {
        (i, j): set() for i in members for j in members if i != j
    }
    for point in sys.points:
        for (i, j), seen in pairs.items():
            seen.add((sys.label(i, point), sys.label(j, point)))
    return pairs


def has_temporal_imprecision(
    sys: InterpretedSystem, group: Optional[Iterable[str]] = None
) -> ImprecisionWitness:
    """Check that every (r, m, G) has i != j in G and a point (r', m') with
    r'_i(m') = r_i(m) and r'_j(m') = r_j(m+1).

    G ranges over the subsets of `group` (default: all agents) of size >= 2. A
    subset passes when one of its pairs does, so only pairs are examined.
    """
    if len(sys.agents) < 2:
        raise ImprecisionError("temporal imprecision needs at least two agents")
    members = require_group(sys, sys.agents if group is None else group)
    if len(members) < 2:
        raise ImprecisionError("temporal imprecision needs a group of two or more")

    if sys.horizon == 0:
        return ImprecisionWitness(
            group=list(members),
            has_imprecision=False,
            failure=ImprecisionFailure(
                group=list(members), reason="degenerate horizon"
            ),
        )

    pairs = _mixing_pairs(sys, members)
    for point in sys.points:
        if point.time == sys.horizon:
            continue
        following = Point(point.run, point.time + 1)
        for i, j in combinations(members, 2):
            if (sys.label(i, point), sys.label(j, following)) in pairs[i, j]:
                continue
            if (sys.label(j, point), sys.label(i, following)) in pairs[j, i]:
                continue
            logger.debug("no imprecision: %s for {%s, %s}", point, i, j)
            return ImprecisionWitness(
                group=list(members),
                has_imprecision=False,
                failure=ImprecisionFailure(
                    run=point.run,
                    time=point.time,
                    group=[i, j],
                    reason=(
                        f"no point pairs {i}'s state at time {point.time} with "
                        f"{j}'s at time {point.time + 1}, nor the reverse"
                    ),
                ),
            )
    return ImprecisionWitness(group=list(members), has_imprecision=True)


def reachability_partition(
    sys: InterpretedSystem, group: Iterable[str]
) -> ReachabilityPartition:
    """Classes of the closure of ~_i over the group"""
    members = require_group(sys, group)
    return ReachabilityPartition(
        group=list(members),
        classes=[point_refs(block) for block in reachability_classes(sys, members)],
    )


def find_nontrivial_perfect_ensemble(
    sys: InterpretedSystem, group: Iterable[str]
) -> Optional[Ensemble]:
    """A nontrivial perfectly coordinated ensemble for the group, if one exists.

    Such ensembles are exactly the unions of reachability classes, so one
    exists iff some class covers part of a run but not all of it.
    """
    members = require_group(sys, group)
    if len(members) < 2:
        raise ImprecisionError("the ensemble search needs a group of two or more")

    for block in reachability_classes(sys, members):
        runs = {point.run for point in block}
        for run in sorted(runs):
            if any(p not in block for p in sys.run_points(run)):
                logger.debug("class at %s splits run %s", min(block), run)
                return build_ensemble(
                    sys,
                    members,
                    {agent: block for agent in members},
                    name="reachability-class",
                )
    return None


def ck_constant_check(
    sys: InterpretedSystem, group: Iterable[str], f: Formula
) -> VerificationReport:
    """C_G f at (r, m) agrees with C_G f at (r, 0) for every run and time"""
    members = require_group(sys, group)
    formula = C(group_of(members), f)
    holding = checker_for(sys).extension(formula)
    claim = f"{format_formula(formula)} is constant along every run"

    for run in sys.runs:
        start = Point(run.id, 0)
        for point in sys.run_points(run.id)[1:]:
            if (point in holding) != (start in holding):
                return VerificationReport(
                    claim=claim,
                    holds=False,
                    counterexample=Evidence(
                        points=point_refs([start, point]),
                        explanation=(
                            f"common knowledge is {start in holding} at {start} "
                            f"and {point in holding} at {point}"
                        ),
                    ),
                )
    return VerificationReport(claim=claim, holds=True)
