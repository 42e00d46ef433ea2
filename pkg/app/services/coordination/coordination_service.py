"""Module service building ensembles and verifying coordination claims."""

import json
import logging
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from pydantic import ValidationError

from app.services.coordination.models import (
    Ensemble,
    EnsembleFile,
    Evidence,
    VerificationReport,
)
from app.services.exceptions import EnsembleError
from app.services.logic.checker import checker_for, common_operator
from app.services.logic.formulas import EventAtom, Formula, K, disjunction
from app.services.logic.models import CoordinationMode, ModeKind
from app.services.logic.utils import effective_eps, horizon_caveat, interval_starts
from app.services.systems.models import Event, InterpretedSystem, Point
from app.services.systems.system_service import (
    event_from_local_states,
    locality_violation,
    require_event,
    require_group,
)
from app.services.systems.utils import point_refs, split_by_run

logger = logging.getLogger(__name__)


def build_ensemble(
    sys: InterpretedSystem,
    group: Iterable[str],
    events: Mapping[str, Iterable[Point]],
    name: str = "ensemble",
) -> Ensemble:
    """Validate one local event per group member"""

    members = require_group(sys, group)
    if set(events) != set(members):
        raise EnsembleError(
            f"ensemble {name!r} needs one event per member of {list(members)}, "
            f"got events for {sorted(events)}"
        )

    validated: dict[str, Event] = {}
    for agent in members:
        event = require_event(sys, events[agent])
        violation = locality_violation(sys, agent, event)
        if violation is not None:
            inside, outside = violation
            raise EnsembleError(
                f"event for {agent} is not local to {agent}: {inside} is in it, "
                f"{outside} is not, and {agent} cannot tell them apart",
                witness=violation,
            )
        validated[agent] = event
    return Ensemble(name=name, group=members, events=validated)


def ensemble_from_file(sys: InterpretedSystem, desc: EnsembleFile) -> Ensemble:
    """Expand localStates entries and validate the ensemble"""

    events: dict[str, Event] = {}
    for agent, spec in desc.events.items():
        if spec.local_states is not None:
            events[agent] = event_from_local_states(sys, agent, spec.local_states)
        else:
            events[agent] = require_event(sys, spec.points or [])
    return build_ensemble(sys, desc.group, events, name=desc.name)


def load_ensemble(sys: InterpretedSystem, path: Union[str, Path]) -> Ensemble:
    """Read an ensemble file against a loaded system"""

    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        desc = EnsembleFile.parse_obj(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise EnsembleError(f"cannot read ensemble file {path}: {exc}") from exc
    except ValidationError as exc:
        raise EnsembleError(f"invalid ensemble file {path}: {exc}") from exc
    return ensemble_from_file(sys, desc)


def _perfect_gap(e: Ensemble) -> Optional[Evidence]:
    for first in e.group:
        for other in e.group:
            missing = e.events[first] - e.events[other]
            if missing:
                return Evidence(
                    points=point_refs([min(missing)]),
                    agent=other,
                    explanation=f"in {first}'s event but not in {other}'s",
                )
    return None


def _eps_gap(sys: InterpretedSystem, e: Ensemble, eps: int) -> Optional[Evidence]:
    width = effective_eps(eps, sys.horizon)
    times = {agent: split_by_run(e.events[agent]) for agent in e.group}

    def covered(run: str, start: int) -> bool:
        return all(
            any(t in times[agent].get(run, ()) for t in range(start, start + width + 1))
            for agent in e.group
        )

    for agent in e.group:
        for point in sorted(e.events[agent]):
            starts = interval_starts(point.time, eps, sys.horizon)
            if not any(covered(point.run, start) for start in starts):
                return Evidence(
                    points=point_refs([point]),
                    agent=agent,
                    explanation=(
                        f"no interval of length {width} around time {point.time} "
                        f"meets every member's event in run {point.run!r}"
                    ),
                )
    return None


def _eventual_gap(e: Ensemble) -> Optional[Evidence]:
    runs = {agent: split_by_run(e.events[agent]) for agent in e.group}
    for agent in e.group:
        for point in sorted(e.events[agent]):
            for other in e.group:
                if point.run not in runs[other]:
                    return Evidence(
                        points=point_refs([point]),
                        agent=other,
                        explanation=(
                            f"{agent}'s event holds in run {point.run!r} "
                            f"but {other}'s never does"
                        ),
                    )
    return None


def check_coordination(
    sys: InterpretedSystem, e: Ensemble, mode: CoordinationMode
) -> VerificationReport:
    """Perfect, eps- or eventual coordination of the ensemble's events"""

    if mode.kind is ModeKind.PERFECT:
        gap = _perfect_gap(e)
    elif mode.kind is ModeKind.EPS:
        gap = _eps_gap(sys, e, mode.eps)
    else:
        gap = _eventual_gap(e)

    caveats = []
    if mode.kind is ModeKind.EPS:
        union = frozenset().union(*e.events.values())
        latest = max((p.time for p in union), default=None)
        caveat = horizon_caveat(mode.eps, sys.horizon, latest)
        if caveat:
            caveats.append(caveat)

    logger.debug("ensemble %s under %s: %s", e.name, mode, gap is None)
    return VerificationReport(
        claim=f"ensemble {e.name} is coordinated ({mode})",
        holds=gap is None,
        counterexample=gap,
        caveats=caveats,
    )


def is_nontrivial(sys: InterpretedSystem, e: Ensemble) -> VerificationReport:
    """Some run has a time inside the union of events and a time outside it"""

    union = frozenset().union(*e.events.values())
    for run in sys.runs:
        run_points = sys.run_points(run.id)
        inside = [p for p in run_points if p in union]
        outside = [p for p in run_points if p not in union]
        if inside and outside:
            return VerificationReport(
                claim=f"ensemble {e.name} is nontrivial",
                holds=True,
                witness=Evidence(
                    points=point_refs([inside[0], outside[0]]),
                    explanation=f"run {run.id!r} is partly inside the ensemble",
                ),
            )
    return VerificationReport(
        claim=f"ensemble {e.name} is nontrivial",
        holds=False,
        counterexample=Evidence(
            points=[],
            explanation="every run lies wholly inside or wholly outside the ensemble",
        ),
    )


def psi_formula(sys: InterpretedSystem, e: Ensemble) -> Formula:
    """psi_e: the disjunction of the members' event propositions"""

    require_group(sys, e.group)
    if len(e.group) == 1:
        (agent,) = e.group
        return EventAtom(e.events[agent], f"psi_{e.name}")
    return disjunction(
        EventAtom(e.events[agent], f"psi_{e.name}_{agent}") for agent in e.group
    )


def _claim_prefix(mode: CoordinationMode) -> str:
    if mode.kind is ModeKind.PERFECT:
        return "prop1"
    if mode.kind is ModeKind.EPS:
        return f"prop3[eps={mode.eps}]"
    return "prop-eventual"


def knowledge_ensemble(
    sys: InterpretedSystem, group: Iterable[str], mode: CoordinationMode, f: Formula
) -> Ensemble:
    """e(i) = ev(K_i C*_G f) for the mode's common-knowledge operator"""

    members = require_group(sys, group)
    checker = checker_for(sys)
    common = common_operator(mode, members, f)
    events = {agent: checker.extension(K(agent, common)) for agent in members}
    return build_ensemble(sys, members, events, name=f"knows-{_claim_prefix(mode)}")


def verify_correspondence(
    sys: InterpretedSystem,
    group: Iterable[str],
    mode: CoordinationMode,
    f: Formula,
    ensemble: Optional[Ensemble] = None,
) -> list[VerificationReport]:
    """Check both directions of the knowledge/coordination correspondence.

    (a) the events K_i C*_G f are coordinated under the mode;
    (b) psi_e -> C*_G psi_e is valid for a coordinated ensemble e, either the
    one supplied or the one built in (a).
    """

    members = require_group(sys, group)
    prefix = _claim_prefix(mode)
    generated = knowledge_ensemble(sys, members, mode, f)
    direction_a = check_coordination(sys, generated, mode)
    direction_a = direction_a.copy(
        update={"claim": f"{prefix}(a): K_i C*_G f events are coordinated ({mode})"}
    )

    if ensemble is None:
        ensemble = generated
    else:
        if set(ensemble.group) != set(members):
            raise EnsembleError(
                f"ensemble group {list(ensemble.group)} differs from {list(members)}"
            )
        supplied = check_coordination(sys, ensemble, mode)
        if not supplied.holds:
            raise EnsembleError(
                f"ensemble {ensemble.name!r} is not coordinated ({mode})"
            )

    checker = checker_for(sys)
    psi = psi_formula(sys, ensemble)
    missing = checker.extension(psi) - checker.extension(
        common_operator(mode, members, psi)
    )
    direction_b = VerificationReport(
        claim=f"{prefix}(b): psi_e -> C*_G psi_e is valid for {ensemble.name}",
        holds=not missing,
        counterexample=(
            Evidence(
                points=point_refs([min(missing)]),
                explanation="psi_e holds but C*_G psi_e does not",
            )
            if missing
            else None
        ),
    )
    logger.info("%s on %s: (a) %s, (b) %s", prefix, f, direction_a.holds, not missing)
    return [direction_a, direction_b]
