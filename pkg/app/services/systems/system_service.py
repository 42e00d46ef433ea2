"""Module service building and querying interpreted systems."""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Union

import numpy as np
from pydantic import ValidationError
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from app.services.exceptions import ResolutionError, SystemValidationError
from app.services.systems.models import (
    AgentId,
    Event,
    EventClassification,
    GlobalState,
    InterpretedSystem,
    Label,
    Point,
    Run,
    RunFile,
    StateFile,
    SystemFile,
)

logger = logging.getLogger(__name__)


def build_system(desc: Union[SystemFile, dict[str, Any]]) -> InterpretedSystem:
    """Validate a system description and assemble the interpreted system"""

    if not isinstance(desc, SystemFile):
        try:
            desc = SystemFile.parse_obj(desc)
        except ValidationError as exc:
            raise SystemValidationError(str(exc)) from exc

    agents = tuple(desc.agents)
    if len(set(agents)) != len(agents):
        raise SystemValidationError("duplicate agent ids")
    if not desc.runs:
        raise SystemValidationError("a system needs at least one run")

    seen_ids: set[str] = set()
    valuation: dict[GlobalState, frozenset[str]] = {}
    runs = []
    for run_desc in desc.runs:
        if run_desc.id in seen_ids:
            raise SystemValidationError(f"duplicate run id {run_desc.id!r}")
        seen_ids.add(run_desc.id)
        if len(run_desc.states) != desc.horizon + 1:
            raise SystemValidationError(
                f"run {run_desc.id!r} has {len(run_desc.states)} states, "
                f"expected horizon + 1 = {desc.horizon + 1}"
            )

        states = []
        for m, state_desc in enumerate(run_desc.states):
            if set(state_desc.locals) != set(agents):
                raise SystemValidationError(
                    f"agent mismatch at {run_desc.id}:{m}: "
                    f"locals for {sorted(state_desc.locals)}, agents {sorted(agents)}"
                )
            state = GlobalState.make(state_desc.env, state_desc.locals)
            props = frozenset(state_desc.props)
            if valuation.setdefault(state, props) != props:
                raise SystemValidationError(
                    f"valuation not a state function: {run_desc.id}:{m} repeats a "
                    f"global state with propositions {sorted(props)} instead of "
                    f"{sorted(valuation[state])}"
                )
            states.append(state)
        runs.append(Run(id=run_desc.id, states=tuple(states)))

    occurring = frozenset().union(*valuation.values())
    if desc.propositions is None:
        vocabulary = occurring
    else:
        vocabulary = frozenset(desc.propositions)
        undeclared = occurring - vocabulary
        if undeclared:
            raise SystemValidationError(
                f"propositions used but not declared: {sorted(undeclared)}"
            )

    system = InterpretedSystem(
        agents=agents,
        horizon=desc.horizon,
        runs=tuple(runs),
        valuation=valuation,
        propositions=vocabulary,
        metadata=desc.metadata,
    )
    logger.info(
        "built system: %d agents, %d runs, horizon %d, %d points",
        len(agents),
        len(runs),
        desc.horizon,
        len(system.points),
    )
    return system


def dump_system(sys: InterpretedSystem) -> SystemFile:
    """The file description of a system"""

    return SystemFile(
        agents=list(sys.agents),
        horizon=sys.horizon,
        runs=[
            RunFile(
                id=run.id,
                states=[
                    StateFile(
                        env=state.env,
                        locals=dict(state.locals),
                        props=sorted(sys.valuation[state]),
                    )
                    for state in run.states
                ],
            )
            for run in sys.runs
        ],
        propositions=sorted(sys.propositions),
        metadata=dict(sys.metadata),
    )


def load_system(path: Union[str, Path]) -> InterpretedSystem:
    """Read and build a system file"""

    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemValidationError(f"cannot read system file {path}: {exc}") from exc
    return build_system(raw)


def require_agent(sys: InterpretedSystem, agent: AgentId) -> AgentId:
    """Fail unless agent belongs to the system"""
    if agent not in sys.views:
        raise ResolutionError(f"unknown agent {agent!r}")
    return agent


def require_group(sys: InterpretedSystem, group: Iterable[AgentId]) -> tuple[str, ...]:
    """Validated, sorted, nonempty group"""
    members = tuple(sorted(set(group)))
    if not members:
        raise ResolutionError("empty group")
    for agent in members:
        require_agent(sys, agent)
    return members


def require_point(sys: InterpretedSystem, point: Point) -> Point:
    """Fail unless point exists in the system"""
    if point.run not in sys.run_index:
        raise ResolutionError(f"unknown run {point.run!r}")
    if not 0 <= point.time <= sys.horizon:
        raise ResolutionError(
            f"time {point.time} outside 0..{sys.horizon} for run {point.run!r}"
        )
    return point


def require_event(sys: InterpretedSystem, points: Iterable[Point]) -> Event:
    """Validated event"""
    event = frozenset(Point(*p) for p in points)
    for point in event:
        require_point(sys, point)
    return event


def indistinguishable(
    sys: InterpretedSystem, agent: AgentId, p: Point, q: Point
) -> bool:
    """(r,m) ~_i (r',m') iff r_i(m) = r'_i(m')"""

    require_agent(sys, agent)
    require_point(sys, p)
    require_point(sys, q)
    return sys.label(agent, p) == sys.label(agent, q)


def classify_event(sys: InterpretedSystem, e: Iterable[Point]) -> EventClassification:
    """Decide whether e is a state event and to which agents it is local"""

    event = require_event(sys, e)

    membership: dict[GlobalState, bool] = {}
    is_state_event = True
    for point in sys.points:
        inside = point in event
        if membership.setdefault(sys.state_at(point), inside) != inside:
            is_state_event = False
            break

    global_states = None
    if is_state_event:
        global_states = frozenset(sys.state_at(p) for p in event)

    local_to: dict[AgentId, Optional[frozenset[Label]]] = {}
    for agent in sys.agents:
        if locality_violation(sys, agent, event) is None:
            local_to[agent] = frozenset(sys.label(agent, p) for p in event)
        else:
            local_to[agent] = None

    return EventClassification(
        is_state_event=is_state_event,
        global_state_set=global_states,
        local_to=local_to,
    )


def locality_violation(
    sys: InterpretedSystem, agent: AgentId, event: Event
) -> Optional[tuple[Point, Point]]:
    """A ~_agent pair with one point inside the event and one outside, if any"""

    for members in sys.views[agent].values():
        inside = members & event
        if inside and inside != members:
            return min(inside), min(members - inside)
    return None


def event_from_local_states(
    sys: InterpretedSystem, agent: AgentId, labels: Iterable[Label]
) -> Event:
    """{(r,m) : r_i(m) in L}; labels that never occur contribute nothing"""

    require_agent(sys, agent)
    view = sys.views[agent]
    event: frozenset[Point] = frozenset()
    for label in set(labels):
        event |= view.get(label, frozenset())
    return event


def reachability_classes(
    sys: InterpretedSystem, group: Iterable[AgentId]
) -> list[Event]:
    """Connected components of the union of ~_i over the group, sorted"""

    members = require_group(sys, group)
    index = {point: n for n, point in enumerate(sys.points)}

    rows: list[int] = []
    cols: list[int] = []
    for agent in members:
        for view_class in sys.views[agent].values():
            ordered = sorted(index[p] for p in view_class)
            # a star over each class is enough for connectivity
            rows.extend(ordered[0] for _ in ordered[1:])
            cols.extend(ordered[1:])

    size = len(index)
    graph = coo_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size)
    )
    n_components, component_of = connected_components(graph, directed=False)

    grouped: list[set[Point]] = [set() for _ in range(n_components)]
    for point, n in index.items():
        grouped[component_of[n]].add(point)
    classes = sorted((frozenset(c) for c in grouped), key=min)
    logger.debug("group %s: %d reachability classes", members, len(classes))
    return classes
