"""Interpreted systems: runs, points, global states and events"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, NamedTuple, Optional

from pydantic import BaseModel, Field, constr

AgentId = str
Label = str

AgentName = constr(min_length=1, regex=r"^\S+$")


class Point(NamedTuple):
    """A (run, time) pair; tuples order by run id, then time"""

    run: str
    time: int

    def __str__(self) -> str:
        return f"{self.run}:{self.time}"


Event = frozenset[Point]


@dataclass(frozen=True)
class GlobalState:
    """Environment label plus one local-state label per agent"""

    env: Label
    locals: tuple[tuple[AgentId, Label], ...]

    @classmethod
    def make(cls, env: Label, local_states: Mapping[AgentId, Label]) -> "GlobalState":
        """Build a global state with canonically ordered locals"""
        return cls(env=env, locals=tuple(sorted(local_states.items())))

    def local(self, agent: AgentId) -> Label:
        """agent's local-state label"""
        return dict(self.locals)[agent]


@dataclass(frozen=True)
class Run:
    """A sequence of global states indexed by time 0..T"""

    id: str
    states: tuple[GlobalState, ...]


@dataclass(frozen=True, eq=False)
class InterpretedSystem:
    """A finite set of equal-length runs plus a valuation on global states.

    Instances compare and hash by identity so they can key evaluation caches.
    Use `build_system` to obtain a validated instance.
    """

    agents: tuple[AgentId, ...]
    horizon: int
    runs: tuple[Run, ...]
    valuation: Mapping[GlobalState, frozenset[str]]
    propositions: frozenset[str]
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @cached_property
    def run_index(self) -> dict[str, Run]:
        """runs by id"""
        return {run.id: run for run in self.runs}

    @cached_property
    def points(self) -> tuple[Point, ...]:
        """every point, sorted"""
        return tuple(
            sorted(
                Point(run.id, m) for run in self.runs for m in range(self.horizon + 1)
            )
        )

    @cached_property
    def all_points(self) -> Event:
        """the event holding everywhere"""
        return frozenset(self.points)

    @cached_property
    def local_labels(self) -> dict[AgentId, dict[Point, Label]]:
        """agent -> point -> local-state label"""
        labels: dict[AgentId, dict[Point, Label]] = {a: {} for a in self.agents}
        for run in self.runs:
            for m, state in enumerate(run.states):
                for agent, label in state.locals:
                    labels[agent][Point(run.id, m)] = label
        return labels

    @cached_property
    def views(self) -> dict[AgentId, dict[Label, Event]]:
        """agent -> label -> the ~_agent equivalence class carrying that label"""
        classes: dict[AgentId, dict[Label, set[Point]]] = {a: {} for a in self.agents}
        for agent, by_point in self.local_labels.items():
            for point, label in by_point.items():
                classes[agent].setdefault(label, set()).add(point)
        return {
            agent: {label: frozenset(members) for label, members in by_label.items()}
            for agent, by_label in classes.items()
        }

    def state_at(self, point: Point) -> GlobalState:
        """global state r(m)"""
        return self.run_index[point.run].states[point.time]

    def label(self, agent: AgentId, point: Point) -> Label:
        """r_i(m)"""
        return self.local_labels[agent][point]

    def props_at(self, point: Point) -> frozenset[str]:
        """propositions true at the global state of a point"""
        return self.valuation[self.state_at(point)]

    def run_points(self, run_id: str) -> tuple[Point, ...]:
        """points of one run in time order"""
        return tuple(Point(run_id, m) for m in range(self.horizon + 1))


@dataclass(frozen=True)
class EventClassification:
    """Where an event sits in the event taxonomy"""

    is_state_event: bool
    global_state_set: Optional[frozenset[GlobalState]]
    local_to: Mapping[AgentId, Optional[frozenset[Label]]]

    def is_local_to(self, agent: AgentId) -> bool:
        """True if membership is determined by agent's local state"""
        return self.local_to.get(agent) is not None


class StateFile(BaseModel):
    """One global state of a run, with the propositions true there"""

    env: str
    locals: dict[str, str]
    props: list[str] = Field(default_factory=list)


class RunFile(BaseModel):
    """A run: an id and exactly horizon + 1 states"""

    id: constr(min_length=1)  # type: ignore[valid-type]
    states: list[StateFile]


class SystemFile(BaseModel):
    """The interpreted-system file format"""

    agents: list[AgentName]  # type: ignore[valid-type]
    horizon: int = Field(ge=0)
    runs: list[RunFile]
    propositions: Optional[list[str]] = Field(
        None, description="Declared vocabulary; defaults to every occurring prop"
    )
    metadata: dict[str, Any] = Field(default_factory=dict)

    class Config:
        """Model config"""

        schema_extra = {
            "example": {
                "agents": ["A", "B"],
                "horizon": 1,
                "runs": [
                    {
                        "id": "r0",
                        "states": [
                            {"env": "e", "locals": {"A": "idle", "B": "waiting"}},
                            {
                                "env": "e",
                                "locals": {"A": "cnt0", "B": "waiting"},
                                "props": ["sent"],
                            },
                        ],
                    }
                ],
            }
        }
