"""Module service evaluating epistemic formulas over interpreted systems."""

import logging
from typing import Callable, Iterable
from weakref import WeakKeyDictionary, ref

from app.services.exceptions import ResolutionError
from app.services.logic.formulas import (
    And,
    Atom,
    C,
    Cdiamond,
    Ceps,
    E,
    Ediamond,
    Eeps,
    Ek,
    EventAtom,
    FalseFormula,
    Formula,
    Group,
    Implies,
    K,
    Not,
    Or,
    TrueFormula,
    group_of,
)
from app.services.logic.models import CoordinationMode, Extension, ModeKind
from app.services.logic.utils import effective_eps, interval_starts
from app.services.systems.models import Event, InterpretedSystem, Point
from app.services.systems.system_service import (
    reachability_classes,
    require_agent,
    require_event,
    require_group,
    require_point,
)
from app.services.systems.utils import split_by_run

logger = logging.getLogger(__name__)

Operator = Callable[[Event], Event]


class ModelChecker:
    """Extension computation for one system, memoized per formula"""

    def __init__(self, system: InterpretedSystem):
        # weak: the registry in checker_for must not keep its key alive
        self._system = ref(system)
        self._cache: dict[Formula, Event] = {}

    @property
    def system(self) -> InterpretedSystem:
        """The checked system"""
        system = self._system()
        if system is None:
            raise ReferenceError("the checked system no longer exists")
        return system

    def extension(self, formula: Formula) -> Event:
        """ev(formula)"""
        cached = self._cache.get(formula)
        if cached is None:
            cached = self._compute(formula)
            self._cache[formula] = cached
        return cached

    # pylint: disable-next=too-many-return-statements
    def _compute(self, formula: Formula) -> Event:
        sys = self.system
        match formula:
            case Atom(name):
                if name not in sys.propositions:
                    raise ResolutionError(f"unknown proposition {name!r}")
                return frozenset(p for p in sys.points if name in sys.props_at(p))
            case EventAtom(event, _):
                return require_event(sys, event)
            case TrueFormula():
                return sys.all_points
            case FalseFormula():
                return frozenset()
            case Not(arg):
                return sys.all_points - self.extension(arg)
            case And(left, right):
                return self.extension(left) & self.extension(right)
            case Or(left, right):
                return self.extension(left) | self.extension(right)
            case Implies(left, right):
                return (sys.all_points - self.extension(left)) | self.extension(right)
            case K(agent, arg):
                require_agent(sys, agent)
                return self.knows(agent, self.extension(arg))
            case E(group, arg):
                return self.everyone(group, self.extension(arg))
            case Ek(group, k, arg):
                result = self.extension(arg)
                for _ in range(k):
                    result = self.everyone(group, result)
                return result
            case Eeps(group, eps, arg):
                return self.everyone_within(group, eps, self.extension(arg))
            case Ediamond(group, arg):
                return self.everyone_eventually(group, self.extension(arg))
            case C(group, arg):
                return self.fixpoint(self.everyone_operator(group, None), arg)
            case Ceps(group, eps, arg):
                return self.fixpoint(self.everyone_operator(group, eps), arg)
            case Cdiamond(group, arg):
                return self.fixpoint(self.everyone_eventually_operator(group), arg)
        raise TypeError(f"not a formula: {formula!r}")

    def knows(self, agent: str, event: Event) -> Event:
        """K_i: the ~_i classes contained in the event"""
        result: set[Point] = set()
        for members in self.system.views[agent].values():
            if members <= event:
                result |= members
        return frozenset(result)

    def everyone(self, group: Group, event: Event) -> Event:
        """E_G: conjunction of K_i over the group"""
        result = self.system.all_points
        for agent in require_group(self.system, group):
            result &= self.knows(agent, event)
        return result

    def _knowledge_times(self, group: Group, event: Event) -> dict[str, dict[str, set]]:
        """agent -> run -> times at which the agent knows the event"""
        return {
            agent: split_by_run(self.knows(agent, event))
            for agent in require_group(self.system, group)
        }

    def everyone_within(self, group: Group, eps: int, event: Event) -> Event:
        """E^eps_G: an interval [m', m'+eps] around m in which each agent knows"""
        horizon = self.system.horizon
        width = effective_eps(eps, horizon)
        times = self._knowledge_times(group, event)

        result = set()
        for run in self.system.runs:
            knowing = [by_run.get(run.id, set()) for by_run in times.values()]
            # starts m' whose interval gives every agent a knowing instant
            good_starts = {
                start
                for start in range(horizon - width + 1)
                if all(
                    any(t in agent_times for t in range(start, start + width + 1))
                    for agent_times in knowing
                )
            }
            for m in range(horizon + 1):
                if any(s in good_starts for s in interval_starts(m, eps, horizon)):
                    result.add(Point(run.id, m))
        return frozenset(result)

    def everyone_eventually(self, group: Group, event: Event) -> Event:
        """E^d_G: each agent knows at some time of the run"""
        times = self._knowledge_times(group, event)
        result: set[Point] = set()
        for run in self.system.runs:
            if all(by_run.get(run.id) for by_run in times.values()):
                result.update(self.system.run_points(run.id))
        return frozenset(result)

    def everyone_operator(self, group: Group, eps: int | None) -> Operator:
        """E_G, or E^eps_G when eps is given, as an operator on events"""
        if eps is None:
            return lambda event: self.everyone(group, event)
        return lambda event: self.everyone_within(group, eps, event)

    def everyone_eventually_operator(self, group: Group) -> Operator:
        """E^d_G as an operator on events"""
        return lambda event: self.everyone_eventually(group, event)

    def fixpoint(self, operator: Operator, arg: Formula) -> Event:
        """nu x [Op(arg & x)] by iteration from the full event downwards"""
        target = self.extension(arg)
        current = self.system.all_points
        limit = len(current) + 1
        for rounds in range(1, limit + 1):
            following = operator(target & current)
            if following == current:
                logger.debug("fixed point after %d rounds", rounds)
                return current
            current = following
        raise RuntimeError("greatest fixed point iteration did not stabilize")


_checkers: "WeakKeyDictionary[InterpretedSystem, ModelChecker]" = WeakKeyDictionary()


def checker_for(sys: InterpretedSystem) -> ModelChecker:
    """The memoizing checker attached to a system"""
    checker = _checkers.get(sys)
    if checker is None:
        checker = ModelChecker(sys)
        _checkers[sys] = checker
    return checker


def common_operator(
    mode: CoordinationMode, group: Iterable[str], f: Formula
) -> Formula:
    """C_G f, C^eps_G f or C^d_G f for the mode"""
    members = group_of(group)
    if mode.kind is ModeKind.PERFECT:
        return C(members, f)
    if mode.kind is ModeKind.EPS:
        return Ceps(members, mode.eps, f)
    return Cdiamond(members, f)


def everyone_operator(
    mode: CoordinationMode, group: Iterable[str], f: Formula
) -> Formula:
    """E_G f, E^eps_G f or E^d_G f for the mode"""
    members = group_of(group)
    if mode.kind is ModeKind.PERFECT:
        return E(members, f)
    if mode.kind is ModeKind.EPS:
        return Eeps(members, mode.eps, f)
    return Ediamond(members, f)


def evaluate(sys: InterpretedSystem, f: Formula, p: Point) -> bool:
    """(I, r, m) |= f"""
    require_point(sys, p)
    return p in checker_for(sys).extension(f)


def extension(sys: InterpretedSystem, f: Formula) -> Extension:
    """The event of f holding"""
    return Extension(formula=f, points=checker_for(sys).extension(f))


def gfp_extension(
    sys: InterpretedSystem, group: Iterable[str], kind: CoordinationMode, f: Formula
) -> Extension:
    """Greatest fixed point of x -> Op_G(f & x) for the kind's everyone-operator"""
    members = group_of(require_group(sys, group))
    checker = checker_for(sys)
    if kind.kind is ModeKind.PERFECT:
        operator = checker.everyone_operator(members, None)
    elif kind.kind is ModeKind.EPS:
        operator = checker.everyone_operator(members, kind.eps)
    else:
        operator = checker.everyone_eventually_operator(members)
    return Extension(
        formula=common_operator(kind, members, f),
        points=checker.fixpoint(operator, f),
    )


def ck_via_closure(
    sys: InterpretedSystem, group: Iterable[str], f: Formula
) -> Extension:
    """C_G f as 'f throughout the G-reachability class'"""
    members = group_of(require_group(sys, group))
    target = checker_for(sys).extension(f)
    points: set[Point] = set()
    for members_class in reachability_classes(sys, members):
        if members_class <= target:
            points |= members_class
    return Extension(formula=C(members, f), points=frozenset(points))


def iterated_everyone(
    sys: InterpretedSystem, group: Iterable[str], f: Formula, k: int
) -> Extension:
    """ev(E^k_G f); k = 0 is ev(f)"""
    if k < 0:
        raise ValueError("k must be nonnegative")
    members = group_of(require_group(sys, group))
    formula = Ek(members, k, f)
    return Extension(formula=formula, points=checker_for(sys).extension(formula))


def stabilized_everyone(
    sys: InterpretedSystem, group: Iterable[str], f: Formula
) -> tuple[int, Extension]:
    """First k with ev(E^k f) = ev(E^(k+1) f), with that extension"""
    members = group_of(require_group(sys, group))
    checker = checker_for(sys)
    current = checker.extension(f)
    for k in range(len(sys.points) + 1):
        following = checker.everyone(members, current)
        if following == current:
            return k, Extension(formula=Ek(members, k, f), points=current)
        current = following
    raise RuntimeError("iterated everyone-knows did not stabilize")
