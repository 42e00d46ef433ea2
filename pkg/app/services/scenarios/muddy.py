"""Muddy children, in a coarse lock-step model and a fine model with delays.

Children are "1".."n". Each run fixes the set of muddy children; the father
announces "at least one of you is muddy" together with his first question
whenever that is true. Every child follows the sees-k protocol: a child that
sees k muddy foreheads answers "No" to the first k questions and "Yes" after.
"""

import logging
from itertools import product
from typing import Optional

from app.services.coordination.models import Evidence, VerificationReport
from app.services.exceptions import ScenarioConfigError
from app.services.logic.checker import checker_for
from app.services.logic.formulas import Atom, K, Not, Or
from app.services.scenarios.models import MuddyConfig
from app.services.scenarios.utils import StateRow, assemble_system, check_run_budget
from app.services.systems.models import InterpretedSystem, Point
from app.services.systems.system_service import require_point
from app.services.systems.utils import point_refs
from config import get_config

c = get_config()
logger = logging.getLogger(__name__)

Mud = frozenset[str]
Actions = list[tuple[int, str]]


def _children(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(1, n + 1))


def _configurations(children: tuple[str, ...]) -> list[Mud]:
    return [
        frozenset(child for child, dirty in zip(children, mask) if dirty)
        for mask in product((False, True), repeat=len(children))
    ]


def _tag(muddy: Mud) -> str:
    return "muddy_" + ("".join(sorted(muddy, key=int)) or "none")


def _view(children: tuple[str, ...], muddy: Mud, child: str) -> str:
    marks = {other: "m" if other in muddy else "c" for other in children}
    marks[child] = "?"
    return "".join(marks[other] for other in children)


def _answers_yes(muddy: Mud, child: str, q: int) -> bool:
    """sees-k protocol"""
    sees = len(muddy - {child})
    return q > sees


def _vocabulary(children: tuple[str, ...], rounds: int) -> list[str]:
    names = ["atleast_one", "announced"]
    for child in children:
        names.append(f"muddy_{child}")
        for q in range(1, rounds + 1):
            names += [
                f"asked_{child}_{q}",
                f"ans_yes_{child}_{q}",
                f"ans_no_{child}_{q}",
            ]
    return names


def _question_token(q: int, muddy: Mud) -> str:
    return "A+Q1" if q == 1 and muddy else f"Q{q}"


def _coarse_run(
    children: tuple[str, ...], muddy: Mud, rounds: int
) -> tuple[list[StateRow], Actions]:
    horizon = 2 * rounds
    answer_rows = {
        q: "".join(
            "Y" if _answers_yes(muddy, child, q) else "N" for child in children
        )
        for q in range(1, rounds + 1)
    }

    states: list[StateRow] = []
    for t in range(horizon + 1):
        heard = []
        props = {f"muddy_{child}" for child in muddy}
        if muddy:
            props.add("atleast_one")
            if t >= 1:
                props.add("announced")
        for q in range(1, rounds + 1):
            if t >= 2 * q - 1:
                heard.append(_question_token(q, muddy))
                props.update(f"asked_{child}_{q}" for child in children)
            if t >= 2 * q:
                heard.append(f"R{q}={answer_rows[q]}")
                for child, answer in zip(children, answer_rows[q]):
                    props.add(f"ans_{'yes' if answer == 'Y' else 'no'}_{child}_{q}")
        history = "|".join(heard)
        locals_ = {
            child: f"t={t};sees={_view(children, muddy, child)};heard={history}"
            for child in children
        }
        states.append((f"{_tag(muddy)};t={t}", locals_, props))

    actions: Actions = []
    for q in range(1, rounds + 1):
        if q == 1 and muddy:
            actions.append((1, "father: at least one of you is muddy"))
        actions.append((2 * q - 1, f"father asks question {q}"))
        for child, answer in zip(children, answer_rows[q]):
            actions.append(
                (2 * q, f"child {child} answers {'Yes' if answer == 'Y' else 'No'}")
            )
    return states, actions


def _fine_run(
    run_id: str,
    children: tuple[str, ...],
    muddy: Mud,
    rounds: int,
    delays: tuple[int, ...],
    horizon: int,
) -> tuple[list[StateRow], Actions]:
    """One delay assignment: per question, father->child then child->child delays"""

    # (arrival, sort key, listener, token)
    deliveries: list[tuple[int, tuple[int, int], str, str]] = []
    heard_question: dict[tuple[str, int], int] = {}
    uttered: dict[tuple[str, int], int] = {}
    actions: Actions = []
    pending = iter(delays)
    asked_at = 0

    for q in range(1, rounds + 1):
        token = _question_token(q, muddy)
        actions.append((asked_at, f"father asks question {q}"))
        if token.startswith("A+"):
            actions.append((asked_at, "father: at least one of you is muddy"))
        for child in children:
            arrival = asked_at + next(pending)
            deliveries.append((arrival, (0, 0), child, token))
            heard_question[child, q] = arrival
            uttered[child, q] = arrival + 1
            actions.append((arrival, f"child {child} hears question {q}"))

        latest = asked_at
        for index, child in enumerate(children, start=1):
            yes = _answers_yes(muddy, child, q)
            answer = f"{child}:{'Y' if yes else 'N'}{q}"
            actions.append(
                (uttered[child, q], f"child {child} answers {'Yes' if yes else 'No'}")
            )
            for listener in children:
                if listener == child:
                    continue
                # held until the listener has given its own answer to q
                arrival = max(
                    uttered[child, q] + next(pending), uttered[listener, q] + 1
                )
                deliveries.append((arrival, (1, index), listener, answer))
                latest = max(latest, arrival)
        asked_at = latest

    deliveries.sort()
    states: list[StateRow] = []
    for t in range(horizon + 1):
        props = {f"muddy_{child}" for child in muddy}
        if muddy:
            props.add("atleast_one")
            if any(when <= t for (_, q), when in heard_question.items() if q == 1):
                props.add("announced")
        for (child, q), when in heard_question.items():
            if when <= t:
                props.add(f"asked_{child}_{q}")
        for (child, q), when in uttered.items():
            if when <= t:
                yes = _answers_yes(muddy, child, q)
                props.add(f"ans_{'yes' if yes else 'no'}_{child}_{q}")
        locals_ = {}
        for child in children:
            heard = [
                token
                for when, _, listener, token in deliveries
                if listener == child and when <= t
            ]
            history = "|".join(heard)
            locals_[child] = f"sees={_view(children, muddy, child)};heard={history}"
        states.append((f"{run_id};t={t}", locals_, props))

    actions.sort(key=lambda item: item[0])
    return states, actions


def gen_muddy(cfg: MuddyConfig) -> InterpretedSystem:
    """Generate the muddy children system for the configuration"""

    rounds = cfg.rounds
    children = _children(cfg.n)
    configurations = _configurations(children)
    runs: dict[str, list[StateRow]] = {}
    actions: dict[str, Actions] = {}
    notes = []

    if cfg.variant == "coarse":
        if cfg.n > c.MUDDY_MAX_CHILDREN_COARSE:
            raise ScenarioConfigError(
                f"coarse muddy children supports at most "
                f"{c.MUDDY_MAX_CHILDREN_COARSE} children"
            )
        horizon = 2 * rounds
        for muddy in configurations:
            runs[_tag(muddy)], actions[_tag(muddy)] = _coarse_run(
                children, muddy, rounds
            )
    else:
        if cfg.n > c.MUDDY_MAX_CHILDREN_FINE:
            raise ScenarioConfigError(
                f"fine muddy children supports at most "
                f"{c.MUDDY_MAX_CHILDREN_FINE} children"
            )
        choices = range(cfg.delay_min, cfg.delay_max + 1)
        slots = cfg.n * cfg.n * rounds
        check_run_budget("muddy fine", len(configurations) * len(choices) ** slots)

        horizon = rounds * (2 * cfg.delay_max + 1)
        per_question = cfg.n * cfg.n
        for muddy in configurations:
            for delays in product(choices, repeat=slots):
                groups = [
                    "_".join(map(str, delays[start : start + per_question]))
                    for start in range(0, slots, per_question)
                ]
                run_id = f"{_tag(muddy)}/{'.'.join(groups)}"
                runs[run_id], actions[run_id] = _fine_run(
                    run_id, children, muddy, rounds, delays, horizon
                )
        notes.append(
            "answers to each question are delivered before the father asks the "
            "next, and only after the listener has answered it"
        )

    logger.info("muddy %s n=%d: %d runs", cfg.variant, cfg.n, len(runs))
    return assemble_system(
        agents=children,
        horizon=horizon,
        runs=runs,
        propositions=_vocabulary(children, rounds),
        metadata={
            "scenario": "muddy",
            "params": cfg.dict(),
            "notes": notes,
            "actions": {
                run_id: [[t, text] for t, text in log]
                for run_id, log in actions.items()
            },
        },
    )


def _rounds_of(sys: InterpretedSystem) -> int:
    if sys.metadata.get("scenario") != "muddy":
        raise ScenarioConfigError("not a muddy children system")
    return int(sys.metadata["params"]["question_rounds"])


def muddy_specification_check(sys: InterpretedSystem) -> VerificationReport:
    """A child says Yes iff it knows whether it is muddy, at the point it hears
    the question; the answer is visible one step later"""

    rounds = _rounds_of(sys)
    checker = checker_for(sys)
    claim = "each child answers Yes iff it knows whether it is muddy"
    for child in sys.agents:
        muddy = Atom(f"muddy_{child}")
        knows_whether = checker.extension(Or(K(child, muddy), K(child, Not(muddy))))
        for run in sys.runs:
            for q in range(1, rounds + 1):
                asked = _first_time(sys, run.id, f"asked_{child}_{q}")
                if asked is None or asked == sys.horizon:
                    continue
                answered = Point(run.id, asked + 1)
                says_yes = f"ans_yes_{child}_{q}" in sys.props_at(answered)
                knows = Point(run.id, asked) in knows_whether
                if says_yes != knows:
                    return VerificationReport(
                        claim=claim,
                        holds=False,
                        counterexample=Evidence(
                            points=point_refs([Point(run.id, asked), answered]),
                            agent=child,
                            explanation=(
                                f"answers {'Yes' if says_yes else 'No'} to question "
                                f"{q} but {'knows' if knows else 'does not know'}"
                            ),
                        ),
                    )
    return VerificationReport(claim=claim, holds=True)


def _first_time(sys: InterpretedSystem, run_id: str, prop: str) -> Optional[int]:
    for point in sys.run_points(run_id):
        if prop in sys.props_at(point):
            return point.time
    return None


def muddy_answers(sys: InterpretedSystem, run_id: str) -> dict[int, dict[str, str]]:
    """question -> child -> "Yes" | "No" | "-" (not answered within the horizon)"""

    rounds = _rounds_of(sys)
    final = sys.props_at(require_point(sys, Point(run_id, sys.horizon)))
    table: dict[int, dict[str, str]] = {}
    for q in range(1, rounds + 1):
        table[q] = {}
        for child in sys.agents:
            if f"ans_yes_{child}_{q}" in final:
                table[q][child] = "Yes"
            elif f"ans_no_{child}_{q}" in final:
                table[q][child] = "No"
            else:
                table[q][child] = "-"
    return table
