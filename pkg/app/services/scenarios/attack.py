"""Coordinated attack: two generals, messengers that may be lost.

Time runs in rounds 0..max_rounds and each general takes one action per round,
chosen from its received history and the round number. A message sent in round
m arrives in round m+d (d in 1..max_delay) or, on a lossy channel, never. A
general's local state is the round number plus every (message, arrival round)
pair received so far, e.g. "round=2;recv=A0@1"; the history part alone, "A0@1",
keys the decision tables. Messages are named by sender and per-sender count.
"""

import json
import logging
from itertools import product
from pathlib import Path
from typing import Callable, Optional, Union

from pydantic import ValidationError

from app.services.coordination.coordination_service import (
    build_ensemble,
    check_coordination,
)
from app.services.exceptions import ProtocolError, ScenarioConfigError
from app.services.logic.checker import checker_for
from app.services.logic.formulas import And, Atom, C, group_of
from app.services.logic.models import CoordinationMode
from app.services.scenarios.models import (
    GENERALS,
    Action,
    AttackProtocol,
    AttackReport,
    DecisionTable,
    ProtocolFile,
)
from app.services.scenarios.utils import StateRow, assemble_system, check_run_budget
from app.services.systems.models import InterpretedSystem, Point

logger = logging.getLogger(__name__)

History = tuple[tuple[str, int], ...]
Decide = Callable[[str, History, int], Action]


def history_key(history: History) -> str:
    """Canonical history string: "msg@round" entries joined by commas"""
    return ",".join(f"{message}@{arrival}" for message, arrival in history)


def _message_index(message: str) -> int:
    """Position in an alternating A, B, A, ... exchange"""
    count = int(message[1:])
    return 2 * count if message[0] == "A" else 2 * count + 1


def _never_policy(general: str, history: History, m: int) -> Action:
    if general == "A" and m == 0:
        return Action.SEND
    if general == "B" and history and history[-1][1] == m:
        return Action.SEND
    return Action.WAIT


def _ack_policy(k: int) -> Decide:
    """m0..mk alternate between A and B, each sent on receipt of the previous"""

    def decide(general: str, history: History, m: int) -> Action:
        if general == "A" and m == 0:
            return Action.SEND
        if history:
            message, arrival = history[-1]
            index = _message_index(message)
            if arrival == m:
                if index == k:
                    return Action.ATTACK
                if index < k:
                    return Action.SEND
            # the sender of mk attacks the round after sending it
            if arrival == m - 1 and index == k - 1:
                return Action.ATTACK
        return Action.WAIT

    return decide


def _bounded_policy(general: str, history: History, m: int) -> Action:
    if general == "A":
        return Action.SEND_ATTACK if m == 0 else Action.WAIT
    if history and history[-1][1] == m:
        return Action.ATTACK
    return Action.WAIT


class _Explorer:
    """Enumerates every delivery outcome of a protocol's messages"""

    def __init__(
        self, max_rounds: int, lossy: bool, max_delay: int, decide: Decide
    ) -> None:
        self.max_rounds = max_rounds
        self.lossy = lossy
        self.max_delay = max_delay
        self.decide = decide
        self.runs: dict[str, list[StateRow]] = {}
        self.actions: dict[str, list[list]] = {}

    def fates(self, m: int) -> list[Optional[int]]:
        """delays of a message sent in round m; None means never received"""
        delays = range(1, self.max_delay + 1)
        fates: list[Optional[int]] = [d for d in delays if m + d <= self.max_rounds]
        if self.lossy or len(fates) < len(delays):
            fates.append(None)
        return fates

    def explore(self) -> "_Explorer":
        self._step(
            m=0,
            histories={g: () for g in GENERALS},
            inflight=(),
            sent={g: 0 for g in GENERALS},
            attacked={},
            outcomes=(),
            states=[],
            log=[],
        )
        return self

    # pylint: disable-next=too-many-arguments,too-many-locals
    def _step(
        self,
        m: int,
        histories: dict[str, History],
        inflight: tuple[tuple[int, str, str], ...],
        sent: dict[str, int],
        attacked: dict[str, int],
        outcomes: tuple[str, ...],
        states: list[StateRow],
        log: list[list],
    ) -> None:
        histories = dict(histories)
        log = list(log)
        for arrival, receiver, message in sorted(inflight):
            if arrival == m:
                histories[receiver] += ((message, m),)
                log.append([m, f"{receiver} receives {message}"])
        inflight = tuple(item for item in inflight if item[0] != m)

        chosen = {}
        attacked = dict(attacked)
        for general in GENERALS:
            if general in attacked:
                chosen[general] = Action.WAIT
                continue
            chosen[general] = self.decide(general, histories[general], m)
            if chosen[general].attacks:
                attacked[general] = m
                log.append([m, f"{general} attacks"])

        pending = ",".join(f"{msg}->{to}@{at}" for at, to, msg in sorted(inflight))
        states = states + [
            (
                f"round={m};pending={pending}",
                {g: f"round={m};recv={history_key(histories[g])}" for g in GENERALS},
                {f"attack_{g}" for g in attacked},
            )
        ]
        if m == self.max_rounds:
            run_id = ";".join(outcomes) or "no-messages"
            self.runs[run_id] = states
            self.actions[run_id] = log
            check_run_budget("attack", len(self.runs))
            return

        sent = dict(sent)
        dispatched = []
        for general in GENERALS:
            if chosen[general].sends:
                message = f"{general}{sent[general]}"
                sent[general] += 1
                receiver = "B" if general == "A" else "A"
                dispatched.append((message, receiver))
                log.append([m, f"{general} sends {message}"])

        for combo in product(*(self.fates(m) for _ in dispatched)):
            next_inflight = list(inflight)
            next_outcomes = list(outcomes)
            for (message, receiver), delay in zip(dispatched, combo):
                if delay is None:
                    fate = "lost" if self.lossy else "late"
                    next_outcomes.append(f"{message}:{fate}")
                else:
                    next_outcomes.append(f"{message}:d{delay}")
                    next_inflight.append((m + delay, receiver, message))
            self._step(
                m + 1,
                histories,
                tuple(next_inflight),
                sent,
                attacked,
                tuple(next_outcomes),
                states,
                log,
            )


def _validate(protocol: AttackProtocol) -> AttackProtocol:
    if protocol.max_rounds < 1:
        raise ProtocolError("max_rounds must be at least 1")
    if set(protocol.tables) != set(GENERALS):
        raise ProtocolError("a protocol needs decision tables for A and B")
    if protocol.lossy:
        for general, table in protocol.tables.items():
            for (history, m), action in table.items():
                if history == "" and action.attacks:
                    raise ProtocolError(
                        f"{general} attacks in round {m} without having received "
                        "anything; with lossy messengers it might attack alone"
                    )
    return protocol


def builtin_protocol(
    name: str, eps: int = 1, max_rounds: Optional[int] = None
) -> AttackProtocol:
    """"never", "ack:<k>" or "bounded-eps", materialized into decision tables"""

    lossy, max_delay = True, 1
    if name == "never":
        policy: Decide = _never_policy
        rounds = 2
    elif name.startswith("ack:"):
        try:
            k = int(name[len("ack:") :])
        except ValueError as exc:
            raise ProtocolError(
                f"bad protocol name {name!r}, expected ack:<k>"
            ) from exc
        if k < 0:
            raise ProtocolError("ack:<k> needs k >= 0")
        policy = _ack_policy(k)
        rounds = k + 2
    elif name == "bounded-eps":
        if eps < 1:
            raise ProtocolError("bounded-eps needs eps >= 1")
        policy = _bounded_policy
        lossy, max_delay, rounds = False, eps, eps + 1
    else:
        raise ProtocolError(
            f"unknown protocol {name!r}, expected never, ack:<k> or bounded-eps"
        )
    rounds = max_rounds or rounds

    tables: dict[str, dict[tuple[str, int], Action]] = {g: {} for g in GENERALS}

    def recording(general: str, history: History, m: int) -> Action:
        action = policy(general, history, m)
        tables[general][history_key(history), m] = action
        return action

    _Explorer(rounds, lossy, max_delay, recording).explore()
    return _validate(
        AttackProtocol(
            name=name,
            tables=tables,
            max_rounds=rounds,
            lossy=lossy,
            max_delay=max_delay,
        )
    )


def load_protocol(path: Union[str, Path]) -> AttackProtocol:
    """Read a protocol table file"""

    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        desc = ProtocolFile.parse_obj(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"cannot read protocol file {path}: {exc}") from exc
    except ValidationError as exc:
        raise ProtocolError(f"invalid protocol file {path}: {exc}") from exc

    tables: dict[str, DecisionTable] = {
        general: {(rule.history, rule.round): rule.action for rule in rules}
        for general, rules in (("A", desc.A), ("B", desc.B))
    }
    return _validate(
        AttackProtocol(
            name=desc.name,
            tables=tables,
            max_rounds=desc.max_rounds,
            lossy=desc.lossy,
            max_delay=desc.max_delay,
        )
    )


def gen_attack(protocol: AttackProtocol) -> InterpretedSystem:
    """Generate every run of the protocol under every delivery outcome"""

    _validate(protocol)

    def lookup(general: str, history: History, m: int) -> Action:
        key = history_key(history)
        try:
            return protocol.tables[general][key, m]
        except KeyError as exc:
            raise ProtocolError(
                f"protocol {protocol.name!r} has no action for {general} in round "
                f"{m} with history {key!r}"
            ) from exc

    explorer = _Explorer(
        protocol.max_rounds, protocol.lossy, protocol.max_delay, lookup
    ).explore()
    logger.info("attack %s: %d runs", protocol.name, len(explorer.runs))
    return assemble_system(
        agents=GENERALS,
        horizon=protocol.max_rounds,
        runs=explorer.runs,
        propositions=[f"attack_{g}" for g in GENERALS],
        metadata={
            "scenario": "attack",
            "params": {
                "protocol": protocol.name,
                "max_rounds": protocol.max_rounds,
                "lossy": protocol.lossy,
                "max_delay": protocol.max_delay,
            },
            "notes": list(protocol.notes),
            "actions": explorer.actions,
        },
    )


def analyze_attack(sys: InterpretedSystem, mode: CoordinationMode) -> AttackReport:
    """Coordination of the attack onsets, and common knowledge when both attack"""

    missing = [g for g in GENERALS if f"attack_{g}" not in sys.propositions]
    if missing:
        raise ScenarioConfigError(
            f"system has no attack propositions for {', '.join(missing)}"
        )

    checker = checker_for(sys)
    onsets = {}
    for general in GENERALS:
        attacking = checker.extension(Atom(f"attack_{general}"))
        onsets[general] = frozenset(
            p
            for p in attacking
            if p.time == 0 or Point(p.run, p.time - 1) not in attacking
        )
    ensemble = build_ensemble(sys, GENERALS, onsets, name="attack-onset")
    coordination = check_coordination(sys, ensemble, mode)

    both = And(Atom("attack_A"), Atom("attack_B"))
    ck_at_attack = checker.extension(both) <= checker.extension(
        C(group_of(GENERALS), both)
    )
    violating_run = None
    if coordination.counterexample is not None:
        violating_run = coordination.counterexample.points[0][0]

    return AttackReport(
        protocol=str(sys.metadata.get("params", {}).get("protocol", "custom")),
        mode=str(mode),
        attacks_ever=any(onsets.values()),
        coordinated=coordination.holds,
        ck_at_attack=ck_at_attack,
        violating_run=violating_run,
    )
