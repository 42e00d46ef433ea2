"""Alice sends Bob a message at time s; it arrives d time units later, d <= eps.

Without timestamps neither agent has a clock: Alice counts the time since she
sent, Bob the time since he received. With timestamps every local state
carries the global time and Bob learns the send time from the message.
"""

import logging

from app.services.scenarios.models import AliceBobConfig
from app.services.scenarios.utils import StateRow, assemble_system
from app.services.systems.models import InterpretedSystem

logger = logging.getLogger(__name__)

SILENT_RUN = "r(s=never)"


def _label(text: str, t: int, timestamped: bool) -> str:
    return f"t={t}:{text}" if timestamped else text


def gen_alice_bob(cfg: AliceBobConfig) -> InterpretedSystem:
    """Generate the Alice and Bob system for the configuration"""

    horizon = cfg.horizon if cfg.horizon is not None else cfg.max_send + 3 * cfg.eps
    runs: dict[str, list[StateRow]] = {}
    actions: dict[str, list[list]] = {}

    for s in range(cfg.max_send + 1):
        for d in range(cfg.eps + 1):
            run_id = f"r(s={s},d={d})"
            states: list[StateRow] = []
            for t in range(horizon + 1):
                alice = "idle" if t < s else f"cnt{t - s}"
                if t < s + d:
                    bob = "waiting"
                elif cfg.timestamped:
                    bob = f"cnt{t - s - d}:s={s}"
                else:
                    bob = f"cnt{t - s - d}"
                props = {"sent", f"sent@{s}"} if t >= s else set()
                states.append(
                    (
                        f"s={s};d={d};t={t}",
                        {
                            "A": _label(alice, t, cfg.timestamped),
                            "B": _label(bob, t, cfg.timestamped),
                        },
                        props,
                    )
                )
            runs[run_id] = states
            log = [[s, "Alice sends the message"]]
            if s + d <= horizon:
                log.append([s + d, "Bob receives the message"])
            actions[run_id] = log

    if cfg.timestamped:
        runs[SILENT_RUN] = [
            (
                f"s=never;t={t}",
                {
                    "A": _label("idle", t, True),
                    "B": _label("waiting", t, True),
                },
                set(),
            )
            for t in range(horizon + 1)
        ]
        actions[SILENT_RUN] = []

    logger.info("alice-bob eps=%d: %d runs", cfg.eps, len(runs))
    return assemble_system(
        agents=("A", "B"),
        horizon=horizon,
        runs=runs,
        propositions=["sent"] + [f"sent@{s}" for s in range(cfg.max_send + 1)],
        metadata={
            "scenario": "alicebob",
            "params": cfg.dict(),
            "notes": (
                ["one run in which Alice never sends"] if cfg.timestamped else []
            ),
            "actions": actions,
        },
    )
