"""Seeded generators for small random systems and formulas"""

import random
from typing import Sequence

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
    FalseFormula,
    Formula,
    Implies,
    K,
    Not,
    Or,
    TrueFormula,
)
from app.services.systems.models import InterpretedSystem
from app.services.systems.system_service import build_system

AGENT_NAMES = ("A", "B", "C")
ATOMS = ("p", "q")


def random_system(rng: random.Random, min_agents: int = 1) -> InterpretedSystem:
    """At most 4 runs, 3 agents and horizon 6, labels from a small alphabet"""
    agents = list(AGENT_NAMES[: rng.randint(min_agents, len(AGENT_NAMES))])
    horizon = rng.randint(0, 6)
    alphabet = [f"l{n}" for n in range(rng.randint(1, 3))]
    props_of: dict[tuple, list[str]] = {}

    runs = []
    for run in range(rng.randint(1, 4)):
        states = []
        for _ in range(horizon + 1):
            local = {agent: rng.choice(alphabet) for agent in agents}
            key = tuple(sorted(local.items()))
            if key not in props_of:
                props_of[key] = [name for name in ATOMS if rng.random() < 0.5]
            states.append({"env": "e", "locals": local, "props": props_of[key]})
        runs.append({"id": f"r{run}", "states": states})

    return build_system(
        {
            "agents": agents,
            "horizon": horizon,
            "runs": runs,
            "propositions": list(ATOMS),
        }
    )


def random_formula(
    rng: random.Random,
    agents: Sequence[str],
    depth: int = 4,
    atoms: Sequence[str] = ATOMS,
) -> Formula:
    """A formula of nesting depth at most `depth` over the given agents"""
    # pylint: disable=too-many-return-statements
    if depth == 0 or rng.random() < 0.2:
        choice = rng.randrange(len(atoms) + 2)
        if choice == len(atoms):
            return TrueFormula()
        if choice == len(atoms) + 1:
            return FalseFormula()
        return Atom(atoms[choice])

    def sub() -> Formula:
        return random_formula(rng, agents, depth - 1, atoms)

    group = frozenset(rng.sample(list(agents), rng.randint(1, len(agents))))
    match rng.randrange(12):
        case 0:
            return Not(sub())
        case 1:
            return And(sub(), sub())
        case 2:
            return Or(sub(), sub())
        case 3:
            return Implies(sub(), sub())
        case 4:
            return K(rng.choice(list(agents)), sub())
        case 5:
            return E(group, sub())
        case 6:
            return Ek(group, rng.randint(0, 3), sub())
        case 7:
            return C(group, sub())
        case 8:
            return Eeps(group, rng.randint(0, 3), sub())
        case 9:
            return Ceps(group, rng.randint(0, 3), sub())
        case 10:
            return Ediamond(group, sub())
        case _:
            return Cdiamond(group, sub())
