import random

import pytest

from app.services.scenarios.alice_bob import gen_alice_bob
from app.services.scenarios.models import AliceBobConfig, MuddyConfig
from app.services.scenarios.muddy import gen_muddy
from tests.utils import random_formula, random_system

BATTERY_SIZE = 200


@pytest.fixture(scope="session")
def alice_bob():
    return gen_alice_bob(AliceBobConfig(eps=2, max_send=3))


@pytest.fixture(scope="session")
def alice_bob_timestamped():
    return gen_alice_bob(AliceBobConfig(eps=2, max_send=3, timestamped=True))


@pytest.fixture(scope="session")
def muddy_coarse():
    return gen_muddy(MuddyConfig(n=3))


@pytest.fixture(scope="session")
def muddy_fine():
    return gen_muddy(
        MuddyConfig(n=2, variant="fine", delay_min=1, delay_max=2, question_rounds=2)
    )


@pytest.fixture(scope="session")
def battery():
    """(system, formula) pairs drawn from a fixed seed"""
    rng = random.Random(20230117)
    cases = []
    for _ in range(BATTERY_SIZE):
        sys = random_system(rng)
        cases.append((sys, random_formula(rng, sys.agents)))
    return cases


@pytest.fixture(scope="session")
def multi_agent_battery():
    rng = random.Random(7)
    cases = []
    for _ in range(60):
        sys = random_system(rng, min_agents=2)
        cases.append((sys, random_formula(rng, sys.agents, depth=3)))
    return cases
