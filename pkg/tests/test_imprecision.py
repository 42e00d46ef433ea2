import random

import pytest

from app.services.coordination.coordination_service import (
    check_coordination,
    is_nontrivial,
)
from app.services.exceptions import ImprecisionError
from app.services.imprecision import imprecision_service
from app.services.imprecision.imprecision_service import (
    candidate_groups,
    ck_constant_check,
    find_nontrivial_perfect_ensemble,
    has_temporal_imprecision,
    reachability_partition,
)
from app.services.logic.models import CoordinationMode
from app.services.logic.parser import parse_formula
from app.services.systems.system_service import (
    build_system,
    classify_event,
    dump_system,
    event_from_local_states,
    reachability_classes,
)
from tests.utils import random_formula

ALICE_BOB_FORMULAS = ["sent", "true", "K[A] sent", "!sent", "sent@1 | K[B] sent"]
MUDDY_FORMULAS = ["atleast_one", "muddy_1", "announced", "K[1] muddy_1"]
PERFECT = CoordinationMode.perfect()


def _frozen_clock_system(horizon):
    return build_system(
        {
            "agents": ["A", "B"],
            "horizon": horizon,
            "runs": [
                {
                    "id": "r",
                    "states": [
                        {"env": "e", "locals": {"A": f"a{t}", "B": f"b{t}"}}
                        for t in range(horizon + 1)
                    ],
                }
            ],
        }
    )


@pytest.mark.parametrize("fixture", ["alice_bob", "muddy_fine"])
def test_imprecise_systems(request, fixture):
    sys = request.getfixturevalue(fixture)
    witness = has_temporal_imprecision(sys)
    assert witness.has_imprecision
    assert witness.failure is None
    assert find_nontrivial_perfect_ensemble(sys, sys.agents) is None


@pytest.mark.parametrize("fixture", ["alice_bob_timestamped", "muddy_coarse"])
def test_precise_systems(request, fixture):
    sys = request.getfixturevalue(fixture)
    witness = has_temporal_imprecision(sys)
    assert not witness.has_imprecision
    assert witness.failure.run is not None
    assert witness.failure.time is not None

    ensemble = find_nontrivial_perfect_ensemble(sys, sys.agents)
    assert ensemble is not None
    assert check_coordination(sys, ensemble, CoordinationMode.perfect()).holds
    assert is_nontrivial(sys, ensemble).holds


def test_common_knowledge_is_constant_under_imprecision(alice_bob, muddy_fine):
    for text in ALICE_BOB_FORMULAS:
        report = ck_constant_check(alice_bob, ["A", "B"], parse_formula(text))
        assert report.holds, text
    for text in MUDDY_FORMULAS:
        report = ck_constant_check(muddy_fine, muddy_fine.agents, parse_formula(text))
        assert report.holds, text


def test_common_knowledge_changes_without_imprecision(alice_bob_timestamped):
    report = ck_constant_check(
        alice_bob_timestamped, ["A", "B"], parse_formula("sent@3")
    )
    assert not report.holds
    start, changed = report.counterexample.points
    assert start == ("r(s=3,d=0)", 0)
    assert changed == ("r(s=3,d=0)", 5)


def test_degenerate_horizon():
    witness = has_temporal_imprecision(_frozen_clock_system(0))
    assert not witness.has_imprecision
    assert witness.failure.reason == "degenerate horizon"


def test_clocked_agents_are_precise():
    witness = has_temporal_imprecision(_frozen_clock_system(3))
    assert not witness.has_imprecision
    assert (witness.failure.run, witness.failure.time) == ("r", 0)
    assert witness.failure.group == ["A", "B"]


def test_imprecision_needs_two_agents(alice_bob):
    single = build_system(
        {
            "agents": ["A"],
            "horizon": 1,
            "runs": [
                {
                    "id": "r",
                    "states": [
                        {"env": "e", "locals": {"A": "a"}},
                        {"env": "e", "locals": {"A": "a"}},
                    ],
                }
            ],
        }
    )
    with pytest.raises(ImprecisionError):
        has_temporal_imprecision(single)
    with pytest.raises(ImprecisionError):
        has_temporal_imprecision(alice_bob, ["A"])
    with pytest.raises(ImprecisionError):
        find_nontrivial_perfect_ensemble(alice_bob, ["A"])


def test_reachability_partition(muddy_coarse, alice_bob):
    partition = reachability_partition(muddy_coarse, muddy_coarse.agents)
    assert partition.group == ["1", "2", "3"]
    first = partition.classes[0]
    assert first == sorted((run.id, 0) for run in muddy_coarse.runs)

    # every Alice-Bob run lies in a single class
    for block in reachability_partition(alice_bob, ["A", "B"]).classes:
        runs = {run for run, _ in block}
        assert len(block) == len(runs) * (alice_bob.horizon + 1)


def test_candidate_groups(muddy_coarse, alice_bob):
    assert candidate_groups(alice_bob) == [("A", "B")]
    assert candidate_groups(muddy_coarse) == [
        ("1", "2"),
        ("1", "3"),
        ("2", "3"),
        ("1", "2", "3"),
    ]


def _event_pool(rng, sys, group):
    """Unions of classes, label-derived events and arbitrary point sets"""
    classes = reachability_classes(sys, group)
    pool = [frozenset(), sys.all_points]
    for _ in range(3):
        chosen = [block for block in classes if rng.random() < 0.5]
        pool.append(frozenset().union(*chosen))
    for agent in group:
        labels = [label for label in sorted(sys.views[agent]) if rng.random() < 0.5]
        pool.append(event_from_local_states(sys, agent, labels))
    for _ in range(3):
        pool.append(frozenset(p for p in sys.points if rng.random() < 0.5))
    return classes, pool


def test_local_to_group_iff_union_of_classes(multi_agent_battery):
    rng = random.Random(13)
    for sys, _ in multi_agent_battery:
        for group in candidate_groups(sys):
            classes, pool = _event_pool(rng, sys, group)
            for event in pool:
                result = classify_event(sys, event)
                local_to_all = all(result.is_local_to(agent) for agent in group)
                union_of_classes = all(
                    block <= event or not block & event for block in classes
                )
                assert local_to_all == union_of_classes, (group, sorted(event))


def test_imprecision_consequences_on_random_systems(multi_agent_battery):
    rng = random.Random(17)
    imprecise = 0
    for sys, f in multi_agent_battery:
        formulas = [f] + [random_formula(rng, sys.agents, depth=3) for _ in range(2)]
        for group in candidate_groups(sys):
            ensemble = find_nontrivial_perfect_ensemble(sys, group)
            if ensemble is not None:
                assert check_coordination(sys, ensemble, PERFECT).holds
                assert is_nontrivial(sys, ensemble).holds
            if not has_temporal_imprecision(sys, group).has_imprecision:
                continue
            imprecise += 1
            assert ensemble is None
            for formula in formulas:
                assert ck_constant_check(sys, group, formula).holds, formula
    assert imprecise > 0


def test_candidate_groups_respect_the_agent_limit(monkeypatch):
    desc = {
        "agents": ["D", "C", "B", "A"],
        "horizon": 0,
        "runs": [
            {
                "id": "r",
                "states": [
                    {"env": "e", "locals": {a: "s" for a in ("A", "B", "C", "D")}}
                ],
            }
        ],
    }
    sys = build_system(desc)
    assert len(candidate_groups(sys)) == 6 + 4 + 1

    monkeypatch.setattr(imprecision_service.c, "MAX_GROUP_AGENTS", 3)
    groups = candidate_groups(sys)
    assert groups[:-1] == [
        ("A", "B"),
        ("A", "C"),
        ("A", "D"),
        ("B", "C"),
        ("B", "D"),
        ("C", "D"),
    ]
    assert groups[-1] == ("A", "B", "C", "D")


def test_candidate_groups_on_random_systems(multi_agent_battery):
    for sys, _ in multi_agent_battery:
        n = len(sys.agents)
        groups = candidate_groups(sys)
        assert len(groups) == 2**n - n - 1
        assert len(set(groups)) == len(groups)
        for group in groups:
            assert list(group) == sorted(group)
            assert set(group) <= set(sys.agents)


def test_partition_ignores_declaration_order(multi_agent_battery):
    rng = random.Random(19)
    for sys, _ in multi_agent_battery:
        desc = dump_system(sys)
        runs = list(desc.runs)
        rng.shuffle(runs)
        reordered = build_system(
            desc.copy(update={"runs": runs, "agents": list(reversed(desc.agents))})
        )
        for group in candidate_groups(sys):
            assert reachability_partition(sys, group) == reachability_partition(
                reordered, list(reversed(group))
            )
