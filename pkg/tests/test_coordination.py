import json
import random

import pytest

from app.services.coordination.coordination_service import (
    build_ensemble,
    check_coordination,
    is_nontrivial,
    knowledge_ensemble,
    load_ensemble,
    psi_formula,
    verify_correspondence,
)
from app.services.exceptions import EnsembleError
from app.services.logic.checker import extension
from app.services.logic.formulas import Atom, EventAtom, K, Or
from app.services.logic.models import CoordinationMode
from app.services.systems.models import Point
from app.services.systems.system_service import (
    event_from_local_states,
    locality_violation,
)

MODES = [
    CoordinationMode.perfect(),
    CoordinationMode.within(0),
    CoordinationMode.within(1),
    CoordinationMode.within(2),
    CoordinationMode.eventual(),
]


def _receipt(sys):
    return build_ensemble(
        sys,
        ["A", "B"],
        {
            "A": event_from_local_states(sys, "A", ["cnt0"]),
            "B": event_from_local_states(sys, "B", ["cnt0"]),
        },
        name="receipt",
    )


def _random_ensemble(rng, sys):
    events = {}
    for agent in sys.agents:
        labels = [label for label in sorted(sys.views[agent]) if rng.random() < 0.4]
        events[agent] = event_from_local_states(sys, agent, labels)
    return build_ensemble(sys, sys.agents, events)


def test_receipt_ensemble(alice_bob):
    receipt = _receipt(alice_bob)
    assert check_coordination(alice_bob, receipt, CoordinationMode.within(2)).holds
    assert check_coordination(alice_bob, receipt, CoordinationMode.eventual()).holds
    assert not check_coordination(alice_bob, receipt, CoordinationMode.within(1)).holds

    perfect = check_coordination(alice_bob, receipt, CoordinationMode.perfect())
    assert not perfect.holds
    run, time = perfect.counterexample.points[0]
    assert run == "r(s=0,d=1)" and time == 0
    assert perfect.counterexample.agent == "B"

    nontrivial = is_nontrivial(alice_bob, receipt)
    assert nontrivial.holds
    assert nontrivial.witness is not None


def test_eps_caveat_near_horizon(alice_bob):
    receipt = _receipt(alice_bob)
    report = check_coordination(alice_bob, receipt, CoordinationMode.within(2))
    assert report.caveats == []
    late = build_ensemble(
        alice_bob,
        ["A", "B"],
        {
            "A": event_from_local_states(alice_bob, "A", ["cnt8"]),
            "B": event_from_local_states(alice_bob, "B", ["cnt8"]),
        },
    )
    report = check_coordination(alice_bob, late, CoordinationMode.within(2))
    assert report.caveats


def test_trivial_ensemble(alice_bob):
    everywhere = build_ensemble(
        alice_bob, ["A", "B"], {"A": alice_bob.points, "B": alice_bob.points}
    )
    report = is_nontrivial(alice_bob, everywhere)
    assert not report.holds
    assert report.counterexample is not None
    assert check_coordination(alice_bob, everywhere, CoordinationMode.perfect()).holds


def test_locality_is_enforced(alice_bob):
    sent = extension(alice_bob, Atom("sent")).points
    with pytest.raises(EnsembleError, match="not local to B") as exc_info:
        build_ensemble(alice_bob, ["B"], {"B": sent})
    inside, outside = exc_info.value.witness
    assert inside in sent and outside not in sent
    assert alice_bob.label("B", inside) == alice_bob.label("B", outside)


def test_ensemble_needs_one_event_per_member(alice_bob):
    with pytest.raises(EnsembleError, match="one event per member"):
        build_ensemble(alice_bob, ["A", "B"], {"A": []})


def test_eps_zero_is_perfect(multi_agent_battery):
    rng = random.Random(3)
    for sys, _ in multi_agent_battery:
        for _ in range(3):
            e = _random_ensemble(rng, sys)
            perfect = check_coordination(sys, e, CoordinationMode.perfect())
            within = check_coordination(sys, e, CoordinationMode.within(0))
            assert perfect.holds == within.holds


def test_coordination_modes_weaken(multi_agent_battery):
    rng = random.Random(5)
    for sys, _ in multi_agent_battery:
        for _ in range(3):
            e = _random_ensemble(rng, sys)
            verdicts = [check_coordination(sys, e, mode).holds for mode in MODES]
            # each mode implies every later one
            for stronger, weaker in zip(verdicts, verdicts[1:]):
                assert weaker or not stronger


def test_local_events_are_their_own_knowledge(multi_agent_battery):
    rng = random.Random(23)
    for sys, _ in multi_agent_battery:
        e = _random_ensemble(rng, sys)
        for agent in sys.agents:
            psi = EventAtom(e.events[agent], f"e_{agent}")
            assert extension(sys, K(agent, psi)).points == e.events[agent]

            arbitrary = frozenset(p for p in sys.points if rng.random() < 0.5)
            known = extension(sys, K(agent, EventAtom(arbitrary, "x"))).points
            if locality_violation(sys, agent, arbitrary) is None:
                assert known == arbitrary
            else:
                assert known < arbitrary


def test_psi_formula(alice_bob):
    receipt = _receipt(alice_bob)
    psi = psi_formula(alice_bob, receipt)
    assert isinstance(psi, Or)
    assert extension(alice_bob, psi).points == (
        receipt.events["A"] | receipt.events["B"]
    )
    single = build_ensemble(alice_bob, ["A"], {"A": receipt.events["A"]}, name="x")
    assert psi_formula(alice_bob, single) == EventAtom(receipt.events["A"], "psi_x")


def test_knowledge_ensemble_is_coordinated(alice_bob):
    for mode in MODES:
        e = knowledge_ensemble(alice_bob, ["A", "B"], mode, Atom("sent"))
        assert check_coordination(alice_bob, e, mode).holds


def test_correspondence_on_random_systems(battery):
    for sys, f in battery:
        for mode in MODES:
            reports = verify_correspondence(sys, sys.agents, mode, f)
            assert [r.holds for r in reports] == [True, True], reports


@pytest.mark.parametrize("mode", MODES, ids=str)
def test_correspondence_on_scenarios(mode, alice_bob, muddy_coarse):
    for sys, f in ((alice_bob, Atom("sent")), (muddy_coarse, Atom("atleast_one"))):
        reports = verify_correspondence(sys, sys.agents, mode, f)
        assert all(r.holds for r in reports)


def test_correspondence_with_supplied_ensemble(alice_bob):
    receipt = _receipt(alice_bob)
    mode = CoordinationMode.within(2)
    direction_a, direction_b = verify_correspondence(
        alice_bob, ["A", "B"], mode, Atom("sent"), receipt
    )
    assert direction_a.holds and direction_b.holds
    assert "receipt" in direction_b.claim

    with pytest.raises(EnsembleError, match="not coordinated"):
        verify_correspondence(
            alice_bob, ["A", "B"], CoordinationMode.perfect(), Atom("sent"), receipt
        )
    with pytest.raises(EnsembleError, match="differs"):
        verify_correspondence(alice_bob, ["A"], mode, Atom("sent"), receipt)


def test_load_ensemble(tmp_path, alice_bob):
    path = tmp_path / "ensemble.json"
    path.write_text(
        json.dumps(
            {
                "name": "receipt",
                "group": ["A", "B"],
                "events": {
                    "A": {"localStates": ["cnt0"]},
                    "B": {"points": [["r(s=0,d=0)", 9]]},
                },
            }
        ),
        encoding="utf-8",
    )
    e = load_ensemble(alice_bob, path)
    assert e.name == "receipt"
    assert e.events["B"] == {Point("r(s=0,d=0)", 9)}


@pytest.mark.parametrize(
    "content",
    [
        "{broken",
        json.dumps({"group": ["A"], "events": {"A": {}}}),
        json.dumps(
            {"group": ["A"], "events": {"A": {"localStates": [], "points": []}}}
        ),
        json.dumps({"group": [], "events": {}}),
    ],
)
def test_load_malformed_ensemble(tmp_path, alice_bob, content):
    path = tmp_path / "ensemble.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(EnsembleError):
        load_ensemble(alice_bob, path)
