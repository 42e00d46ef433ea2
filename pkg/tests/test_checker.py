import gc
import weakref

import pytest

from app.services.exceptions import ResolutionError
from app.services.logic.checker import (
    checker_for,
    ck_via_closure,
    evaluate,
    extension,
    gfp_extension,
    iterated_everyone,
    stabilized_everyone,
)
from app.services.logic.formulas import (
    And,
    Atom,
    C,
    Cdiamond,
    Ceps,
    EventAtom,
    FalseFormula,
    Implies,
    K,
    Not,
    TrueFormula,
    alternating_knowledge,
)
from app.services.logic.models import CoordinationMode
from app.services.logic.parser import parse_formula
from app.services.logic.utils import horizon_caveat
from app.services.scenarios.alice_bob import gen_alice_bob
from app.services.scenarios.models import AliceBobConfig, MuddyConfig
from app.services.scenarios.muddy import gen_muddy
from app.services.systems.models import Point
from app.services.systems.system_service import build_system

SENT = Atom("sent")


def _run_times(sys, points, run_id):
    return {p.time for p in points if p.run == run_id}


def _send_time(run_id):
    return int(run_id.split("s=")[1].split(",")[0])


def test_singleton_system_collapses():
    sys = build_system(
        {
            "agents": ["A"],
            "horizon": 0,
            "runs": [
                {
                    "id": "r",
                    "states": [{"env": "e", "locals": {"A": "a"}, "props": ["p"]}],
                }
            ],
        }
    )
    point = Point("r", 0)
    for text in ("C[{A}] p", "Ce[{A},3] p", "Cd[{A}] p", "K[A] p", "Ek[{A},4] p"):
        assert evaluate(sys, parse_formula(text), point)
    assert not evaluate(sys, parse_formula("!p"), point)


def test_true_and_valid_event_atoms(alice_bob):
    assert extension(alice_bob, TrueFormula()).points == alice_bob.all_points
    assert extension(alice_bob, FalseFormula()).points == frozenset()
    everywhere = EventAtom(alice_bob.all_points, "everywhere")
    assert (
        extension(alice_bob, C(frozenset({"A", "B"}), everywhere)).points
        == alice_bob.all_points
    )


def test_unknown_names(alice_bob):
    with pytest.raises(ResolutionError, match="unknown proposition"):
        extension(alice_bob, Atom("nope"))
    with pytest.raises(ResolutionError, match="unknown agent"):
        extension(alice_bob, K("Z", SENT))
    with pytest.raises(ResolutionError, match="unknown agent"):
        extension(alice_bob, parse_formula("E[{A,Z}] sent"))
    with pytest.raises(ResolutionError):
        evaluate(alice_bob, SENT, Point("r(s=0,d=0)", 100))


def test_s5_schemas(battery):
    for sys, f in battery:
        for agent in sys.agents:
            knows = K(agent, f)
            schemas = [
                Implies(knows, f),
                Implies(knows, K(agent, knows)),
                Implies(Not(knows), K(agent, Not(knows))),
                Implies(
                    K(agent, Implies(f, Atom("p"))),
                    Implies(knows, K(agent, Atom("p"))),
                ),
            ]
            for schema in schemas:
                assert extension(sys, schema).points == sys.all_points


def test_fixed_point_identities(battery):
    for sys, f in battery:
        checker = checker_for(sys)
        group = frozenset(sys.agents)
        target = checker.extension(f)
        common = checker.extension(C(group, f))
        assert common == checker.everyone(group, target & common)
        for eps in (0, 1, 2):
            within = checker.extension(Ceps(group, eps, f))
            assert within == checker.everyone_within(group, eps, target & within)
        eventual = checker.extension(Cdiamond(group, f))
        assert eventual == checker.everyone_eventually(group, target & eventual)


def test_common_knowledge_oracles_agree(battery):
    for sys, f in battery:
        group = sys.agents
        gfp = gfp_extension(sys, group, CoordinationMode.perfect(), f).points
        assert gfp == ck_via_closure(sys, group, f).points
        _, stable = stabilized_everyone(sys, group, f)
        assert stable.points == gfp


def test_approximation_chain(battery):
    for sys, f in battery:
        group = sys.agents
        perfect = gfp_extension(sys, group, CoordinationMode.perfect(), f).points
        eventual = gfp_extension(sys, group, CoordinationMode.eventual(), f).points
        assert gfp_extension(sys, group, CoordinationMode.within(0), f).points == (
            perfect
        )
        chain = [perfect]
        for eps in (1, 2, 3):
            within = gfp_extension(sys, group, CoordinationMode.within(eps), f).points
            assert perfect <= within <= eventual
            chain.append(within)
        # C^eps grows with eps
        for narrower, wider in zip(chain, chain[1:]):
            assert narrower <= wider


def test_iterated_everyone(muddy_coarse):
    group = muddy_coarse.agents
    f = Atom("atleast_one")
    assert iterated_everyone(muddy_coarse, group, f, 0).points == (
        extension(muddy_coarse, f).points
    )
    with pytest.raises(ValueError):
        iterated_everyone(muddy_coarse, group, f, -1)
    one = iterated_everyone(muddy_coarse, group, f, 1).points
    two = iterated_everyone(muddy_coarse, group, f, 2).points
    assert two <= one


def test_gfp_empty_when_never_satisfied():
    sys = build_system(
        {
            "agents": ["A", "B"],
            "horizon": 2,
            "runs": [
                {
                    "id": "r",
                    "states": [
                        {"env": "e", "locals": {"A": f"a{t}", "B": "b"}}
                        for t in range(3)
                    ],
                }
            ],
            "propositions": ["p"],
        }
    )
    for mode in (
        CoordinationMode.perfect(),
        CoordinationMode.within(1),
        CoordinationMode.eventual(),
    ):
        assert gfp_extension(sys, ["A", "B"], mode, Atom("p")).points == frozenset()


def test_muddy_staircase():
    for n in (2, 3, 4):
        sys = gen_muddy(MuddyConfig(n=n))
        group = sys.agents
        f = Atom("atleast_one")
        for run in sys.runs:
            k = len(run.id.removeprefix("muddy_").replace("none", ""))
            if k == 0:
                continue
            start = Point(run.id, 0)
            before = iterated_everyone(sys, group, f, k - 1).points
            at_k = iterated_everyone(sys, group, f, k).points
            assert start in before
            assert start not in at_k
            assert Point(run.id, 1) in ck_via_closure(sys, group, f).points


def test_muddy_common_knowledge_after_announcement(muddy_coarse):
    ck = extension(muddy_coarse, parse_formula("C[{1,2,3}] atleast_one")).points
    assert Point("muddy_12", 0) not in ck
    assert {Point("muddy_12", t) for t in range(1, muddy_coarse.horizon + 1)} <= ck
    assert not any(p.run == "muddy_none" for p in ck)
    assert evaluate(
        muddy_coarse, parse_formula("Ek[{1,2,3},1] atleast_one"), Point("muddy_12", 0)
    )
    assert not evaluate(
        muddy_coarse, parse_formula("Ek[{1,2,3},2] atleast_one"), Point("muddy_12", 0)
    )


def test_bob_knows_after_receipt(alice_bob):
    known = extension(alice_bob, parse_formula("K[B] sent")).points
    assert known == {
        p for p in alice_bob.points if alice_bob.label("B", p) != "waiting"
    }


@pytest.mark.parametrize("eps", [1, 2])
def test_alice_bob_thresholds(eps):
    sys = gen_alice_bob(AliceBobConfig(eps=eps, max_send=3))
    assert sys.horizon == 3 + 3 * eps
    for k in (1, 2, 3):
        points = extension(sys, alternating_knowledge("A", "B", k, SENT)).points
        for run in sys.runs:
            threshold = _send_time(run.id) + k * eps
            assert _run_times(sys, points, run.id) == set(
                range(threshold, sys.horizon + 1)
            )
    assert extension(sys, parse_formula("C[{A,B}] sent")).points == frozenset()


@pytest.mark.parametrize("eps", [1, 2])
def test_timestamped_common_knowledge_of_send_time(eps):
    sys = gen_alice_bob(AliceBobConfig(eps=eps, max_send=3, timestamped=True))
    for s in range(4):
        f = Atom(f"sent@{s}")
        result = gfp_extension(sys, ["A", "B"], CoordinationMode.perfect(), f).points
        assert result == {
            p
            for p in sys.points
            if p.run.startswith(f"r(s={s},") and p.time >= s + eps
        }
        assert result == ck_via_closure(sys, ["A", "B"], f).points


def test_eps_common_knowledge_in_alice_bob(alice_bob):
    group = ["A", "B"]
    within = gfp_extension(alice_bob, group, CoordinationMode.within(2), SENT).points
    eventual = gfp_extension(alice_bob, group, CoordinationMode.eventual(), SENT).points
    assert within
    assert within <= eventual
    assert Point("r(s=0,d=0)", 0) in within
    assert Point("r(s=3,d=2)", 0) not in within


def test_memoized_extensions_are_stable(alice_bob):
    f = And(SENT, K("B", SENT))
    first = extension(alice_bob, f).points
    assert extension(alice_bob, f).points is first


def test_checkers_do_not_keep_systems_alive():
    sys = build_system(
        {
            "agents": ["A"],
            "horizon": 1,
            "runs": [
                {
                    "id": "r",
                    "states": [
                        {"env": "e", "locals": {"A": "a"}, "props": ["p"]},
                        {"env": "e", "locals": {"A": "b"}},
                    ],
                }
            ],
        }
    )
    assert extension(sys, parse_formula("K[A] p")).points == {Point("r", 0)}
    system_ref = weakref.ref(sys)
    checker_ref = weakref.ref(checker_for(sys))

    del sys
    gc.collect()
    assert system_ref() is None
    assert checker_ref() is None


def test_horizon_caveat():
    assert horizon_caveat(2, 9) is None
    assert horizon_caveat(2, 9, 5) is None
    assert "m'+2 <= 9" in horizon_caveat(2, 9, 8)
    wide = horizon_caveat(12, 9)
    assert "effective eps = min(eps, horizon) = 9" in wide
    assert "every eps-operator empty" in wide
