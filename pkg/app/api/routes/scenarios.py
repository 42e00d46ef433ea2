"""Scenario generation and transcript commands"""

import argparse
from pathlib import Path

from app.api.loaders import parse_mode
from app.api.routes.schemas import CommandResult, ScenarioReport
from app.services.exceptions import ScenarioConfigError
from app.services.scenarios.alice_bob import gen_alice_bob
from app.services.scenarios.attack import (
    analyze_attack,
    builtin_protocol,
    gen_attack,
    load_protocol,
)
from app.services.scenarios.models import AliceBobConfig, MuddyConfig
from app.services.scenarios.muddy import gen_muddy, muddy_specification_check
from app.services.scenarios.transcript import render_transcript, transcript
from app.services.systems.models import InterpretedSystem
from app.services.systems.system_service import dump_system, load_system
from config import get_config

c = get_config()


def register(subparsers: argparse._SubParsersAction) -> None:
    """Add the scenario and transcript commands"""

    scenario = subparsers.add_parser("scenario", help="generate a scenario system")
    kinds = scenario.add_subparsers(dest="scenario", required=True)

    muddy = kinds.add_parser("muddy", help="muddy children")
    muddy.add_argument("--n", type=int, default=3)
    muddy.add_argument("--variant", choices=("coarse", "fine"), default="coarse")
    muddy.add_argument("--delay-min", type=int, default=1)
    muddy.add_argument("--delay-max", type=int, default=2)
    muddy.add_argument("--rounds", type=int, help="question rounds, default n")
    muddy.add_argument(
        "--check",
        action="store_true",
        help="model-check that answers match the children's knowledge",
    )
    muddy.add_argument("--out", required=True)
    muddy.set_defaults(handler=run_muddy)

    alicebob = kinds.add_parser("alicebob", help="Alice sends Bob one message")
    alicebob.add_argument("--eps", type=int, default=2)
    alicebob.add_argument("--max-send", type=int, default=3)
    alicebob.add_argument("--horizon", type=int)
    alicebob.add_argument("--timestamped", action="store_true")
    alicebob.add_argument("--out", required=True)
    alicebob.set_defaults(handler=run_alice_bob)

    attack = kinds.add_parser("attack", help="coordinated attack")
    source = attack.add_mutually_exclusive_group(required=True)
    source.add_argument("--protocol", help="never | ack:<k> | bounded-eps")
    source.add_argument("--protocol-file", help="decision table file")
    attack.add_argument("--eps", type=int, default=1, help="bound for bounded-eps")
    attack.add_argument("--max-rounds", type=int)
    attack.add_argument("--mode", help="also analyze: perfect | eps:N | eventual")
    attack.add_argument("--out", required=True)
    attack.set_defaults(handler=run_attack)

    log = subparsers.add_parser("transcript", help="per-time log of one run")
    log.add_argument("--system", required=True)
    log.add_argument("--run", required=True)
    log.set_defaults(handler=run_transcript)


def _write(sys: InterpretedSystem, out: str) -> None:
    try:
        text = dump_system(sys).json(indent=c.JSON_INDENT)
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ScenarioConfigError(f"cannot write {out}: {exc}") from exc


def _report(sys: InterpretedSystem, scenario: str, out: str, **extra) -> ScenarioReport:
    return ScenarioReport(
        scenario=scenario,
        out=out,
        agents=list(sys.agents),
        horizon=sys.horizon,
        runs=len(sys.runs),
        points=len(sys.points),
        **extra,
    )


def run_muddy(args: argparse.Namespace) -> CommandResult:
    """scenario muddy command"""
    cfg = MuddyConfig(
        n=args.n,
        variant=args.variant,
        delay_min=args.delay_min,
        delay_max=args.delay_max,
        question_rounds=args.rounds,
    )
    sys = gen_muddy(cfg)
    _write(sys, args.out)
    specification = muddy_specification_check(sys) if args.check else None
    status = 1 if specification is not None and not specification.holds else 0
    return CommandResult(
        report=_report(sys, "muddy", args.out, specification=specification),
        status=status,
        summary=f"muddy {cfg.variant} n={cfg.n}: {len(sys.runs)} runs -> {args.out}",
    )


def run_alice_bob(args: argparse.Namespace) -> CommandResult:
    """scenario alicebob command"""
    cfg = AliceBobConfig(
        eps=args.eps,
        max_send=args.max_send,
        horizon=args.horizon,
        timestamped=args.timestamped,
    )
    sys = gen_alice_bob(cfg)
    _write(sys, args.out)
    return CommandResult(
        report=_report(sys, "alicebob", args.out),
        status=0,
        summary=f"alice-bob eps={cfg.eps}: {len(sys.runs)} runs -> {args.out}",
    )


def run_attack(args: argparse.Namespace) -> CommandResult:
    """scenario attack command"""
    if args.protocol_file:
        protocol = load_protocol(args.protocol_file)
    else:
        protocol = builtin_protocol(args.protocol, args.eps, args.max_rounds)
    sys = gen_attack(protocol)
    _write(sys, args.out)
    attack = analyze_attack(sys, parse_mode(args.mode)) if args.mode else None
    summary = f"attack {protocol.name}: {len(sys.runs)} runs -> {args.out}"
    if attack is not None:
        summary += (
            f"; attacks_ever={attack.attacks_ever} coordinated={attack.coordinated} "
            f"ck_at_attack={attack.ck_at_attack}"
        )
    return CommandResult(
        report=_report(sys, "attack", args.out, attack=attack),
        status=0,
        summary=summary,
    )


def run_transcript(args: argparse.Namespace) -> CommandResult:
    """transcript command"""
    sys = load_system(args.system)
    report = transcript(sys, args.run)
    return CommandResult(report=report, status=0, summary=render_transcript(report))
