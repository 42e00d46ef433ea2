"""Coordination, imprecision and verification commands"""

import argparse

from app.api.loaders import parse_group, parse_mode
from app.api.routes.schemas import (
    CommandResult,
    EnsembleReport,
    ImprecisionReport,
    VerifyReport,
)
from app.services.coordination import coordination_service
from app.services.coordination.models import Evidence, VerificationReport
from app.services.exceptions import CheckerError
from app.services.imprecision import imprecision_service
from app.services.logic.models import CoordinationMode
from app.services.logic.parser import format_formula, parse_formula
from app.services.systems.system_service import load_system
from app.services.systems.utils import point_refs

CLAIMS = ("prop1", "prop3", "prop-eventual", "cor3", "prop2")


def register(subparsers: argparse._SubParsersAction) -> None:
    """Add the ensemble, imprecision and verify commands"""

    ensemble = subparsers.add_parser("ensemble", help="check an ensemble file")
    ensemble.add_argument("--system", required=True)
    ensemble.add_argument("--ensemble", required=True, help="ensemble file")
    ensemble.add_argument(
        "--mode", default="perfect", help="perfect | eps:N | eventual"
    )
    ensemble.set_defaults(handler=run_ensemble)

    imprecision = subparsers.add_parser(
        "imprecision", help="decide whether the system has temporal imprecision"
    )
    imprecision.add_argument("--system", required=True)
    imprecision.add_argument("--group", help='e.g. "{A,B}"; default all agents')
    imprecision.add_argument(
        "--partition",
        action="store_true",
        help="include the group's reachability classes",
    )
    imprecision.set_defaults(handler=run_imprecision)

    verify = subparsers.add_parser("verify", help="verify a named claim on a system")
    verify.add_argument("--system", required=True)
    verify.add_argument("--claim", required=True, choices=CLAIMS)
    verify.add_argument("--group", help='e.g. "{A,B}"; default all agents')
    verify.add_argument("--formula", default="true")
    verify.add_argument("--eps", type=int, help="interval length for prop3")
    verify.add_argument("--ensemble", help="ensemble file for the (b) direction")
    verify.set_defaults(handler=run_verify)


def run_ensemble(args: argparse.Namespace) -> CommandResult:
    """ensemble command"""
    sys = load_system(args.system)
    mode = parse_mode(args.mode)
    ensemble = coordination_service.load_ensemble(sys, args.ensemble)
    coordination = coordination_service.check_coordination(sys, ensemble, mode)
    nontrivial = coordination_service.is_nontrivial(sys, ensemble)
    report = EnsembleReport(
        ensemble=ensemble.name,
        group=list(ensemble.group),
        mode=str(mode),
        coordination=coordination,
        nontrivial=nontrivial,
    )
    summary = (
        f"ensemble {ensemble.name}: "
        f"{'coordinated' if coordination.holds else 'not coordinated'} ({mode}), "
        f"{'nontrivial' if nontrivial.holds else 'trivial'}"
    )
    return CommandResult(
        report=report, status=0 if coordination.holds else 1, summary=summary
    )


def run_imprecision(args: argparse.Namespace) -> CommandResult:
    """imprecision command"""
    sys = load_system(args.system)
    group = parse_group(sys, args.group)
    witness = imprecision_service.has_temporal_imprecision(sys, group)
    partition = (
        imprecision_service.reachability_partition(sys, group)
        if args.partition
        else None
    )
    if witness.has_imprecision:
        summary = f"temporal imprecision holds for {list(group)}"
    else:
        failure = witness.failure
        where = f" at {failure.run}:{failure.time}" if failure and failure.run else ""
        summary = f"no temporal imprecision{where}: {failure.reason if failure else ''}"
    return CommandResult(
        report=ImprecisionReport(witness=witness, partition=partition),
        status=0,
        summary=summary,
    )


def _mode_for(args: argparse.Namespace) -> CoordinationMode:
    if args.claim == "prop1":
        return CoordinationMode.perfect()
    if args.claim == "prop3":
        if args.eps is None or args.eps < 0:
            raise CheckerError("prop3 needs --eps N with N >= 0")
        return CoordinationMode.within(args.eps)
    return CoordinationMode.eventual()


def _prop2_reports(sys, group) -> tuple[list[VerificationReport], list[str]]:
    witness = imprecision_service.has_temporal_imprecision(sys, group)
    found = imprecision_service.find_nontrivial_perfect_ensemble(sys, group)
    caveats = []
    if not witness.has_imprecision:
        caveats.append("the system lacks temporal imprecision for this group")

    claim = "no nontrivial perfectly coordinated ensemble under temporal imprecision"
    if found is None:
        return [VerificationReport(claim=claim, holds=True)], caveats

    example = Evidence(
        points=point_refs(next(iter(found.events.values()))),
        explanation="a union of reachability classes splitting some run",
    )
    if witness.has_imprecision:
        main = VerificationReport(claim=claim, holds=False, counterexample=example)
    else:
        main = VerificationReport(claim=claim, holds=True, witness=example)
    return [
        main,
        coordination_service.check_coordination(
            sys, found, CoordinationMode.perfect()
        ),
        coordination_service.is_nontrivial(sys, found),
    ], caveats


def run_verify(args: argparse.Namespace) -> CommandResult:
    """verify command"""
    sys = load_system(args.system)
    group = parse_group(sys, args.group)
    formula = parse_formula(args.formula)
    caveats: list[str] = []

    if args.claim == "cor3":
        reports = [imprecision_service.ck_constant_check(sys, group, formula)]
        if len(sys.agents) >= 2 and len(group) >= 2:
            witness = imprecision_service.has_temporal_imprecision(sys, group)
            if not witness.has_imprecision:
                caveats.append(
                    "the system lacks temporal imprecision; constancy is not implied"
                )
    elif args.claim == "prop2":
        reports, caveats = _prop2_reports(sys, group)
    else:
        mode = _mode_for(args)
        ensemble = (
            coordination_service.load_ensemble(sys, args.ensemble)
            if args.ensemble
            else None
        )
        reports = coordination_service.verify_correspondence(
            sys, group, mode, formula, ensemble
        )

    holds = all(report.holds for report in reports)
    report = VerifyReport(
        claim=args.claim,
        group=list(group),
        formula=format_formula(formula),
        holds=holds,
        reports=reports,
        caveats=caveats,
    )
    lines = [f"{args.claim}: {'holds' if holds else 'FAILS'}"]
    lines += [f"  {r.claim}: {r.holds}" for r in reports]
    return CommandResult(
        report=report, status=0 if holds else 1, summary="\n".join(lines)
    )
