"""Formula checking commands"""

import argparse
from typing import Optional

from app.api.loaders import load_point, parse_bool
from app.api.routes.schemas import CheckReport, CommandResult, ExtensionReport
from app.services.logic.checker import extension
from app.services.logic.formulas import max_eps
from app.services.logic.parser import format_formula, parse_formula
from app.services.logic.utils import horizon_caveat
from app.services.systems.models import Point
from app.services.systems.system_service import load_system
from app.services.systems.utils import PointRef, point_refs


def register(subparsers: argparse._SubParsersAction) -> None:
    """Add the check and extension commands"""

    check = subparsers.add_parser(
        "check",
        help="evaluate a formula at a point, or check that it is valid",
    )
    check.add_argument("--system", required=True, help="system file")
    check.add_argument("--formula", required=True, help='e.g. "C[{A,B}] sent"')
    check.add_argument("--at", help="point RUN:TIME; without it, check validity")
    check.add_argument("--assert", dest="expected", help="true | false")
    check.set_defaults(handler=run_check)

    ext = subparsers.add_parser("extension", help="every point where a formula holds")
    ext.add_argument("--system", required=True, help="system file")
    ext.add_argument("--formula", required=True)
    ext.set_defaults(handler=run_extension)


def run_check(args: argparse.Namespace) -> CommandResult:
    """check command"""
    sys = load_system(args.system)
    formula = parse_formula(args.formula)
    expected = None if args.expected is None else parse_bool(args.expected)
    points = extension(sys, formula).points
    text = format_formula(formula)

    point: Optional[Point] = None
    counterexample: Optional[Point] = None
    everywhere: Optional[list[PointRef]] = None
    if args.at:
        point = load_point(sys, args.at)
        holds = point in points
        summary = f"{text} at {point}: {holds}"
    else:
        missing = sys.all_points - points
        holds = not missing
        counterexample = min(missing) if missing else None
        everywhere = point_refs(points)
        summary = f"{text} is {'valid' if holds else f'false at {counterexample}'}"

    caveat = horizon_caveat(
        max_eps(formula), sys.horizon, point.time if point else None
    )
    caveats = [caveat] if caveat else []

    assertion_holds = None if expected is None else holds == expected
    report = CheckReport(
        formula=text,
        point=(point.run, point.time) if point else None,
        holds=holds,
        expected=expected,
        assertion_holds=assertion_holds,
        counterexample=(
            (counterexample.run, counterexample.time) if counterexample else None
        ),
        caveats=caveats,
        extension=everywhere,
    )
    if assertion_holds is False:
        summary += f" (asserted {expected})"
    return CommandResult(
        report=report, status=1 if assertion_holds is False else 0, summary=summary
    )


def run_extension(args: argparse.Namespace) -> CommandResult:
    """extension command"""
    sys = load_system(args.system)
    formula = parse_formula(args.formula)
    points = extension(sys, formula).points
    text = format_formula(formula)
    report = ExtensionReport(
        formula=text,
        size=len(points),
        total=len(sys.points),
        points=point_refs(points),
    )
    return CommandResult(
        report=report,
        status=0,
        summary=f"{text} holds at {len(points)} of {len(sys.points)} points",
    )
