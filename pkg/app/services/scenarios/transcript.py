from app.services.scenarios.models import TranscriptEntry, TranscriptReport
from app.services.systems.models import InterpretedSystem, Point
from app.services.systems.system_service import require_point


def transcript(sys: InterpretedSystem, run_id: str) -> TranscriptReport:
    """Global state, true propositions and logged actions at every time of a run"""

    require_point(sys, Point(run_id, 0))
    logged: dict[int, list[str]] = {}
    for time, text in sys.metadata.get("actions", {}).get(run_id, []):
        logged.setdefault(int(time), []).append(str(text))

    entries = []
    for point in sys.run_points(run_id):
        state = sys.state_at(point)
        entries.append(
            TranscriptEntry(
                time=point.time,
                env=state.env,
                locals=dict(state.locals),
                props=sorted(sys.props_at(point)),
                actions=logged.get(point.time, []),
            )
        )
    return TranscriptReport(
        run=run_id, scenario=sys.metadata.get("scenario"), entries=entries
    )


def render_transcript(report: TranscriptReport) -> str:
    """Plain-text form of a transcript"""

    lines = [f"run {report.run}" + (f" ({report.scenario})" if report.scenario else "")]
    for entry in report.entries:
        props = ", ".join(entry.props) or "-"
        lines.append(f"t={entry.time}  [{props}]")
        for agent, label in entry.locals.items():
            lines.append(f"    {agent}: {label}")
        lines.extend(f"    > {action}" for action in entry.actions)
    return "\n".join(lines)
