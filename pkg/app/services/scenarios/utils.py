from typing import Any, Iterable, Mapping

from app.services.exceptions import ScenarioConfigError
from app.services.systems.models import InterpretedSystem
from app.services.systems.system_service import build_system
from config import get_config

c = get_config()

# one state of a run: (env, locals, props)
StateRow = tuple[str, Mapping[str, str], Iterable[str]]


def check_run_budget(scenario: str, count: int):
    """refuse enumerations larger than MAX_GENERATED_RUNS"""
    if count > c.MAX_GENERATED_RUNS:
        raise ScenarioConfigError(
            f"{scenario} would enumerate {count} runs, "
            f"more than MAX_GENERATED_RUNS={c.MAX_GENERATED_RUNS}"
        )


def assemble_system(
    agents: Iterable[str],
    horizon: int,
    runs: Mapping[str, list[StateRow]],
    propositions: Iterable[str],
    metadata: Mapping[str, Any],
) -> InterpretedSystem:
    """Build a generated system through the system file format, runs sorted by id"""
    return build_system(
        {
            "agents": list(agents),
            "horizon": horizon,
            "runs": [
                {
                    "id": run_id,
                    "states": [
                        {"env": env, "locals": dict(local), "props": sorted(props)}
                        for env, local, props in runs[run_id]
                    ],
                }
                for run_id in sorted(runs)
            ],
            "propositions": sorted(set(propositions)),
            "metadata": dict(metadata),
        }
    )
