"""The evaluation task set: three application processors with five tasks
each, one per priority level, every task using one of three shared
resources, and a fourth processor reserved for synchronization."""
from dataclasses import dataclass, field
from typing import Dict

from ..model.system import (
    CriticalSectionSpec,
    OverheadModel,
    ProcessorRole,
    Protocol,
    ResourceSpec,
    Scenario,
    SystemConfig,
    TaskSpec,
    highest_user_priority,
)

# Most urgent first.
LEVELS = ("H", "MH", "M", "ML", "L")
APPLICATION_PROCESSORS = 3
SYNC_PROCESSOR = 3
RESOURCES = ("s1", "s2", "s3")

# Processor -> priority level -> requested resource.
TESTAPP_PATTERN: Dict[int, Dict[str, str]] = {
    0: {"L": "s1", "ML": "s2", "M": "s3", "MH": "s2", "H": "s3"},
    1: {"L": "s2", "ML": "s3", "M": "s1", "MH": "s3", "H": "s1"},
    2: {"L": "s3", "ML": "s1", "M": "s2", "MH": "s1", "H": "s2"},
}


def _default_periods():
    return {"H": 1_000_000, "MH": 2_000_000, "M": 2_500_000, "ML": 4_000_000, "L": 5_000_000}


@dataclass(frozen=True)
class TestAppParams:
    """Timing of the evaluation task set. The allocation fixes only
    priorities and resources; these defaults keep every task schedulable
    without overheads."""

    wcet: int = 50_000
    cs_offset: int = 20_000
    cs_length: int = 10_000
    periods: Dict[str, int] = field(default_factory=_default_periods)
    overheads: OverheadModel = field(default_factory=OverheadModel)


def level_priority(level: str, processor: int) -> int:
    """Level-major ladder: H is 1..3, MH 4..6, and so on down to L 13..15."""
    return LEVELS.index(level) * APPLICATION_PROCESSORS + processor + 1


def level_task_id(level: str, processor: int) -> str:
    return f"cpu{processor}_{level}"


def build_testapp_scenario(params: TestAppParams = None, protocol: Protocol = Protocol.DPCP) -> Scenario:
    """Build the 15-task allocation. Under a distributed protocol CPU#3 is
    the synchronization processor of all three resources; otherwise all four
    processors are application processors and CPU#3 stays idle."""
    params = params or TestAppParams()
    if not isinstance(protocol, Protocol):
        protocol = Protocol.parse(protocol)
    tasks = []
    for processor in range(APPLICATION_PROCESSORS):
        for level in reversed(LEVELS):
            period = params.periods[level]
            tasks.append(
                TaskSpec(
                    id=level_task_id(level, processor),
                    wcet=params.wcet,
                    period=period,
                    deadline=period,
                    priority=level_priority(level, processor),
                    home_processor=processor,
                    critical_sections=(
                        CriticalSectionSpec(TESTAPP_PATTERN[processor][level], params.cs_offset, params.cs_length),
                    ),
                )
            )
    if protocol.distributed:
        roles = (ProcessorRole.APPLICATION,) * APPLICATION_PROCESSORS + (ProcessorRole.SYNCHRONIZATION,)
    else:
        roles = (ProcessorRole.APPLICATION,) * (APPLICATION_PROCESSORS + 1)
    resources = tuple(
        ResourceSpec(
            resource_id,
            highest_user_priority(tasks, resource_id),
            SYNC_PROCESSOR if protocol.distributed else None,
        )
        for resource_id in RESOURCES
    )
    config = SystemConfig(APPLICATION_PROCESSORS + 1, roles, protocol, params.overheads)
    return Scenario(config, tuple(tasks), resources)
