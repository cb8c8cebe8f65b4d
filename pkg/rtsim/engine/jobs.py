"""Job state and the per-job execution plan.

A job runs its task's segments as a queue of steps. Timed steps (EXEC, CS,
OVERHEAD) consume processor time; the others take effect instantly when the
job is on a processor: OBTAIN and RELEASE call the lock and unlock
directives, MIGRATE moves the task to another processor, WAIT is pushed by a
blocked OBTAIN and ends when the semaphore is handed over."""
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Optional

from ..model.system import OverheadKind, TaskSpec
from ..sync.protocols import PlacementKind


class StepKind(str, Enum):
    EXEC = "EXEC"
    CS = "CS"
    OVERHEAD = "OVERHEAD"
    OBTAIN = "OBTAIN"
    WAIT = "WAIT"
    RELEASE = "RELEASE"
    MIGRATE = "MIGRATE"


TIMED_STEPS = (StepKind.EXEC, StepKind.CS, StepKind.OVERHEAD)


class Phase(str, Enum):
    NONCRIT = "NONCRIT"
    WAITING = "WAITING"
    SPINNING = "SPINNING"
    IN_CS = "IN_CS"
    MIGRATING = "MIGRATING"
    DONE = "DONE"


@dataclass
class Step:
    kind: StepKind
    remaining: int = 0
    resource_id: Optional[str] = None
    overhead: Optional[OverheadKind] = None
    target: Optional[int] = None
    started: bool = False
    granted: bool = False


@dataclass
class JobState:
    task: TaskSpec
    number: int
    release_time: int
    abs_deadline: int
    steps: Deque[Step] = field(default_factory=deque)
    executed: int = 0
    remaining: int = 0
    phase: Phase = Phase.NONCRIT
    migrations: int = 0
    blocking_accrued: int = 0
    overhead: int = 0
    spin: int = 0
    request_time: Optional[int] = None
    completion_time: Optional[int] = None
    missed: bool = False

    def __post_init__(self):
        self.remaining = self.task.wcet - self.executed

    @property
    def task_id(self) -> str:
        return self.task.id

    @property
    def response_time(self) -> Optional[int]:
        if self.completion_time is None:
            return None
        return self.completion_time - self.release_time


def build_plan(task: TaskSpec, overheads, placements) -> Deque[Step]:
    """Expand the task's segments into steps.

    @param overheads: the `OverheadModel`; zero costs add no step
    @param placements: resource id to `Placement`
    """
    steps = deque()

    def overhead(kind):
        cost = overheads.cost(kind)
        if cost > 0:
            steps.append(Step(StepKind.OVERHEAD, cost, overhead=kind))

    segments = task.segments()
    location = task.home_processor
    for index, (kind, value) in enumerate(segments):
        if kind == "exec":
            steps.append(Step(StepKind.EXEC, value))
            continue
        cs = value
        placement = placements[cs.resource_id]
        remote = placement.kind is PlacementKind.REMOTE
        if remote and location != placement.processor:
            overhead(OverheadKind.MIG_TO)
            steps.append(Step(StepKind.MIGRATE, target=placement.processor))
            location = placement.processor
        overhead(OverheadKind.LOCK)
        steps.append(Step(StepKind.OBTAIN, resource_id=cs.resource_id))
        steps.append(Step(StepKind.CS, cs.length, resource_id=cs.resource_id))
        overhead(OverheadKind.UNLOCK)
        steps.append(Step(StepKind.RELEASE, resource_id=cs.resource_id))
        # Go home only if non-critical work follows; a following critical
        # section migrates on its own, a final one completes in place.
        following = segments[index + 1][0] if index + 1 < len(segments) else None
        if remote and following == "exec":
            overhead(OverheadKind.MIG_BACK)
            steps.append(Step(StepKind.MIGRATE, target=task.home_processor))
            location = task.home_processor
    return steps
