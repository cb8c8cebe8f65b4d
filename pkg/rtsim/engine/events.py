"""Trace events."""
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class EventKind(str, Enum):
    JOB_RELEASE = "JOB_RELEASE"
    JOB_COMPLETE = "JOB_COMPLETE"
    CS_REQUEST = "CS_REQUEST"
    CS_ACQUIRE = "CS_ACQUIRE"
    CS_RELEASE = "CS_RELEASE"
    SUSPEND = "SUSPEND"
    RESUME = "RESUME"
    PREEMPT = "PREEMPT"
    DISPATCH = "DISPATCH"
    MIGRATE_TO = "MIGRATE_TO"
    MIGRATE_BACK = "MIGRATE_BACK"
    DEADLINE_CHECK = "DEADLINE_CHECK"
    OVERHEAD_BEGIN = "OVERHEAD_BEGIN"
    OVERHEAD_END = "OVERHEAD_END"
    WARNING = "WARNING"


# Events after which a task no longer runs on the processor it was
# dispatched to.
STOP_KINDS = frozenset(
    {
        EventKind.PREEMPT,
        EventKind.SUSPEND,
        EventKind.MIGRATE_TO,
        EventKind.MIGRATE_BACK,
        EventKind.JOB_COMPLETE,
    }
)


@dataclass(frozen=True)
class Event:
    time: int
    seq: int
    kind: EventKind
    task: str
    job: int
    processor: int
    resource: Optional[str] = None
    priority: Optional[int] = None
    detail: str = ""

    def __str__(self):
        parts = [f"{self.time:>12} #{self.seq:<6} {self.kind.value:<15} {self.task}/{self.job} CPU#{self.processor}"]
        if self.resource is not None:
            parts.append(f"res={self.resource}")
        if self.priority is not None:
            parts.append(f"prio={self.priority}")
        if self.detail:
            parts.append(self.detail)
        return " ".join(parts)
