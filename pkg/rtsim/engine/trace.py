"""The result of one simulation run."""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .events import Event, EventKind


@dataclass
class ProcessorAccount:
    """Where a processor's time went. The four buckets add up to the
    horizon."""

    execution: int = 0
    spin: int = 0
    overhead: int = 0
    idle: int = 0

    @property
    def busy(self) -> int:
        return self.execution + self.spin + self.overhead

    @property
    def total(self) -> int:
        return self.busy + self.idle


@dataclass
class Trace:
    events: List[Event]
    horizon: int
    protocol: str
    task_ids: Tuple[str, ...]
    fingerprint: str = ""
    seed: int = 0
    accounting: List[ProcessorAccount] = field(default_factory=list)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def of_kind(self, *kinds: EventKind) -> List[Event]:
        return [event for event in self.events if event.kind in kinds]

    def for_task(self, task_id: str, job: Optional[int] = None) -> List[Event]:
        return [
            event
            for event in self.events
            if event.task == task_id and (job is None or event.job == job)
        ]

    @property
    def warnings(self) -> List[Event]:
        return self.of_kind(EventKind.WARNING)

    def dump(self) -> str:
        """One line per event, for logs and failing test output."""
        return "\n".join(str(event) for event in self.events)
