"""Effects returned by protocol hooks. The engine applies them in order."""
from dataclasses import dataclass


@dataclass(frozen=True)
class SetPriority:
    """Set the task's effective priority on the processor it currently uses."""

    task_id: str
    priority: int


@dataclass(frozen=True)
class Suspend:
    """Block the waiting task's scheduler node for the whole wait."""

    task_id: str


@dataclass(frozen=True)
class Spin:
    """Keep the waiting task's node SCHEDULED, burning processor time."""

    task_id: str


@dataclass(frozen=True)
class Grant:
    """The waiting task now owns the semaphore and starts its critical
    section."""

    task_id: str
