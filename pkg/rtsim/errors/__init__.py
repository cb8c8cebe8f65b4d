"""Custom error classes for the simulator."""


class SimulationError(Exception):
    """General class of exceptions raised by the simulator. Keeps the message
    around so that callers (the CLI in particular) can report it verbatim."""

    def __init__(self, message):
        self.message = message
        super().__init__(message)


class ConfigError(SimulationError):
    """A scenario, overhead file or duration string could not be parsed."""


class SyncError(SimulationError):
    """A lock or unlock directive was used incorrectly."""


class NestedAccessError(SyncError):
    """A task requested a resource while holding or waiting for another one."""

    def __init__(self, task_id, resource_id):
        self.task_id = task_id
        self.resource_id = resource_id
        super().__init__(
            f"nested access rejected: {task_id} requested {resource_id} "
            "while already holding or waiting for a resource"
        )


class NotOwnerError(SyncError):
    """Release of a semaphore by a task that does not own it."""

    def __init__(self, task_id, resource_id, owner=None):
        self.task_id = task_id
        self.resource_id = resource_id
        self.owner = owner
        super().__init__(
            f"not owner: {task_id} released {resource_id} (owner: {owner})"
        )


class SimulationFault(SimulationError):
    """An internal invariant was breached. This means there is a bug in the
    engine, not in the scenario, so the run is aborted. `events` holds the
    trace prefix emitted before the breach."""

    def __init__(self, message, events=None):
        self.events = list(events or [])
        super().__init__(message)


class OracleGuardError(SimulationError):
    """The instance is too large for the tick-by-tick oracle."""


class ExportError(SimulationError):
    """Reading or writing a result file failed."""

    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")
