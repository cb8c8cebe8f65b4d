"""Domain types: tasks, critical sections, resources, processors and the
system configuration. Instances are immutable and carry no behaviour beyond
small derived properties; validation lives in `validation.py`."""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import reduce
from typing import Optional, Tuple

# Time is integer nanoseconds everywhere.
TimeNs = int

# Priorities are ascending integers, 1 is the most urgent task priority. The
# level above every task priority is reserved for non-preemptive execution.
Priority = int
HIGHEST_PRIORITY: Priority = 0


def more_urgent(a: Priority, b: Priority) -> Priority:
    """Return the more urgent of two priorities."""
    return min(a, b)


class Protocol(str, Enum):
    MPCP = "mpcp"
    DPCP = "dpcp"
    FMLP_L = "fmlp-l"
    FMLP_S = "fmlp-s"
    DFLP = "dflp"

    @property
    def distributed(self) -> bool:
        """DPCP and DFLP execute critical sections on synchronization
        processors."""
        return self in (Protocol.DPCP, Protocol.DFLP)

    @classmethod
    def parse(cls, name: str) -> "Protocol":
        key = name.strip().lower().replace("_", "-")
        for protocol in cls:
            if protocol.value == key:
                return protocol
        supported = [p.value for p in cls]
        raise ValueError(f"Protocol {name} not supported. Supported protocols are {supported}.")


class ProcessorRole(str, Enum):
    APPLICATION = "app"
    SYNCHRONIZATION = "sync"


@dataclass(frozen=True)
class CriticalSectionSpec:
    """One non-nested access to `resource_id`, starting after the job has
    executed `offset` ns of work and lasting `length` ns."""

    resource_id: str
    offset: TimeNs
    length: TimeNs

    @property
    def end(self) -> TimeNs:
        return self.offset + self.length


@dataclass(frozen=True)
class TaskSpec:
    id: str
    wcet: TimeNs
    period: TimeNs
    deadline: TimeNs
    priority: Priority
    home_processor: int
    critical_sections: Tuple[CriticalSectionSpec, ...] = ()

    @property
    def resources(self) -> Tuple[str, ...]:
        """The set of requested resources, in first-use order."""
        seen = []
        for cs in self.critical_sections:
            if cs.resource_id not in seen:
                seen.append(cs.resource_id)
        return tuple(seen)

    @property
    def utilization(self) -> float:
        return self.wcet / self.period

    def segments(self):
        """Split the WCET into ("exec", length) and ("cs", CriticalSectionSpec)
        segments in execution order. Zero-length non-critical gaps are
        dropped."""
        segments = []
        cursor = 0
        for cs in self.critical_sections:
            if cs.offset > cursor:
                segments.append(("exec", cs.offset - cursor))
            segments.append(("cs", cs))
            cursor = cs.end
        if self.wcet > cursor:
            segments.append(("exec", self.wcet - cursor))
        return segments


@dataclass(frozen=True)
class ResourceSpec:
    id: str
    ceiling: Priority
    sync_processor: Optional[int] = None


@dataclass(frozen=True)
class OverheadModel:
    """Costs injected by the engine. All zero gives the overhead-free model of
    the analytical literature."""

    lock: TimeNs = 0
    unlock: TimeNs = 0
    migrate_to: TimeNs = 0
    migrate_back: TimeNs = 0
    context_switch: TimeNs = 0

    def cost(self, kind) -> TimeNs:
        return getattr(self, OVERHEAD_FIELDS[kind])


class OverheadKind(str, Enum):
    LOCK = "LOCK"
    UNLOCK = "UNLOCK"
    MIG_TO = "MIG_TO"
    MIG_BACK = "MIG_BACK"
    CTX = "CTX"


OVERHEAD_FIELDS = {
    OverheadKind.LOCK: "lock",
    OverheadKind.UNLOCK: "unlock",
    OverheadKind.MIG_TO: "migrate_to",
    OverheadKind.MIG_BACK: "migrate_back",
    OverheadKind.CTX: "context_switch",
}


@dataclass(frozen=True)
class SystemConfig:
    processors: int
    roles: Tuple[ProcessorRole, ...]
    protocol: Protocol
    overheads: OverheadModel = field(default_factory=OverheadModel)

    @property
    def application_processors(self) -> Tuple[int, ...]:
        return tuple(
            i for i, role in enumerate(self.roles) if role is ProcessorRole.APPLICATION
        )

    @property
    def synchronization_processors(self) -> Tuple[int, ...]:
        return tuple(
            i for i, role in enumerate(self.roles) if role is ProcessorRole.SYNCHRONIZATION
        )


@dataclass(frozen=True)
class Scenario:
    """A configuration together with its tasks and resources. Unpacks as
    `config, tasks, resources`."""

    config: SystemConfig
    tasks: Tuple[TaskSpec, ...]
    resources: Tuple[ResourceSpec, ...]

    def __iter__(self):
        return iter((self.config, self.tasks, self.resources))

    def task(self, task_id: str) -> TaskSpec:
        for task in self.tasks:
            if task.id == task_id:
                return task
        raise KeyError(task_id)

    def resource(self, resource_id: str) -> ResourceSpec:
        for resource in self.resources:
            if resource.id == resource_id:
                return resource
        raise KeyError(resource_id)


def with_protocol(scenario: Scenario, protocol: Protocol) -> Scenario:
    """Same tasks and resources under another protocol."""
    return replace(scenario, config=replace(scenario.config, protocol=protocol))


def with_overheads(scenario: Scenario, overheads: OverheadModel) -> Scenario:
    return replace(scenario, config=replace(scenario.config, overheads=overheads))


def highest_user_priority(tasks, resource_id: str) -> Optional[Priority]:
    """Most urgent base priority among the tasks that use `resource_id`."""
    users = [task.priority for task in tasks if resource_id in task.resources]
    return min(users) if users else None


def hyperperiod(tasks) -> TimeNs:
    return reduce(math.lcm, (task.period for task in tasks), 1)
