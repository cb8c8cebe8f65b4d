"""Protocol hook sets.

A `ProtocolHooks` bundles the three protocol-specific blocks of the lock and
unlock directives, A_o (wait), B_o (acquire) and A_r (release), with the
protocol's queue discipline, waiting semantics and resource placement. Hooks
only compute effects from the semaphore state; the semaphore framework and
the engine apply them."""
from dataclasses import dataclass
from enum import Enum
from inspect import signature
from typing import Callable, Optional

from ..model.system import HIGHEST_PRIORITY, Protocol, more_urgent
from .effects import SetPriority, Spin, Suspend
from .semaphore import QueueDiscipline


class WaitingSemantics(str, Enum):
    SUSPEND = "SUSPEND"
    SPIN = "SPIN"


class PlacementKind(str, Enum):
    LOCAL = "LOCAL"
    REMOTE = "REMOTE"


@dataclass(frozen=True)
class Placement:
    kind: PlacementKind
    processor: Optional[int] = None

    def __str__(self):
        if self.kind is PlacementKind.LOCAL:
            return "LOCAL"
        return f"REMOTE({self.processor})"


class ProtocolHooks:
    """A protocol is a name, a description and the functions it runs in the
    lock and unlock workflows."""

    def __init__(
        self,
        name: str,
        description: str,
        on_wait: Callable,
        on_acquire: Callable,
        on_release: Callable,
        discipline: QueueDiscipline,
        waiting: WaitingSemantics,
        placement: PlacementKind,
    ):
        self.name = name
        self.description = description
        self.on_wait = on_wait
        self.on_acquire = on_acquire
        self.on_release = on_release
        self.discipline = discipline
        self.waiting = waiting
        self.placement = placement

    def to_string(self):
        """Return a one-line description, including the hook functions."""
        hooks = ", ".join(
            f"{block}={function.__name__}{signature(function)}"
            for block, function in (
                ("A_o", self.on_wait),
                ("B_o", self.on_acquire),
                ("A_r", self.on_release),
            )
        )
        return (
            f"`{self.name}` ({self.discipline.value} queue, {self.waiting.value}, "
            f"{self.placement.value}): {self.description} [{hooks}]"
        )


def dynamic_ceiling(semaphore, base_priorities=None) -> Optional[int]:
    """Most urgent base priority among the tasks currently waiting, None when
    nobody waits."""
    if not semaphore.wait_queue:
        return None
    return min(waiter.base_priority for waiter in semaphore.wait_queue)


def _owner_priority_with_ceiling(semaphore, task_id, base_priorities) -> int:
    ceiling = dynamic_ceiling(semaphore)
    base = base_priorities[task_id]
    return base if ceiling is None else more_urgent(base, ceiling)


def boost_to_ceiling(semaphore, task_id, base_priorities):
    """MPCP acquisition: the owner runs at the resource's ceiling."""
    return [SetPriority(task_id, semaphore.ceiling)]


def icpp_on_sync_processor(semaphore, task_id, base_priorities=None):
    """DPCP acquisition on the synchronization processor: the uniprocessor
    immediate ceiling rule, the owner is raised to the ceiling at once."""
    return [SetPriority(task_id, semaphore.ceiling)]


def suspend_waiter(semaphore, task_id, base_priorities):
    return [Suspend(task_id)]


def restore_owner(semaphore, task_id, base_priorities):
    return [SetPriority(task_id, semaphore.saved_priority[task_id])]


def boost_to_dynamic_ceiling(semaphore, task_id, base_priorities):
    """FMLP-L acquisition: raise the owner to the most urgent waiter if that
    is more urgent than its own priority."""
    return [SetPriority(task_id, _owner_priority_with_ceiling(semaphore, task_id, base_priorities))]


def suspend_and_raise_owner(semaphore, task_id, base_priorities):
    """FMLP-L wait: suspend, then recompute the owner's dynamic ceiling."""
    effects = [Suspend(task_id)]
    owner = semaphore.owner
    effects.append(SetPriority(owner, _owner_priority_with_ceiling(semaphore, owner, base_priorities)))
    return effects


def boost_non_preemptive(semaphore, task_id, base_priorities):
    """FMLP-S acquisition: the critical section runs at the reserved level."""
    return [SetPriority(task_id, HIGHEST_PRIORITY)]


def spin_non_preemptive(semaphore, task_id, base_priorities):
    """FMLP-S wait: busy-wait at the reserved level, so spinning cannot be
    preempted either."""
    return [SetPriority(task_id, HIGHEST_PRIORITY), Spin(task_id)]


PROTOCOL_HOOKS = {
    Protocol.MPCP: ProtocolHooks(
        name="MPCP",
        description="Partitioned; waiters suspend in priority order, the owner runs at the user-defined ceiling.",
        on_wait=suspend_waiter,
        on_acquire=boost_to_ceiling,
        on_release=restore_owner,
        discipline=QueueDiscipline.PRIORITY,
        waiting=WaitingSemantics.SUSPEND,
        placement=PlacementKind.LOCAL,
    ),
    Protocol.DPCP: ProtocolHooks(
        name="DPCP",
        description="Critical sections run on the resource's synchronization processor under the immediate ceiling rule.",
        on_wait=suspend_waiter,
        on_acquire=icpp_on_sync_processor,
        on_release=restore_owner,
        discipline=QueueDiscipline.PRIORITY,
        waiting=WaitingSemantics.SUSPEND,
        placement=PlacementKind.REMOTE,
    ),
    Protocol.FMLP_L: ProtocolHooks(
        name="FMLP-L",
        description="Long requests; FIFO queue, waiters suspend, the owner inherits the most urgent waiting priority.",
        on_wait=suspend_and_raise_owner,
        on_acquire=boost_to_dynamic_ceiling,
        on_release=restore_owner,
        discipline=QueueDiscipline.FIFO,
        waiting=WaitingSemantics.SUSPEND,
        placement=PlacementKind.LOCAL,
    ),
    Protocol.FMLP_S: ProtocolHooks(
        name="FMLP-S",
        description="Short requests; FIFO queue, waiters spin, critical sections are non-preemptive.",
        on_wait=spin_non_preemptive,
        on_acquire=boost_non_preemptive,
        on_release=restore_owner,
        discipline=QueueDiscipline.FIFO,
        waiting=WaitingSemantics.SPIN,
        placement=PlacementKind.LOCAL,
    ),
    Protocol.DFLP: ProtocolHooks(
        name="DFLP",
        description="FMLP-L executed on the resource's synchronization processor after migration.",
        on_wait=suspend_and_raise_owner,
        on_acquire=boost_to_dynamic_ceiling,
        on_release=restore_owner,
        discipline=QueueDiscipline.FIFO,
        waiting=WaitingSemantics.SUSPEND,
        placement=PlacementKind.REMOTE,
    ),
}


def hooks_for(protocol) -> ProtocolHooks:
    if not isinstance(protocol, Protocol):
        protocol = Protocol.parse(protocol)
    return PROTOCOL_HOOKS[protocol]


def protocol_placement(protocol, resource) -> Placement:
    """Where the critical sections on `resource` execute."""
    hooks = hooks_for(protocol)
    if hooks.placement is PlacementKind.LOCAL:
        return Placement(PlacementKind.LOCAL)
    return Placement(PlacementKind.REMOTE, resource.sync_processor)
