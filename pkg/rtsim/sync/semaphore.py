"""Semaphore state and the lock/unlock directive skeleton.

`SemaphoreTable.obtain` follows the lock workflow: check the owner, either
claim ownership and run the acquire hook (block B_o) or run the wait hook
(block A_o) and enqueue with the semaphore's discipline. `release` follows the
unlock workflow: reject a caller that is not the owner, otherwise run the
release hook (block A_r) and hand the semaphore to the head of the wait
queue."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional

from ..errors import NestedAccessError, NotOwnerError
from .effects import Grant

logger = logging.getLogger(__name__)


class QueueDiscipline(str, Enum):
    PRIORITY = "PRIORITY"
    FIFO = "FIFO"


class ObtainStatus(str, Enum):
    ACQUIRED = "ACQUIRED"
    WAITING = "WAITING"


@dataclass(frozen=True)
class Waiter:
    task_id: str
    base_priority: int
    arrival: int
    requested_at: int


@dataclass
class Semaphore:
    resource_id: str
    ceiling: int
    discipline: QueueDiscipline
    owner: Optional[str] = None
    wait_queue: List[Waiter] = field(default_factory=list)
    # Pre-boost effective priority of the owner, restored on release.
    saved_priority: Dict[str, int] = field(default_factory=dict)
    _arrivals: int = 0

    def enqueue(self, task_id: str, base_priority: int, now: int):
        """Insert a waiter. PRIORITY keeps the queue sorted by base priority,
        FIFO within ties; FIFO keeps arrival order."""
        self._arrivals += 1
        waiter = Waiter(task_id, base_priority, self._arrivals, now)
        if self.discipline is QueueDiscipline.FIFO:
            self.wait_queue.append(waiter)
            return
        index = len(self.wait_queue)
        for position, other in enumerate(self.wait_queue):
            if base_priority < other.base_priority:
                index = position
                break
        self.wait_queue.insert(index, waiter)

    def dequeue(self) -> Optional[Waiter]:
        if not self.wait_queue:
            return None
        return self.wait_queue.pop(0)

    def waiting_ids(self) -> List[str]:
        return [waiter.task_id for waiter in self.wait_queue]


@dataclass(frozen=True)
class ObtainResult:
    status: ObtainStatus
    effects: tuple = ()


@dataclass(frozen=True)
class ReleaseResult:
    next_owner: Optional[str] = None
    effects: tuple = ()


class SemaphoreTable:
    def __init__(self, hooks, resources, base_priorities: Mapping[str, int]):
        """@param hooks: the `ProtocolHooks` of the configured protocol
        @param resources: the `ResourceSpec`s, one semaphore each
        @param base_priorities: task id to base priority
        """
        self.hooks = hooks
        self.base_priorities = dict(base_priorities)
        self.semaphores: Dict[str, Semaphore] = {
            resource.id: Semaphore(resource.id, resource.ceiling, hooks.discipline)
            for resource in resources
        }

    def __getitem__(self, resource_id: str) -> Semaphore:
        return self.semaphores[resource_id]

    def involvement(self, task_id: str) -> Optional[str]:
        """The resource the task owns or waits for, if any."""
        for semaphore in self.semaphores.values():
            if semaphore.owner == task_id or task_id in semaphore.waiting_ids():
                return semaphore.resource_id
        return None

    def obtain(self, task_id: str, resource_id: str, now: int) -> ObtainResult:
        if self.involvement(task_id) is not None:
            raise NestedAccessError(task_id, resource_id)
        semaphore = self.semaphores[resource_id]
        if semaphore.owner is None:
            semaphore.owner = task_id
            semaphore.saved_priority[task_id] = self.base_priorities[task_id]
            effects = self.hooks.on_acquire(semaphore, task_id, self.base_priorities)
            return ObtainResult(ObtainStatus.ACQUIRED, tuple(effects))
        semaphore.enqueue(task_id, self.base_priorities[task_id], now)
        effects = self.hooks.on_wait(semaphore, task_id, self.base_priorities)
        return ObtainResult(ObtainStatus.WAITING, tuple(effects))

    def release(self, task_id: str, resource_id: str, now: int) -> ReleaseResult:
        semaphore = self.semaphores[resource_id]
        if semaphore.owner != task_id:
            raise NotOwnerError(task_id, resource_id, semaphore.owner)
        effects = list(self.hooks.on_release(semaphore, task_id, self.base_priorities))
        semaphore.saved_priority.pop(task_id, None)
        waiter = semaphore.dequeue()
        if waiter is None:
            semaphore.owner = None
            return ReleaseResult(None, tuple(effects))
        semaphore.owner = waiter.task_id
        semaphore.saved_priority[waiter.task_id] = self.base_priorities[waiter.task_id]
        effects.extend(self.hooks.on_acquire(semaphore, waiter.task_id, self.base_priorities))
        effects.append(Grant(waiter.task_id))
        return ReleaseResult(waiter.task_id, tuple(effects))
