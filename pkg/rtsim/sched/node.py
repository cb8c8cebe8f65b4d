"""Scheduler nodes and the per-processor ready queue."""
import bisect
from dataclasses import dataclass
from enum import Enum
from typing import Optional

# Priority of a node that was never activated on its processor. Such a node is
# not a scheduling candidate at all.
PARKED_PRIORITY = None


class NodeState(str, Enum):
    BLOCKED = "BLOCKED"
    READY = "READY"
    SCHEDULED = "SCHEDULED"


@dataclass
class SchedulerNode:
    """A task's scheduling handle on one processor. Every task owns one node
    per processor; at most one of them is READY or SCHEDULED."""

    task_id: str
    processor: int
    effective_priority: Optional[int] = PARKED_PRIORITY
    state: NodeState = NodeState.BLOCKED
    # Set while the task runs an overhead slice; such a node is never
    # preempted.
    non_preemptive: bool = False

    def __str__(self):
        priority = "-" if self.effective_priority is None else self.effective_priority
        return f"S[{self.task_id}]({priority}) [CPU#{self.processor}] {self.state.value}"


class ReadyQueue:
    """Ordered multiset of READY nodes keyed by (priority, sequence).

    Appending gives FIFO order within a priority class. A preempted node goes
    back to the head of its class."""

    def __init__(self):
        self._entries = []
        self._nodes = {}
        self._tail = 0
        self._head = 0

    def __len__(self):
        return len(self._entries)

    def __contains__(self, node):
        return node.task_id in self._nodes

    def __iter__(self):
        return (self._nodes[task_id] for _, _, task_id in self._entries)

    def push(self, node: SchedulerNode, at_head: bool = False):
        if at_head:
            self._head -= 1
            sequence = self._head
        else:
            self._tail += 1
            sequence = self._tail
        bisect.insort(self._entries, (node.effective_priority, sequence, node.task_id))
        self._nodes[node.task_id] = node

    def remove(self, node: SchedulerNode):
        for index, (_, _, task_id) in enumerate(self._entries):
            if task_id == node.task_id:
                del self._entries[index]
                del self._nodes[task_id]
                return
        raise KeyError(node.task_id)

    def peek(self) -> Optional[SchedulerNode]:
        if not self._entries:
            return None
        return self._nodes[self._entries[0][2]]

    def pop(self) -> SchedulerNode:
        _, _, task_id = self._entries.pop(0)
        return self._nodes.pop(task_id)
