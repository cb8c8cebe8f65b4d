"""Partitioned fixed-priority scheduler with per-task scheduler nodes.

Each processor has its own scheduler instance (a ready queue plus one
SCHEDULED slot). A task owns a node on every processor; migration blocks the
node on the source processor and unblocks the node on the target, which is
how semi-partitioned protocols move a task to a synchronization processor."""
import logging
from typing import Dict, List, Optional, Tuple

from ..errors import SimulationFault
from .node import PARKED_PRIORITY, NodeState, ReadyQueue, SchedulerNode

logger = logging.getLogger(__name__)


class SchedulerListener:
    """Receives scheduler decisions. The engine turns them into trace events."""

    def on_dispatch(self, node: SchedulerNode):
        pass

    def on_preempt(self, node: SchedulerNode):
        pass

    def on_migrate(self, source: SchedulerNode, target: SchedulerNode):
        pass


class Scheduler:
    def __init__(self, processors: int, listener: Optional[SchedulerListener] = None):
        """@param processors: number of processors, one scheduler instance each
        @param listener: receives dispatch, preemption and migration callbacks
        """
        assert processors >= 1, f"Need at least one processor, got {processors}."
        self.processors = processors
        self.listener = listener or SchedulerListener()
        self.queues: List[ReadyQueue] = [ReadyQueue() for _ in range(processors)]
        self.scheduled: List[Optional[SchedulerNode]] = [None] * processors
        self.nodes: Dict[Tuple[str, int], SchedulerNode] = {}
        self.home: Dict[str, int] = {}

    def add_task(self, task_id: str, home_processor: int, priority: int):
        """Create the task's node on every processor. Only the home node gets
        a priority; the others stay parked until a migration uses them."""
        assert task_id not in self.home, f"Task {task_id} already added."
        self.home[task_id] = home_processor
        for processor in range(self.processors):
            node = SchedulerNode(task_id, processor)
            if processor == home_processor:
                node.effective_priority = priority
            self.nodes[(task_id, processor)] = node

    def node(self, task_id: str, processor: int) -> SchedulerNode:
        return self.nodes[(task_id, processor)]

    def task_nodes(self, task_id: str) -> List[SchedulerNode]:
        return [self.nodes[(task_id, processor)] for processor in range(self.processors)]

    def running(self, processor: int) -> Optional[SchedulerNode]:
        return self.scheduled[processor]

    def active_node(self, task_id: str) -> Optional[SchedulerNode]:
        """The task's non-BLOCKED node, if any."""
        for node in self.task_nodes(task_id):
            if node.state is not NodeState.BLOCKED:
                return node
        return None

    def enqueue_ready(self, node: SchedulerNode, reschedule: bool = True):
        """Make a BLOCKED node READY on its processor."""
        if node.state is not NodeState.BLOCKED:
            raise SimulationFault(f"enqueue_ready on {node}: node is not BLOCKED")
        if node.effective_priority is PARKED_PRIORITY:
            raise SimulationFault(f"enqueue_ready on {node}: node has no priority")
        other = self.active_node(node.task_id)
        if other is not None:
            raise SimulationFault(f"enqueue_ready on {node}: {other} is still active")
        node.state = NodeState.READY
        self.queues[node.processor].push(node)
        if reschedule:
            self.reschedule(node.processor)

    def block(self, node: SchedulerNode, reschedule: bool = True):
        """Take a node out of scheduling (suspension, migration, completion)."""
        if node.state is NodeState.SCHEDULED:
            self.scheduled[node.processor] = None
        elif node.state is NodeState.READY:
            self.queues[node.processor].remove(node)
        node.state = NodeState.BLOCKED
        node.non_preemptive = False
        if reschedule:
            self.reschedule(node.processor)

    def set_effective_priority(self, task_id: str, processor: int, priority: int):
        node = self.node(task_id, processor)
        if node.effective_priority == priority:
            return
        node.effective_priority = priority
        if node.state is NodeState.BLOCKED:
            # Recorded only, BLOCKED nodes are not candidates.
            return
        if node.state is NodeState.READY:
            queue = self.queues[processor]
            queue.remove(node)
            queue.push(node)
        self.reschedule(processor)

    def migrate_to(self, task_id: str, target: int, priority_on_target: int) -> bool:
        """Move the task's active node to `target`.

        The block half and the unblock half happen back to back without
        rescheduling in between; both processors reschedule afterwards. Returns
        False (and does nothing) when the task is already on `target`."""
        source = self.active_node(task_id)
        if source is None:
            raise SimulationFault(f"migrate_to: task {task_id} has no active node")
        if source.processor == target:
            logger.warning("Task %s is already on CPU#%d, migration skipped.", task_id, target)
            return False
        destination = self.node(task_id, target)
        self.block(source, reschedule=False)
        destination.effective_priority = priority_on_target
        self.enqueue_ready(destination, reschedule=False)
        self.listener.on_migrate(source, destination)
        self.reschedule(source.processor)
        self.reschedule(target)
        return True

    def reschedule(self, processor: int):
        """Pick the most urgent candidate on `processor`. The SCHEDULED node
        wins ties; a non-preemptive one always keeps the processor."""
        current = self.scheduled[processor]
        queue = self.queues[processor]
        head = queue.peek()
        if head is None:
            return
        if current is not None:
            if current.non_preemptive:
                return
            if head.effective_priority >= current.effective_priority:
                return
            current.state = NodeState.READY
            self.scheduled[processor] = None
            queue.push(current, at_head=True)
            self.listener.on_preempt(current)
        head = queue.pop()
        head.state = NodeState.SCHEDULED
        self.scheduled[processor] = head
        self.listener.on_dispatch(head)

    def check_invariants(self):
        """Raise `SimulationFault` if a scheduler invariant does not hold."""
        for task_id in self.home:
            active = [node for node in self.task_nodes(task_id) if node.state is not NodeState.BLOCKED]
            if len(active) > 1:
                raise SimulationFault(f"task {task_id} has {len(active)} active scheduler nodes")
        for processor in range(self.processors):
            current = self.scheduled[processor]
            head = self.queues[processor].peek()
            if current is None and head is not None:
                raise SimulationFault(f"CPU#{processor} idles with READY node {head}")
            if current is not None:
                if current.state is not NodeState.SCHEDULED or current.processor != processor:
                    raise SimulationFault(f"CPU#{processor} slot holds {current}")
                if (
                    head is not None
                    and not current.non_preemptive
                    and head.effective_priority < current.effective_priority
                ):
                    raise SimulationFault(f"CPU#{processor} runs {current} while {head} is more urgent")
