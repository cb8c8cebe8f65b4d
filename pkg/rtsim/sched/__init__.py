from .node import PARKED_PRIORITY, NodeState, ReadyQueue, SchedulerNode
from .scheduler import Scheduler, SchedulerListener
