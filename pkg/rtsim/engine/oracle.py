"""Reference simulator that advances in 1 ns ticks.

`StepOracle` is a second, naive implementation of the same model. It keeps
its own ready lists, its own semaphore queues and its own table of protocol
rules, expands each job into a flat list of operations, and inspects every
tick for releases, deadlines and finished work instead of keeping an event
list. It shares no code with the scheduler, the synchronization package or
the engine's step plan, so a fault in any of them shows up as a difference
between the two traces."""
import difflib
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

from ..errors import ConfigError, OracleGuardError, SimulationFault
from ..model.system import HIGHEST_PRIORITY, OverheadKind, Protocol, Scenario, TaskSpec
from ..model.validation import validate_config
from .events import Event, EventKind
from .simulator import Simulator, scenario_fingerprint
from .trace import ProcessorAccount, Trace

logger = logging.getLogger(__name__)

MAX_TASKS = 4
MAX_RESOURCES = 2
MAX_HORIZON = 100_000

BLOCKED, READY, RUNNING = "blocked", "ready", "running"

# Same-instant order of job operations.
FINISHING, RELEASING, REQUESTING = 0, 1, 2


class Rules(NamedTuple):
    fifo: bool
    spin: bool
    remote: bool
    # Owner priority: "ceiling", "inherit" (most urgent of owner and
    # waiters) or "top" (above every task).
    owner: str


RULES = {
    Protocol.MPCP: Rules(fifo=False, spin=False, remote=False, owner="ceiling"),
    Protocol.DPCP: Rules(fifo=False, spin=False, remote=True, owner="ceiling"),
    Protocol.FMLP_L: Rules(fifo=True, spin=False, remote=False, owner="inherit"),
    Protocol.FMLP_S: Rules(fifo=True, spin=True, remote=False, owner="top"),
    Protocol.DFLP: Rules(fifo=True, spin=False, remote=True, owner="inherit"),
}


@dataclass
class Operation:
    # work, section, overhead, lock, wait, unlock or move
    kind: str
    left: int = 0
    # Resource id, overhead kind or target processor.
    arg: object = None
    # Overhead started, or wait granted.
    flag: bool = False


@dataclass
class OracleJob:
    task: TaskSpec
    number: int
    release: int
    deadline: int
    todo: List[Operation] = field(default_factory=list)
    completed: Optional[int] = None


class StepOracle:
    def __init__(self, config, tasks, resources, horizon: int, seed: int = 0):
        if horizon <= 0:
            raise ConfigError(f"horizon must be positive, got {horizon}")
        report = validate_config(config, tasks, resources)
        if not report.ok:
            raise ConfigError(f"invalid configuration:\n{report}")
        self.config = config
        self.tasks = tuple(tasks)
        self.resources = tuple(resources)
        self.horizon = horizon
        self.seed = seed
        self.rules = RULES[config.protocol]
        self.costs = config.overheads
        self.ceiling = {resource.id: resource.ceiling for resource in self.resources}
        self.runs_on = {
            resource.id: resource.sync_processor if self.rules.remote else None for resource in self.resources
        }
        self.base = {task.id: task.priority for task in self.tasks}
        self.home = {task.id: task.home_processor for task in self.tasks}
        self.order = {task.id: index for index, task in enumerate(self.tasks)}

        cpus = range(config.processors)
        self.priority: Dict[Tuple[str, int], Optional[int]] = {}
        self.state: Dict[Tuple[str, int], str] = {}
        self.pinned: Dict[Tuple[str, int], bool] = {}
        for task in self.tasks:
            for cpu in cpus:
                self.priority[(task.id, cpu)] = task.priority if cpu == task.home_processor else None
                self.state[(task.id, cpu)] = BLOCKED
                self.pinned[(task.id, cpu)] = False
        # Entries are [priority, stamp, task id]; the smallest runs first.
        self.ready: List[list] = [[] for _ in cpus]
        self.on_cpu: List[Optional[str]] = [None for _ in cpus]
        self.back_stamp = 0
        self.front_stamp = 0

        self.where = dict(self.home)
        self.current: Dict[str, Optional[OracleJob]] = {task.id: None for task in self.tasks}
        self.pending: Dict[str, List[OracleJob]] = {task.id: [] for task in self.tasks}
        self.released = {task.id: 0 for task in self.tasks}
        self.deadlines: Dict[int, List[OracleJob]] = {}
        self.owner: Dict[str, Optional[str]] = {resource.id: None for resource in self.resources}
        self.queue: Dict[str, List[str]] = {resource.id: [] for resource in self.resources}

        self.now = 0
        self.events: List[Event] = []
        self.accounting = [ProcessorAccount() for _ in cpus]

    def run(self) -> Trace:
        for now in range(self.horizon):
            self.now = now
            for task in self.tasks:
                if now % task.period == 0:
                    self._release(task)
            self._run_due_operations()
            due = sorted(self.deadlines.pop(now, []), key=lambda job: (self.order[job.task.id], job.number))
            for job in due:
                if job.completed is None:
                    self._emit(EventKind.DEADLINE_CHECK, job, self.where[job.task.id], detail="miss")
            self._tick()
        logger.debug("Step oracle: %d event(s) over %d ns.", len(self.events), self.horizon)
        scenario = Scenario(self.config, self.tasks, self.resources)
        return Trace(
            events=self.events,
            horizon=self.horizon,
            protocol=self.config.protocol.value,
            task_ids=tuple(task.id for task in self.tasks),
            fingerprint=scenario_fingerprint(scenario, self.horizon, self.seed),
            seed=self.seed,
            accounting=self.accounting,
        )

    # Jobs

    def _plan(self, task: TaskSpec) -> List[Operation]:
        todo = []

        def charge(kind):
            cost = self.costs.cost(kind)
            if cost > 0:
                todo.append(Operation("overhead", cost, kind))

        at = task.home_processor
        done = 0
        sections = task.critical_sections
        for index, cs in enumerate(sections):
            if cs.offset > done:
                todo.append(Operation("work", cs.offset - done))
            sync = self.runs_on[cs.resource_id]
            if sync is not None and at != sync:
                charge(OverheadKind.MIG_TO)
                todo.append(Operation("move", arg=sync))
                at = sync
            charge(OverheadKind.LOCK)
            todo.append(Operation("lock", arg=cs.resource_id))
            todo.append(Operation("section", cs.length, cs.resource_id))
            charge(OverheadKind.UNLOCK)
            todo.append(Operation("unlock", arg=cs.resource_id))
            done = cs.end
            next_start = sections[index + 1].offset if index + 1 < len(sections) else task.wcet
            if sync is not None and next_start > done:
                charge(OverheadKind.MIG_BACK)
                todo.append(Operation("move", arg=task.home_processor))
                at = task.home_processor
        if task.wcet > done:
            todo.append(Operation("work", task.wcet - done))
        return todo

    def _release(self, task: TaskSpec):
        job = OracleJob(task, self.released[task.id], self.now, self.now + task.deadline)
        self.released[task.id] += 1
        self._emit(EventKind.JOB_RELEASE, job, task.home_processor, priority=task.priority)
        self.deadlines.setdefault(job.deadline, []).append(job)
        if self.current[task.id] is None:
            self._start(job)
        else:
            self.pending[task.id].append(job)

    def _start(self, job: OracleJob):
        task_id = job.task.id
        home = self.home[task_id]
        job.todo = self._plan(job.task)
        self.current[task_id] = job
        self.where[task_id] = home
        self.priority[(task_id, home)] = self.base[task_id]
        self._make_ready(task_id, home)
        self._pick(home)

    def _finish(self, job: OracleJob, cpu: int):
        task_id = job.task.id
        job.completed = self.now
        self._emit(EventKind.JOB_COMPLETE, job, cpu, priority=self.priority[(task_id, cpu)])
        self.current[task_id] = None
        self._block(task_id, cpu)
        self.where[task_id] = self.home[task_id]
        if self.pending[task_id]:
            self._start(self.pending[task_id].pop(0))

    def _phase(self, job: OracleJob) -> Optional[int]:
        todo = job.todo
        while todo and (
            (todo[0].kind in ("work", "section") and todo[0].left == 0) or (todo[0].kind == "wait" and todo[0].flag)
        ):
            todo.pop(0)
        if not todo:
            return FINISHING
        head = todo[0]
        if head.kind == "overhead":
            if not head.flag:
                return RELEASING if head.arg is OverheadKind.UNLOCK else REQUESTING
            return FINISHING if head.left == 0 else None
        if head.kind == "unlock":
            return RELEASING
        if head.kind in ("lock", "move"):
            return REQUESTING
        return None

    def _run_due_operations(self):
        for _ in range(100_000):
            best = None
            for cpu, task_id in enumerate(self.on_cpu):
                if task_id is None:
                    continue
                job = self.current[task_id]
                phase = self._phase(job)
                if phase is not None and (best is None or phase < best[0]):
                    best = (phase, cpu, job)
            if best is None:
                return
            _, cpu, job = best
            self._operate(job, cpu)
        raise SimulationFault(f"oracle: zero-time operations do not converge at t={self.now}", self.events)

    def _operate(self, job: OracleJob, cpu: int):
        if not job.todo:
            self._finish(job, cpu)
            return
        head = job.todo[0]
        if head.kind == "overhead":
            if head.flag:
                job.todo.pop(0)
                self.pinned[(job.task.id, cpu)] = False
                self._emit(EventKind.OVERHEAD_END, job, cpu, priority=self.priority[(job.task.id, cpu)], detail=head.arg.value)
                self._pick(cpu)
            else:
                self._begin_overhead(job, head, cpu)
            return
        job.todo.pop(0)
        if head.kind == "lock":
            self._lock(job, head.arg, cpu)
        elif head.kind == "unlock":
            self._unlock(job, head.arg, cpu)
        else:
            self._move(job, head.arg)

    def _begin_overhead(self, job: OracleJob, operation: Operation, cpu: int):
        operation.flag = True
        self.pinned[(job.task.id, cpu)] = True
        self._emit(
            EventKind.OVERHEAD_BEGIN, job, cpu, priority=self.priority[(job.task.id, cpu)], detail=operation.arg.value
        )

    def _tick(self):
        for cpu, task_id in enumerate(self.on_cpu):
            account = self.accounting[cpu]
            if task_id is None:
                account.idle += 1
                continue
            head = self.current[task_id].todo[0]
            if head.kind in ("work", "section"):
                head.left -= 1
                account.execution += 1
            elif head.kind == "overhead":
                head.left -= 1
                account.overhead += 1
            elif head.kind == "wait":
                account.spin += 1
            else:
                raise SimulationFault(f"oracle: CPU#{cpu} runs {task_id} on a {head.kind} operation", self.events)

    # Processors

    def _make_ready(self, task_id: str, cpu: int, front: bool = False):
        if front:
            self.front_stamp -= 1
            stamp = self.front_stamp
        else:
            self.back_stamp += 1
            stamp = self.back_stamp
        self.state[(task_id, cpu)] = READY
        self.ready[cpu].append([self.priority[(task_id, cpu)], stamp, task_id])

    def _unready(self, task_id: str, cpu: int):
        self.ready[cpu] = [entry for entry in self.ready[cpu] if entry[2] != task_id]

    def _pick(self, cpu: int):
        """Run the most urgent ready task on `cpu` if it beats the running
        one, which keeps the processor on a tie or inside an overhead."""
        if not self.ready[cpu]:
            return
        best = min(self.ready[cpu])
        running = self.on_cpu[cpu]
        if running is not None:
            if self.pinned[(running, cpu)] or best[0] >= self.priority[(running, cpu)]:
                return
            self.on_cpu[cpu] = None
            self._make_ready(running, cpu, front=True)
            self._emit(EventKind.PREEMPT, self.current[running], cpu, priority=self.priority[(running, cpu)])
        self.ready[cpu].remove(best)
        task_id = best[2]
        self.state[(task_id, cpu)] = RUNNING
        self.on_cpu[cpu] = task_id
        job = self.current[task_id]
        self._emit(EventKind.DISPATCH, job, cpu, priority=self.priority[(task_id, cpu)])
        cost = self.costs.context_switch
        if cost <= 0:
            return
        if job.todo and job.todo[0].kind == "overhead" and job.todo[0].flag:
            return
        switch = Operation("overhead", cost, OverheadKind.CTX)
        job.todo.insert(0, switch)
        self._begin_overhead(job, switch, cpu)

    def _block(self, task_id: str, cpu: int, pick: bool = True):
        if self.state[(task_id, cpu)] == RUNNING:
            self.on_cpu[cpu] = None
        elif self.state[(task_id, cpu)] == READY:
            self._unready(task_id, cpu)
        self.state[(task_id, cpu)] = BLOCKED
        self.pinned[(task_id, cpu)] = False
        if pick:
            self._pick(cpu)

    def _set_priority(self, task_id: str, priority: int):
        cpu = self.where[task_id]
        if self.priority[(task_id, cpu)] == priority:
            return
        self.priority[(task_id, cpu)] = priority
        if self.state[(task_id, cpu)] == BLOCKED:
            return
        if self.state[(task_id, cpu)] == READY:
            self._unready(task_id, cpu)
            self._make_ready(task_id, cpu)
        self._pick(cpu)

    def _move(self, job: OracleJob, target: int):
        task_id = job.task.id
        source = self.where[task_id]
        if source == target:
            self._emit(EventKind.WARNING, job, target, detail="migration to the current processor skipped")
            return
        self._block(task_id, source, pick=False)
        self.priority[(task_id, target)] = self.base[task_id]
        self._make_ready(task_id, target)
        self.where[task_id] = target
        kind = EventKind.MIGRATE_BACK if target == self.home[task_id] else EventKind.MIGRATE_TO
        self._emit(kind, job, target, priority=self.base[task_id], detail=f"from CPU#{source}")
        self._pick(source)
        self._pick(target)

    # Resources

    def _owner_priority(self, resource_id: str, task_id: str) -> int:
        if self.rules.owner == "ceiling":
            return self.ceiling[resource_id]
        if self.rules.owner == "top":
            return HIGHEST_PRIORITY
        return min([self.base[task_id]] + [self.base[waiter] for waiter in self.queue[resource_id]])

    def _lock(self, job: OracleJob, resource_id: str, cpu: int):
        task_id = job.task.id
        self._emit(EventKind.CS_REQUEST, job, cpu, resource=resource_id, priority=self.priority[(task_id, cpu)])
        for other, owner in self.owner.items():
            if owner == task_id or task_id in self.queue[other]:
                raise SimulationFault(f"oracle: {task_id} requests {resource_id} while holding {other}", self.events)
        if self.owner[resource_id] is None:
            self.owner[resource_id] = task_id
            self._set_priority(task_id, self._owner_priority(resource_id, task_id))
            self._acquired(job, resource_id)
            return
        queue = self.queue[resource_id]
        position = len(queue)
        if not self.rules.fifo:
            for index, waiter in enumerate(queue):
                if self.base[task_id] < self.base[waiter]:
                    position = index
                    break
        queue.insert(position, task_id)
        job.todo.insert(0, Operation("wait", arg=resource_id))
        if self.rules.spin:
            self._set_priority(task_id, HIGHEST_PRIORITY)
            return
        self._emit(EventKind.SUSPEND, job, cpu, resource=resource_id, priority=self.priority[(task_id, cpu)])
        self._block(task_id, cpu)
        if self.rules.owner == "inherit":
            owner = self.owner[resource_id]
            self._set_priority(owner, self._owner_priority(resource_id, owner))

    def _acquired(self, job: OracleJob, resource_id: str):
        task_id = job.task.id
        cpu = self.where[task_id]
        self._emit(EventKind.CS_ACQUIRE, job, cpu, resource=resource_id, priority=self.priority[(task_id, cpu)])

    def _unlock(self, job: OracleJob, resource_id: str, cpu: int):
        task_id = job.task.id
        if self.owner[resource_id] != task_id:
            raise SimulationFault(f"oracle: {task_id} releases {resource_id} it does not own", self.events)
        self._emit(EventKind.CS_RELEASE, job, cpu, resource=resource_id, priority=self.priority[(task_id, cpu)])
        self._set_priority(task_id, self.base[task_id])
        queue = self.queue[resource_id]
        if not queue:
            self.owner[resource_id] = None
            return
        successor = queue.pop(0)
        self.owner[resource_id] = successor
        self._set_priority(successor, self._owner_priority(resource_id, successor))
        waiting = self.current[successor]
        waiting.todo[0].flag = True
        self._acquired(waiting, resource_id)
        there = self.where[successor]
        if self.state[(successor, there)] == BLOCKED:
            self._emit(
                EventKind.RESUME, waiting, there, resource=resource_id, priority=self.priority[(successor, there)]
            )
            self._make_ready(successor, there)
            self._pick(there)

    def _emit(self, kind: EventKind, job: OracleJob, cpu: int, resource=None, priority=None, detail=""):
        self.events.append(
            Event(
                time=self.now,
                seq=len(self.events),
                kind=kind,
                task=job.task.id,
                job=job.number,
                processor=cpu,
                resource=resource,
                priority=priority,
                detail=detail,
            )
        )


def check_guard(tasks, resources, horizon: int):
    if len(tasks) > MAX_TASKS or len(resources) > MAX_RESOURCES or horizon > MAX_HORIZON:
        raise OracleGuardError(
            f"instance too large for the step oracle: {len(tasks)} tasks (max {MAX_TASKS}), "
            f"{len(resources)} resources (max {MAX_RESOURCES}), horizon {horizon} ns (max {MAX_HORIZON})"
        )


def step_oracle(config, tasks, resources, horizon: int, seed: int = 0) -> Trace:
    """Simulate tick by tick. Raises `OracleGuardError` above the size guard."""
    check_guard(tasks, resources, horizon)
    return StepOracle(config, tasks, resources, horizon, seed=seed).run()


EventKey = Tuple


def normalize_trace(trace: Trace) -> List[EventKey]:
    """Events without their sequence numbers, for comparison."""
    return [
        (
            event.time,
            event.kind.value,
            event.task,
            event.job,
            event.processor,
            event.resource,
            event.priority,
            event.detail,
        )
        for event in trace.events
    ]


def _format_key(key: EventKey) -> str:
    return " ".join("-" if part is None else str(part) for part in key)


def compare_traces(expected: Trace, actual: Trace, context: int = 3) -> List[str]:
    """Unified diff of the normalized traces; empty when they agree."""
    left = [_format_key(key) for key in normalize_trace(expected)]
    right = [_format_key(key) for key in normalize_trace(actual)]
    if left == right:
        return []
    return list(
        difflib.unified_diff(left, right, fromfile="oracle", tofile="engine", lineterm="", n=context)
    )


def verify_against_oracle(config, tasks, resources, horizon: int, seed: int = 0) -> List[str]:
    """Run both simulators and return their differences, including a
    mismatch in per-processor accounting."""
    oracle_trace = step_oracle(config, tasks, resources, horizon, seed=seed)
    engine_trace = Simulator(config, tasks, resources, horizon, seed=seed).run()
    differences = compare_traces(oracle_trace, engine_trace)
    if not differences:
        for processor, (expected, actual) in enumerate(zip(oracle_trace.accounting, engine_trace.accounting)):
            if expected != actual:
                differences.append(f"accounting CPU#{processor}: oracle {expected}, engine {actual}")
    if differences:
        logger.warning("Engine and oracle disagree on %d line(s).", len(differences))
    return differences
