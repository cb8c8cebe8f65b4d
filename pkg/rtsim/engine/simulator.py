"""Discrete-event simulation of one scenario under one locking protocol.

Time advances from one instant of interest to the next: a job release, a
deadline, or the end of the timed step at the head of a running job. At each
instant `_settle` releases jobs, then takes the running jobs' zero-time steps
in phases (completions, then lock releases, then requests and migrations),
then checks deadlines. Scheduler decisions reach the trace through the
`SchedulerListener` callbacks, so every event carries the instant at which
the decision was taken."""
import hashlib
import heapq
import logging
from collections import deque
from typing import Dict, List, Optional

from ..errors import ConfigError, NestedAccessError, NotOwnerError, SimulationFault
from ..model.configfile import dumps_config
from ..model.system import OverheadKind, Scenario
from ..model.validation import validate_config
from ..sched.node import NodeState, SchedulerNode
from ..sched.scheduler import Scheduler, SchedulerListener
from ..sync.effects import Grant, SetPriority, Spin, Suspend
from ..sync.protocols import WaitingSemantics, hooks_for, protocol_placement
from ..sync.semaphore import ObtainStatus, SemaphoreTable
from .events import Event, EventKind
from .jobs import TIMED_STEPS, JobState, Phase, Step, StepKind, build_plan
from .trace import ProcessorAccount, Trace

logger = logging.getLogger(__name__)

RELEASE_RANK = 0
DEADLINE_RANK = 1

# Phases of same-instant job steps, between releases and deadline checks.
COMPLETION_PHASE = 0  # JOB_COMPLETE, OVERHEAD_END
RELEASE_PHASE = 1  # CS_RELEASE with its hand-off, the unlock overhead
REQUEST_PHASE = 2  # CS_REQUEST, migrations, the other overheads

STEP_PHASES = {
    StepKind.RELEASE: RELEASE_PHASE,
    StepKind.OBTAIN: REQUEST_PHASE,
    StepKind.MIGRATE: REQUEST_PHASE,
}

MIGRATION_OVERHEADS = (OverheadKind.MIG_TO, OverheadKind.MIG_BACK)


def scenario_fingerprint(scenario: Scenario, horizon: int, seed: int) -> str:
    text = dumps_config(scenario) + f"\nhorizon={horizon}\nseed={seed}\n"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class Simulator(SchedulerListener):
    def __init__(self, config, tasks, resources, horizon: int, seed: int = 0, verbose: bool = False):
        """@param config: the `SystemConfig`, including protocol and overheads
        @param tasks: the `TaskSpec`s; their order fixes tie-breaking between
            simultaneous releases
        @param resources: the `ResourceSpec`s
        @param horizon: simulate the interval [0, horizon) ns
        @param seed: recorded in the trace fingerprint; the run itself is
            deterministic
        @param verbose: log every event as it is emitted
        """
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
        self.verbose = verbose

        self.hooks = hooks_for(config.protocol)
        self.placements = {
            resource.id: protocol_placement(config.protocol, resource) for resource in self.resources
        }
        self.task_index = {task.id: index for index, task in enumerate(self.tasks)}
        self.scheduler = Scheduler(config.processors, listener=self)
        for task in self.tasks:
            self.scheduler.add_task(task.id, task.home_processor, task.priority)
        self.semaphores = SemaphoreTable(
            self.hooks, self.resources, {task.id: task.priority for task in self.tasks}
        )

        self.now = 0
        self.events: List[Event] = []
        self.jobs: List[JobState] = []
        self.active: Dict[str, Optional[JobState]] = {task.id: None for task in self.tasks}
        self.backlog: Dict[str, deque] = {task.id: deque() for task in self.tasks}
        self.job_counter: Dict[str, int] = {task.id: 0 for task in self.tasks}
        self.residence: Dict[str, int] = {task.id: task.home_processor for task in self.tasks}
        self.accounting = [ProcessorAccount() for _ in range(config.processors)]
        self._timers = []
        self._jobs_by_key = {}

    # Driving loop

    def run(self) -> Trace:
        try:
            self._start()
            self._loop()
        except SimulationFault as exc:
            if not exc.events:
                exc.events = list(self.events)
            raise
        return self._finish()

    def _start(self):
        for index, task in enumerate(self.tasks):
            heapq.heappush(self._timers, (0, RELEASE_RANK, index, 0))

    def _loop(self):
        now = 0
        while True:
            self._settle(now)
            upcoming = self._next_event_time(now)
            if upcoming <= now:
                raise SimulationFault(f"no progress at t={now}")
            if upcoming >= self.horizon:
                self._advance(self.horizon - now)
                return
            self._advance(upcoming - now)
            now = upcoming

    def _next_event_time(self, now: int) -> int:
        candidates = [self.horizon]
        if self._timers:
            candidates.append(self._timers[0][0])
        for processor in range(self.config.processors):
            node = self.scheduler.running(processor)
            if node is None:
                continue
            head = self.active[node.task_id].steps[0]
            if head.kind in TIMED_STEPS:
                candidates.append(now + head.remaining)
        return min(candidates)

    def _due_releases(self, now: int):
        tasks = []
        while self._timers and self._timers[0][0] == now and self._timers[0][1] == RELEASE_RANK:
            _, _, index, _ = heapq.heappop(self._timers)
            tasks.append(self.tasks[index])
        return tasks

    def _due_deadlines(self, now: int):
        jobs = []
        while self._timers and self._timers[0][0] == now and self._timers[0][1] == DEADLINE_RANK:
            _, _, index, number = heapq.heappop(self._timers)
            jobs.append(self._jobs_by_key[(index, number)])
        return jobs

    def _schedule_timers(self, job: JobState):
        index = self.task_index[job.task_id]
        self._jobs_by_key[(index, job.number)] = job
        if job.abs_deadline < self.horizon:
            heapq.heappush(self._timers, (job.abs_deadline, DEADLINE_RANK, index, job.number))
        following = job.release_time + job.task.period
        if following < self.horizon:
            heapq.heappush(self._timers, (following, RELEASE_RANK, index, job.number + 1))

    def _settle(self, now: int):
        self.now = now
        for task in self._due_releases(now):
            self._release_job(task)
        self._process_steps()
        for job in self._due_deadlines(now):
            if job.completion_time is None:
                job.missed = True
                self._emit(EventKind.DEADLINE_CHECK, job, self.residence[job.task_id], detail="miss")
        self.scheduler.check_invariants()

    def _process_steps(self):
        """Take due zero-time steps one at a time until none is left. The next
        step is the one in the earliest phase, on the lowest processor index
        within a phase. The choice is made again after every step."""
        budget = 1000 * (len(self.tasks) + 1) * self.config.processors
        while True:
            due = None
            for processor in range(self.config.processors):
                node = self.scheduler.running(processor)
                if node is None:
                    continue
                job = self.active[node.task_id]
                phase = self._due_phase(job)
                if phase is not None and (due is None or phase < due[0]):
                    due = (phase, job, node)
            if due is None:
                return
            _, job, node = due
            self._take_step(job, node)
            budget -= 1
            if budget < 0:
                raise SimulationFault(f"zero-time steps do not converge at t={self.now}")

    def _advance(self, delta: int):
        """Charge `delta` ns to whatever each processor is doing."""
        for processor in range(self.config.processors):
            account = self.accounting[processor]
            node = self.scheduler.running(processor)
            if node is None:
                account.idle += delta
                continue
            job = self.active[node.task_id]
            head = job.steps[0]
            if head.kind in (StepKind.EXEC, StepKind.CS):
                head.remaining -= delta
                job.executed += delta
                job.remaining -= delta
                account.execution += delta
            elif head.kind is StepKind.OVERHEAD:
                head.remaining -= delta
                job.overhead += delta
                account.overhead += delta
            elif head.kind is StepKind.WAIT:
                job.spin += delta
                account.spin += delta
            else:
                raise SimulationFault(f"CPU#{processor} runs {job.task_id} on a {head.kind.value} step")
            if head.remaining < 0:
                raise SimulationFault(f"{job.task_id}/{job.number} overran a {head.kind.value} step")

    def _finish(self) -> Trace:
        censored = [job for job in self.jobs if job.completion_time is None]
        logger.info(
            "%s: %d job(s), %d event(s), %d deadline miss(es), %d unfinished at the horizon.",
            self.config.protocol.value,
            len(self.jobs),
            len(self.events),
            sum(job.missed for job in self.jobs),
            len(censored),
        )
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

    def _release_job(self, task):
        number = self.job_counter[task.id]
        self.job_counter[task.id] += 1
        job = JobState(task, number, self.now, self.now + task.deadline)
        self.jobs.append(job)
        self._emit(EventKind.JOB_RELEASE, job, task.home_processor, priority=task.priority)
        self._schedule_timers(job)
        if self.active[task.id] is None:
            self._activate(job)
        else:
            # Jobs of one task run in release order.
            self.backlog[task.id].append(job)

    def _activate(self, job: JobState):
        task = job.task
        job.steps = build_plan(task, self.config.overheads, self.placements)
        self.active[task.id] = job
        self.residence[task.id] = task.home_processor
        self.scheduler.set_effective_priority(task.id, task.home_processor, task.priority)
        self.scheduler.enqueue_ready(self.scheduler.node(task.id, task.home_processor))

    def _due_phase(self, job: JobState) -> Optional[int]:
        """Drop finished timed steps and granted waits, then return the phase
        of the job's next zero-time step, None if it needs processor time."""
        steps = job.steps
        while steps:
            head = steps[0]
            finished = head.kind in (StepKind.EXEC, StepKind.CS) and head.remaining == 0
            if not (finished or (head.kind is StepKind.WAIT and head.granted)):
                break
            steps.popleft()
        if not steps:
            return COMPLETION_PHASE
        head = steps[0]
        if head.kind is StepKind.OVERHEAD:
            if not head.started:
                return RELEASE_PHASE if head.overhead is OverheadKind.UNLOCK else REQUEST_PHASE
            return COMPLETION_PHASE if head.remaining == 0 else None
        return STEP_PHASES.get(head.kind)

    def _take_step(self, job: JobState, node: SchedulerNode):
        if not job.steps:
            self._complete(job, node)
            return
        head = job.steps[0]
        if head.kind is StepKind.OVERHEAD:
            if not head.started:
                self._start_overhead(job, head, node)
                return
            job.steps.popleft()
            self._finish_overhead(job, head, node)
            return
        job.steps.popleft()
        if head.kind is StepKind.OBTAIN:
            self._obtain(job, head, node)
        elif head.kind is StepKind.RELEASE:
            self._release_resource(job, head, node)
        elif head.kind is StepKind.MIGRATE:
            self._migrate(job, head)
        else:
            raise SimulationFault(f"{job.task_id}/{job.number} cannot take a {head.kind.value} step")

    def _complete(self, job: JobState, node: SchedulerNode):
        task = job.task
        if node.effective_priority != task.priority:
            raise SimulationFault(
                f"{task.id}/{job.number} completes at priority {node.effective_priority}, "
                f"base is {task.priority}"
            )
        if job.executed != task.wcet:
            raise SimulationFault(f"{task.id}/{job.number} executed {job.executed} of {task.wcet} ns")
        job.phase = Phase.DONE
        job.completion_time = self.now
        self._emit(EventKind.JOB_COMPLETE, job, node.processor, priority=node.effective_priority)
        self.active[task.id] = None
        self.scheduler.block(node)
        self.residence[task.id] = task.home_processor
        if self.backlog[task.id]:
            self._activate(self.backlog[task.id].popleft())

    # Overheads

    def _start_overhead(self, job: JobState, step: Step, node: SchedulerNode):
        step.started = True
        node.non_preemptive = True
        if step.overhead in MIGRATION_OVERHEADS:
            job.phase = Phase.MIGRATING
        self._emit(
            EventKind.OVERHEAD_BEGIN,
            job,
            node.processor,
            priority=node.effective_priority,
            detail=step.overhead.value,
        )

    def _finish_overhead(self, job: JobState, step: Step, node: SchedulerNode):
        node.non_preemptive = False
        self._emit(
            EventKind.OVERHEAD_END,
            job,
            node.processor,
            priority=node.effective_priority,
            detail=step.overhead.value,
        )
        # Work that became more urgent during the overhead takes over now.
        self.scheduler.reschedule(node.processor)

    # Locking

    def _obtain(self, job: JobState, step: Step, node: SchedulerNode):
        job.request_time = self.now
        self._emit(
            EventKind.CS_REQUEST,
            job,
            node.processor,
            resource=step.resource_id,
            priority=node.effective_priority,
        )
        try:
            result = self.semaphores.obtain(job.task_id, step.resource_id, self.now)
        except NestedAccessError as exc:
            raise SimulationFault(exc.message, self.events)
        if result.status is ObtainStatus.WAITING:
            job.steps.appendleft(Step(StepKind.WAIT, resource_id=step.resource_id))
            if self.hooks.waiting is WaitingSemantics.SPIN:
                job.phase = Phase.SPINNING
            else:
                job.phase = Phase.WAITING
        self._apply(result.effects, step.resource_id)
        if result.status is ObtainStatus.ACQUIRED:
            self._acquired(job, step.resource_id)

    def _acquired(self, job: JobState, resource_id: str):
        job.phase = Phase.IN_CS
        job.blocking_accrued += self.now - job.request_time
        processor = self.residence[job.task_id]
        node = self.scheduler.node(job.task_id, processor)
        self._emit(
            EventKind.CS_ACQUIRE,
            job,
            processor,
            resource=resource_id,
            priority=node.effective_priority,
        )

    def _release_resource(self, job: JobState, step: Step, node: SchedulerNode):
        try:
            result = self.semaphores.release(job.task_id, step.resource_id, self.now)
        except NotOwnerError as exc:
            raise SimulationFault(exc.message, self.events)
        self._emit(
            EventKind.CS_RELEASE,
            job,
            node.processor,
            resource=step.resource_id,
            priority=node.effective_priority,
        )
        job.phase = Phase.NONCRIT
        self._apply(result.effects, step.resource_id)

    def _apply(self, effects, resource_id: str):
        for effect in effects:
            if isinstance(effect, SetPriority):
                self.scheduler.set_effective_priority(
                    effect.task_id, self.residence[effect.task_id], effect.priority
                )
            elif isinstance(effect, Suspend):
                job = self.active[effect.task_id]
                node = self.scheduler.node(effect.task_id, self.residence[effect.task_id])
                self._emit(
                    EventKind.SUSPEND,
                    job,
                    node.processor,
                    resource=resource_id,
                    priority=node.effective_priority,
                )
                self.scheduler.block(node)
            elif isinstance(effect, Spin):
                # The waiter keeps its processor; `_advance` charges spin time.
                continue
            elif isinstance(effect, Grant):
                self._grant(effect.task_id)
            else:
                raise SimulationFault(f"unknown protocol effect {effect!r}")

    def _grant(self, task_id: str):
        job = self.active[task_id]
        head = job.steps[0] if job.steps else None
        if head is None or head.kind is not StepKind.WAIT:
            raise SimulationFault(f"grant to {task_id}, which is not waiting")
        head.granted = True
        self._acquired(job, head.resource_id)
        node = self.scheduler.node(task_id, self.residence[task_id])
        if node.state is NodeState.BLOCKED:
            self._emit(
                EventKind.RESUME,
                job,
                node.processor,
                resource=head.resource_id,
                priority=node.effective_priority,
            )
            self.scheduler.enqueue_ready(node)

    # Migration

    def _migrate(self, job: JobState, step: Step):
        moved = self.scheduler.migrate_to(job.task_id, step.target, job.task.priority)
        job.phase = Phase.NONCRIT
        if not moved:
            self._emit(
                EventKind.WARNING,
                job,
                step.target,
                detail="migration to the current processor skipped",
            )

    # SchedulerListener

    def on_dispatch(self, node: SchedulerNode):
        job = self.active[node.task_id]
        self._emit(EventKind.DISPATCH, job, node.processor, priority=node.effective_priority)
        cost = self.config.overheads.context_switch
        if cost <= 0:
            return
        head = job.steps[0] if job.steps else None
        if head is not None and head.kind is StepKind.OVERHEAD and head.started:
            # Resuming an interrupted overhead; a nested switch is not charged.
            return
        step = Step(StepKind.OVERHEAD, cost, overhead=OverheadKind.CTX)
        job.steps.appendleft(step)
        self._start_overhead(job, step, node)

    def on_preempt(self, node: SchedulerNode):
        job = self.active[node.task_id]
        self._emit(EventKind.PREEMPT, job, node.processor, priority=node.effective_priority)

    def on_migrate(self, source: SchedulerNode, target: SchedulerNode):
        job = self.active[target.task_id]
        job.migrations += 1
        self.residence[target.task_id] = target.processor
        kind = EventKind.MIGRATE_BACK if target.processor == job.task.home_processor else EventKind.MIGRATE_TO
        self._emit(
            kind,
            job,
            target.processor,
            priority=target.effective_priority,
            detail=f"from CPU#{source.processor}",
        )

    def _emit(self, kind, job: JobState, processor: int, resource=None, priority=None, detail=""):
        event = Event(
            time=self.now,
            seq=len(self.events),
            kind=kind,
            task=job.task_id,
            job=job.number,
            processor=processor,
            resource=resource,
            priority=priority,
            detail=detail,
        )
        self.events.append(event)
        if self.verbose:
            logger.info("%s", event)
        return event


def run(config, tasks, resources, horizon: int, seed: int = 0, verbose: bool = False) -> Trace:
    """Simulate `[0, horizon)` and return the trace."""
    return Simulator(config, tasks, resources, horizon, seed=seed, verbose=verbose).run()


def run_scenario(scenario: Scenario, horizon: int, seed: int = 0, verbose: bool = False) -> Trace:
    config, tasks, resources = scenario
    return run(config, tasks, resources, horizon, seed=seed, verbose=verbose)
