"""Intervals and per-job breakdowns reconstructed from a trace."""
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..engine.events import STOP_KINDS, EventKind
from ..engine.trace import ProcessorAccount, Trace


@dataclass(frozen=True)
class RunInterval:
    task: str
    job: int
    processor: int
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class CSInterval:
    resource: str
    task: str
    job: int
    processor: int
    start: int
    end: int


@dataclass(frozen=True)
class OverheadSample:
    kind: str
    task: str
    job: int
    processor: int
    start: int
    duration: int


@dataclass(frozen=True)
class WaitInterval:
    task: str
    job: int
    resource: str
    processor: int
    start: int
    end: int
    suspended: bool


@dataclass
class JobSummary:
    task: str
    job: int
    release: int
    completion: Optional[int] = None
    running: int = 0
    overhead: int = 0
    spin: int = 0
    suspended: int = 0
    blocking: int = 0
    migrations: int = 0
    missed: bool = False

    @property
    def completed(self) -> bool:
        return self.completion is not None

    @property
    def response_time(self) -> Optional[int]:
        if self.completion is None:
            return None
        return self.completion - self.release

    @property
    def execution(self) -> int:
        return self.running - self.overhead - self.spin

    @property
    def interference(self) -> Optional[int]:
        """Time the job was ready but another job held its processor."""
        if self.completion is None:
            return None
        return self.response_time - self.running - self.suspended


def run_intervals(trace: Trace) -> List[RunInterval]:
    """Every stretch during which a task held a processor, from DISPATCH to
    the event that took it away (or the horizon)."""
    intervals = []
    open_runs: Dict[str, Tuple[int, int, int]] = {}
    for event in trace.events:
        if event.kind is EventKind.DISPATCH:
            if event.task in open_runs:
                job, processor, start = open_runs.pop(event.task)
                intervals.append(RunInterval(event.task, job, processor, start, event.time))
            open_runs[event.task] = (event.job, event.processor, event.time)
        elif event.kind in STOP_KINDS and event.task in open_runs:
            job, processor, start = open_runs.pop(event.task)
            intervals.append(RunInterval(event.task, job, processor, start, event.time))
    for task, (job, processor, start) in open_runs.items():
        intervals.append(RunInterval(task, job, processor, start, trace.horizon))
    intervals.sort(key=lambda interval: (interval.start, interval.processor, interval.task))
    return [interval for interval in intervals if interval.length > 0]


def cs_intervals(trace: Trace) -> List[CSInterval]:
    """Resource holding intervals, from CS_ACQUIRE to CS_RELEASE."""
    intervals = []
    held = {}
    for event in trace.events:
        if event.kind is EventKind.CS_ACQUIRE:
            held[event.resource] = event
        elif event.kind is EventKind.CS_RELEASE:
            acquire = held.pop(event.resource, None)
            if acquire is None or acquire.task != event.task:
                raise ValueError(f"release without a matching acquire: {event}")
            intervals.append(
                CSInterval(event.resource, event.task, event.job, acquire.processor, acquire.time, event.time)
            )
    for resource, acquire in held.items():
        intervals.append(
            CSInterval(resource, acquire.task, acquire.job, acquire.processor, acquire.time, trace.horizon)
        )
    intervals.sort(key=lambda interval: (interval.start, interval.resource))
    return intervals


def overhead_samples(trace: Trace) -> List[OverheadSample]:
    """Completed overhead executions, one sample per OVERHEAD_BEGIN/END pair."""
    samples = []
    started = {}
    for event in trace.events:
        if event.kind is EventKind.OVERHEAD_BEGIN:
            started[event.task] = event
        elif event.kind is EventKind.OVERHEAD_END:
            begin = started.pop(event.task, None)
            if begin is None:
                raise ValueError(f"overhead end without a begin: {event}")
            samples.append(
                OverheadSample(event.detail, event.task, event.job, begin.processor, begin.time, event.time - begin.time)
            )
    return samples


def _open_overheads(trace: Trace) -> List[OverheadSample]:
    """Overheads still running at the horizon, truncated there."""
    started = {}
    for event in trace.events:
        if event.kind is EventKind.OVERHEAD_BEGIN:
            started[event.task] = event
        elif event.kind is EventKind.OVERHEAD_END:
            started.pop(event.task, None)
    return [
        OverheadSample(begin.detail, begin.task, begin.job, begin.processor, begin.time, trace.horizon - begin.time)
        for begin in started.values()
    ]


def wait_intervals(trace: Trace) -> List[WaitInterval]:
    """From CS_REQUEST to CS_ACQUIRE (or the horizon). A wait is suspended
    if the job suspended in between, otherwise it was spent spinning. A request
    granted at once is not a wait."""
    waits = []
    pending = {}
    for event in trace.events:
        key = (event.task, event.job)
        if event.kind is EventKind.CS_REQUEST:
            pending[key] = [event, False]
        elif event.kind is EventKind.SUSPEND and key in pending:
            pending[key][1] = True
        elif event.kind is EventKind.CS_ACQUIRE and key in pending:
            request, suspended = pending.pop(key)
            if event.time == request.time:
                continue
            waits.append(
                WaitInterval(event.task, event.job, request.resource, request.processor, request.time, event.time, suspended)
            )
    for (task, job), (request, suspended) in pending.items():
        waits.append(
            WaitInterval(task, job, request.resource, request.processor, request.time, trace.horizon, suspended)
        )
    return waits


def job_summaries(trace: Trace) -> List[JobSummary]:
    """Per-job breakdown in release order.

    For a completed job, response time equals execution plus overhead plus
    spinning plus suspended waiting plus interference."""
    jobs: Dict[Tuple[str, int], JobSummary] = {}
    for event in trace.events:
        key = (event.task, event.job)
        if event.kind is EventKind.JOB_RELEASE:
            jobs[key] = JobSummary(event.task, event.job, event.time)
        elif event.kind is EventKind.JOB_COMPLETE:
            jobs[key].completion = event.time
        elif event.kind in (EventKind.MIGRATE_TO, EventKind.MIGRATE_BACK):
            jobs[key].migrations += 1
        elif event.kind is EventKind.DEADLINE_CHECK and event.detail == "miss":
            jobs[key].missed = True
    for interval in run_intervals(trace):
        jobs[(interval.task, interval.job)].running += interval.length
    for sample in overhead_samples(trace) + _open_overheads(trace):
        jobs[(sample.task, sample.job)].overhead += sample.duration
    for wait in wait_intervals(trace):
        summary = jobs[(wait.task, wait.job)]
        length = wait.end - wait.start
        summary.blocking += length
        if wait.suspended:
            summary.suspended += length
        else:
            summary.spin += length
    return sorted(jobs.values(), key=lambda summary: (summary.release, trace.task_ids.index(summary.task)))


def processor_accounting(trace: Trace, processors: Optional[int] = None) -> List[ProcessorAccount]:
    """Rebuild the per-processor time split from the events alone."""
    if processors is None:
        processors = len(trace.accounting) or 1 + max((event.processor for event in trace.events), default=0)
    busy = defaultdict(int)
    overhead = defaultdict(int)
    spin = defaultdict(int)
    for interval in run_intervals(trace):
        busy[interval.processor] += interval.length
    for sample in overhead_samples(trace) + _open_overheads(trace):
        overhead[sample.processor] += sample.duration
    for wait in wait_intervals(trace):
        if not wait.suspended:
            spin[wait.processor] += wait.end - wait.start
    accounts = []
    for processor in range(processors):
        accounts.append(
            ProcessorAccount(
                execution=busy[processor] - overhead[processor] - spin[processor],
                spin=spin[processor],
                overhead=overhead[processor],
                idle=trace.horizon - busy[processor],
            )
        )
    return accounts
