"""Per-task and per-protocol statistics."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..engine.events import EventKind
from ..engine.trace import ProcessorAccount, Trace
from ..model.system import OverheadKind
from .intervals import OverheadSample, job_summaries, overhead_samples, processor_accounting

logger = logging.getLogger(__name__)

PERCENTILES = (50, 90, 99)

# Population names used in result files and plots.
POPULATION_NAMES = {
    OverheadKind.LOCK.value: "lock",
    OverheadKind.UNLOCK.value: "unlock",
    OverheadKind.MIG_TO.value: "mig_to",
    OverheadKind.MIG_BACK.value: "mig_bk",
    OverheadKind.CTX.value: "ctx",
}


def percentile(values: Sequence[int], q: float) -> Optional[int]:
    """Nearest-rank percentile: the smallest sample with at least q% of the
    samples at or below it."""
    if not len(values):
        return None
    return int(np.percentile(np.asarray(values), q, method="inverted_cdf"))


@dataclass
class ResponseStats:
    count: int = 0
    minimum: Optional[int] = None
    mean: Optional[float] = None
    maximum: Optional[int] = None
    percentiles: Dict[int, Optional[int]] = field(default_factory=dict)

    @classmethod
    def of(cls, values: Sequence[int]) -> "ResponseStats":
        if not values:
            return cls(percentiles={q: None for q in PERCENTILES})
        samples = np.asarray(values, dtype=np.int64)
        return cls(
            count=len(values),
            minimum=int(samples.min()),
            mean=float(samples.mean()),
            maximum=int(samples.max()),
            percentiles={q: percentile(values, q) for q in PERCENTILES},
        )


@dataclass
class TaskStats:
    task: str
    jobs: int
    completed: int
    censored: int
    response: ResponseStats
    blocking_total: int
    blocking_max: int
    migrations: int
    misses: int


@dataclass
class ProtocolStats:
    protocol: str
    horizon: int
    tasks: List[TaskStats]
    response: ResponseStats
    populations: Dict[str, List[OverheadSample]]
    processors: List[ProcessorAccount]
    misses: int
    censored: int
    warnings: int = 0

    def task(self, task_id: str) -> TaskStats:
        for stats in self.tasks:
            if stats.task == task_id:
                return stats
        raise KeyError(task_id)

    def population(self, name: str) -> List[int]:
        return [sample.duration for sample in self.populations.get(name, [])]


def summarize(trace: Trace) -> ProtocolStats:
    """Reduce a trace to response-time, blocking, migration and overhead
    statistics. Jobs unfinished at the horizon are censored: counted, but
    left out of the response-time statistics."""
    summaries = job_summaries(trace)
    misses_by_task = {task: 0 for task in trace.task_ids}
    for event in trace.of_kind(EventKind.DEADLINE_CHECK):
        if event.detail == "miss":
            misses_by_task[event.task] += 1

    tasks = []
    responses = []
    for task_id in trace.task_ids:
        jobs = [summary for summary in summaries if summary.task == task_id]
        completed = [summary.response_time for summary in jobs if summary.completed]
        responses.extend(completed)
        blocking = [summary.blocking for summary in jobs]
        tasks.append(
            TaskStats(
                task=task_id,
                jobs=len(jobs),
                completed=len(completed),
                censored=len(jobs) - len(completed),
                response=ResponseStats.of(completed),
                blocking_total=sum(blocking),
                blocking_max=max(blocking, default=0),
                migrations=sum(summary.migrations for summary in jobs),
                misses=misses_by_task[task_id],
            )
        )

    populations = {name: [] for name in POPULATION_NAMES.values()}
    for sample in overhead_samples(trace):
        populations[POPULATION_NAMES[sample.kind]].append(sample)

    censored = sum(stats.censored for stats in tasks)
    if censored:
        logger.info("%s: %d censored job(s) left out of response times.", trace.protocol, censored)
    return ProtocolStats(
        protocol=trace.protocol,
        horizon=trace.horizon,
        tasks=tasks,
        response=ResponseStats.of(responses),
        populations=populations,
        processors=processor_accounting(trace),
        misses=sum(misses_by_task.values()),
        censored=censored,
        warnings=len(trace.warnings),
    )
