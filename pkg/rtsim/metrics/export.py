"""CSV result files.

Every cell is rendered to text before it reaches pandas, so the files are
byte-identical across runs and platforms: integers stay integers, means get
three decimals, missing values are empty cells."""
import logging
from pathlib import Path
from typing import Iterable, List, Mapping, Tuple

import pandas as pd

from ..engine.events import Event, EventKind
from ..engine.trace import Trace
from ..errors import ExportError
from .stats import PERCENTILES, ProtocolStats, TaskStats

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ["time", "seq", "kind", "task", "job", "processor", "resource", "priority", "detail"]

SUMMARY_COLUMNS = [
    "task",
    "jobs",
    "completed",
    "censored",
    "rt_min",
    "rt_avg",
    "rt_max",
    *(f"rt_p{q}" for q in PERCENTILES),
    "blocking_total",
    "blocking_max",
    "migrations",
    "misses",
]

POPULATION_COLUMNS = ["kind", "task", "job", "processor", "start", "duration"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.3f}"
    if isinstance(value, EventKind):
        return value.value
    return str(value)


def _frame(rows: Iterable[Mapping], columns: List[str]) -> pd.DataFrame:
    return pd.DataFrame([[_cell(row[column]) for column in columns] for row in rows], columns=columns)


def _write(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as exc:
        raise ExportError(path, exc.strerror or str(exc))
    logger.info("Wrote %d row(s) to %s.", len(frame), path)
    return path


def events_frame(trace: Trace) -> pd.DataFrame:
    rows = [{column: getattr(event, column) for column in EVENT_COLUMNS} for event in trace.events]
    return _frame(rows, EVENT_COLUMNS)


def _task_row(stats: TaskStats) -> dict:
    row = {
        "task": stats.task,
        "jobs": stats.jobs,
        "completed": stats.completed,
        "censored": stats.censored,
        "rt_min": stats.response.minimum,
        "rt_avg": stats.response.mean,
        "rt_max": stats.response.maximum,
        "blocking_total": stats.blocking_total,
        "blocking_max": stats.blocking_max,
        "migrations": stats.migrations,
        "misses": stats.misses,
    }
    for q in PERCENTILES:
        row[f"rt_p{q}"] = stats.response.percentiles.get(q)
    return row


def summary_frame(stats: ProtocolStats) -> pd.DataFrame:
    return _frame([_task_row(task) for task in stats.tasks], SUMMARY_COLUMNS)


def populations_frame(stats: ProtocolStats) -> pd.DataFrame:
    rows = [
        {
            "kind": name,
            "task": sample.task,
            "job": sample.job,
            "processor": sample.processor,
            "start": sample.start,
            "duration": sample.duration,
        }
        for name, samples in stats.populations.items()
        for sample in samples
    ]
    return _frame(rows, POPULATION_COLUMNS)


def export_csv(result, path) -> Path:
    """Write a `Trace` as an event log or `ProtocolStats` as a per-task
    summary."""
    if isinstance(result, Trace):
        return _write(events_frame(result), path)
    if isinstance(result, ProtocolStats):
        return _write(summary_frame(result), path)
    raise TypeError(f"cannot export {type(result).__name__} as CSV")


def export_populations_csv(stats: ProtocolStats, path) -> Path:
    """Every overhead sample, for distribution plots."""
    return _write(populations_frame(stats), path)


def export_sweep_summary(cells: Iterable[Tuple[Mapping[str, str], ProtocolStats]], path) -> Path:
    """One summary table for a whole sweep. Each cell's labels (protocol,
    overhead file) become leading columns."""
    frames = []
    label_columns: List[str] = []
    for labels, stats in cells:
        frame = summary_frame(stats)
        for position, (name, value) in enumerate(labels.items()):
            frame.insert(position, name, _cell(value))
            if name not in label_columns:
                label_columns.append(name)
        frames.append(frame)
    if not frames:
        return _write(pd.DataFrame(columns=label_columns + SUMMARY_COLUMNS), path)
    return _write(pd.concat(frames, ignore_index=True), path)


def read_events_csv(path) -> List[Event]:
    """Load an event log written by `export_csv`."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.EmptyDataError) as exc:
        raise ExportError(path, str(exc))
    missing = [column for column in EVENT_COLUMNS if column not in frame.columns]
    if missing:
        raise ExportError(path, f"missing columns {missing}")
    events = []
    for row in frame.itertuples(index=False):
        events.append(
            Event(
                time=int(row.time),
                seq=int(row.seq),
                kind=EventKind(row.kind),
                task=row.task,
                job=int(row.job),
                processor=int(row.processor),
                resource=row.resource or None,
                priority=int(row.priority) if row.priority else None,
                detail=row.detail,
            )
        )
    return events
