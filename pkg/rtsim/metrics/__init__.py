from ..engine.trace import ProcessorAccount, Trace
from .intervals import (
    CSInterval,
    JobSummary,
    OverheadSample,
    RunInterval,
    WaitInterval,
    cs_intervals,
    job_summaries,
    overhead_samples,
    processor_accounting,
    run_intervals,
    wait_intervals,
)
from .stats import (
    PERCENTILES,
    POPULATION_NAMES,
    ProtocolStats,
    ResponseStats,
    TaskStats,
    percentile,
    summarize,
)
from .export import (
    EVENT_COLUMNS,
    SUMMARY_COLUMNS,
    export_csv,
    export_populations_csv,
    export_sweep_summary,
    read_events_csv,
)
