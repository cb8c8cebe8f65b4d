from .events import Event, EventKind
from .trace import ProcessorAccount, Trace
from .jobs import JobState, Phase, Step, StepKind, build_plan
from .simulator import Simulator, run, run_scenario, scenario_fingerprint
from .oracle import (
    MAX_HORIZON,
    MAX_RESOURCES,
    MAX_TASKS,
    StepOracle,
    check_guard,
    compare_traces,
    normalize_trace,
    step_oracle,
    verify_against_oracle,
)
