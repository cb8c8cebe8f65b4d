from .errors import (
    ConfigError,
    ExportError,
    NestedAccessError,
    NotOwnerError,
    OracleGuardError,
    SimulationError,
    SimulationFault,
)
from .model import (
    OverheadModel,
    Protocol,
    Scenario,
    load_config,
    loads_config,
    validate_config,
)
from .engine import Simulator, Trace, run, run_scenario, step_oracle
from .metrics import export_csv, summarize
from .workload import build_testapp_scenario, generate_random_taskset
