from .system import (
    HIGHEST_PRIORITY,
    CriticalSectionSpec,
    OverheadKind,
    OverheadModel,
    Priority,
    ProcessorRole,
    Protocol,
    ResourceSpec,
    Scenario,
    SystemConfig,
    TaskSpec,
    TimeNs,
    highest_user_priority,
    hyperperiod,
    more_urgent,
    with_overheads,
    with_protocol,
)
from .validation import ValidationReport, validate_config
from .configfile import (
    dump_config,
    dumps_config,
    dumps_overheads,
    load_config,
    load_overheads,
    loads_config,
)
