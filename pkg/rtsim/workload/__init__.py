from .testapp import (
    LEVELS,
    TESTAPP_PATTERN,
    TestAppParams,
    build_testapp_scenario,
    level_priority,
    level_task_id,
)
from .generator import generate_random_taskset, uunifast, uunifast_discard, worst_fit_decreasing
from .corner_cases import CORNER_CASE_HORIZON, corner_cases, migration_demo_scenario
from .layout import render_allocation_table
