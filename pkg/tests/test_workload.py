import numpy as np
import pytest

from rtsim.model import ProcessorRole, Protocol, validate_config
from rtsim.workload import (
    LEVELS,
    TESTAPP_PATTERN,
    TestAppParams,
    build_testapp_scenario,
    corner_cases,
    generate_random_taskset,
    migration_demo_scenario,
    render_allocation_table,
    level_priority,
    level_task_id,
    uunifast,
    uunifast_discard,
    worst_fit_decreasing,
)
from rtsim.workload.generator import log_uniform_periods


def test_testapp_allocation():
    scenario = build_testapp_scenario()
    assert len(scenario.tasks) == 15
    assert scenario.config.roles[3] is ProcessorRole.SYNCHRONIZATION
    for processor, levels in TESTAPP_PATTERN.items():
        assert set(levels.values()) == {"s1", "s2", "s3"}
        for level, resource_id in levels.items():
            task = scenario.task(level_task_id(level, processor))
            assert task.home_processor == processor
            assert task.resources == (resource_id,)
            assert task.priority == level_priority(level, processor)
    assert {r.sync_processor for r in scenario.resources} == {3}


def test_testapp_priorities_are_level_major():
    assert level_priority("H", 0) == 1
    assert level_priority("H", 2) == 3
    assert level_priority("MH", 0) == 4
    assert level_priority("L", 2) == 15
    priorities = [level_priority(level, p) for level in LEVELS for p in range(3)]
    assert priorities == list(range(1, 16))


def test_testapp_ceilings_are_highest_user_priority():
    scenario = build_testapp_scenario()
    assert {r.id: r.ceiling for r in scenario.resources} == {"s1": 2, "s2": 3, "s3": 1}


@pytest.mark.parametrize("protocol", list(Protocol))
def test_testapp_valid_under_every_protocol(protocol):
    scenario = build_testapp_scenario(protocol=protocol)
    assert validate_config(*scenario).ok
    if not protocol.distributed:
        assert all(role is ProcessorRole.APPLICATION for role in scenario.config.roles)
        assert {r.sync_processor for r in scenario.resources} == {None}


def test_testapp_params_override():
    scenario = build_testapp_scenario(TestAppParams(wcet=80_000, cs_offset=0, cs_length=40_000))
    assert {task.wcet for task in scenario.tasks} == {80_000}
    assert {task.critical_sections[0].length for task in scenario.tasks} == {40_000}


def test_uunifast_sums_to_total():
    rng = np.random.default_rng(1)
    shares = uunifast(rng, 5, 2.5)
    assert len(shares) == 5
    assert sum(shares) == pytest.approx(2.5)
    assert all(share >= 0 for share in shares)


def test_uunifast_discard_caps_every_share():
    rng = np.random.default_rng(2)
    for _ in range(20):
        assert max(uunifast_discard(rng, 4, 2.0)) <= 1.0


def test_uunifast_discard_gives_up():
    with pytest.raises(ValueError):
        uunifast_discard(np.random.default_rng(0), 2, 1.9, cap=0.5, limit=10)


def test_log_uniform_periods_respect_granularity():
    periods = log_uniform_periods(np.random.default_rng(3), 50, (10_000, 1_000_000), 1_000)
    assert all(period % 1_000 == 0 for period in periods)
    assert all(10_000 <= period <= 1_000_000 for period in periods)


def test_worst_fit_decreasing():
    assert worst_fit_decreasing([0.5, 0.4, 0.3, 0.2], [0, 1]) == [0, 1, 1, 0]
    assert worst_fit_decreasing([0.1, 0.1], [2]) == [2, 2]


def test_generator_is_deterministic():
    kwargs = dict(M=4, n=8, Z=2, utilization_target=1.5)
    assert generate_random_taskset(7, **kwargs) == generate_random_taskset(7, **kwargs)
    assert generate_random_taskset(7, **kwargs) != generate_random_taskset(8, **kwargs)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_generated_tasksets_are_valid(protocol):
    for seed in range(30):
        scenario = generate_random_taskset(seed, M=4, n=8, Z=3, utilization_target=2.0, protocol=protocol)
        assert validate_config(*scenario).ok
        assert len(scenario.tasks) == 8
        assert [r.id for r in scenario.resources] == ["s1", "s2", "s3"]
        assert sum(task.utilization for task in scenario.tasks) == pytest.approx(2.0, rel=0.01)
        by_period = sorted(scenario.tasks, key=lambda task: (task.period, int(task.id[1:])))
        assert [task.priority for task in by_period] == list(range(1, 9))
        for task in scenario.tasks:
            assert len(task.critical_sections) <= 2
            for cs in task.critical_sections:
                assert 0.05 * task.wcet - 1 <= cs.length <= max(1, 0.2 * task.wcet)
        if protocol.distributed:
            assert scenario.config.roles[-1] is ProcessorRole.SYNCHRONIZATION
            assert {r.sync_processor for r in scenario.resources} == {3}
            assert all(task.home_processor < 3 for task in scenario.tasks)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(M=4, n=3, Z=1, utilization_target=1.0),
        dict(M=2, n=4, Z=0, utilization_target=1.0),
        dict(M=2, n=4, Z=1, utilization_target=2.5),
        dict(M=1, n=4, Z=1, utilization_target=0.5, protocol=Protocol.DPCP),
    ],
)
def test_generator_rejects_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        generate_random_taskset(0, **kwargs)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_corner_cases_are_valid(protocol):
    cases = corner_cases(protocol)
    assert len(cases) == 5
    for name, scenario in cases.items():
        assert validate_config(*scenario).ok, name
        assert len(scenario.tasks) <= 4


def test_migration_demo_is_valid():
    assert validate_config(*migration_demo_scenario()).ok


def test_allocation_table():
    table = render_allocation_table(build_testapp_scenario())
    lines = table.splitlines()
    assert lines[0].split(" | ")[0].strip() == "CPU#0"
    assert "Synchronization" in lines[1]
    assert set(lines[2]) <= {"-", "+"}
    assert lines[3].startswith("cpu0_L q=13 s1")
    assert "hosts s1,s2,s3" in table


def test_allocation_table_without_sync_processor():
    table = render_allocation_table(build_testapp_scenario(protocol=Protocol.MPCP))
    assert "Synchronization" not in table
    assert "hosts" not in table
