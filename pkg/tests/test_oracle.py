from collections import deque

import pytest

import rtsim.engine.simulator
from rtsim.engine import (
    MAX_HORIZON,
    StepKind,
    build_plan,
    compare_traces,
    normalize_trace,
    run_scenario,
    step_oracle,
    verify_against_oracle,
)
from rtsim.errors import OracleGuardError
from rtsim.model import OverheadModel, Protocol, with_overheads
from rtsim.sync import PROTOCOL_HOOKS, QueueDiscipline
from rtsim.workload import CORNER_CASE_HORIZON, build_testapp_scenario, corner_cases, generate_random_taskset

SMALL_OVERHEADS = OverheadModel(lock=3, unlock=2, migrate_to=4, migrate_back=5, context_switch=1)


def small_taskset(seed, protocol, overheads=None):
    return generate_random_taskset(
        seed=seed,
        M=3 if protocol.distributed else 2,
        n=3 + seed % 2,
        Z=2,
        utilization_target=1.0,
        protocol=protocol,
        period_range=(40, 400),
        granularity=10,
        overheads=overheads,
    )


def assert_agree(scenario, horizon):
    differences = verify_against_oracle(*scenario, horizon=horizon)
    assert differences == [], "\n".join(differences)


@pytest.mark.parametrize("protocol", list(Protocol))
@pytest.mark.parametrize("case", ["uncontended", "contention", "preempted_owner", "fifo_handoff", "migration_round_trip"])
def test_corner_cases_agree(protocol, case):
    assert_agree(corner_cases(protocol)[case], CORNER_CASE_HORIZON)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_corner_cases_agree_with_overheads(protocol):
    for scenario in corner_cases(protocol).values():
        assert_agree(with_overheads(scenario, SMALL_OVERHEADS), CORNER_CASE_HORIZON)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_random_tasksets_agree(protocol):
    for seed in range(200):
        assert_agree(small_taskset(seed, protocol), 1_000)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_random_tasksets_agree_with_overheads(protocol):
    for seed in range(100):
        assert_agree(small_taskset(seed, protocol, SMALL_OVERHEADS), 1_000)


def test_guard_rejects_large_instances():
    config, tasks, resources = build_testapp_scenario()
    with pytest.raises(OracleGuardError) as excinfo:
        step_oracle(config, tasks, resources, horizon=1_000)
    assert "15 tasks (max 4)" in excinfo.value.message


def test_guard_rejects_long_horizon():
    config, tasks, resources = corner_cases(Protocol.MPCP)["uncontended"]
    with pytest.raises(OracleGuardError):
        step_oracle(config, tasks, resources, horizon=MAX_HORIZON + 1)


def test_normalized_trace_drops_sequence_numbers():
    trace = run_scenario(corner_cases(Protocol.MPCP)["uncontended"], horizon=20)
    keys = normalize_trace(trace)
    assert len(keys) == len(trace)
    assert keys[0] == (0, "JOB_RELEASE", "t1", 0, 0, None, 1, "")


def test_compare_traces_reports_a_unified_diff():
    mpcp = run_scenario(corner_cases(Protocol.MPCP)["contention"], horizon=100)
    spin = run_scenario(corner_cases(Protocol.FMLP_S)["contention"], horizon=100)
    assert compare_traces(mpcp, mpcp) == []
    diff = compare_traces(mpcp, spin)
    assert diff[0] == "--- oracle"
    assert diff[1] == "+++ engine"
    assert any(line.startswith("-") and "SUSPEND" in line for line in diff[2:])


def no_boost(semaphore, task_id, base_priorities):
    return []


def stay_on_sync_processor(task, overheads, placements):
    return deque(
        step
        for step in build_plan(task, overheads, placements)
        if not (step.kind is StepKind.MIGRATE and step.target == task.home_processor)
    )


@pytest.mark.parametrize(
    "protocol, case, target, name, broken",
    [
        (Protocol.FMLP_L, "fifo_handoff", PROTOCOL_HOOKS[Protocol.FMLP_L], "discipline", QueueDiscipline.PRIORITY),
        (Protocol.MPCP, "preempted_owner", PROTOCOL_HOOKS[Protocol.MPCP], "on_acquire", no_boost),
        (Protocol.DPCP, "migration_round_trip", rtsim.engine.simulator, "build_plan", stay_on_sync_processor),
    ],
)
def test_oracle_catches_a_broken_engine(monkeypatch, protocol, case, target, name, broken):
    scenario = corner_cases(protocol)[case]
    assert_agree(scenario, CORNER_CASE_HORIZON)
    monkeypatch.setattr(target, name, broken)
    differences = verify_against_oracle(*scenario, horizon=CORNER_CASE_HORIZON)
    assert differences[:2] == ["--- oracle", "+++ engine"]
    assert any(line.startswith("-") for line in differences[2:])
