import pytest

from rtsim.engine import EventKind, Simulator, run, run_scenario, verify_against_oracle
from rtsim.errors import ConfigError, NotOwnerError, SimulationFault
from rtsim.metrics import job_summaries
from rtsim.model import (
    CriticalSectionSpec,
    ProcessorRole,
    Protocol,
    ResourceSpec,
    SystemConfig,
    TaskSpec,
    with_protocol,
)
from rtsim.sched import NodeState
from rtsim.sync import SemaphoreTable
from rtsim.workload import build_testapp_scenario, corner_cases, migration_demo_scenario

from .properties import check_conservation, check_mutual_exclusion

APP = ProcessorRole.APPLICATION
SYNC = ProcessorRole.SYNCHRONIZATION


def kinds(trace, task=None):
    return [event.kind for event in trace.events if task is None or event.task == task]


def first(trace, kind, task):
    return next(event for event in trace.events if event.kind is kind and event.task == task)


def completion_times(trace, task):
    return [event.time for event in trace.events if event.kind is EventKind.JOB_COMPLETE and event.task == task]


def test_single_task_without_resources():
    task = TaskSpec("t1", 10, 50, 50, 1, 0)
    trace = run(SystemConfig(1, (APP,), Protocol.MPCP), [task], [], horizon=100)
    assert kinds(trace) == [
        EventKind.JOB_RELEASE,
        EventKind.DISPATCH,
        EventKind.JOB_COMPLETE,
        EventKind.JOB_RELEASE,
        EventKind.DISPATCH,
        EventKind.JOB_COMPLETE,
    ]
    assert completion_times(trace, "t1") == [10, 60]
    assert [event.seq for event in trace.events] == list(range(6))
    check_conservation(trace)
    assert trace.accounting[0].execution == 20
    assert trace.accounting[0].idle == 80


@pytest.mark.parametrize("protocol", [Protocol.MPCP, Protocol.FMLP_L, Protocol.FMLP_S])
def test_contention_delays_by_residual_section(protocol):
    trace = run_scenario(corner_cases(protocol)["contention"], horizon=100)
    assert first(trace, EventKind.CS_REQUEST, "hi").time == 5
    assert first(trace, EventKind.CS_ACQUIRE, "hi").time == 15
    assert completion_times(trace, "hi") == [20]
    assert completion_times(trace, "lo") == [20]
    hi = next(summary for summary in job_summaries(trace) if summary.task == "hi")
    assert hi.blocking == 10
    check_mutual_exclusion(trace)
    check_conservation(trace)


def test_suspension_versus_spinning():
    suspended = run_scenario(corner_cases(Protocol.MPCP)["contention"], horizon=100)
    spinning = run_scenario(corner_cases(Protocol.FMLP_S)["contention"], horizon=100)
    assert EventKind.SUSPEND in kinds(suspended, "hi")
    assert EventKind.RESUME in kinds(suspended, "hi")
    assert EventKind.SUSPEND not in kinds(spinning, "hi")
    assert suspended.accounting[1].spin == 0
    assert spinning.accounting[1].spin == 10


def test_dpcp_ceiling_delays_arrival_on_sync_processor():
    trace = run_scenario(corner_cases(Protocol.DPCP)["contention"], horizon=100)
    assert [(e.kind, e.time, e.processor) for e in trace.for_task("hi") if e.kind.name.startswith("MIGRATE")] == [
        (EventKind.MIGRATE_TO, 5, 2),
        (EventKind.MIGRATE_BACK, 18, 1),
    ]
    # hi only requests once the owner drops back from the ceiling.
    assert first(trace, EventKind.CS_REQUEST, "hi").time == 15
    assert first(trace, EventKind.CS_ACQUIRE, "hi").processor == 2
    preempt = first(trace, EventKind.PREEMPT, "lo")
    assert (preempt.time, preempt.processor) == (15, 2)
    assert completion_times(trace, "hi") == [20]
    assert completion_times(trace, "lo") == [23]


def test_dflp_raises_owner_on_sync_processor():
    trace = run_scenario(corner_cases(Protocol.DFLP)["contention"], horizon=100)
    assert first(trace, EventKind.CS_REQUEST, "hi").time == 5
    assert first(trace, EventKind.SUSPEND, "hi").processor == 2
    assert first(trace, EventKind.CS_ACQUIRE, "hi").time == 15
    assert completion_times(trace, "hi") == [20]
    assert completion_times(trace, "lo") == [23]


@pytest.mark.parametrize(
    "protocol, first_grantee",
    [
        (Protocol.MPCP, "c"),
        (Protocol.DPCP, "c"),
        (Protocol.FMLP_L, "b"),
        (Protocol.FMLP_S, "b"),
        (Protocol.DFLP, "b"),
    ],
)
def test_handoff_order(protocol, first_grantee):
    trace = run_scenario(corner_cases(protocol)["fifo_handoff"], horizon=100)
    acquisitions = [(event.task, event.time) for event in trace.of_kind(EventKind.CS_ACQUIRE)]
    second = "b" if first_grantee == "c" else "c"
    assert acquisitions == [("a", 0), (first_grantee, 10), (second, 13)]


def test_mpcp_owner_preempted_above_ceiling():
    trace = run_scenario(corner_cases(Protocol.MPCP)["preempted_owner"], horizon=100)
    acquire = first(trace, EventKind.CS_ACQUIRE, "lo")
    assert (acquire.time, acquire.priority) == (8, 2)
    preemptions = [event.time for event in trace.for_task("lo") if event.kind is EventKind.PREEMPT]
    assert preemptions[:2] == [10, 20]
    assert first(trace, EventKind.CS_RELEASE, "lo").time == 22
    assert first(trace, EventKind.CS_ACQUIRE, "hi").time == 22
    assert completion_times(trace, "hi") == [26]


def test_fmlp_short_owner_is_not_preempted():
    trace = run_scenario(corner_cases(Protocol.FMLP_S)["preempted_owner"], horizon=100)
    acquire = first(trace, EventKind.CS_ACQUIRE, "lo")
    release = first(trace, EventKind.CS_RELEASE, "lo")
    assert (acquire.time, release.time) == (8, 18)
    assert acquire.priority == 0
    assert not [
        event for event in trace.for_task("lo")
        if event.kind is EventKind.PREEMPT and acquire.seq < event.seq < release.seq
    ]
    assert first(trace, EventKind.CS_ACQUIRE, "hi").time == 18


def test_dpcp_job_ending_in_section_completes_on_sync_processor():
    config = SystemConfig(2, (APP, SYNC), Protocol.DPCP)
    task = TaskSpec("t1", 7, 100, 100, 1, 0, (CriticalSectionSpec("r1", 3, 4),))
    trace = run(config, [task], [ResourceSpec("r1", 1, 1)], horizon=100)
    assert [event.kind for event in trace.events if event.kind.name.startswith("MIGRATE")] == [EventKind.MIGRATE_TO]
    complete = first(trace, EventKind.JOB_COMPLETE, "t1")
    assert (complete.time, complete.processor) == (7, 1)


def test_back_to_back_sections_stay_on_sync_processor():
    trace = run_scenario(corner_cases(Protocol.DPCP)["migration_round_trip"], horizon=60)
    t3 = [event.kind for event in trace.for_task("t3", 0) if event.kind.name.startswith("MIGRATE")]
    assert t3 == [EventKind.MIGRATE_TO, EventKind.MIGRATE_BACK]
    t1 = [event.kind for event in trace.for_task("t1", 0) if event.kind.name.startswith("MIGRATE")]
    assert t1 == [EventKind.MIGRATE_TO, EventKind.MIGRATE_BACK] * 2


def test_migration_enters_at_base_priority_then_boosts():
    trace = run_scenario(migration_demo_scenario(), horizon=100)
    migrate = first(trace, EventKind.MIGRATE_TO, "tau_i")
    assert (migrate.time, migrate.processor, migrate.priority) == (2, 1, 7)
    acquire = first(trace, EventKind.CS_ACQUIRE, "tau_i")
    assert (acquire.processor, acquire.priority) == (1, 2)
    back = first(trace, EventKind.MIGRATE_BACK, "tau_i")
    assert (back.processor, back.priority) == (0, 7)


def test_backlogged_jobs_and_deadline_misses():
    task = TaskSpec("t1", 15, 10, 10, 1, 0)
    trace = run(SystemConfig(1, (APP,), Protocol.MPCP), [task], [], horizon=35)
    assert completion_times(trace, "t1") == [15, 30]
    misses = [(event.time, event.job) for event in trace.of_kind(EventKind.DEADLINE_CHECK)]
    assert misses == [(10, 0), (20, 1), (30, 2)]
    assert all(event.detail == "miss" for event in trace.of_kind(EventKind.DEADLINE_CHECK))


def test_completion_at_deadline_is_not_a_miss():
    task = TaskSpec("t1", 10, 10, 10, 1, 0)
    trace = run(SystemConfig(1, (APP,), Protocol.MPCP), [task], [], horizon=50)
    assert not trace.of_kind(EventKind.DEADLINE_CHECK)
    assert trace.accounting[0].idle == 0


def test_simultaneous_releases_follow_task_order():
    tasks = [TaskSpec(f"t{i}", 1, 10, 10, 5 - i, 0) for i in range(3)]
    trace = run(SystemConfig(1, (APP,), Protocol.MPCP), tasks, [], horizon=10)
    releases = [event.task for event in trace.of_kind(EventKind.JOB_RELEASE)]
    assert releases == ["t0", "t1", "t2"]
    assert [event.task for event in trace.of_kind(EventKind.JOB_COMPLETE)] == ["t2", "t1", "t0"]


def test_invalid_configuration_is_rejected():
    task = TaskSpec("t1", 10, 10, 20, 1, 0)
    with pytest.raises(ConfigError) as excinfo:
        run(SystemConfig(1, (APP,), Protocol.MPCP), [task], [], horizon=10)
    assert "deadline exceeds period" in excinfo.value.message


def test_fault_carries_trace_prefix(monkeypatch):
    def broken_release(self, task_id, resource_id, now):
        raise NotOwnerError(task_id, resource_id, "nobody")

    monkeypatch.setattr(SemaphoreTable, "release", broken_release)
    with pytest.raises(SimulationFault) as excinfo:
        run_scenario(corner_cases(Protocol.MPCP)["uncontended"], horizon=50)
    assert "not owner" in excinfo.value.message
    assert excinfo.value.events
    assert excinfo.value.events[-1].kind is EventKind.CS_ACQUIRE


def test_verbose_logs_events(caplog):
    caplog.set_level("INFO")
    Simulator(*corner_cases(Protocol.MPCP)["uncontended"], horizon=20, verbose=True).run()
    assert "CS_ACQUIRE" in caplog.text


def test_testapp_dpcp_sections_on_cpu3():
    trace = run_scenario(build_testapp_scenario(protocol=Protocol.DPCP), horizon=5_000_000)
    acquisitions = trace.of_kind(EventKind.CS_ACQUIRE)
    assert acquisitions
    assert {event.processor for event in acquisitions} == {3}
    assert trace.of_kind(EventKind.MIGRATE_BACK)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_testapp_meets_deadlines(protocol):
    scenario = build_testapp_scenario(protocol=protocol)
    trace = run_scenario(scenario, horizon=10 * 20_000_000)
    assert not trace.of_kind(EventKind.DEADLINE_CHECK)
    check_mutual_exclusion(trace)
    check_conservation(trace)
    jobs = job_summaries(trace)
    assert all(summary.completed for summary in jobs)
    assert len(jobs) == 3 * (200 + 100 + 80 + 50 + 40)


def test_testapp_mpcp_variant_also_runs_from_dpcp_file():
    scenario = with_protocol(build_testapp_scenario(protocol=Protocol.DPCP), Protocol.MPCP)
    trace = run_scenario(scenario, horizon=20_000_000)
    assert not trace.of_kind(EventKind.MIGRATE_TO)
    assert trace.accounting[3].idle == 20_000_000


def test_completion_precedes_request_at_the_same_instant():
    config = SystemConfig(2, (APP, APP), Protocol.MPCP)
    tasks = [
        TaskSpec("req", 10, 100, 100, 1, 0, (CriticalSectionSpec("r1", 5, 2),)),
        TaskSpec("done", 5, 100, 100, 2, 1),
    ]
    trace = run(config, tasks, [ResourceSpec("r1", 1)], horizon=100)
    at_five = [(event.kind, event.task) for event in trace.events if event.time == 5]
    assert at_five == [
        (EventKind.JOB_COMPLETE, "done"),
        (EventKind.CS_REQUEST, "req"),
        (EventKind.CS_ACQUIRE, "req"),
    ]
    assert verify_against_oracle(config, tasks, [ResourceSpec("r1", 1)], horizon=100) == []


@pytest.mark.parametrize("protocol", [Protocol.MPCP, Protocol.FMLP_L, Protocol.FMLP_S])
def test_release_precedes_request_at_the_same_instant(protocol):
    config = SystemConfig(2, (APP, APP), protocol)
    tasks = [
        TaskSpec("asker", 10, 100, 100, 1, 0, (CriticalSectionSpec("r1", 5, 2),)),
        TaskSpec("holder", 8, 100, 100, 2, 1, (CriticalSectionSpec("r1", 0, 5),)),
    ]
    resources = [ResourceSpec("r1", 1)]
    trace = run(config, tasks, resources, horizon=100)
    at_five = [(event.kind, event.task) for event in trace.events if event.time == 5]
    assert at_five == [
        (EventKind.CS_RELEASE, "holder"),
        (EventKind.CS_REQUEST, "asker"),
        (EventKind.CS_ACQUIRE, "asker"),
    ]
    assert EventKind.SUSPEND not in kinds(trace)
    assert trace.accounting[0].spin == 0
    assert completion_times(trace, "asker") == [10]
    assert completion_times(trace, "holder") == [8]
    assert verify_against_oracle(config, tasks, resources, horizon=100) == []


class NodeSnapshots(Simulator):
    """Records one task's scheduler nodes after every settled instant."""

    def __init__(self, *args, task_id, **kwargs):
        super().__init__(*args, **kwargs)
        self.task_id = task_id
        self.snapshots = {}

    def _settle(self, now):
        super()._settle(now)
        self.snapshots[now] = [
            (node.processor, node.state, node.effective_priority)
            for node in self.scheduler.task_nodes(self.task_id)
        ]


def test_migration_demo_node_states():
    simulator = NodeSnapshots(*migration_demo_scenario(), horizon=20, task_id="tau_i")
    trace = simulator.run()
    snapshots = simulator.snapshots
    assert snapshots[0] == [
        (0, NodeState.SCHEDULED, 7),
        (1, NodeState.BLOCKED, None),
        (2, NodeState.BLOCKED, None),
    ]
    # Home node blocked, the node on the synchronization processor runs at
    # the ceiling once the semaphore is held.
    assert snapshots[2] == [
        (0, NodeState.BLOCKED, 7),
        (1, NodeState.SCHEDULED, 2),
        (2, NodeState.BLOCKED, None),
    ]
    assert snapshots[6] == [
        (0, NodeState.SCHEDULED, 7),
        (1, NodeState.BLOCKED, 7),
        (2, NodeState.BLOCKED, None),
    ]
    assert completion_times(trace, "tau_i") == [10]
    assert verify_against_oracle(*migration_demo_scenario(), horizon=100) == []
