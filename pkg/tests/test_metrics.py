import pytest

from rtsim.engine import EventKind, Trace, run, run_scenario
from rtsim.errors import ExportError
from rtsim.metrics import (
    EVENT_COLUMNS,
    SUMMARY_COLUMNS,
    cs_intervals,
    export_csv,
    export_populations_csv,
    export_sweep_summary,
    job_summaries,
    percentile,
    read_events_csv,
    summarize,
    wait_intervals,
)
from rtsim.model import OverheadModel, ProcessorRole, Protocol, SystemConfig, TaskSpec, with_overheads
from rtsim.workload import build_testapp_scenario, corner_cases, generate_random_taskset


def contention(protocol=Protocol.MPCP, horizon=100):
    return run_scenario(corner_cases(protocol)["contention"], horizon=horizon)


def test_percentile_is_nearest_rank():
    assert percentile([15, 20, 35, 40, 50], 30) == 20
    assert percentile(list(range(1, 11)), 50) == 5
    assert percentile(list(range(1, 11)), 90) == 9
    assert percentile(list(range(1, 101)), 99) == 99
    assert percentile([7], 99) == 7
    assert percentile([], 50) is None


def test_summary_of_contention():
    stats = summarize(contention())
    hi = stats.task("hi")
    assert (hi.jobs, hi.completed, hi.censored) == (1, 1, 0)
    assert hi.response.minimum == hi.response.maximum == 20
    assert hi.response.percentiles == {50: 20, 90: 20, 99: 20}
    assert (hi.blocking_total, hi.blocking_max) == (10, 10)
    assert stats.task("lo").blocking_total == 0
    assert stats.misses == stats.censored == stats.warnings == 0
    with pytest.raises(KeyError):
        stats.task("nobody")


def test_summarize_is_a_pure_function_of_the_trace():
    trace = contention(Protocol.DFLP)
    assert summarize(trace) == summarize(trace)


def test_unfinished_jobs_are_censored():
    stats = summarize(contention(horizon=12))
    assert stats.censored == 2
    hi = stats.task("hi")
    assert (hi.completed, hi.censored) == (0, 1)
    assert hi.response.mean is None
    # Waiting still in progress at the horizon counts as blocking.
    assert hi.blocking_total == 7


def test_misses_are_counted():
    task = TaskSpec("t1", 15, 10, 10, 1, 0)
    trace = run(SystemConfig(1, (ProcessorRole.APPLICATION,), Protocol.MPCP), [task], [], horizon=35)
    stats = summarize(trace)
    assert stats.misses == 3
    assert stats.task("t1").misses == 3
    assert [summary.missed for summary in job_summaries(trace)] == [True, True, True, False]


def test_intervals_of_contention():
    trace = contention()
    holds = [(i.resource, i.task, i.start, i.end) for i in cs_intervals(trace)]
    assert holds == [("r1", "lo", 0, 15), ("r1", "hi", 15, 18)]
    waits = wait_intervals(trace)
    assert [(w.task, w.start, w.end, w.suspended) for w in waits] == [("hi", 5, 15, True)]
    spinning = wait_intervals(contention(Protocol.FMLP_S))
    assert [(w.task, w.start, w.end, w.suspended) for w in spinning] == [("hi", 5, 15, False)]


@pytest.mark.parametrize("protocol", list(Protocol))
def test_immediate_grant_is_not_a_wait(protocol):
    trace = run_scenario(corner_cases(protocol)["uncontended"], horizon=50)
    assert trace.of_kind(EventKind.CS_ACQUIRE)
    assert wait_intervals(trace) == []
    assert all(account.spin == 0 for account in trace.accounting)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_response_time_decomposition(protocol):
    overheads = OverheadModel(lock=700, unlock=600, migrate_to=900, migrate_back=1_100, context_switch=300)
    scenario = with_overheads(build_testapp_scenario(protocol=protocol), overheads)
    trace = run_scenario(scenario, horizon=20_000_000)
    for summary in job_summaries(trace):
        if not summary.completed:
            continue
        assert summary.execution == scenario.task(summary.task).wcet
        assert summary.interference >= 0
        assert summary.response_time == (
            summary.execution + summary.overhead + summary.spin + summary.suspended + summary.interference
        )


def test_population_samples():
    scenario = with_overheads(corner_cases(Protocol.DPCP)["contention"], OverheadModel(2, 3, 4, 5, 1))
    stats = summarize(run_scenario(scenario, horizon=100))
    assert stats.population("lock") == [2, 2]
    assert stats.population("unlock") == [3, 3]
    assert stats.population("mig_to") == [4, 4]
    assert stats.population("mig_bk") == [5, 5]
    assert set(stats.population("ctx")) == {1}


def test_event_csv_round_trip(tmp_path):
    trace = contention(Protocol.DPCP)
    path = export_csv(trace, tmp_path / "events.csv")
    assert path.read_text().splitlines()[0] == ",".join(EVENT_COLUMNS)
    assert read_events_csv(path) == trace.events


def test_summary_csv_text(tmp_path):
    path = export_csv(summarize(contention()), tmp_path / "summary.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SUMMARY_COLUMNS)
    assert lines[1] == "lo,1,1,0,20,20.000,20,20,20,20,0,0,0,0"
    assert lines[2] == "hi,1,1,0,20,20.000,20,20,20,20,10,10,0,0"


def test_empty_trace_gives_header_only_files(tmp_path):
    trace = Trace(events=[], horizon=10, protocol="mpcp", task_ids=())
    events = export_csv(trace, tmp_path / "events.csv")
    summary = export_csv(summarize(trace), tmp_path / "summary.csv")
    assert events.read_text() == ",".join(EVENT_COLUMNS) + "\n"
    assert summary.read_text() == ",".join(SUMMARY_COLUMNS) + "\n"


def test_populations_csv(tmp_path):
    scenario = with_overheads(corner_cases(Protocol.MPCP)["uncontended"], OverheadModel(lock=2, unlock=3))
    path = export_populations_csv(summarize(run_scenario(scenario, horizon=50)), tmp_path / "populations.csv")
    assert path.read_text().splitlines() == [
        "kind,task,job,processor,start,duration",
        "lock,t1,0,0,3,2",
        "unlock,t1,0,0,9,3",
    ]


def test_sweep_summary(tmp_path):
    cells = [
        ({"protocol": protocol.value, "overheads": ""}, summarize(contention(protocol)))
        for protocol in (Protocol.MPCP, Protocol.FMLP_S)
    ]
    lines = export_sweep_summary(cells, tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0] == "protocol,overheads," + ",".join(SUMMARY_COLUMNS)
    assert len(lines) == 1 + 2 * 2
    assert lines[3].startswith("fmlp-s,,lo,")


def test_export_rejects_other_objects(tmp_path):
    with pytest.raises(TypeError):
        export_csv(["not", "a", "trace"], tmp_path / "x.csv")


def test_export_error_on_unwritable_path(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(ExportError) as excinfo:
        export_csv(contention(), blocker / "events.csv")
    assert str(blocker) in excinfo.value.message


def test_read_events_csv_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ExportError):
        read_events_csv(path)


def test_processor_split_covers_horizon_on_random_sets():
    for seed in range(10):
        scenario = generate_random_taskset(seed, M=3, n=5, Z=2, utilization_target=1.5, protocol=Protocol.FMLP_S)
        trace = run_scenario(scenario, horizon=2_000_000)
        stats = summarize(trace)
        assert all(account.total == 2_000_000 for account in stats.processors)
        spin = sum(account.spin for account in stats.processors)
        assert spin == sum(summary.spin for summary in job_summaries(trace))
