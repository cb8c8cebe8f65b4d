"""Small hand-made scenarios, each aimed at one protocol mechanism. They fit
within the step oracle's guard so every one can be cross-checked."""
from typing import Dict, Sequence

from ..model.system import (
    CriticalSectionSpec,
    ProcessorRole,
    Protocol,
    ResourceSpec,
    Scenario,
    SystemConfig,
    TaskSpec,
    highest_user_priority,
)

CORNER_CASE_HORIZON = 200


def _task(task_id, priority, processor, wcet, period, *sections) -> TaskSpec:
    return TaskSpec(
        id=task_id,
        wcet=wcet,
        period=period,
        deadline=period,
        priority=priority,
        home_processor=processor,
        critical_sections=tuple(CriticalSectionSpec(*section) for section in sections),
    )


def _build(protocol: Protocol, application_processors: int, tasks: Sequence[TaskSpec], resource_ids) -> Scenario:
    """Wrap tasks into a scenario. Distributed protocols get one extra
    processor, after the application processors, hosting every resource."""
    if protocol.distributed:
        roles = (ProcessorRole.APPLICATION,) * application_processors + (ProcessorRole.SYNCHRONIZATION,)
        sync_processor = application_processors
    else:
        roles = (ProcessorRole.APPLICATION,) * application_processors
        sync_processor = None
    resources = tuple(
        ResourceSpec(resource_id, highest_user_priority(tasks, resource_id), sync_processor)
        for resource_id in resource_ids
    )
    return Scenario(SystemConfig(len(roles), roles, protocol), tuple(tasks), resources)


def corner_cases(protocol) -> Dict[str, Scenario]:
    """Named scenarios for `protocol`:

    uncontended: one task, one critical section, nothing to wait for.
    contention: a remote task requests while the owner still has 10 ns of
        its critical section left.
    preempted_owner: an owner boosted to the ceiling shares its processor
        with a more urgent task that uses no resource, and with a less urgent
        one that must not run during the critical section.
    fifo_handoff: three requests arrive in order of increasing urgency, so
        FIFO and priority queues hand the resource over differently.
    migration_round_trip: back-to-back sections, sections on two resources
        with work in between, and a job that ends inside its section.
    """
    if not isinstance(protocol, Protocol):
        protocol = Protocol.parse(protocol)
    return {
        "uncontended": _build(protocol, 1, [_task("t1", 1, 0, 10, 50, ("r1", 3, 4))], ["r1"]),
        "contention": _build(
            protocol,
            2,
            [
                _task("lo", 2, 0, 20, 100, ("r1", 0, 15)),
                _task("hi", 1, 1, 10, 100, ("r1", 5, 3)),
            ],
            ["r1"],
        ),
        "preempted_owner": _build(
            protocol,
            2,
            [
                _task("urgent", 1, 0, 2, 10),
                _task("mid", 3, 0, 4, 50),
                _task("lo", 4, 0, 20, 100, ("r1", 2, 10)),
                _task("hi", 2, 1, 14, 100, ("r1", 10, 2)),
            ],
            ["r1"],
        ),
        "fifo_handoff": _build(
            protocol,
            3,
            [
                _task("a", 3, 0, 12, 100, ("r1", 0, 10)),
                _task("b", 2, 1, 6, 100, ("r1", 2, 3)),
                _task("c", 1, 2, 6, 100, ("r1", 3, 3)),
            ],
            ["r1"],
        ),
        "migration_round_trip": _build(
            protocol,
            2,
            [
                _task("t1", 1, 0, 20, 60, ("r1", 2, 3), ("r2", 8, 3)),
                _task("t2", 2, 1, 10, 60, ("r2", 6, 4)),
                _task("t3", 3, 1, 8, 60, ("r1", 1, 2), ("r2", 3, 2)),
            ],
            ["r1", "r2"],
        ),
    }


def migration_demo_scenario() -> Scenario:
    """A task of priority 7 on CPU#0 whose critical section runs on CPU#1,
    where the resource's ceiling is 2 because of a second user on CPU#2."""
    tasks = (
        _task("tau_i", 7, 0, 10, 100, ("r1", 2, 4)),
        _task("tau_j", 2, 2, 10, 100, ("r1", 6, 2)),
    )
    roles = (ProcessorRole.APPLICATION, ProcessorRole.SYNCHRONIZATION, ProcessorRole.APPLICATION)
    resources = (ResourceSpec("r1", 2, 1),)
    return Scenario(SystemConfig(3, roles, Protocol.DPCP), tasks, resources)
