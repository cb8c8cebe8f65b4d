"""Validation of the processor -> scheduler instance -> task binding chain.

`validate_config` never stops at the first problem: it collects every violation
in a fixed order so that two calls with the same inputs produce identical
reports."""
from dataclasses import dataclass
from typing import Tuple

from .system import (
    HIGHEST_PRIORITY,
    OVERHEAD_FIELDS,
    ProcessorRole,
    Protocol,
    highest_user_priority,
)


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "OK"
        return "\n".join(f"- {violation}" for violation in self.violations)


def _check_system(config, violations):
    if config.processors < 1:
        violations.append(f"system: processor count must be at least 1 (got {config.processors})")
    if len(config.roles) != config.processors:
        violations.append(
            f"system: {len(config.roles)} processor roles given for {config.processors} processors"
        )
    if not isinstance(config.protocol, Protocol):
        violations.append(f"system: unknown protocol {config.protocol!r}")
        return
    if config.protocol.distributed and not config.synchronization_processors:
        violations.append(
            f"system: {config.protocol.value} requires at least one synchronization processor"
        )
    if not config.application_processors:
        violations.append("system: no application processor configured")


def _check_overheads(config, violations):
    for name in OVERHEAD_FIELDS.values():
        value = getattr(config.overheads, name)
        if value < 0:
            violations.append(f"overheads: {name} must not be negative (got {value})")


def _check_resources(config, tasks, resources, violations):
    seen = set()
    for resource in resources:
        if resource.id in seen:
            violations.append(f"resource {resource.id}: duplicate id")
        seen.add(resource.id)
        if resource.ceiling < HIGHEST_PRIORITY + 1:
            violations.append(
                f"resource {resource.id}: ceiling must be a task priority level >= 1 "
                f"(got {resource.ceiling})"
            )
        # Ceilings are supplied by the user and only checked here.
        if config.protocol in (Protocol.MPCP, Protocol.DPCP):
            highest = highest_user_priority(tasks, resource.id)
            if highest is not None and resource.ceiling > highest:
                violations.append(
                    f"resource {resource.id}: ceiling {resource.ceiling} is less urgent "
                    f"than user priority {highest}"
                )
        if isinstance(config.protocol, Protocol) and config.protocol.distributed:
            proc = resource.sync_processor
            if proc is None:
                violations.append(f"resource {resource.id}: no sync_processor assigned")
            elif not 0 <= proc < len(config.roles):
                violations.append(
                    f"resource {resource.id}: sync_processor {proc} does not exist"
                )
            elif config.roles[proc] is not ProcessorRole.SYNCHRONIZATION:
                violations.append(
                    f"resource {resource.id}: sync_processor {proc} is not a "
                    "synchronization processor"
                )


def _check_task(config, task, resource_ids, violations):
    name = f"task {task.id}"
    if task.wcet <= 0:
        violations.append(f"{name}: WCET must be positive (got {task.wcet})")
    if task.period <= 0:
        violations.append(f"{name}: period must be positive (got {task.period})")
    if task.deadline <= 0:
        violations.append(f"{name}: deadline must be positive (got {task.deadline})")
    if task.deadline > task.period:
        violations.append(
            f"{name}: deadline exceeds period (D={task.deadline}, T={task.period})"
        )
    if task.priority < HIGHEST_PRIORITY + 1:
        violations.append(f"{name}: priority must be >= 1 (got {task.priority})")

    if not 0 <= task.home_processor < len(config.roles):
        violations.append(f"{name}: home processor {task.home_processor} does not exist")
    elif config.roles[task.home_processor] is not ProcessorRole.APPLICATION:
        violations.append(
            f"{name}: home processor {task.home_processor} is not an application processor"
        )

    cursor = 0
    total = 0
    for cs in task.critical_sections:
        label = f"{name}: critical section on {cs.resource_id}"
        if cs.resource_id not in resource_ids:
            violations.append(f"{label} uses an unknown resource")
        if cs.length <= 0:
            violations.append(f"{label} must have a positive length (got {cs.length})")
        if cs.offset < cursor:
            violations.append(
                f"{label} at offset {cs.offset} overlaps or precedes the previous one "
                "(sections must be disjoint, ordered and non-nested)"
            )
        if cs.end > task.wcet:
            violations.append(f"{label} ends at {cs.end}, past the WCET {task.wcet}")
        cursor = max(cursor, cs.end)
        total += cs.length
    if total > task.wcet:
        violations.append(
            f"{name}: critical sections total {total} exceeds the WCET {task.wcet}"
        )


def validate_config(config, tasks, resources) -> ValidationReport:
    """Return OK or the complete list of invariant violations."""
    violations = []
    _check_system(config, violations)
    _check_overheads(config, violations)
    _check_resources(config, tasks, resources, violations)

    resource_ids = {resource.id for resource in resources}
    seen = set()
    for task in tasks:
        if task.id in seen:
            violations.append(f"task {task.id}: duplicate id")
        seen.add(task.id)
        _check_task(config, task, resource_ids, violations)
    if not tasks:
        violations.append("system: no tasks")

    return ValidationReport(tuple(violations))
