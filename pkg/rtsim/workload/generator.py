"""Seeded random task sets for property tests and sweeps."""
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from ..model.system import (
    CriticalSectionSpec,
    OverheadModel,
    ProcessorRole,
    Protocol,
    ResourceSpec,
    Scenario,
    SystemConfig,
    TaskSpec,
    highest_user_priority,
)
from ..model.validation import validate_config

logger = logging.getLogger(__name__)

MAX_CS_PER_TASK = 2


def uunifast(rng: np.random.Generator, n: int, total: float) -> List[float]:
    """Draw n utilizations summing to `total`, uniformly over the simplex."""
    utilizations = []
    remaining = total
    for i in range(1, n):
        following = remaining * rng.random() ** (1.0 / (n - i))
        utilizations.append(remaining - following)
        remaining = following
    utilizations.append(remaining)
    return utilizations


def uunifast_discard(rng: np.random.Generator, n: int, total: float, cap: float = 1.0, limit: int = 1000) -> List[float]:
    """UUniFast, redrawn until no task exceeds `cap`."""
    for _ in range(limit):
        utilizations = uunifast(rng, n, total)
        if max(utilizations) <= cap:
            return utilizations
    raise ValueError(f"no utilization vector with every share <= {cap} after {limit} draws")


def log_uniform_periods(rng: np.random.Generator, n: int, period_range: Tuple[int, int], granularity: int) -> List[int]:
    low, high = period_range
    draws = np.exp(rng.uniform(math.log(low), math.log(high), size=n))
    return [max(granularity, int(round(value / granularity)) * granularity) for value in draws]


def _critical_sections(rng, wcet: int, resource_count: int, cs_ratio_range) -> Tuple[CriticalSectionSpec, ...]:
    """0 to 2 non-nested sections, lengths a fraction of the WCET, spread
    over the job by random gaps. Returns None if they do not fit."""
    count = int(rng.integers(0, MAX_CS_PER_TASK + 1))
    if count == 0:
        return ()
    low, high = cs_ratio_range
    lengths = [max(1, int(rng.uniform(low, high) * wcet)) for _ in range(count)]
    resources = [f"s{int(rng.integers(0, resource_count)) + 1}" for _ in range(count)]
    slack = wcet - sum(lengths)
    if slack < 0:
        return None
    cuts = sorted(int(cut) for cut in rng.integers(0, slack + 1, size=count))
    sections = []
    cursor = 0
    previous_cut = 0
    for cut, length, resource_id in zip(cuts, lengths, resources):
        cursor += cut - previous_cut
        previous_cut = cut
        sections.append(CriticalSectionSpec(resource_id, cursor, length))
        cursor += length
    return tuple(sections)


def worst_fit_decreasing(utilizations: Sequence[float], processors: Sequence[int]) -> List[int]:
    """Assign each task, largest utilization first, to the least loaded
    processor (lowest index on ties). Returns the processor of every task."""
    load = {processor: 0.0 for processor in processors}
    assignment = [None] * len(utilizations)
    order = sorted(range(len(utilizations)), key=lambda index: (-utilizations[index], index))
    for index in order:
        target = min(processors, key=lambda processor: (load[processor], processor))
        load[target] += utilizations[index]
        assignment[index] = target
    return assignment


def generate_random_taskset(
    seed: int,
    M: int,
    n: int,
    Z: int,
    utilization_target: float,
    cs_ratio_range: Tuple[float, float] = (0.05, 0.2),
    protocol: Protocol = Protocol.MPCP,
    period_range: Tuple[int, int] = (10_000, 1_000_000),
    granularity: int = 1_000,
    max_attempts: int = 100,
    overheads: OverheadModel = None,
) -> Scenario:
    """Generate a valid scenario, deterministically in `seed`.

    @param M: processors; under a distributed protocol the last one is the
        synchronization processor of every resource
    @param n: tasks, n >= M
    @param Z: resources s1..sZ
    @param utilization_target: total utilization, 0 < U <= M
    @param cs_ratio_range: critical-section length as a fraction of the WCET
    @param period_range: bounds of the log-uniform period distribution, ns
    @param granularity: periods are multiples of this, ns
    @param max_attempts: draws before giving up with `ValueError`
    """
    if not isinstance(protocol, Protocol):
        protocol = Protocol.parse(protocol)
    if not (M >= 1 and n >= M and Z >= 1):
        raise ValueError(f"need n >= M >= 1 and Z >= 1, got M={M}, n={n}, Z={Z}")
    if not 0 < utilization_target <= M:
        raise ValueError(f"utilization target {utilization_target} outside (0, {M}]")
    if protocol.distributed and M < 2:
        raise ValueError(f"{protocol.value} needs a synchronization processor, M must be >= 2")
    low, high = cs_ratio_range
    assert 0 < low <= high <= 1, f"cs_ratio_range {cs_ratio_range} must lie in (0, 1]"

    if protocol.distributed:
        roles = (ProcessorRole.APPLICATION,) * (M - 1) + (ProcessorRole.SYNCHRONIZATION,)
        sync_processor = M - 1
    else:
        roles = (ProcessorRole.APPLICATION,) * M
        sync_processor = None
    application = [processor for processor, role in enumerate(roles) if role is ProcessorRole.APPLICATION]
    config = SystemConfig(M, roles, protocol, overheads or OverheadModel())

    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        utilizations = uunifast_discard(rng, n, utilization_target)
        periods = log_uniform_periods(rng, n, period_range, granularity)
        wcets = [max(1, int(round(u * period))) for u, period in zip(utilizations, periods)]
        sections = [_critical_sections(rng, wcet, Z, cs_ratio_range) for wcet in wcets]
        if any(cs is None for cs in sections):
            logger.debug("Seed %d attempt %d: critical sections do not fit, retrying.", seed, attempt)
            continue
        # Rate-monotonic priorities, ties broken by generation order.
        by_rate = sorted(range(n), key=lambda index: (periods[index], index))
        priorities = {index: rank + 1 for rank, index in enumerate(by_rate)}
        homes = worst_fit_decreasing(utilizations, application)
        tasks = tuple(
            TaskSpec(
                id=f"t{index + 1}",
                wcet=wcets[index],
                period=periods[index],
                deadline=periods[index],
                priority=priorities[index],
                home_processor=homes[index],
                critical_sections=sections[index],
            )
            for index in range(n)
        )
        resources = tuple(
            ResourceSpec(f"s{k + 1}", highest_user_priority(tasks, f"s{k + 1}") or 1, sync_processor)
            for k in range(Z)
        )
        report = validate_config(config, tasks, resources)
        if report.ok:
            return Scenario(config, tasks, resources)
        logger.debug("Seed %d attempt %d rejected:\n%s", seed, attempt, report)
    raise ValueError(f"could not generate a valid task set for seed {seed} in {max_attempts} attempts")
