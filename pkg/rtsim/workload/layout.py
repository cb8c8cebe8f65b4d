"""Text rendering of a scenario's processor allocation."""
from ..model.system import ProcessorRole, Scenario

ROLE_LABELS = {ProcessorRole.APPLICATION: "Application", ProcessorRole.SYNCHRONIZATION: "Synchronization"}


def render_allocation_table(scenario: Scenario) -> str:
    """One column per processor, tasks listed from least to most urgent,
    each with its priority and the resources it requests. A synchronization
    processor lists the resources it hosts under a distributed protocol."""
    config, tasks, resources = scenario
    columns = []
    for processor in range(config.processors):
        cells = [f"CPU#{processor}", ROLE_LABELS[config.roles[processor]]]
        tasks_on = sorted(
            (task for task in tasks if task.home_processor == processor),
            key=lambda task: -task.priority,
        )
        for task in tasks_on:
            cells.append(f"{task.id} q={task.priority} {','.join(task.resources) or '-'}")
        if config.protocol.distributed:
            hosted = [resource.id for resource in resources if resource.sync_processor == processor]
            if hosted:
                cells.append("hosts " + ",".join(hosted))
        columns.append(cells)
    height = max(len(cells) for cells in columns)
    widths = [max(len(cell) for cell in cells) for cells in columns]
    lines = []
    for row in range(height):
        parts = [
            (cells[row] if row < len(cells) else "").ljust(width)
            for cells, width in zip(columns, widths)
        ]
        lines.append(" | ".join(parts).rstrip())
        if row == 1:
            lines.append("-+-".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"
