"""Reading and writing scenario files.

The format is line oriented: `[system]`, `[overheads]`, `[resource]` and
`[task]` sections holding `key = value` lines, `#` starts a comment. Durations
accept ns/us/ms/s suffixes. See docs/config-format.md for the grammar.
Writing goes through a jinja2 template and always prints plain nanoseconds, so
that parsing a written file gives back the same scenario."""
import logging
import re
from pathlib import Path

from jinja2 import DictLoader, Environment

from ..errors import ConfigError
from ..utils.durations import parse_duration
from .system import (
    CriticalSectionSpec,
    OverheadModel,
    ProcessorRole,
    Protocol,
    ResourceSpec,
    Scenario,
    SystemConfig,
    TaskSpec,
)

logger = logging.getLogger(__name__)

SECTIONS = ("system", "overheads", "resource", "task")

SECTION_KEYS = {
    "system": {"processors", "roles", "protocol"},
    "overheads": {"lock", "unlock", "migrate_to", "migrate_back", "context_switch"},
    "resource": {"id", "ceiling", "sync_processor"},
    "task": {"id", "wcet", "period", "deadline", "priority", "processor", "cs"},
}

_IDENT_RE = re.compile(r"^[A-Za-z0-9_.:-]+$")
_CS_RE = re.compile(r"^(?P<resource>[^@\s]+)\s*@\s*(?P<offset>[^+]+?)\s*\+\s*(?P<length>.+)$")

SCENARIO_TEMPLATE = """\
{% for line in comments %}
# {{ line }}
{% endfor %}
[system]
processors = {{ config.processors }}
roles = {{ roles }}
protocol = {{ config.protocol.value }}

{{ overheads_section | trim }}
{% for resource in resources %}

[resource]
id = {{ resource.id }}
ceiling = {{ resource.ceiling }}
{% if resource.sync_processor is not none %}
sync_processor = {{ resource.sync_processor }}
{% endif %}
{% endfor %}
{% for task in tasks %}

[task]
id = {{ task.id }}
processor = {{ task.home_processor }}
priority = {{ task.priority }}
wcet = {{ task.wcet }}
period = {{ task.period }}
deadline = {{ task.deadline }}
{% if task.critical_sections %}
cs = {{ cs_text(task) }}
{% endif %}
{% endfor %}
"""

OVERHEADS_TEMPLATE = """\
{% for line in comments %}
# {{ line }}
{% endfor %}
[overheads]
lock = {{ overheads.lock }}
unlock = {{ overheads.unlock }}
migrate_to = {{ overheads.migrate_to }}
migrate_back = {{ overheads.migrate_back }}
context_switch = {{ overheads.context_switch }}
"""

_environment = Environment(
    loader=DictLoader({"scenario.cfg": SCENARIO_TEMPLATE, "overheads.cfg": OVERHEADS_TEMPLATE}),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    autoescape=False,
)


def _split_sections(text: str, source: str):
    """Return a list of (section name, {key: value}, line number) blocks."""
    blocks = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in SECTIONS:
                raise ConfigError(f"{source}:{lineno}: unknown section [{name}]")
            current = (name, {}, lineno)
            blocks.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected `key = value`, got {line!r}")
        if current is None:
            raise ConfigError(f"{source}:{lineno}: `{line}` appears before any section")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        name, values, _ = current
        if key not in SECTION_KEYS[name]:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} in [{name}]")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} in [{name}]")
        values[key] = value
    return blocks


def _require(values, key, section, lineno, source):
    if key not in values:
        raise ConfigError(f"{source}:{lineno}: [{section}] is missing `{key}`")
    return values[key]


def _int(text, what, source, lineno) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{source}:{lineno}: {what} must be an integer, got {text!r}") from None


def _ident(text, what, source, lineno) -> str:
    if not _IDENT_RE.match(text):
        raise ConfigError(f"{source}:{lineno}: invalid {what} {text!r}")
    return text


def _duration(text, what, source, lineno) -> int:
    try:
        return parse_duration(text)
    except ConfigError as exc:
        raise ConfigError(f"{source}:{lineno}: {what}: {exc.message}") from None


def _parse_overheads(values, source, lineno) -> OverheadModel:
    return OverheadModel(
        **{key: _duration(value, key, source, lineno) for key, value in values.items()}
    )


def _parse_system(values, overheads, source, lineno) -> SystemConfig:
    processors = _int(_require(values, "processors", "system", lineno, source), "processors", source, lineno)
    try:
        protocol = Protocol.parse(_require(values, "protocol", "system", lineno, source))
    except ValueError as exc:
        raise ConfigError(f"{source}:{lineno}: {exc}") from None
    if "roles" in values:
        roles = []
        for item in values["roles"].split(","):
            try:
                roles.append(ProcessorRole(item.strip().lower()))
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: unknown processor role {item.strip()!r}") from None
    else:
        roles = [ProcessorRole.APPLICATION] * processors
    return SystemConfig(processors, tuple(roles), protocol, overheads)


def _parse_critical_sections(text, source, lineno):
    sections = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        match = _CS_RE.match(item)
        if match is None:
            raise ConfigError(f"{source}:{lineno}: critical section must read `resource@offset+length`, got {item!r}")
        sections.append(
            CriticalSectionSpec(
                _ident(match.group("resource"), "resource id", source, lineno),
                _duration(match.group("offset"), "cs offset", source, lineno),
                _duration(match.group("length"), "cs length", source, lineno),
            )
        )
    return tuple(sections)


def _parse_resource(values, source, lineno) -> ResourceSpec:
    sync_processor = values.get("sync_processor")
    return ResourceSpec(
        id=_ident(_require(values, "id", "resource", lineno, source), "resource id", source, lineno),
        ceiling=_int(_require(values, "ceiling", "resource", lineno, source), "ceiling", source, lineno),
        sync_processor=None if sync_processor is None else _int(sync_processor, "sync_processor", source, lineno),
    )


def _parse_task(values, source, lineno) -> TaskSpec:
    period = _duration(_require(values, "period", "task", lineno, source), "period", source, lineno)
    return TaskSpec(
        id=_ident(_require(values, "id", "task", lineno, source), "task id", source, lineno),
        wcet=_duration(_require(values, "wcet", "task", lineno, source), "wcet", source, lineno),
        period=period,
        deadline=_duration(values["deadline"], "deadline", source, lineno) if "deadline" in values else period,
        priority=_int(_require(values, "priority", "task", lineno, source), "priority", source, lineno),
        home_processor=_int(_require(values, "processor", "task", lineno, source), "processor", source, lineno),
        critical_sections=_parse_critical_sections(values.get("cs", ""), source, lineno),
    )


def loads_config(text: str, source: str = "<string>") -> Scenario:
    """Parse a scenario from `text`. Raises `ConfigError` on syntax problems;
    semantic checks are left to `validate_config`."""
    blocks = _split_sections(text, source)
    systems = [block for block in blocks if block[0] == "system"]
    overhead_blocks = [block for block in blocks if block[0] == "overheads"]
    if len(systems) != 1:
        raise ConfigError(f"{source}: expected exactly one [system] section, found {len(systems)}")
    if len(overhead_blocks) > 1:
        raise ConfigError(f"{source}: at most one [overheads] section is allowed")

    overheads = OverheadModel()
    if overhead_blocks:
        _, values, lineno = overhead_blocks[0]
        overheads = _parse_overheads(values, source, lineno)
    _, values, lineno = systems[0]
    config = _parse_system(values, overheads, source, lineno)

    resources = tuple(_parse_resource(v, source, n) for name, v, n in blocks if name == "resource")
    tasks = tuple(_parse_task(v, source, n) for name, v, n in blocks if name == "task")
    return Scenario(config, tasks, resources)


def load_config(path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return loads_config(text, source=str(path))


def load_overheads(path) -> OverheadModel:
    """Read an overhead file: a single [overheads] section."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    blocks = _split_sections(text, str(path))
    if [name for name, _, _ in blocks] != ["overheads"]:
        raise ConfigError(f"{path}: an overhead file holds exactly one [overheads] section")
    _, values, lineno = blocks[0]
    return _parse_overheads(values, str(path), lineno)


def _cs_text(task: TaskSpec) -> str:
    return ", ".join(f"{cs.resource_id}@{cs.offset}+{cs.length}" for cs in task.critical_sections)


def dumps_config(scenario: Scenario, comments=()) -> str:
    config, tasks, resources = scenario
    template = _environment.get_template("scenario.cfg")
    return template.render(
        comments=list(comments),
        config=config,
        roles=",".join(role.value for role in config.roles),
        overheads_section=dumps_overheads(config.overheads),
        resources=resources,
        tasks=tasks,
        cs_text=_cs_text,
    )


def dump_config(scenario: Scenario, path, comments=()) -> Path:
    path = Path(path)
    try:
        path.write_text(dumps_config(scenario, comments), encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.info("Wrote scenario with %d tasks to %s", len(scenario.tasks), path)
    return path


def dumps_overheads(overheads: OverheadModel, comments=()) -> str:
    template = _environment.get_template("overheads.cfg")
    return template.render(comments=list(comments), overheads=overheads)
