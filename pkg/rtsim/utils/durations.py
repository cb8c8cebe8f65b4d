"""Helpers to read and print durations. All simulation time is integer
nanoseconds."""
import re

from ..errors import ConfigError

UNITS = {
    "ns": 1,
    "us": 1_000,
    "ms": 1_000_000,
    "s": 1_000_000_000,
}

_DURATION_RE = re.compile(r"^\s*(?P<value>[0-9][0-9_]*(?:\.[0-9]+)?)\s*(?P<unit>ns|us|ms|s)?\s*$")


def parse_duration(text) -> int:
    """Parse `text` such as "250", "10us" or "1s" into nanoseconds.

    A bare number is taken as nanoseconds. Fractions are rejected rather than
    rounded, so "1.5ms" is an error even though it is a whole number of ns."""
    if isinstance(text, bool):
        raise ConfigError(f"not a duration: {text!r}")
    if isinstance(text, int):
        if text < 0:
            raise ConfigError(f"negative duration: {text}")
        return text
    match = _DURATION_RE.match(str(text))
    if match is None:
        raise ConfigError(f"not a duration: {text!r}")
    value = match.group("value")
    if "." in value:
        raise ConfigError(f"fractional durations are not accepted: {text!r}")
    unit = match.group("unit") or "ns"
    return int(value.replace("_", "")) * UNITS[unit]


def format_duration(value: int) -> str:
    """Print `value` ns with the largest unit that divides it exactly."""
    if value == 0:
        return "0"
    for unit in ("s", "ms", "us"):
        if value % UNITS[unit] == 0:
            return f"{value // UNITS[unit]}{unit}"
    return str(value)
