"""Repository configuration: the ``.lore`` file at the work-tree root.

The file is deliberately flat so any tool (or agent) can write it:

    # lore settings
    stale_older_than = 90d
    validate_window = 30
    required_trailers = Constraint, Tested
    strict_validate = false

Unknown keys are tolerated with a warning for forward compatibility. An
absent file means all defaults.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .atoms import KEY_TOKEN_RE, RESERVED, parse_message
from .errors import DataError

DURATION_RE = re.compile(r"^(\d+)([dwmy])$")

# seconds per unit; months and years use the fixed civil approximations
_UNIT_SECONDS = {"d": 86400, "w": 7 * 86400, "m": 30 * 86400, "y": 365 * 86400}

DEFAULT_STALE_SECONDS = 180 * 86400
DEFAULT_VALIDATE_WINDOW = 20
DETECTION_WINDOW = 50  # commits scanned when falling back to history detection

CONFIG_FILENAME = ".lore"


def parse_duration(text: str) -> int:
    """Parse ``<integer><unit>`` with unit d, w, m (30d) or y (365d).

    Returns seconds. Raises DataError(bad-duration) for anything else,
    including zero and negative durations.
    """
    m = DURATION_RE.match(text.strip())
    if not m:
        raise DataError(
            "bad-duration",
            f"{text!r} is not a duration (expected e.g. 90d, 12w, 6m, 1y)",
        )
    amount = int(m.group(1))
    if amount == 0:
        raise DataError("bad-duration", "duration must be positive")
    return amount * _UNIT_SECONDS[m.group(2)]


def format_duration(seconds: int) -> str:
    """Render seconds back to the most compact exact unit form."""
    for unit in "ymwd":
        size = _UNIT_SECONDS[unit]
        if seconds % size == 0 and seconds >= size:
            return f"{seconds // size}{unit}"
    return f"{seconds}s"


@dataclass(frozen=True)
class LoreConfig:
    stale_older_than_default: int = DEFAULT_STALE_SECONDS  # seconds
    validate_window_default: int = DEFAULT_VALIDATE_WINDOW
    required_trailers: tuple[str, ...] = ()
    strict_validate: bool = False
    warnings: tuple[str, ...] = ()


def _parse_bool(value: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(value)


def _parse_required_trailers(value: str) -> tuple[str, ...]:
    keys = []
    for part in value.split(","):
        key = part.strip()
        if not key:
            continue
        if not KEY_TOKEN_RE.match(key):
            raise ValueError(key)
        keys.append(RESERVED.get(key.lower(), key))
    return tuple(keys)


def load_config(root: str | Path) -> LoreConfig:
    """Read ``<root>/.lore``; absent file means all defaults.

    Raises DataError(bad-config) with the line number for unparseable
    lines or invalid values; unknown keys only produce warnings.
    """
    path = Path(root) / CONFIG_FILENAME
    if not path.exists():
        return LoreConfig()

    text = path.read_text(encoding="utf-8", errors="replace")
    values: dict[str, object] = {}
    warnings: list[str] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(
                "bad-config", f"{path.name}:{line_no}: expected 'key = value'"
            )
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not value:
            raise DataError("bad-config", f"{path.name}:{line_no}: '{key}' has no value")
        try:
            if key == "stale_older_than":
                values["stale_older_than_default"] = parse_duration(value)
            elif key == "validate_window":
                window = int(value)
                if window < 1:
                    raise ValueError(value)
                values["validate_window_default"] = window
            elif key == "required_trailers":
                values["required_trailers"] = _parse_required_trailers(value)
            elif key == "strict_validate":
                values["strict_validate"] = _parse_bool(value)
            else:
                warnings.append(f"{path.name}:{line_no}: unknown key '{key}' ignored")
        except (ValueError, DataError) as exc:
            detail = str(exc) if isinstance(exc, ValueError) else exc.args[0]
            raise DataError(
                "bad-config",
                f"{path.name}:{line_no}: invalid value for '{key}': {detail}",
            ) from None
    return LoreConfig(warnings=tuple(warnings), **values)  # type: ignore[arg-type]


@dataclass(frozen=True)
class DetectionResult:
    """Whether a repository speaks lore, and which signal said so."""

    is_lore_repo: bool
    evidence: str  # "config-file" | "history" | "none"


def detect_lore_repo(root: str | Path) -> DetectionResult:
    """Detect lore adoption: a ``.lore`` file, or recognized trailers in
    any of the last ``DETECTION_WINDOW`` commits."""
    from .repo import HistoryQuery, list_commits

    root = Path(root)
    if (root / CONFIG_FILENAME).exists():
        return DetectionResult(True, "config-file")
    for record in list_commits(HistoryQuery(max_count=DETECTION_WINDOW), cwd=root):
        report = parse_message(record.message)
        if report.atom is not None and report.atom.has_reserved_trailers:
            return DetectionResult(True, "history")
    return DetectionResult(False, "none")
