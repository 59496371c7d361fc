"""Exceptions raised by lvq-drift.

Every error carries a ``translation_key`` into ``strings.json`` plus the
placeholders used to render it, so callers can both show a readable message
and branch on the key.
"""

from __future__ import annotations

import json
from functools import cache
from importlib import resources
from typing import Any

from .const import DOMAIN


@cache
def _messages() -> dict[str, dict[str, str]]:
    """Load the exception message table."""
    text = resources.files(DOMAIN).joinpath("strings.json").read_text("utf-8")
    return dict(json.loads(text)["exceptions"])


def _restore(
    cls: type[LvqDriftError], args: tuple[object, ...], state: dict[str, Any]
) -> LvqDriftError:
    """Rebuild an unpickled error without calling its __init__."""
    err = cls.__new__(cls)
    err.args = args
    err.__dict__.update(state)
    return err


class LvqDriftError(Exception):
    """Base error for lvq-drift."""

    translation_key = "unknown"

    def __init__(
        self,
        *args: object,
        translation_key: str | None = None,
        translation_placeholders: dict[str, Any] | None = None,
    ) -> None:
        """Initialize the error."""
        super().__init__(*args)
        self.translation_domain = DOMAIN
        if translation_key is not None:
            self.translation_key = translation_key
        self.translation_placeholders: dict[str, Any] = dict(
            translation_placeholders or {}
        )

    def __str__(self) -> str:
        """Render the translated message, falling back to the plain args."""
        entry = _messages().get(self.translation_key)
        if entry is not None:
            try:
                return entry["message"].format(**self.translation_placeholders)
            except (KeyError, IndexError):
                pass
        return super().__str__()

    def __reduce__(self) -> tuple[Any, ...]:
        """Pickle by state so errors cross the Monte Carlo worker processes."""
        return (_restore, (type(self), self.args, dict(self.__dict__)))


class ConfigParseError(LvqDriftError):
    """Scenario document is not valid TOML."""

    translation_key = "config_parse_error"

    def __init__(self, reason: str, line: int, column: int) -> None:
        """Initialize with the parser position."""
        super().__init__(
            translation_placeholders={"reason": reason, "line": line, "column": column}
        )
        self.line = line
        self.column = column


class ConfigValidationError(LvqDriftError):
    """Scenario document has an invalid, unknown or missing key."""

    translation_key = "config_invalid"

    def __init__(self, key: str, reason: str) -> None:
        """Initialize naming the offending dotted key."""
        super().__init__(translation_placeholders={"key": key, "reason": reason})
        self.key = key


class ScheduleError(LvqDriftError):
    """Prior schedule parameters violate their invariants."""

    translation_key = "schedule_invalid"

    def __init__(self, kind: str, reason: str, key: str | None = None) -> None:
        """Initialize with the schedule kind and, if known, the bad parameter."""
        super().__init__(translation_placeholders={"kind": kind, "reason": reason})
        self.key = key


class ModelParamsError(LvqDriftError):
    """Cluster geometry or noise parameters are invalid."""

    translation_key = "model_invalid"

    def __init__(self, reason: str, key: str | None = None) -> None:
        """Initialize with the reason and, if known, the bad parameter."""
        super().__init__(translation_placeholders={"reason": reason})
        self.key = key


class GramConditionError(LvqDriftError):
    """The overlap matrix Q left the positive semidefinite cone."""

    translation_key = "gram_violation"

    def __init__(self, alpha: float, state: Any) -> None:
        """Initialize with the offending time and state."""
        super().__init__(translation_placeholders={"alpha": alpha, "state": state})
        self.alpha = alpha
        self.state = state


class DisjointGridError(LvqDriftError):
    """Two curves share no alpha range."""

    translation_key = "disjoint_grids"


class StrideError(LvqDriftError):
    """Recording stride does not map onto whole examples."""

    translation_key = "stride_mismatch"


class ScenarioRunError(LvqDriftError):
    """An engine failed while running a scenario."""

    translation_key = "scenario_failed"


class ConfigSourceError(LvqDriftError):
    """Scenario file does not exist."""

    translation_key = "config_source_missing"

    def __init__(self, source: str) -> None:
        """Initialize with the missing source."""
        super().__init__(translation_placeholders={"source": source})
        self.source = source


class InvalidValueError(LvqDriftError, ValueError):
    """An argument or data value is outside its allowed range."""

    translation_key = "invalid_value"

    def __init__(self, reason: str) -> None:
        """Initialize with the reason."""
        super().__init__(translation_placeholders={"reason": reason})
