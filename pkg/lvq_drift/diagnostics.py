"""Run manifest for lvq-drift."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from mashumaro import DataClassDictMixin

from .config import scenario_to_document
from .const import SEED_RULE, VERSION
from .models import DeviationReport, ScenarioResult


@dataclass(kw_only=True)
class RunManifest(DataClassDictMixin):
    """Everything needed to reproduce and audit a run."""

    version: str = VERSION
    name: str
    scenario: dict[str, Any]
    files: list[str] = field(default_factory=list)
    seed_rule: str = SEED_RULE
    diagnostics: dict[str, Any] = field(default_factory=dict)
    comparison: DeviationReport | None = None


def build_manifest(result: ScenarioResult, files: list[str]) -> RunManifest:
    """Return the manifest of a finished scenario."""
    return RunManifest(
        name=result.scenario.name,
        scenario=scenario_to_document(result.scenario),
        files=sorted(files),
        diagnostics=dict(result.diagnostics),
        comparison=result.comparison,
    )


def write_manifest(path: Path, manifest: RunManifest) -> None:
    """Write the manifest as JSON."""
    path.write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
