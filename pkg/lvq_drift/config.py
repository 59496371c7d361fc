"""Scenario documents: TOML parsing, validation and serialization."""

from __future__ import annotations

import tomllib
from importlib import resources
from pathlib import Path
from typing import Any

import tomli_w
import voluptuous as vol

from .const import (
    BASES,
    BASIS_RANDOM,
    CONF_ALPHA_END,
    CONF_ALPHA_MAX,
    CONF_ALPHA_O,
    CONF_BASIS,
    CONF_BASIS_SEED,
    CONF_D_ALPHA,
    CONF_DIM,
    CONF_ENGINE,
    CONF_ERROR_MODE,
    CONF_ETA,
    CONF_GAMMA,
    CONF_KIND,
    CONF_LAMBDA,
    CONF_MC_RUNS,
    CONF_MODEL,
    CONF_N_TEST,
    CONF_OUTPUT_STRIDE,
    CONF_P_MAX,
    CONF_P_PLUS,
    CONF_PERIOD,
    CONF_Q_HAT,
    CONF_SCHEDULE,
    CONF_SEED,
    CONF_V_MINUS,
    CONF_V_PLUS,
    CONF_WORKERS,
    DEFAULT_ALPHA_MAX,
    DEFAULT_BASIS,
    DEFAULT_D_ALPHA,
    DEFAULT_DIM,
    DEFAULT_ENGINE,
    DEFAULT_ERROR_MODE,
    DEFAULT_ETA,
    DEFAULT_GAMMA,
    DEFAULT_LAMBDA,
    DEFAULT_MC_RUNS,
    DEFAULT_N_TEST,
    DEFAULT_OUTPUT_STRIDE,
    DEFAULT_P_PLUS,
    DEFAULT_Q_HAT,
    DEFAULT_SEED,
    DEFAULT_VARIANCE,
    DEFAULT_WORKERS,
    DOMAIN,
    ENGINES,
    ERROR_MODES,
    LOGGER,
    SCHEDULE_CONSTANT,
    SCHEDULE_KINDS,
    SCHEDULE_LINEAR,
    SCHEDULE_PERIODIC,
    SCHEDULE_SUDDEN,
)
from .exceptions import (
    ConfigParseError,
    ConfigSourceError,
    ConfigValidationError,
    ModelParamsError,
    ScheduleError,
)
from .models import Scenario
from .stream_gen import SCHEDULE_TYPES, ModelParams, PriorSchedule

SCENARIO_SUFFIX = ".toml"


def _number(value: Any) -> float:
    """Accept TOML integers and floats, not booleans."""
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise vol.Invalid("expected a number")
    return float(value)


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise vol.Invalid("expected an integer")
    return value


_POSITIVE = vol.All(_number, vol.Range(min=0, min_included=False))
_NON_NEGATIVE = vol.All(_number, vol.Range(min=0))
_COUNT = vol.All(_integer, vol.Range(min=1))

MODEL_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_LAMBDA, default=DEFAULT_LAMBDA): _number,
        vol.Optional(CONF_V_PLUS, default=DEFAULT_VARIANCE): _POSITIVE,
        vol.Optional(CONF_V_MINUS, default=DEFAULT_VARIANCE): _POSITIVE,
        vol.Optional(CONF_BASIS, default=DEFAULT_BASIS): vol.In(BASES),
        vol.Optional(CONF_BASIS_SEED): vol.All(_integer, vol.Range(min=0)),
    },
    extra=vol.PREVENT_EXTRA,
)

# Each schedule kind admits only its own parameters.
_SCHEDULE_SCHEMAS: dict[str, vol.Schema] = {
    SCHEDULE_CONSTANT: vol.Schema(
        {
            vol.Required(CONF_KIND): SCHEDULE_CONSTANT,
            vol.Optional(CONF_P_PLUS, default=DEFAULT_P_PLUS): _number,
        }
    ),
    SCHEDULE_LINEAR: vol.Schema(
        {
            vol.Required(CONF_KIND): SCHEDULE_LINEAR,
            vol.Required(CONF_ALPHA_O): _number,
            vol.Required(CONF_ALPHA_END): _number,
            vol.Required(CONF_P_MAX): _number,
        }
    ),
    SCHEDULE_SUDDEN: vol.Schema(
        {
            vol.Required(CONF_KIND): SCHEDULE_SUDDEN,
            vol.Required(CONF_ALPHA_O): _number,
            vol.Required(CONF_P_MAX): _number,
        }
    ),
    SCHEDULE_PERIODIC: vol.Schema(
        {
            vol.Required(CONF_KIND): SCHEDULE_PERIODIC,
            vol.Required(CONF_PERIOD): _number,
            vol.Required(CONF_P_MAX): _number,
        }
    ),
}


def _schedule(value: Any) -> dict[str, Any]:
    """Validate a schedule table against the schema of its kind."""
    if not isinstance(value, dict):
        raise vol.Invalid("expected a table")
    document = {CONF_KIND: SCHEDULE_CONSTANT, **value}
    kind = document[CONF_KIND]
    if kind not in SCHEDULE_KINDS:
        raise vol.Invalid(f"must be one of {SCHEDULE_KINDS}", path=[CONF_KIND])
    validated: dict[str, Any] = _SCHEDULE_SCHEMAS[kind](document)
    return validated


SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_DIM, default=DEFAULT_DIM): vol.All(_integer, vol.Range(min=2)),
        vol.Optional(CONF_ETA, default=DEFAULT_ETA): _NON_NEGATIVE,
        vol.Optional(CONF_GAMMA, default=DEFAULT_GAMMA): _NON_NEGATIVE,
        vol.Optional(CONF_ALPHA_MAX, default=DEFAULT_ALPHA_MAX): _POSITIVE,
        vol.Optional(CONF_ENGINE, default=DEFAULT_ENGINE): vol.In(ENGINES),
        vol.Optional(CONF_MC_RUNS, default=DEFAULT_MC_RUNS): _COUNT,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(_integer, vol.Range(min=0)),
        vol.Optional(CONF_Q_HAT, default=DEFAULT_Q_HAT): _NON_NEGATIVE,
        vol.Optional(CONF_OUTPUT_STRIDE, default=DEFAULT_OUTPUT_STRIDE): _POSITIVE,
        vol.Optional(CONF_D_ALPHA, default=DEFAULT_D_ALPHA): _POSITIVE,
        vol.Optional(CONF_ERROR_MODE, default=DEFAULT_ERROR_MODE): vol.In(ERROR_MODES),
        vol.Optional(CONF_N_TEST, default=DEFAULT_N_TEST): _COUNT,
        vol.Optional(CONF_WORKERS, default=DEFAULT_WORKERS): _COUNT,
        vol.Optional(CONF_MODEL, default=dict): MODEL_SCHEMA,
        vol.Optional(CONF_SCHEDULE, default=dict): _schedule,
    },
    extra=vol.PREVENT_EXTRA,
)


def _dotted(error: vol.Invalid) -> str:
    return ".".join(str(part) for part in error.path) or "<document>"


def read_document(text: str) -> dict[str, Any]:
    """Parse TOML text into a raw document."""
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigParseError(err.msg, err.lineno, err.colno) from err


def validate_document(document: dict[str, Any]) -> dict[str, Any]:
    """Apply the scenario schema, filling in defaults."""
    try:
        validated: dict[str, Any] = SCENARIO_SCHEMA(document)
    except vol.MultipleInvalid as err:
        first = min(err.errors, key=_dotted)
        raise ConfigValidationError(_dotted(first), first.msg) from err
    return validated


def scenario_from_document(document: dict[str, Any], name: str = "custom") -> Scenario:
    """Validate a raw document and build the scenario it describes."""
    doc = validate_document(document)
    model = doc[CONF_MODEL]
    schedule_doc = dict(doc[CONF_SCHEDULE])
    kind = schedule_doc.pop(CONF_KIND)
    basis_seed = model.get(CONF_BASIS_SEED)
    if model[CONF_BASIS] == BASIS_RANDOM and basis_seed is None:
        basis_seed = doc[CONF_SEED]
    try:
        params = ModelParams.create(
            lam=model[CONF_LAMBDA],
            v_plus=model[CONF_V_PLUS],
            v_minus=model[CONF_V_MINUS],
            dim=doc[CONF_DIM],
            basis=model[CONF_BASIS],
            basis_seed=basis_seed,
        )
    except ModelParamsError as err:
        raise ConfigValidationError(err.key or CONF_MODEL, str(err)) from err
    try:
        schedule: PriorSchedule = SCHEDULE_TYPES[kind](**schedule_doc)
    except ScheduleError as err:
        raise ConfigValidationError(
            f"{CONF_SCHEDULE}.{err.key or CONF_KIND}", str(err)
        ) from err
    scenario = Scenario(
        model=params,
        schedule=schedule,
        eta=doc[CONF_ETA],
        gamma=doc[CONF_GAMMA],
        alpha_max=doc[CONF_ALPHA_MAX],
        engine=doc[CONF_ENGINE],
        mc_runs=doc[CONF_MC_RUNS],
        seed=doc[CONF_SEED],
        q_hat=doc[CONF_Q_HAT],
        output_stride=doc[CONF_OUTPUT_STRIDE],
        d_alpha=doc[CONF_D_ALPHA],
        error_mode=doc[CONF_ERROR_MODE],
        n_test=doc[CONF_N_TEST],
        workers=doc[CONF_WORKERS],
        name=name,
    )
    LOGGER.debug("Resolved scenario '%s': %s", name, scenario)
    return scenario


def parse_config(text: str, name: str = "custom") -> Scenario:
    """Parse a TOML scenario document.

    Missing keys take their documented defaults; unknown keys are rejected.
    """
    return scenario_from_document(read_document(text), name)


def scenario_to_document(scenario: Scenario) -> dict[str, Any]:
    """Return the fully resolved document of a scenario."""
    model: dict[str, Any] = {
        CONF_LAMBDA: scenario.model.lam,
        CONF_V_PLUS: scenario.model.v_plus,
        CONF_V_MINUS: scenario.model.v_minus,
        CONF_BASIS: scenario.model.basis,
    }
    if scenario.model.basis_seed is not None:
        model[CONF_BASIS_SEED] = scenario.model.basis_seed
    return {
        CONF_DIM: scenario.dim,
        CONF_ETA: scenario.eta,
        CONF_GAMMA: scenario.gamma,
        CONF_ALPHA_MAX: scenario.alpha_max,
        CONF_ENGINE: scenario.engine,
        CONF_MC_RUNS: scenario.mc_runs,
        CONF_SEED: scenario.seed,
        CONF_Q_HAT: scenario.q_hat,
        CONF_OUTPUT_STRIDE: scenario.output_stride,
        CONF_D_ALPHA: scenario.d_alpha,
        CONF_ERROR_MODE: scenario.error_mode,
        CONF_N_TEST: scenario.n_test,
        CONF_WORKERS: scenario.workers,
        CONF_MODEL: model,
        CONF_SCHEDULE: scenario.schedule.to_document(),
    }


def serialize_config(scenario: Scenario) -> str:
    """Return a TOML document that parses back to an equal scenario."""
    return tomli_w.dumps(scenario_to_document(scenario))


def load_scenario(path: Path) -> Scenario:
    """Read and parse a scenario file; the file stem becomes its name."""
    if not path.is_file():
        raise ConfigSourceError(str(path))
    return parse_config(path.read_text(encoding="utf-8"), name=path.stem)


def _scenario_dir() -> Any:
    return resources.files(DOMAIN).joinpath("scenarios")


def list_scenarios() -> list[str]:
    """Return the names of the scenarios shipped with the package."""
    return sorted(
        entry.name.removesuffix(SCENARIO_SUFFIX)
        for entry in _scenario_dir().iterdir()
        if entry.name.endswith(SCENARIO_SUFFIX)
    )


def canned_document(name: str) -> dict[str, Any]:
    """Return the raw document of a shipped scenario."""
    if name not in list_scenarios():
        raise ConfigValidationError(
            "scenario", f"unknown scenario; choose from {list_scenarios()}"
        )
    entry = _scenario_dir().joinpath(name + SCENARIO_SUFFIX)
    return read_document(entry.read_text(encoding="utf-8"))


def canned_scenario(name: str) -> Scenario:
    """Return a scenario shipped with the package."""
    return scenario_from_document(canned_document(name), name)
