"""Constants for lvq-drift."""

import logging
from typing import Final

DOMAIN: Final = "lvq_drift"
VERSION: Final = "0.1.0"
LOGGER: Final = logging.getLogger(__package__)

ENGINE_ODE: Final = "ode"
ENGINE_MC: Final = "mc"
ENGINE_BOTH: Final = "both"
ENGINES = (ENGINE_ODE, ENGINE_MC, ENGINE_BOTH)

ERROR_MODE_ANALYTIC: Final = "analytic"
ERROR_MODE_EMPIRICAL: Final = "empirical"
ERROR_MODES = (ERROR_MODE_ANALYTIC, ERROR_MODE_EMPIRICAL)

BASIS_STANDARD: Final = "standard"
BASIS_RANDOM: Final = "random"
BASES = (BASIS_STANDARD, BASIS_RANDOM)

SCHEDULE_CONSTANT: Final = "constant"
SCHEDULE_LINEAR: Final = "linear"
SCHEDULE_SUDDEN: Final = "sudden"
SCHEDULE_PERIODIC: Final = "periodic"
SCHEDULE_KINDS = (
    SCHEDULE_CONSTANT,
    SCHEDULE_LINEAR,
    SCHEDULE_SUDDEN,
    SCHEDULE_PERIODIC,
)

# Scenario document keys (dotted form is what users see in error messages).
CONF_DIM: Final = "dim"
CONF_ETA: Final = "eta"
CONF_GAMMA: Final = "gamma"
CONF_ALPHA_MAX: Final = "alpha_max"
CONF_ENGINE: Final = "engine"
CONF_MC_RUNS: Final = "mc_runs"
CONF_SEED: Final = "seed"
CONF_Q_HAT: Final = "q_hat"
CONF_OUTPUT_STRIDE: Final = "output_stride"
CONF_D_ALPHA: Final = "d_alpha"
CONF_ERROR_MODE: Final = "error_mode"
CONF_N_TEST: Final = "n_test"
CONF_WORKERS: Final = "workers"
CONF_MODEL: Final = "model"
CONF_LAMBDA: Final = "lambda"
CONF_V_PLUS: Final = "v_plus"
CONF_V_MINUS: Final = "v_minus"
CONF_BASIS: Final = "basis"
CONF_BASIS_SEED: Final = "basis_seed"
CONF_SCHEDULE: Final = "schedule"
CONF_KIND: Final = "kind"
CONF_P_PLUS: Final = "p_plus"
CONF_ALPHA_O: Final = "alpha_o"
CONF_ALPHA_END: Final = "alpha_end"
CONF_P_MAX: Final = "p_max"
CONF_PERIOD: Final = "period"

DEFAULT_DIM: Final = 100
DEFAULT_ETA: Final = 1.0
DEFAULT_GAMMA: Final = 0.0
DEFAULT_ALPHA_MAX: Final = 200.0
DEFAULT_ENGINE: Final = ENGINE_ODE
DEFAULT_MC_RUNS: Final = 50
DEFAULT_SEED: Final = 0
DEFAULT_Q_HAT: Final = 1e-4
DEFAULT_OUTPUT_STRIDE: Final = 0.5
DEFAULT_D_ALPHA: Final = 0.01
DEFAULT_ERROR_MODE: Final = ERROR_MODE_ANALYTIC
DEFAULT_N_TEST: Final = 100_000
DEFAULT_WORKERS: Final = 1
DEFAULT_LAMBDA: Final = 1.0
DEFAULT_VARIANCE: Final = 0.4
DEFAULT_BASIS: Final = BASIS_STANDARD
DEFAULT_P_PLUS: Final = 0.5

# Numerical tolerances.
ORTHONORMAL_TOL: Final = 1e-12
GRAM_TOL: Final = 1e-9
DEGENERATE_STD: Final = 1e-12
GRID_TOL: Final = 1e-9

# Seed splitting: run k uses SeedSequence(seed, spawn_key=(k, purpose)).
STREAM_INIT: Final = 0
STREAM_TRAIN: Final = 1
STREAM_TEST: Final = 2
BASIS_SPAWN_KEY: Final = 2**32 - 1
SEED_RULE: Final = "SeedSequence(seed, spawn_key=(run, purpose)); purpose 0=init, 1=train, 2=test"

EMPIRICAL_CHUNK: Final = 65_536

# Output table schema.
COLUMNS = (
    "alpha",
    "eps_plus",
    "eps_minus",
    "eps_ref",
    "eps_track",
    "r_pp",
    "r_pm",
    "r_mp",
    "r_mm",
    "q_pp",
    "q_mm",
    "q_pm",
)
ERROR_COLUMNS = ("eps_plus", "eps_minus", "eps_ref", "eps_track")
CSV_DIGITS: Final = ".10g"

SOURCE_ODE: Final = "ode"
SOURCE_MC_MEAN: Final = "mc-mean"

ODE_CSV: Final = "ode.csv"
MC_CSV: Final = "mc.csv"
COMPARE_CSV: Final = "compare.csv"
MANIFEST_JSON: Final = "run.json"
