"""Data models for lvq-drift."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from mashumaro import DataClassDictMixin

from .const import (
    CONF_ALPHA_MAX,
    CONF_D_ALPHA,
    CONF_ENGINE,
    CONF_ERROR_MODE,
    CONF_ETA,
    CONF_GAMMA,
    CONF_MC_RUNS,
    CONF_N_TEST,
    CONF_OUTPUT_STRIDE,
    CONF_Q_HAT,
    CONF_WORKERS,
    COLUMNS,
    DEFAULT_D_ALPHA,
    DEFAULT_ERROR_MODE,
    DEFAULT_N_TEST,
    DEFAULT_WORKERS,
    ENGINE_BOTH,
    ENGINE_MC,
    ENGINE_ODE,
    ENGINES,
    ERROR_COLUMNS,
    ERROR_MODES,
    GRAM_TOL,
)
from .exceptions import ConfigValidationError, InvalidValueError
from .stream_gen import FloatArray, ModelParams, PriorSchedule

# Row/column index of a label in the (2, ...) arrays below: +1 -> 0, -1 -> 1.
SIGNS = (1, -1)


def sign_index(label: int) -> int:
    """Return the array index of label +1 or -1."""
    return 0 if label == 1 else 1


@dataclass(frozen=True, kw_only=True)
class OrderParams(DataClassDictMixin):
    """Macroscopic state: projections R_{S sigma}, overlaps Q_{ST}, time alpha.

    ``r_pm`` is R_{+-}, the projection of prototype + onto cluster direction -.
    """

    r_pp: float = 0.0
    r_pm: float = 0.0
    r_mp: float = 0.0
    r_mm: float = 0.0
    q_pp: float = 0.0
    q_mm: float = 0.0
    q_pm: float = 0.0
    alpha: float = 0.0

    @classmethod
    def initial(cls, q_hat: float, alpha: float = 0.0) -> OrderParams:
        """Return the state of independent random prototypes of squared norm q_hat."""
        return cls(q_pp=q_hat, q_mm=q_hat, alpha=alpha)

    @classmethod
    def from_array(cls, values: FloatArray, alpha: float) -> OrderParams:
        """Build from the vector (r_pp, r_pm, r_mp, r_mm, q_pp, q_mm, q_pm)."""
        r_pp, r_pm, r_mp, r_mm, q_pp, q_mm, q_pm = (float(v) for v in values)
        return cls(
            r_pp=r_pp,
            r_pm=r_pm,
            r_mp=r_mp,
            r_mm=r_mm,
            q_pp=q_pp,
            q_mm=q_mm,
            q_pm=q_pm,
            alpha=alpha,
        )

    def as_array(self) -> FloatArray:
        """Return (r_pp, r_pm, r_mp, r_mm, q_pp, q_mm, q_pm)."""
        return np.array(
            [
                self.r_pp,
                self.r_pm,
                self.r_mp,
                self.r_mm,
                self.q_pp,
                self.q_mm,
                self.q_pm,
            ]
        )

    def r_matrix(self) -> FloatArray:
        """Return R indexed [prototype S, cluster sigma]."""
        return np.array([[self.r_pp, self.r_pm], [self.r_mp, self.r_mm]])

    def q_matrix(self) -> FloatArray:
        """Return the symmetric Gram matrix Q indexed [S, T]."""
        return np.array([[self.q_pp, self.q_pm], [self.q_pm, self.q_mm]])

    def gram_violation(self) -> float:
        """Return how far Q is from positive semidefinite (<= 0 when it is)."""
        return max(-self.q_pp, -self.q_mm, self.q_pm**2 - self.q_pp * self.q_mm)

    def is_admissible(self, tol: float = GRAM_TOL) -> bool:
        """Return True if Q is positive semidefinite within tol."""
        return self.gram_violation() <= tol

    def mirrored(self) -> OrderParams:
        """Swap the roles of + and - for prototypes and clusters alike."""
        return OrderParams(
            r_pp=self.r_mm,
            r_pm=self.r_mp,
            r_mp=self.r_pm,
            r_mm=self.r_pp,
            q_pp=self.q_mm,
            q_mm=self.q_pp,
            q_pm=self.q_pm,
            alpha=self.alpha,
        )


@dataclass(kw_only=True)
class PrototypeState:
    """Two prototypes stored as rows of ``w``: row 0 is w_+, row 1 is w_-."""

    w: FloatArray
    mu: int = 0
    eta: float = 1.0
    gamma: float = 0.0

    @property
    def dim(self) -> int:
        """Return the input dimension."""
        return int(self.w.shape[1])

    @property
    def w_plus(self) -> FloatArray:
        """Return the prototype labelled +1."""
        return self.w[0]

    @property
    def w_minus(self) -> FloatArray:
        """Return the prototype labelled -1."""
        return self.w[1]

    @property
    def alpha(self) -> float:
        """Return the learning time mu / N."""
        return self.mu / self.dim

    def copy(self) -> PrototypeState:
        """Return an independent copy."""
        return PrototypeState(
            w=self.w.copy(), mu=self.mu, eta=self.eta, gamma=self.gamma
        )


@dataclass(frozen=True)
class GaussianMoments:
    """Joint moments of (h_+, h_-, b_+, b_-) under cluster sigma."""

    sigma: int
    mean: FloatArray
    cov: FloatArray


@dataclass(frozen=True)
class AverageTerms:
    """Conditional averages of the LVQ1 modulation terms.

    Arrays are indexed by ``sign_index``; the leading axis is the cluster:

    * ``f[c, s]`` = <f_S>_sigma
    * ``theta[c, s]`` = <Theta_S>_sigma
    * ``bf[c, t, s]`` = <b_tau f_S>_sigma
    * ``hf[c, t, s]`` = <h_T f_S>_sigma
    * ``ff[c, s, t]`` = <f_S f_T>_sigma
    """

    f: FloatArray
    theta: FloatArray
    bf: FloatArray
    hf: FloatArray
    ff: FloatArray
    degenerate: bool = False

    def weighted(self, p_plus: float) -> tuple[FloatArray, FloatArray, FloatArray]:
        """Return the prior-weighted <f_S>, <b_tau f_S>, <h_T f_S>."""
        p = np.array([p_plus, 1.0 - p_plus])
        return (
            np.tensordot(p, self.f, axes=1),
            np.tensordot(p, self.bf, axes=1),
            np.tensordot(p, self.hf, axes=1),
        )


@dataclass(frozen=True, kw_only=True)
class ErrorReport(DataClassDictMixin):
    """Class-wise errors and their reference / tracking combinations."""

    eps_plus: float
    eps_minus: float
    eps_ref: float
    eps_track: float


@dataclass(frozen=True, kw_only=True)
class Scenario:
    """A fully resolved experiment."""

    model: ModelParams
    schedule: PriorSchedule
    eta: float
    gamma: float
    alpha_max: float
    engine: str
    mc_runs: int
    seed: int
    q_hat: float
    output_stride: float
    d_alpha: float = DEFAULT_D_ALPHA
    error_mode: str = DEFAULT_ERROR_MODE
    n_test: int = DEFAULT_N_TEST
    workers: int = DEFAULT_WORKERS
    name: str = field(default="custom", compare=False)

    def __post_init__(self) -> None:
        """Check the cross-field invariants."""
        if self.engine not in ENGINES:
            raise ConfigValidationError(CONF_ENGINE, f"must be one of {ENGINES}")
        if self.error_mode not in ERROR_MODES:
            raise ConfigValidationError(
                CONF_ERROR_MODE, f"must be one of {ERROR_MODES}"
            )
        if self.alpha_max <= 0:
            raise ConfigValidationError(CONF_ALPHA_MAX, "must be positive")
        if self.runs_mc and self.mc_runs < 1:
            raise ConfigValidationError(CONF_MC_RUNS, "must be at least 1")
        if self.eta < 0:
            raise ConfigValidationError(CONF_ETA, "must be >= 0")
        if self.gamma < 0:
            raise ConfigValidationError(CONF_GAMMA, "must be >= 0")
        if self.q_hat < 0:
            raise ConfigValidationError(CONF_Q_HAT, "must be >= 0")
        if self.output_stride <= 0:
            raise ConfigValidationError(CONF_OUTPUT_STRIDE, "must be positive")
        if self.d_alpha <= 0:
            raise ConfigValidationError(CONF_D_ALPHA, "must be positive")
        if self.n_test < 1:
            raise ConfigValidationError(CONF_N_TEST, "must be at least 1")
        if self.workers < 1:
            raise ConfigValidationError(CONF_WORKERS, "must be at least 1")

    @property
    def dim(self) -> int:
        """Return the input dimension N."""
        return self.model.dim

    @property
    def runs_ode(self) -> bool:
        """Return True if the ODE engine is requested."""
        return self.engine in (ENGINE_ODE, ENGINE_BOTH)

    @property
    def runs_mc(self) -> bool:
        """Return True if the Monte Carlo engine is requested."""
        return self.engine in (ENGINE_MC, ENGINE_BOTH)


@dataclass
class LearningCurve:
    """Columns of a learning curve on a strictly increasing alpha grid.

    ``values`` holds every column of ``COLUMNS`` except ``alpha``; ``std``
    holds across-run standard deviations for Monte Carlo means.
    """

    alpha: FloatArray
    values: dict[str, FloatArray]
    source: str
    std: dict[str, FloatArray] | None = None
    runs: int = 1

    def __post_init__(self) -> None:
        """Check grid monotonicity, column presence and error ranges."""
        if self.alpha.ndim != 1 or len(self.alpha) == 0:
            raise InvalidValueError("alpha must be a non-empty 1-d array")
        if np.any(np.diff(self.alpha) <= 0):
            raise InvalidValueError("alpha must be strictly increasing")
        for key in COLUMNS[1:]:
            if key not in self.values:
                raise InvalidValueError(f"missing column {key}")
            if self.values[key].shape != self.alpha.shape:
                raise InvalidValueError(f"column {key} does not match the alpha grid")
        for key in ERROR_COLUMNS:
            column = self.values[key]
            if np.any(column < 0.0) or np.any(column > 1.0):
                raise InvalidValueError(f"column {key} leaves [0, 1]")

    def __len__(self) -> int:
        """Return the number of grid points."""
        return len(self.alpha)

    def column(self, key: str) -> FloatArray:
        """Return a column, ``alpha`` included."""
        if key == "alpha":
            return self.alpha
        return self.values[key]

    def value_at(self, key: str, alpha: float) -> float:
        """Return a column linearly interpolated at alpha."""
        return float(np.interp(alpha, self.alpha, self.values[key]))

    def window(self, lo: float, hi: float) -> LearningCurve:
        """Return the points with lo <= alpha <= hi."""
        mask = (self.alpha >= lo) & (self.alpha <= hi)
        return LearningCurve(
            alpha=self.alpha[mask],
            values={k: v[mask] for k, v in self.values.items()},
            source=self.source,
            std=None if self.std is None else {k: v[mask] for k, v in self.std.items()},
            runs=self.runs,
        )


@dataclass(frozen=True, kw_only=True)
class ColumnDeviation(DataClassDictMixin):
    """Deviation statistics of one column."""

    max_abs: float
    mean_abs: float
    max_abs_z: float | None = None


@dataclass(frozen=True, kw_only=True)
class DeviationReport(DataClassDictMixin):
    """Per-column deviations between two curves on their common grid."""

    alpha_min: float
    alpha_max: float
    points: int
    columns: dict[str, ColumnDeviation]

    def max_abs(self, key: str) -> float:
        """Return the maximal absolute deviation of a column."""
        return self.columns[key].max_abs


@dataclass
class ScenarioResult:
    """Curves produced for one scenario."""

    scenario: Scenario
    ode: LearningCurve | None = None
    mc: LearningCurve | None = None
    comparison: DeviationReport | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)
