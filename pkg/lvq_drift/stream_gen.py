"""Labelled example streams from a two-cluster Gaussian mixture with drifting priors."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar, overload

import numpy as np
import numpy.typing as npt

from .const import (
    BASIS_RANDOM,
    BASIS_SPAWN_KEY,
    BASIS_STANDARD,
    CONF_ALPHA_END,
    CONF_ALPHA_O,
    CONF_KIND,
    CONF_P_MAX,
    CONF_P_PLUS,
    CONF_PERIOD,
    ORTHONORMAL_TOL,
    SCHEDULE_CONSTANT,
    SCHEDULE_LINEAR,
    SCHEDULE_PERIODIC,
    SCHEDULE_SUDDEN,
)
from .exceptions import InvalidValueError, ModelParamsError, ScheduleError

type FloatArray = npt.NDArray[np.float64]


def spawn_generator(seed: int, *key: int) -> np.random.Generator:
    """Return the random source for ``key`` split off the master ``seed``.

    The same (seed, key) always yields the same stream, independent of how
    many other streams were created before it.
    """
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key))
    )


def make_orthonormal_pair(
    dim: int, rng: np.random.Generator | None = None
) -> tuple[FloatArray, FloatArray]:
    """Return two unit, mutually orthogonal vectors in R^dim.

    Without a generator these are the first two standard basis vectors;
    with one, a uniformly rotated pair.
    """
    if dim < 2:
        raise ModelParamsError(f"dim must be at least 2, got {dim}", key="dim")
    if rng is None:
        eye = np.eye(2, dim)
        return eye[0].copy(), eye[1].copy()
    q, _ = np.linalg.qr(rng.standard_normal((dim, 2)))
    return np.ascontiguousarray(q[:, 0]), np.ascontiguousarray(q[:, 1])


@dataclass(frozen=True, kw_only=True)
class ModelParams:
    """Geometry and noise of the two-cluster density.

    Cluster sigma has mean ``lam * B_sigma`` and per-component variance
    ``v_sigma``. Equality ignores the stored vectors; they are determined by
    ``dim``, ``basis`` and ``basis_seed``.
    """

    lam: float
    v_plus: float
    v_minus: float
    dim: int
    b_plus: FloatArray = field(compare=False, repr=False)
    b_minus: FloatArray = field(compare=False, repr=False)
    basis: str = BASIS_STANDARD
    basis_seed: int | None = None

    def __post_init__(self) -> None:
        """Check the density invariants."""
        if self.v_plus <= 0:
            raise ModelParamsError("v_plus must be positive", key="model.v_plus")
        if self.v_minus <= 0:
            raise ModelParamsError("v_minus must be positive", key="model.v_minus")
        if self.dim < 2:
            raise ModelParamsError("dim must be at least 2", key="dim")
        for name, vec in (("b_plus", self.b_plus), ("b_minus", self.b_minus)):
            if vec.shape != (self.dim,):
                raise ModelParamsError(f"{name} must have shape ({self.dim},)")
            if abs(float(vec @ vec) - 1.0) > ORTHONORMAL_TOL:
                raise ModelParamsError(f"{name} is not normalized")
        if abs(float(self.b_plus @ self.b_minus)) > ORTHONORMAL_TOL:
            raise ModelParamsError("b_plus and b_minus are not orthogonal")
        self.b_plus.setflags(write=False)
        self.b_minus.setflags(write=False)

    @classmethod
    def create(
        cls,
        *,
        lam: float,
        v_plus: float,
        v_minus: float,
        dim: int,
        basis: str = BASIS_STANDARD,
        basis_seed: int | None = None,
    ) -> ModelParams:
        """Build parameters, generating the cluster directions."""
        if basis == BASIS_RANDOM:
            seed = 0 if basis_seed is None else basis_seed
            b_plus, b_minus = make_orthonormal_pair(
                dim, spawn_generator(seed, BASIS_SPAWN_KEY)
            )
            basis_seed = seed
        elif basis == BASIS_STANDARD:
            b_plus, b_minus = make_orthonormal_pair(dim)
            basis_seed = None
        else:
            raise ModelParamsError(f"unknown basis '{basis}'", key="model.basis")
        return cls(
            lam=lam,
            v_plus=v_plus,
            v_minus=v_minus,
            dim=dim,
            b_plus=b_plus,
            b_minus=b_minus,
            basis=basis,
            basis_seed=basis_seed,
        )

    def variance(self, sigma: int) -> float:
        """Return the per-component variance of cluster sigma."""
        return self.v_plus if sigma == 1 else self.v_minus

    def direction(self, sigma: int) -> FloatArray:
        """Return the unit direction B_sigma."""
        return self.b_plus if sigma == 1 else self.b_minus

    def center(self, sigma: int) -> FloatArray:
        """Return the cluster mean lam * B_sigma."""
        return self.lam * self.direction(sigma)


@dataclass(frozen=True)
class LabelledExample:
    """A single example of the stream."""

    xi: FloatArray
    sigma: int

    def __post_init__(self) -> None:
        """Check the label."""
        if self.sigma not in (1, -1):
            raise InvalidValueError(f"sigma must be +1 or -1, got {self.sigma}")


class PriorSchedule(ABC):
    """Time-dependent class weight p_+(alpha); p_-(alpha) = 1 - p_+(alpha)."""

    kind: ClassVar[str]

    @abstractmethod
    def _evaluate(self, alpha: FloatArray) -> FloatArray:
        """Return p_+ for an array of learning times."""

    @abstractmethod
    def parameters(self) -> dict[str, float]:
        """Return the schedule parameters keyed as in scenario documents."""

    @overload
    def evaluate(self, alpha: float) -> float: ...

    @overload
    def evaluate(self, alpha: FloatArray) -> FloatArray: ...

    def evaluate(self, alpha: float | FloatArray) -> float | FloatArray:
        """Return p_+(alpha) for a scalar or an array of learning times."""
        values = self._evaluate(np.asarray(alpha, dtype=np.float64))
        if values.ndim == 0:
            return float(values)
        return values

    def breakpoints(self) -> tuple[float, ...]:
        """Return the learning times where p_+ or its slope jumps."""
        return ()

    def to_document(self) -> dict[str, Any]:
        """Return the ``schedule`` table of a scenario document."""
        return {CONF_KIND: self.kind, **self.parameters()}


def _check_probability(kind: str, key: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ScheduleError(kind, f"{key} must lie in (0, 1), got {value}", key=key)


@dataclass(frozen=True)
class ConstantPrior(PriorSchedule):
    """Stationary class weights."""

    kind: ClassVar[str] = SCHEDULE_CONSTANT
    p_plus: float = 0.5

    def __post_init__(self) -> None:
        """Validate the weight."""
        _check_probability(self.kind, CONF_P_PLUS, self.p_plus)

    def _evaluate(self, alpha: FloatArray) -> FloatArray:
        return np.full_like(alpha, self.p_plus)

    def parameters(self) -> dict[str, float]:
        """Return the schedule parameters."""
        return {CONF_P_PLUS: self.p_plus}


@dataclass(frozen=True)
class LinearRamp(PriorSchedule):
    """Balanced until alpha_o, then a linear rise reaching p_max at alpha_end.

    The weight stays at p_max beyond alpha_end.
    """

    kind: ClassVar[str] = SCHEDULE_LINEAR
    alpha_o: float
    alpha_end: float
    p_max: float

    def __post_init__(self) -> None:
        """Validate the ramp."""
        if self.alpha_o < 0:
            raise ScheduleError(self.kind, "alpha_o must be >= 0", key=CONF_ALPHA_O)
        if self.alpha_end <= self.alpha_o:
            raise ScheduleError(
                self.kind, "alpha_end must exceed alpha_o", key=CONF_ALPHA_END
            )
        if not 0.5 < self.p_max < 1.0:
            raise ScheduleError(
                self.kind, "p_max must lie in (1/2, 1)", key=CONF_P_MAX
            )

    def _evaluate(self, alpha: FloatArray) -> FloatArray:
        span = self.alpha_end - self.alpha_o
        progress = np.clip(alpha - self.alpha_o, 0.0, span) / span
        return np.asarray(0.5 + (self.p_max - 0.5) * progress, dtype=np.float64)

    def breakpoints(self) -> tuple[float, ...]:
        """Return the two kinks of the ramp."""
        return (self.alpha_o, self.alpha_end)

    def parameters(self) -> dict[str, float]:
        """Return the schedule parameters."""
        return {
            CONF_ALPHA_O: self.alpha_o,
            CONF_ALPHA_END: self.alpha_end,
            CONF_P_MAX: self.p_max,
        }


@dataclass(frozen=True)
class SuddenSwitch(PriorSchedule):
    """p_max strictly before alpha_o, 1 - p_max from alpha_o on."""

    kind: ClassVar[str] = SCHEDULE_SUDDEN
    alpha_o: float
    p_max: float

    def __post_init__(self) -> None:
        """Validate the switch."""
        if self.alpha_o < 0:
            raise ScheduleError(self.kind, "alpha_o must be >= 0", key=CONF_ALPHA_O)
        _check_probability(self.kind, CONF_P_MAX, self.p_max)

    def _evaluate(self, alpha: FloatArray) -> FloatArray:
        return np.where(alpha < self.alpha_o, self.p_max, 1.0 - self.p_max)

    def breakpoints(self) -> tuple[float, ...]:
        """Return the switching time."""
        return (self.alpha_o,)

    def parameters(self) -> dict[str, float]:
        """Return the schedule parameters."""
        return {CONF_ALPHA_O: self.alpha_o, CONF_P_MAX: self.p_max}


@dataclass(frozen=True)
class PeriodicPrior(PriorSchedule):
    """Cosine modulation between p_max and 1 - p_max with the given period."""

    kind: ClassVar[str] = SCHEDULE_PERIODIC
    period: float
    p_max: float

    def __post_init__(self) -> None:
        """Validate the modulation."""
        if self.period <= 0:
            raise ScheduleError(self.kind, "period must be positive", key=CONF_PERIOD)
        _check_probability(self.kind, CONF_P_MAX, self.p_max)

    def _evaluate(self, alpha: FloatArray) -> FloatArray:
        return np.asarray(
            0.5 + (self.p_max - 0.5) * np.cos(2.0 * math.pi * alpha / self.period),
            dtype=np.float64,
        )

    def parameters(self) -> dict[str, float]:
        """Return the schedule parameters."""
        return {CONF_PERIOD: self.period, CONF_P_MAX: self.p_max}


SCHEDULE_TYPES: dict[str, type[PriorSchedule]] = {
    SCHEDULE_CONSTANT: ConstantPrior,
    SCHEDULE_LINEAR: LinearRamp,
    SCHEDULE_SUDDEN: SuddenSwitch,
    SCHEDULE_PERIODIC: PeriodicPrior,
}


def eval_prior(schedule: PriorSchedule, alpha: float) -> float:
    """Return p_+(alpha) of the schedule."""
    return schedule.evaluate(float(alpha))


def sample_example(
    params: ModelParams, p_plus: float, rng: np.random.Generator
) -> LabelledExample:
    """Draw one labelled example; the label is +1 with probability p_plus."""
    sigma = 1 if rng.random() < p_plus else -1
    noise = rng.standard_normal(params.dim)
    xi = params.center(sigma) + math.sqrt(params.variance(sigma)) * noise
    return LabelledExample(xi=xi, sigma=sigma)


def sample_block(
    params: ModelParams, p_plus: FloatArray, rng: np.random.Generator
) -> tuple[FloatArray, npt.NDArray[np.int64]]:
    """Draw ``len(p_plus)`` examples, example i using prior ``p_plus[i]``.

    Returns the inputs as an (n, dim) array and the labels as an (n,) array.
    """
    n = len(p_plus)
    sigma = np.where(rng.random(n) < p_plus, 1, -1).astype(np.int64)
    positive = sigma == 1
    scale = np.where(positive, math.sqrt(params.v_plus), math.sqrt(params.v_minus))
    xi = rng.standard_normal((n, params.dim)) * scale[:, None]
    xi += params.lam * np.where(
        positive[:, None], params.b_plus[None, :], params.b_minus[None, :]
    )
    return xi, sigma


def sample_cluster(
    params: ModelParams, sigma: int, n: int, rng: np.random.Generator
) -> FloatArray:
    """Draw n inputs from cluster sigma as an (n, dim) array."""
    xi = rng.standard_normal((n, params.dim)) * math.sqrt(params.variance(sigma))
    xi += params.center(sigma)[None, :]
    return xi
