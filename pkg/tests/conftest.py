"""Shared fixtures for lvq-drift tests."""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

import numpy as np
import pytest

from lvq_drift.models import OrderParams, Scenario
from lvq_drift.stream_gen import LinearRamp, ModelParams

type StateFactory = Callable[[np.random.Generator], OrderParams]


@pytest.fixture
def params() -> ModelParams:
    """Return the standard two-cluster model in N = 100."""
    return ModelParams.create(lam=1.0, v_plus=0.4, v_minus=0.4, dim=100)


@pytest.fixture
def small_params() -> ModelParams:
    """Return an unequal-variance model in N = 10."""
    return ModelParams.create(lam=1.0, v_plus=0.3, v_minus=0.5, dim=10)


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a fixed-seed generator."""
    return np.random.default_rng(1234)


def _random_state(rng: np.random.Generator) -> OrderParams:
    """Measure the overlaps of two random vectors in the span of B+, B- and two more axes."""
    w = rng.normal(scale=rng.uniform(0.2, 1.2), size=(2, 4))
    w[:, :2] += rng.normal(size=2)[None, :] * 0.3
    q = w @ w.T
    return OrderParams(
        r_pp=float(w[0, 0]),
        r_pm=float(w[0, 1]),
        r_mp=float(w[1, 0]),
        r_mm=float(w[1, 1]),
        q_pp=float(q[0, 0]),
        q_mm=float(q[1, 1]),
        q_pm=float(q[0, 1]),
    )


@pytest.fixture
def random_state() -> StateFactory:
    """Return a factory of random admissible macroscopic states."""
    return _random_state


def _scenario(**overrides: Any) -> Scenario:
    """Build a small, fast scenario; keyword arguments override fields."""
    dim = overrides.pop("dim", 20)
    basis = overrides.pop("basis", "standard")
    fields: dict[str, Any] = {
        "model": ModelParams.create(
            lam=1.0, v_plus=0.4, v_minus=0.4, dim=dim, basis=basis, basis_seed=5
        ),
        "schedule": LinearRamp(alpha_o=1.0, alpha_end=4.0, p_max=0.8),
        "eta": 1.0,
        "gamma": 0.0,
        "alpha_max": 5.0,
        "engine": "both",
        "mc_runs": 3,
        "seed": 0,
        "q_hat": 1e-4,
        "output_stride": 0.5,
        "d_alpha": 0.05,
        "name": "test",
    }
    fields.update(overrides)
    return Scenario(**fields)


@pytest.fixture
def make_scenario() -> Callable[..., Scenario]:
    """Return a factory of small scenarios."""
    return _scenario
