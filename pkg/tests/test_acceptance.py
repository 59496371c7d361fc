"""End-to-end reproductions of the drift scenarios.

These run full-size simulations and are marked slow; select them with
``pytest -m slow``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from lvq_drift.analysis import (
    dominant_period,
    oscillation_amplitude,
    ordering_swap_alpha,
    window_range,
)
from lvq_drift.config import canned_scenario
from lvq_drift.harness import finite_size_sweep, run_scenario, self_averaging_study, with_dim
from lvq_drift.models import LearningCurve, Scenario

pytestmark = pytest.mark.slow

WORKERS = 4


def _at(curve: LearningCurve, key: str, alpha: float) -> float:
    return float(curve.values[key][int(np.argmin(np.abs(curve.alpha - alpha)))])


def _gap(curve: LearningCurve, alpha: float) -> float:
    return abs(_at(curve, "eps_plus", alpha) - _at(curve, "eps_minus", alpha))


def test_pure_decay_in_both_engines() -> None:
    """Without learning, squared norms shrink as exp(-2 gamma alpha)."""
    scenario = dataclasses.replace(
        with_dim(canned_scenario("stationary"), 1000),
        eta=0.0,
        gamma=0.05,
        alpha_max=10.0,
        engine="both",
        mc_runs=2,
    )
    result = run_scenario(scenario)
    assert result.ode is not None
    assert result.mc is not None
    expected = 1e-4 * np.exp(-0.1 * result.ode.alpha)
    np.testing.assert_allclose(result.ode.values["q_pp"], expected, rtol=1e-8)
    np.testing.assert_allclose(result.mc.values["q_pp"], expected, rtol=1e-4)
    np.testing.assert_allclose(result.mc.values["q_mm"], expected, rtol=1e-4)


@pytest.fixture(scope="module")
def linear_runs() -> dict[float, Scenario]:
    """Return the linear ramp scenario without and with weight decay."""
    base = dataclasses.replace(canned_scenario("linear-ramp"), workers=WORKERS)
    return {gamma: dataclasses.replace(base, gamma=gamma) for gamma in (0.0, 0.05)}


@pytest.mark.parametrize("gamma", [0.0, 0.05])
def test_linear_ramp_engines_agree(linear_runs: dict[float, Scenario], gamma: float) -> None:
    """Monte Carlo means track the ODE tracking error within 0.02."""
    result = run_scenario(linear_runs[gamma])
    assert result.comparison is not None
    assert result.comparison.max_abs("eps_track") <= 0.02


def test_linear_ramp_shape(linear_runs: dict[float, Scenario]) -> None:
    """The favoured class improves, the other degrades; decay narrows the gap."""
    curves = {}
    for gamma, scenario in linear_runs.items():
        ode = run_scenario(dataclasses.replace(scenario, engine="ode")).ode
        assert ode is not None
        curves[gamma] = ode
    plain = curves[0.0]
    checkpoints = [40.0, 80.0, 120.0, 160.0, 200.0]
    eps_plus = [_at(plain, "eps_plus", a) for a in checkpoints]
    eps_minus = [_at(plain, "eps_minus", a) for a in checkpoints]
    assert all(np.diff(eps_plus) < 0)
    assert all(np.diff(eps_minus) > 0)
    assert _gap(curves[0.05], 200.0) < _gap(plain, 200.0)


def test_sudden_switch() -> None:
    """Class errors swap order soon after the switch; the reference error barely moves."""
    scenario = dataclasses.replace(canned_scenario("sudden-switch"), workers=WORKERS)
    result = run_scenario(scenario)
    for curve in (result.ode, result.mc):
        assert curve is not None
        swap = ordering_swap_alpha(curve, 100.0)
        assert swap is not None
        assert swap - 100.0 <= 10.0
    assert result.ode is not None
    assert window_range(result.ode, "eps_ref", 90.0, 120.0) < 0.05


def test_periodic_prior() -> None:
    """Class errors follow the prior period; weight decay damps them."""
    base = canned_scenario("periodic")
    plain = run_scenario(base).ode
    damped = run_scenario(dataclasses.replace(base, gamma=0.05)).ode
    assert plain is not None
    assert damped is not None
    period = dominant_period(plain.alpha, plain.values["eps_plus"], alpha_min=100.0)
    assert period == pytest.approx(50.0, abs=2.0)
    for key in ("eps_plus", "eps_minus"):
        assert oscillation_amplitude(
            damped.alpha, damped.values[key], 100.0
        ) < oscillation_amplitude(plain.alpha, plain.values[key], 100.0)


def test_self_averaging() -> None:
    """Across-seed fluctuations of R_{++} scale as 1/sqrt(N)."""
    scenario = dataclasses.replace(canned_scenario("stationary"), workers=WORKERS)
    study = self_averaging_study(scenario, [100, 900], alpha=50.0, runs=100)
    ratio = study[100]["r_pp"] / study[900]["r_pp"]
    assert 3.0 * 0.65 <= ratio <= 3.0 * 1.35


ORDER_COLUMNS = ("r_pp", "r_pm", "r_mp", "r_mm", "q_pp", "q_mm", "q_pm")


def test_stationary_engines_agree() -> None:
    """At N = 100 the mean of 50 runs follows every order parameter within 0.03."""
    scenario = dataclasses.replace(
        canned_scenario("stationary"), engine="both", mc_runs=50, workers=WORKERS
    )
    assert scenario.dim == 100
    result = run_scenario(scenario)
    assert result.comparison is not None
    for key in ORDER_COLUMNS:
        assert result.comparison.max_abs(key) <= 0.03, key


def test_stationary_learning_curve() -> None:
    """With balanced constant priors the error falls and then stays flat."""
    curve = run_scenario(canned_scenario("stationary")).ode
    assert curve is not None
    eps = curve.values["eps_ref"]
    assert eps[0] == pytest.approx(0.5, abs=1e-3)
    assert _at(curve, "eps_ref", 50.0) < eps[0]
    assert all(np.diff(eps[curve.alpha >= 20.0]) <= 1e-4)
    assert window_range(curve, "eps_ref", 150.0, 200.0) < 5e-3
    # Symmetric setting: both classes are equally well served.
    assert math.isclose(
        _at(curve, "eps_plus", 200.0), _at(curve, "eps_minus", 200.0), abs_tol=1e-6
    )


def test_finite_size_deviation_shrinks() -> None:
    """Monte Carlo means move closer to the ODE as N grows."""
    scenario = dataclasses.replace(
        canned_scenario("stationary"), alpha_max=50.0, mc_runs=20, workers=WORKERS
    )
    dims = [100, 300, 1000]
    sweep = finite_size_sweep(scenario, dims)
    for key in ("r_pp", "q_pp"):
        deviations = [sweep[n].columns[key].mean_abs for n in dims]
        assert all(np.diff(deviations) < 0), (key, deviations)
