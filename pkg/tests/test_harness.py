"""Tests for the experiment harness."""

from __future__ import annotations

import dataclasses
import pickle

import numpy as np
import pytest

from lvq_drift.const import COLUMNS
from lvq_drift.exceptions import (
    DisjointGridError,
    InvalidValueError,
    ScenarioRunError,
    StrideError,
)
from lvq_drift.harness import (
    CURVE_COLUMNS,
    compare_curves,
    finite_size_sweep,
    mc_run,
    reduce_runs,
    run_scenario,
    self_averaging_study,
    with_dim,
)
from lvq_drift.models import LearningCurve


def _curve(alpha, std: float | None = None, runs: int = 1, **columns) -> LearningCurve:
    alpha = np.asarray(alpha, dtype=float)
    values = {key: np.full_like(alpha, 0.25) for key in COLUMNS[1:]}
    values.update({key: np.asarray(v, dtype=float) for key, v in columns.items()})
    return LearningCurve(
        alpha=alpha,
        values=values,
        source="test",
        std=None if std is None else {key: np.full_like(alpha, std) for key in COLUMNS[1:]},
        runs=runs,
    )


def test_curve_columns_follow_table_order() -> None:
    """Column descriptions cover every table column after alpha, in order."""
    assert tuple(d.key for d in CURVE_COLUMNS) == COLUMNS[1:]


def test_run_scenario_both_engines(make_scenario) -> None:
    """Both engines share one grid and are compared."""
    result = run_scenario(make_scenario())
    assert result.ode is not None
    assert result.mc is not None
    np.testing.assert_array_equal(result.ode.alpha, result.mc.alpha)
    assert len(result.ode) == 11
    assert result.mc.runs == 3
    assert result.mc.std is not None
    assert result.comparison is not None
    assert result.comparison.points == 11
    assert result.diagnostics["ode_steps"] == 100
    assert result.diagnostics["mc_runs"] == 3


def test_run_scenario_off_stride_alpha_max(make_scenario) -> None:
    """Both curves end at alpha_max when it is not a multiple of the stride."""
    result = run_scenario(make_scenario(alpha_max=5.2))
    for curve in (result.ode, result.mc):
        assert curve is not None
        assert len(curve) == 12
        assert curve.alpha[-1] == pytest.approx(5.2)
    assert result.diagnostics["ode_steps"] == 104


def test_coinciding_start_counted_in_diagnostics(make_scenario) -> None:
    """Zero-norm starts coincide at alpha = 0 in every run and nowhere else."""
    result = run_scenario(make_scenario(engine="mc", q_hat=0.0, mc_runs=2))
    assert result.diagnostics["mc_degenerate_points"] == 2
    assert run_scenario(make_scenario(engine="mc")).diagnostics["mc_degenerate_points"] == 0


def test_run_scenario_initial_point(make_scenario) -> None:
    """At alpha = 0 the ODE starts from random prototypes of norm q_hat."""
    result = run_scenario(make_scenario(engine="ode"))
    assert result.mc is None
    assert result.comparison is None
    assert result.ode is not None
    assert result.ode.values["q_pp"][0] == pytest.approx(1e-4)
    assert result.ode.values["eps_ref"][0] == pytest.approx(0.5)


def test_mc_reduction_in_run_order(make_scenario) -> None:
    """The mean curve is the run-index-ordered mean of the per-run tables."""
    scenario = make_scenario(engine="mc")
    tables = np.stack([mc_run(scenario, k) for k in range(scenario.mc_runs)])
    curve = reduce_runs(np.linspace(0.0, 5.0, 11), tables)
    result = run_scenario(scenario)
    assert result.mc is not None
    for i, key in enumerate(COLUMNS[1:]):
        np.testing.assert_array_equal(result.mc.values[key], curve.values[key])
        np.testing.assert_allclose(
            result.mc.values[key], tables[:, :, i].mean(axis=0), rtol=1e-14
        )


def test_worker_count_does_not_change_results(make_scenario) -> None:
    """Process-parallel runs reduce to bit-identical curves."""
    serial = run_scenario(make_scenario(engine="mc", mc_runs=4))
    parallel = run_scenario(make_scenario(engine="mc", mc_runs=4, workers=2))
    assert serial.mc is not None
    assert parallel.mc is not None
    for key in COLUMNS[1:]:
        np.testing.assert_array_equal(serial.mc.values[key], parallel.mc.values[key])


def test_single_run_has_zero_std(make_scenario) -> None:
    """One run has no spread."""
    result = run_scenario(make_scenario(engine="mc", mc_runs=1))
    assert result.mc is not None
    assert result.mc.std is not None
    assert not result.mc.std["eps_ref"].any()


def test_empirical_error_mode(make_scenario) -> None:
    """Test-set errors stay in [0, 1] and near the analytic ones."""
    analytic = run_scenario(make_scenario(engine="mc"))
    empirical = run_scenario(make_scenario(engine="mc", error_mode="empirical", n_test=20_000))
    assert analytic.mc is not None
    assert empirical.mc is not None
    np.testing.assert_array_equal(analytic.mc.values["q_pp"], empirical.mc.values["q_pp"])
    diff = np.abs(analytic.mc.values["eps_ref"] - empirical.mc.values["eps_ref"])
    assert diff.max() < 0.02


def test_engine_failure_is_wrapped(make_scenario) -> None:
    """Engine errors carry the scenario and engine and keep their cause."""
    with pytest.raises(ScenarioRunError) as err:
        run_scenario(make_scenario(engine="mc", dim=3))
    assert isinstance(err.value.__cause__, StrideError)
    assert err.value.translation_placeholders["engine"] == "mc"
    assert "test" in str(err.value)


def test_worker_errors_keep_their_message(make_scenario) -> None:
    """Errors raised in worker processes arrive intact."""
    with pytest.raises(ScenarioRunError) as err:
        run_scenario(make_scenario(engine="mc", dim=3, workers=2))
    assert isinstance(err.value.__cause__, StrideError)
    assert "dim=3" in str(err.value.__cause__)
    restored = pickle.loads(pickle.dumps(InvalidValueError("n_test must be positive")))
    assert isinstance(restored, InvalidValueError)
    assert str(restored) == "Invalid value: n_test must be positive"


def test_compare_curve_with_itself() -> None:
    """A curve does not deviate from itself."""
    curve = _curve([0.0, 1.0, 2.0], eps_plus=[0.1, 0.2, 0.3])
    report = compare_curves(curve, curve)
    assert report.points == 3
    assert all(dev.max_abs == 0.0 for dev in report.columns.values())
    assert report.columns["eps_plus"].max_abs_z is None


def test_compare_interpolates_on_overlap() -> None:
    """b is interpolated onto a's grid inside the common range."""
    a = _curve([0.0, 1.0, 2.0, 3.0], eps_plus=[0.0, 0.1, 0.2, 0.3])
    b = _curve([0.5, 2.5], eps_plus=[0.05, 0.45])
    report = compare_curves(a, b)
    assert report.alpha_min == 1.0
    assert report.alpha_max == 2.0
    assert report.points == 2
    # b at 1.0 and 2.0 is 0.15 and 0.35.
    assert report.columns["eps_plus"].max_abs == pytest.approx(0.15)
    assert report.columns["eps_plus"].mean_abs == pytest.approx(0.1)


def test_compare_z_scores() -> None:
    """z divides the deviation by the standard error of the curve with a std."""
    a = _curve([0.0, 1.0], eps_minus=[0.2, 0.2])
    b = _curve([0.0, 1.0], std=0.1, runs=25, eps_minus=[0.2, 0.26])
    report = compare_curves(a, b)
    assert report.columns["eps_minus"].max_abs_z == pytest.approx(3.0)
    assert report.columns["eps_plus"].max_abs_z == 0.0


def test_compare_disjoint_grids() -> None:
    """Curves without common alpha range cannot be compared."""
    with pytest.raises(DisjointGridError):
        compare_curves(_curve([0.0, 1.0]), _curve([2.0, 3.0]))


def test_learning_curve_validation() -> None:
    """Grids must increase and errors stay in [0, 1]."""
    with pytest.raises(ValueError, match="increasing"):
        _curve([0.0, 0.0])
    with pytest.raises(ValueError, match="eps_plus"):
        _curve([0.0, 1.0], eps_plus=[0.1, 1.5])


def test_rotated_basis_is_statistically_equivalent(make_scenario) -> None:
    """A random orthonormal basis leaves Monte Carlo curves unchanged within noise."""
    standard = run_scenario(make_scenario(engine="mc", mc_runs=20))
    rotated = run_scenario(make_scenario(engine="mc", mc_runs=20, basis="random"))
    assert standard.mc is not None
    assert rotated.mc is not None
    report = compare_curves(standard.mc, rotated.mc)
    for key in ("eps_ref", "r_pp", "r_mm", "q_pp"):
        z = report.columns[key].max_abs_z
        assert z is not None
        assert z < 4.5


def test_with_dim(make_scenario) -> None:
    """Changing the dimension rebuilds the model and keeps everything else."""
    scenario = make_scenario()
    bigger = with_dim(scenario, 40)
    assert bigger.dim == 40
    assert bigger.model.b_plus.shape == (40,)
    assert dataclasses.replace(bigger, model=scenario.model) == scenario


def test_self_averaging_study(make_scenario) -> None:
    """Fluctuations are reported per dimension and column."""
    study = self_averaging_study(make_scenario(), [20, 40], alpha=1.0, runs=4)
    assert set(study) == {20, 40}
    assert set(study[20]) == set(COLUMNS[1:])
    assert study[40]["r_pp"] > 0


def test_finite_size_sweep(make_scenario) -> None:
    """One deviation report per dimension."""
    sweep = finite_size_sweep(make_scenario(engine="ode", mc_runs=2), [20, 40])
    assert set(sweep) == {20, 40}
    assert sweep[40].points == 11
